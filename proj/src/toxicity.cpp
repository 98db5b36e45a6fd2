// Copyright 2026 The Detox Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "detox/toxicity.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "detox/io.hpp"
#include "detox/tokenize.hpp"

namespace detox {

std::optional<Attribute> attribute_from_name(std::string_view name) {
  for (Attribute a : kAllAttributes) {
    if (attribute_name(a) == name) return a;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

LexiconEntry parse_entry(const std::string& line, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) -> std::invalid_argument {
    return std::invalid_argument("lexicon line " + std::to_string(line_no) +
                                 ": " + what);
  };

  std::vector<std::string> fields = split_tabs(line);
  LexiconEntry entry;
  entry.phrase_tokens = tokenize(fields[0]);
  if (entry.phrase_tokens.empty()) throw fail("empty phrase");

  if (fields.size() >= 2 && !fields[1].empty()) {
    try {
      entry.weight = std::stod(fields[1]);
    } catch (const std::exception&) {
      throw fail("bad weight '" + fields[1] + "'");
    }
    if (!(entry.weight > 0.0 && entry.weight <= 1.0)) {
      throw fail("weight must be in (0, 1]");
    }
  }

  if (fields.size() >= 3 && !fields[2].empty()) {
    std::istringstream attrs(fields[2]);
    std::string name;
    while (std::getline(attrs, name, ',')) {
      auto attr = attribute_from_name(name);
      if (!attr) throw fail("unknown attribute '" + name + "'");
      entry.attributes.push_back(*attr);
    }
  }
  if (entry.attributes.empty()) {
    entry.attributes = {Attribute::kToxicity, Attribute::kProfanity};
  }
  return entry;
}

}  // namespace

Lexicon Lexicon::from_lines(const std::vector<std::string>& lines) {
  Lexicon lex;
  std::size_t line_no = 0;
  for (const auto& line : lines) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    lex.entries_.push_back(parse_entry(line, line_no));
  }

  // Canonical order: scores and digest are independent of file order.
  std::sort(lex.entries_.begin(), lex.entries_.end(),
            [](const LexiconEntry& a, const LexiconEntry& b) {
              return a.phrase_tokens < b.phrase_tokens;
            });

  std::ostringstream canon;
  for (const auto& e : lex.entries_) {
    canon << detokenize(e.phrase_tokens) << "\t" << e.weight << "\t";
    for (Attribute a : e.attributes) canon << attribute_name(a) << ",";
    canon << "\n";
  }
  lex.digest_ = sha256_hex(canon.str());
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  return from_lines(read_lines(path));
}

namespace {

std::size_t count_matches(const std::vector<std::string>& tokens,
                          const std::vector<std::string>& phrase) {
  if (phrase.size() > tokens.size()) return 0;
  std::size_t matches = 0;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + i)) {
      ++matches;
    }
  }
  return matches;
}

}  // namespace

AttributeScores score_lexicon(std::string_view text, const Lexicon& lexicon) {
  AttributeScores scores;
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) return scores;

  std::array<double, kNumAttributes> complements;
  complements.fill(1.0);

  for (const auto& entry : lexicon.entries()) {
    std::size_t matches = count_matches(tokens, entry.phrase_tokens);
    if (matches == 0) continue;
    double density = std::min(
        1.0, 4.0 * static_cast<double>(matches) /
                 static_cast<double>(tokens.size()));
    double factor = 1.0 - entry.weight * density;
    for (Attribute a : entry.attributes) {
      complements[static_cast<std::size_t>(a)] *= factor;
    }
  }
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    scores.values[i] = 1.0 - complements[i];
  }
  return scores;
}

bool contains_profanity(std::string_view text, const Lexicon& lexicon) {
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) return false;
  for (const auto& entry : lexicon.entries()) {
    if (count_matches(tokens, entry.phrase_tokens) > 0) return true;
  }
  return false;
}

ScoreCache::ScoreCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_, std::ios::binary);
  if (!in) return;  // fresh cache
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      break;  // partial trailing record from an interrupted write
    }
    if (!rec.contains("digest") || !rec.contains("scorer") ||
        !rec.contains("version") || !rec.contains("scores")) {
      break;
    }
    AttributeScores scores;
    for (Attribute a : kAllAttributes) {
      scores[a] = rec["scores"].value(std::string(attribute_name(a)), 0.0);
    }
    entries_[{rec["digest"].get<std::string>(),
              rec["scorer"].get<std::string>(),
              rec["version"].get<std::string>()}] = scores;
  }
}

std::optional<AttributeScores> ScoreCache::lookup(
    const std::string& text_digest, const std::string& scorer_id,
    const std::string& scorer_version) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find({text_digest, scorer_id, scorer_version});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::insert(const std::string& text_digest,
                        const std::string& scorer_id,
                        const std::string& scorer_version,
                        const AttributeScores& scores) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] =
      entries_.try_emplace({text_digest, scorer_id, scorer_version}, scores);
  if (!inserted) return;

  nlohmann::json rec;
  rec["digest"] = text_digest;
  rec["scorer"] = scorer_id;
  rec["version"] = scorer_version;
  nlohmann::json vals;
  for (Attribute a : kAllAttributes) {
    vals[std::string(attribute_name(a))] = scores[a];
  }
  rec["scores"] = vals;

  auto dir = file_.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) {
    throw std::runtime_error("cannot append to cache file: " + file_.string());
  }
  out << rec.dump() << "\n";
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace detox
