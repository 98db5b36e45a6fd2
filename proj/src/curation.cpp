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

#include "detox/curation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "detox/io.hpp"
#include "detox/rng.hpp"
#include "detox/tokenize.hpp"

namespace detox {

namespace {

constexpr double kNormalizationTolerance = 1e-6;
constexpr double kLogFloor = 1e-300;

const char* kFieldSuffix[3] = {"_no", "_weak", "_strong"};
const char* kTypePrefix[3] = {"er", "ip", "ex"};

}  // namespace

std::string_view empathy_type_name(EmpathyType t) {
  switch (t) {
    case EmpathyType::kEr: return "ER";
    case EmpathyType::kIp: return "IP";
    case EmpathyType::kEx: return "EX";
  }
  return "?";
}

std::optional<EmpathyType> empathy_type_from_name(std::string_view name) {
  if (name == "ER" || name == "er") return EmpathyType::kEr;
  if (name == "IP" || name == "ip") return EmpathyType::kIp;
  if (name == "EX" || name == "ex") return EmpathyType::kEx;
  return std::nullopt;
}

ScoreRecordFile parse_score_records(const std::vector<std::string>& lines) {
  std::vector<EmpathyScoreRecord> records;
  std::vector<std::string> problems;
  std::unordered_map<std::string, std::size_t> id_lines;

  std::size_t line_no = 0;
  for (const auto& line : lines) {
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
      continue;
    }

    EmpathyScoreRecord out;
    bool ok = true;
    if (!rec.contains("id") || !rec["id"].is_string() ||
        !rec.contains("text") || !rec["text"].is_string()) {
      problems.push_back("line " + std::to_string(line_no) +
                         ": missing id or text");
      continue;
    }
    out.id = rec["id"].get<std::string>();
    out.text = rec["text"].get<std::string>();

    for (std::size_t t = 0; t < 3 && ok; ++t) {
      double vals[3];
      for (std::size_t c = 0; c < 3; ++c) {
        std::string field = std::string(kTypePrefix[t]) + kFieldSuffix[c];
        if (!rec.contains(field) || !rec[field].is_number()) {
          problems.push_back("line " + std::to_string(line_no) +
                             ": missing numeric field '" + field + "'");
          ok = false;
          break;
        }
        vals[c] = rec[field].get<double>();
      }
      if (!ok) break;

      bool all_nonpositive =
          vals[0] <= 0.0 && vals[1] <= 0.0 && vals[2] <= 0.0;
      double exp_sum = std::exp(vals[0]) + std::exp(vals[1]) + std::exp(vals[2]);
      bool in_unit = vals[0] >= 0.0 && vals[0] <= 1.0 && vals[1] >= 0.0 &&
                     vals[1] <= 1.0 && vals[2] >= 0.0 && vals[2] <= 1.0;
      double raw_sum = vals[0] + vals[1] + vals[2];

      ClassLogLikelihoods lls;
      if (all_nonpositive &&
          std::abs(exp_sum - 1.0) < kNormalizationTolerance) {
        lls = {vals[0], vals[1], vals[2]};
      } else if (in_unit &&
                 std::abs(raw_sum - 1.0) < kNormalizationTolerance) {
        // Probabilities on ingest; converted to logs.
        lls = {std::log(std::max(vals[0], kLogFloor)),
               std::log(std::max(vals[1], kLogFloor)),
               std::log(std::max(vals[2], kLogFloor))};
      } else {
        problems.push_back(
            "line " + std::to_string(line_no) + " (id '" + out.id +
            "'): " + kTypePrefix[t] +
            " class scores are not normalized (|sum - 1| >= 1e-6)");
        ok = false;
        break;
      }
      out.per_type[t] = lls;
    }
    if (!ok) continue;

    auto [it, inserted] = id_lines.try_emplace(out.id, line_no);
    if (!inserted) {
      problems.push_back("line " + std::to_string(line_no) + ": duplicate id '" +
                         out.id + "' (first seen on line " +
                         std::to_string(it->second) + ")");
      continue;
    }
    records.push_back(std::move(out));
  }

  if (!problems.empty()) {
    std::string msg = "invalid score records:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }

  // The source data is split by lines of text; identical lines are one
  // sample. Keep the first occurrence, count the rest.
  ScoreRecordFile out;
  std::unordered_set<std::string> seen_texts;
  for (auto& rec : records) {
    if (!seen_texts.insert(rec.text).second) {
      ++out.duplicate_texts_dropped;
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

ScoreRecordFile load_score_records(const std::filesystem::path& path) {
  return parse_score_records(read_lines(path));
}

void save_score_records(const std::filesystem::path& path,
                        std::span<const EmpathyScoreRecord> records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    nlohmann::json row;
    row["id"] = rec.id;
    row["text"] = rec.text;
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& lls = rec.per_type[t];
      row[std::string(kTypePrefix[t]) + "_no"] = lls.ll_no;
      row[std::string(kTypePrefix[t]) + "_weak"] = lls.ll_weak;
      row[std::string(kTypePrefix[t]) + "_strong"] = lls.ll_strong;
    }
    out << row.dump() << "\n";
  }
  atomic_write_file(path, out.str());
}

std::string SelectionSpec::to_string() const {
  std::ostringstream out;
  switch (strategy) {
    case SelectionStrategy::kMinNo:
      out << "min_no:" << empathy_type_name(*type);
      break;
    case SelectionStrategy::kCombinedThirds:
      out << "combined_thirds";
      break;
    case SelectionStrategy::kRandom:
      out << "random";
      break;
    case SelectionStrategy::kMaxStrong:
      out << "max_strong:" << empathy_type_name(*type);
      break;
  }
  out << " size=" << size;
  if (strategy == SelectionStrategy::kRandom) out << " seed=" << seed;
  return out.str();
}

SelectionSpec SelectionSpec::parse(std::string_view strategy_text,
                                   std::size_t size, std::uint64_t seed) {
  SelectionSpec spec;
  spec.size = size;
  spec.seed = seed;

  std::string text(strategy_text);
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);

  auto need_type = [&](SelectionStrategy s) {
    spec.strategy = s;
    auto type = empathy_type_from_name(tail);
    if (!type) {
      throw std::invalid_argument("strategy '" + head +
                                  "' needs an empathy type, e.g. '" + head +
                                  ":EX'");
    }
    spec.type = *type;
  };

  if (head == "min_no") {
    need_type(SelectionStrategy::kMinNo);
  } else if (head == "max_strong") {
    need_type(SelectionStrategy::kMaxStrong);
  } else if (head == "combined_thirds") {
    spec.strategy = SelectionStrategy::kCombinedThirds;
  } else if (head == "random") {
    spec.strategy = SelectionStrategy::kRandom;
  } else {
    throw std::invalid_argument("unknown selection strategy: " + text);
  }
  return spec;
}

namespace {

CuratedSubset make_subset(SelectionSpec spec) {
  CuratedSubset subset;
  subset.spec = spec;
  subset.provenance.spec = spec.to_string();
  subset.provenance.tool_version = kToolVersion;
  return subset;
}

// Indices of `records` ranked by `key` ascending, ties by id ascending.
std::vector<std::size_t> ranked_indices(
    std::span<const EmpathyScoreRecord> records,
    const std::function<double(const EmpathyScoreRecord&)>& key) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ka = key(records[a]);
    double kb = key(records[b]);
    if (ka != kb) return ka < kb;
    return records[a].id < records[b].id;
  });
  return order;
}

void warn_if_short(CuratedSubset& subset, std::size_t k, std::size_t n) {
  if (k > n) {
    subset.warnings.push_back("requested " + std::to_string(k) +
                              " records but only " + std::to_string(n) +
                              " available; returning all");
  }
}

}  // namespace

CuratedSubset select_min_no(std::span<const EmpathyScoreRecord> records,
                            EmpathyType type, std::size_t k) {
  if (k < 1) throw std::invalid_argument("subset size must be >= 1");
  SelectionSpec spec{SelectionStrategy::kMinNo, type, k, 0};
  CuratedSubset subset = make_subset(spec);
  warn_if_short(subset, k, records.size());

  auto order = ranked_indices(
      records, [type](const EmpathyScoreRecord& r) { return r.type(type).ll_no; });
  std::size_t take = std::min(k, records.size());
  for (std::size_t i = 0; i < take; ++i) {
    subset.ids.push_back(records[order[i]].id);
  }
  return subset;
}

CuratedSubset select_max_strong(std::span<const EmpathyScoreRecord> records,
                                EmpathyType type, std::size_t k) {
  if (k < 1) throw std::invalid_argument("subset size must be >= 1");
  SelectionSpec spec{SelectionStrategy::kMaxStrong, type, k, 0};
  CuratedSubset subset = make_subset(spec);
  warn_if_short(subset, k, records.size());

  auto order = ranked_indices(records, [type](const EmpathyScoreRecord& r) {
    return -r.type(type).ll_strong;
  });
  std::size_t take = std::min(k, records.size());
  for (std::size_t i = 0; i < take; ++i) {
    subset.ids.push_back(records[order[i]].id);
  }
  return subset;
}

CuratedSubset select_combined(std::span<const EmpathyScoreRecord> records,
                              std::size_t k) {
  if (k < 3) throw std::invalid_argument("combined_thirds needs size >= 3");
  SelectionSpec spec{SelectionStrategy::kCombinedThirds, std::nullopt, k, 0};
  CuratedSubset subset = make_subset(spec);
  warn_if_short(subset, k, records.size());

  // Quotas per type, processed EX, IP, ER; the remainder goes to the
  // earlier types in that order.
  const std::size_t base = k / 3;
  const std::size_t rem = k % 3;
  const std::array<std::pair<EmpathyType, std::size_t>, 3> plan = {{
      {EmpathyType::kEx, base + (rem >= 1 ? 1 : 0)},
      {EmpathyType::kIp, base + (rem >= 2 ? 1 : 0)},
      {EmpathyType::kEr, base},
  }};

  std::unordered_set<std::size_t> selected;
  for (const auto& [type, quota] : plan) {
    auto order = ranked_indices(records, [type](const EmpathyScoreRecord& r) {
      return r.type(type).ll_no;
    });
    std::size_t taken = 0;
    for (std::size_t idx : order) {
      if (taken == quota) break;
      if (!selected.insert(idx).second) continue;  // earlier type took it
      subset.ids.push_back(records[idx].id);
      ++taken;
    }
  }
  return subset;
}

CuratedSubset select_random(std::span<const EmpathyScoreRecord> records,
                            std::size_t k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("subset size must be >= 1");
  SelectionSpec spec{SelectionStrategy::kRandom, std::nullopt, k, seed};
  CuratedSubset subset = make_subset(spec);
  warn_if_short(subset, k, records.size());

  const std::size_t n = records.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  RngEngine rng(seed);
  std::size_t take = std::min(k, n);
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(
                            rng, static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
    subset.ids.push_back(records[idx[i]].id);
  }
  return subset;
}

CuratedSubset select(std::span<const EmpathyScoreRecord> records,
                     const SelectionSpec& spec) {
  switch (spec.strategy) {
    case SelectionStrategy::kMinNo:
      return select_min_no(records, *spec.type, spec.size);
    case SelectionStrategy::kCombinedThirds:
      return select_combined(records, spec.size);
    case SelectionStrategy::kRandom:
      return select_random(records, spec.size, spec.seed);
    case SelectionStrategy::kMaxStrong:
      return select_max_strong(records, *spec.type, spec.size);
  }
  throw std::logic_error("unreachable");
}

ClassDistribution class_distribution(
    std::span<const EmpathyScoreRecord> records) {
  ClassDistribution dist;
  for (const auto& rec : records) {
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& lls = rec.per_type[t];
      const double vals[3] = {lls.ll_no, lls.ll_weak, lls.ll_strong};
      std::size_t best = 0;  // ties resolve no > weak > strong
      for (std::size_t c = 1; c < 3; ++c) {
        if (vals[c] > vals[best]) best = c;
      }
      ++dist.counts[t][best];
    }
  }
  return dist;
}

std::vector<std::string> export_subset_corpus(
    std::span<const EmpathyScoreRecord> records, const CuratedSubset& subset) {
  std::unordered_map<std::string_view, const EmpathyScoreRecord*> by_id;
  for (const auto& rec : records) {
    by_id.emplace(rec.id, &rec);
  }
  std::vector<std::string> lines;
  lines.reserve(subset.ids.size());
  for (const auto& id : subset.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw std::invalid_argument("subset id not found in records: " + id);
    }
    lines.push_back(it->second->text);
  }
  return lines;
}

std::vector<EmpathyScoreRecord> synthesize_score_records(
    const std::vector<std::string>& corpus_lines,
    const std::array<std::vector<std::string>, 3>& keywords_per_type,
    std::uint64_t seed) {
  std::array<std::unordered_set<std::string>, 3> keyword_sets;
  for (std::size_t t = 0; t < 3; ++t) {
    keyword_sets[t].insert(keywords_per_type[t].begin(),
                           keywords_per_type[t].end());
  }

  std::vector<EmpathyScoreRecord> records;
  records.reserve(corpus_lines.size());
  for (std::size_t i = 0; i < corpus_lines.size(); ++i) {
    const std::string& line = corpus_lines[i];
    std::vector<std::string> tokens = tokenize(line);
    if (tokens.empty()) continue;

    EmpathyScoreRecord rec;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "r%06zu", i);
    rec.id = idbuf;
    rec.text = line;

    for (std::size_t t = 0; t < 3; ++t) {
      std::size_t matches = 0;
      for (const auto& tok : tokens) {
        if (keyword_sets[t].count(tok) > 0) ++matches;
      }
      double density = static_cast<double>(matches) /
                       static_cast<double>(tokens.size());
      double strength = std::min(1.0, 4.0 * density);

      RngEngine rng(derive_seed(seed, i, t));
      double u1 = uniform_double(rng);
      double u2 = uniform_double(rng);
      double u3 = uniform_double(rng);

      double raw_strong = 0.05 + 0.85 * strength * (0.8 + 0.4 * u1);
      double raw_weak = 0.10 + 0.25 * strength * (0.8 + 0.4 * u2);
      double raw_no = 0.02 + (1.0 - 0.9 * strength) * (0.9 + 0.2 * u3);
      double total = raw_strong + raw_weak + raw_no;

      rec.per_type[t] = {std::log(raw_no / total),
                         std::log(raw_weak / total),
                         std::log(raw_strong / total)};
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace detox
