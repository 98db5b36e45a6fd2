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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "detox/attributes.hpp"

namespace detox {

struct LexiconEntry {
  std::vector<std::string> phrase_tokens;  // lowercase, tokenized
  double weight = 0.8;                     // in (0, 1]
  std::vector<Attribute> attributes;
};

// Phrase list with per-phrase weights and attribute routing.
//
// File format, one phrase per line:
//   phrase  [<TAB> weight  [<TAB> attr,attr,...]]
// Defaults: weight 0.8, attributes toxicity,profanity. '#' lines and blank
// lines are skipped. Entries are canonically sorted on load, so scores do
// not depend on file order.
class Lexicon {
 public:
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon from_lines(const std::vector<std::string>& lines);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Content digest over the canonical entry order; identifies the scorer.
  const std::string& digest() const { return digest_; }

 private:
  std::vector<LexiconEntry> entries_;
  std::string digest_;
};

// Deterministic multi-attribute score:
//   score(attr) = 1 - prod over matched phrases (1 - weight * density)
//   density    = min(1, 4 * matches / tokens)
// Matching is on token boundaries, case-insensitive. Text with no match
// scores 0 everywhere.
AttributeScores score_lexicon(std::string_view text, const Lexicon& lexicon);

// True iff any lexicon phrase occurs on token boundaries.
bool contains_profanity(std::string_view text, const Lexicon& lexicon);

// Persistent (text digest, scorer id, scorer version) -> scores map backed
// by an append-only JSONL file. Reload tolerates a partial trailing record.
// Concurrent readers share the map; writes are serialized.
class ScoreCache {
 public:
  explicit ScoreCache(std::filesystem::path file);

  std::optional<AttributeScores> lookup(const std::string& text_digest,
                                        const std::string& scorer_id,
                                        const std::string& scorer_version) const;
  void insert(const std::string& text_digest, const std::string& scorer_id,
              const std::string& scorer_version, const AttributeScores& scores);

  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  std::filesystem::path file_;
  std::map<Key, AttributeScores> entries_;
  mutable std::shared_mutex mutex_;
};

}  // namespace detox
