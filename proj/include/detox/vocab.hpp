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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace detox {

using TokenId = std::uint32_t;

// A token sequence plus the text it came from, when known.
struct TokenSequence {
  std::vector<TokenId> ids;
  std::string source_text;
};

// Dense 0-based token ids with fixed reserved slots. Ids are assigned by
// descending corpus frequency, ties broken lexicographically, so rebuilding
// from the same corpus always yields the same mapping.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;

  static constexpr const char* kBosToken = "<s>";
  static constexpr const char* kEosToken = "</s>";
  static constexpr const char* kUnkToken = "<unk>";

  // Builds from corpus lines; tokens occurring fewer than min_count times
  // map to UNK. Throws std::invalid_argument on an empty corpus.
  static Vocabulary build(const std::vector<std::string>& corpus_lines,
                          std::size_t min_count = 1);

  Vocabulary() = default;

  std::size_t size() const { return tokens_.size(); }
  TokenId id_of(std::string_view token) const;  // UNK for unknown tokens
  const std::string& token_of(TokenId id) const;
  bool contains(std::string_view token) const;

  // tokenize + map to ids.
  std::vector<TokenId> encode(std::string_view text) const;
  // Inverse: renders tokens; EOS is dropped (it terminates, it is not text).
  std::string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;

  void add_token(std::string token);
};

}  // namespace detox
