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

#include "detox/vocab.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "detox/tokenize.hpp"

namespace detox {

void Vocabulary::add_token(std::string token) {
  TokenId id = static_cast<TokenId>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus_lines,
                             std::size_t min_count) {
  std::map<std::string, std::size_t> freq;
  std::size_t total_tokens = 0;
  for (const auto& line : corpus_lines) {
    for (auto& tok : tokenize(line)) {
      ++freq[tok];
      ++total_tokens;
    }
  }
  if (total_tokens == 0) {
    throw std::invalid_argument("empty corpus");
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, count] : freq) {
    if (count >= min_count) kept.emplace_back(tok, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.add_token(kBosToken);
  vocab.add_token(kEosToken);
  vocab.add_token(kUnkToken);
  for (auto& [tok, count] : kept) {
    vocab.add_token(tok);
  }
  return vocab;
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id >= tokens_.size()) {
    throw std::out_of_range("token id out of range: " + std::to_string(id));
  }
  return tokens_[id];
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (auto& tok : tokenize(text)) {
    ids.push_back(id_of(tok));
  }
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (TokenId id : ids) {
    if (id == kEos) continue;
    tokens.push_back(token_of(id));
  }
  return detokenize(tokens);
}

void Vocabulary::save(std::ostream& out) const {
  out << "vocab " << tokens_.size() << "\n";
  for (const auto& tok : tokens_) {
    out << tok << "\n";
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "vocab") {
    throw std::runtime_error("model file corrupt: bad vocab header");
  }
  in.ignore();  // trailing newline
  Vocabulary vocab;
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!std::getline(in, tok)) {
      throw std::runtime_error("model file corrupt: truncated vocab");
    }
    vocab.add_token(tok);
  }
  if (vocab.size() < 3 || vocab.tokens_[kBos] != kBosToken ||
      vocab.tokens_[kEos] != kEosToken || vocab.tokens_[kUnk] != kUnkToken) {
    throw std::runtime_error("model file corrupt: reserved tokens missing");
  }
  return vocab;
}

}  // namespace detox
