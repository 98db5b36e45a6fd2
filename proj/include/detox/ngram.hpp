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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "detox/vocab.hpp"

namespace detox {

// Unnormalized log-scores over the vocabulary; entries are always finite.
using LogitVector = std::vector<double>;

struct NGramParams {
  int order = 3;
  double add_k = 0.1;
  // One weight per order (index 0 = unigram). Empty means uniform.
  // Normalized to sum to 1 at training time.
  std::vector<double> interpolation_weights;
};

// Interpolated add-k n-gram model over a fixed vocabulary.
//
// The conditional for a context mixes add-k estimates of all orders whose
// context suffix was seen in training; the weights of unseen higher orders
// are redistributed proportionally over the surviving ones. A context that
// never occurred therefore gets exactly the distribution of its longest
// seen suffix. Every probability is strictly positive and each returned
// distribution sums to 1.
//
// Contexts shorter than order-1 are BOS-padded on the left; longer ones are
// trimmed to their final order-1 tokens. Trained models are immutable and
// safe for concurrent readers.
class NGramModel {
 public:
  // Throws std::invalid_argument on order < 1, add_k <= 0, bad weights, or
  // a corpus with no in-vocabulary token.
  static NGramModel train(const std::vector<std::string>& corpus_lines,
                          Vocabulary vocab, const NGramParams& params = {});

  // Order-1 model with no counts: exactly 1/|V| for every token.
  static NGramModel uniform(Vocabulary vocab);

  const Vocabulary& vocab() const { return vocab_; }
  int order() const { return order_; }
  double add_k() const { return add_k_; }
  const std::vector<double>& interpolation_weights() const { return weights_; }

  // Next-token distribution given a context; exp of the logits sums to 1
  // within 1e-9.
  std::vector<double> next_token_probs(std::span<const TokenId> context) const;
  LogitVector next_token_logits(std::span<const TokenId> context) const;

  // Sum of per-token conditional log-probs with BOS padding and a terminal
  // EOS, in nats. Throws on an empty sequence.
  double sequence_log_likelihood(std::span<const TokenId> seq) const;

  // exp(-total_ll / total_token_count) with EOS counted per sequence.
  // Throws if no non-empty sequence is given.
  double perplexity(const std::vector<std::vector<TokenId>>& seqs) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static NGramModel load(std::istream& in);
  static NGramModel load(const std::filesystem::path& path);

  bool operator==(const NGramModel& other) const;

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> counts;
  };
  using CountTable = std::map<std::vector<TokenId>, ContextCounts>;

  Vocabulary vocab_;
  int order_ = 1;
  double add_k_ = 0.1;
  std::vector<double> weights_;       // size order_, sums to 1
  std::vector<CountTable> tables_;    // index = context length

  NGramModel() = default;

  std::vector<TokenId> effective_context(std::span<const TokenId> ctx) const;
  std::size_t longest_seen_suffix(const std::vector<TokenId>& ctx) const;
};

}  // namespace detox
