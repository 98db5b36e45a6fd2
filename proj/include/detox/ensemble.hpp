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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detox/attributes.hpp"
#include "detox/ngram.hpp"
#include "detox/rng.hpp"

namespace detox {

// Decoding hyperparameters for expert-ensemble generation.
struct EnsembleConfig {
  double alpha = 2.0;          // expert contribution weight
  double nucleus_p = 0.9;      // top-p mass, in (0, 1]
  int max_new_tokens = 20;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int num_continuations = 25;

  void validate() const;  // throws std::invalid_argument
};

// softmax(z + alpha * (z_plus - z_minus)), computed with max subtraction.
// Throws on length mismatch or non-finite input.
std::vector<double> combine_logits(std::span<const double> z,
                                   std::span<const double> z_plus,
                                   std::span<const double> z_minus,
                                   double alpha);

// Renormalized p_i^(1/temperature); temperature == 1 is the identity.
std::vector<double> apply_temperature(std::vector<double> probs,
                                      double temperature);

// Keeps the smallest prefix of tokens, by descending probability, whose
// cumulative mass reaches p; renormalizes it and zeroes the rest.
// p >= 1 returns the input unchanged.
std::vector<double> nucleus_filter(std::vector<double> probs, double p);

// Categorical draw. Throws on an all-zero vector.
TokenId sample_token(std::span<const double> probs, RngEngine& rng);

enum class Termination { kEos, kMaxLength };

std::string_view termination_name(Termination t);
Termination termination_from_name(std::string_view name);

struct Continuation {
  std::vector<TokenId> ids;  // includes EOS when terminated by it
  std::string text;          // detokenized, EOS excluded
  int length = 0;            // ids.size()
  Termination terminated_by = Termination::kMaxLength;
};

// One prompt with its sampled continuations. scores stays empty until a
// scoring pass fills it (aligned with continuations).
struct GenerationSet {
  std::string prompt_id;
  std::string prompt;
  std::vector<Continuation> continuations;
  std::vector<AttributeScores> scores;
};

// Samples one continuation: combine_logits -> temperature -> nucleus ->
// sample, until EOS or max_new_tokens. All three models must share the
// base model's vocabulary.
Continuation generate(const NGramModel& base, const NGramModel& expert,
                      const NGramModel& anti, std::string_view prompt,
                      const EnsembleConfig& config);

// Same, with an explicit RNG seed (generate() uses config.seed).
Continuation generate_seeded(const NGramModel& base, const NGramModel& expert,
                             const NGramModel& anti, std::string_view prompt,
                             const EnsembleConfig& config, std::uint64_t seed);

// num_continuations independent generations; continuation i uses the seed
// derived from (config.seed, prompt_index, i).
GenerationSet generate_set(const NGramModel& base, const NGramModel& expert,
                           const NGramModel& anti, std::string_view prompt,
                           std::size_t prompt_index,
                           const EnsembleConfig& config);

}  // namespace detox
