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

#include "detox/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace detox {

void EnsembleConfig::validate() const {
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be finite");
  }
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) {
    throw std::invalid_argument("nucleus_p must be in (0, 1]");
  }
  if (max_new_tokens < 1) {
    throw std::invalid_argument("max_new_tokens must be >= 1");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  if (num_continuations < 1) {
    throw std::invalid_argument("num_continuations must be >= 1");
  }
}

std::vector<double> combine_logits(std::span<const double> z,
                                   std::span<const double> z_plus,
                                   std::span<const double> z_minus,
                                   double alpha) {
  const std::size_t n = z.size();
  if (z_plus.size() != n || z_minus.size() != n) {
    throw std::invalid_argument("combine_logits: length mismatch");
  }
  if (n == 0) {
    throw std::invalid_argument("combine_logits: empty logit vectors");
  }

  std::vector<double> combined(n);
  double max_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double v = z[i] + alpha * (z_plus[i] - z_minus[i]);
    if (!std::isfinite(v)) {
      throw std::invalid_argument("combine_logits: non-finite logit");
    }
    combined[i] = v;
    max_val = std::max(max_val, v);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    combined[i] = std::exp(combined[i] - max_val);
    sum += combined[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    combined[i] /= sum;
  }
  return combined;
}

std::vector<double> apply_temperature(std::vector<double> probs,
                                      double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  if (temperature == 1.0) return probs;

  const double inv = 1.0 / temperature;
  double sum = 0.0;
  for (double& p : probs) {
    p = p > 0.0 ? std::pow(p, inv) : 0.0;
    sum += p;
  }
  if (sum <= 0.0) {
    throw std::invalid_argument("apply_temperature: degenerate distribution");
  }
  for (double& p : probs) p /= sum;
  return probs;
}

std::vector<double> nucleus_filter(std::vector<double> probs, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("nucleus_p must be in (0, 1]");
  }
  if (p >= 1.0) return probs;

  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });

  double kept_mass = 0.0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    kept_mass += probs[order[i]];
    kept = i + 1;
    if (kept_mass >= p) break;
  }

  std::vector<double> out(probs.size(), 0.0);
  for (std::size_t i = 0; i < kept; ++i) {
    out[order[i]] = probs[order[i]] / kept_mass;
  }
  return out;
}

TokenId sample_token(std::span<const double> probs, RngEngine& rng) {
  double sum = 0.0;
  for (double p : probs) sum += p;
  if (!(sum > 0.0)) {
    throw std::invalid_argument("sample_token: all-zero probability vector");
  }
  const double u = uniform_double(rng) * sum;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cum += probs[i];
    last_positive = i;
    if (u < cum) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last_positive);  // u landed on rounding slack
}

std::string_view termination_name(Termination t) {
  return t == Termination::kEos ? "eos" : "max_length";
}

Termination termination_from_name(std::string_view name) {
  if (name == "eos") return Termination::kEos;
  if (name == "max_length") return Termination::kMaxLength;
  throw std::invalid_argument("unknown termination: " + std::string(name));
}

Continuation generate_seeded(const NGramModel& base, const NGramModel& expert,
                             const NGramModel& anti, std::string_view prompt,
                             const EnsembleConfig& config, std::uint64_t seed) {
  config.validate();
  if (!(expert.vocab() == base.vocab()) || !(anti.vocab() == base.vocab())) {
    throw std::invalid_argument(
        "ensemble models must share one vocabulary");
  }

  RngEngine rng(seed);
  std::vector<TokenId> history = base.vocab().encode(prompt);

  Continuation out;
  out.terminated_by = Termination::kMaxLength;
  for (int step = 0; step < config.max_new_tokens; ++step) {
    LogitVector z = base.next_token_logits(history);
    LogitVector z_plus = expert.next_token_logits(history);
    LogitVector z_minus = anti.next_token_logits(history);

    std::vector<double> probs =
        combine_logits(z, z_plus, z_minus, config.alpha);
    probs = apply_temperature(std::move(probs), config.temperature);
    probs = nucleus_filter(std::move(probs), config.nucleus_p);

    TokenId tok = sample_token(probs, rng);
    out.ids.push_back(tok);
    history.push_back(tok);
    if (tok == Vocabulary::kEos) {
      out.terminated_by = Termination::kEos;
      break;
    }
  }
  out.length = static_cast<int>(out.ids.size());
  out.text = base.vocab().decode(out.ids);
  return out;
}

Continuation generate(const NGramModel& base, const NGramModel& expert,
                      const NGramModel& anti, std::string_view prompt,
                      const EnsembleConfig& config) {
  return generate_seeded(base, expert, anti, prompt, config, config.seed);
}

GenerationSet generate_set(const NGramModel& base, const NGramModel& expert,
                           const NGramModel& anti, std::string_view prompt,
                           std::size_t prompt_index,
                           const EnsembleConfig& config) {
  config.validate();
  GenerationSet set;
  set.prompt = std::string(prompt);
  set.prompt_id = std::to_string(prompt_index);
  set.continuations.reserve(static_cast<std::size_t>(config.num_continuations));
  for (int i = 0; i < config.num_continuations; ++i) {
    std::uint64_t seed = derive_seed(config.seed, prompt_index,
                                     static_cast<std::uint64_t>(i));
    set.continuations.push_back(
        generate_seeded(base, expert, anti, prompt, config, seed));
  }
  return set;
}

}  // namespace detox
