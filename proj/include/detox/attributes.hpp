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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace detox {

// The eight scored attributes, each a probability-like value in [0, 1].
enum class Attribute : std::size_t {
  kToxicity = 0,
  kSevereToxicity,
  kIdentityAttack,
  kInsult,
  kProfanity,
  kThreat,
  kSexuallyExplicit,
  kFlirtation,
};

inline constexpr std::size_t kNumAttributes = 8;

inline constexpr std::array<Attribute, kNumAttributes> kAllAttributes = {
    Attribute::kToxicity,         Attribute::kSevereToxicity,
    Attribute::kIdentityAttack,   Attribute::kInsult,
    Attribute::kProfanity,        Attribute::kThreat,
    Attribute::kSexuallyExplicit, Attribute::kFlirtation,
};

constexpr std::string_view attribute_name(Attribute a) {
  constexpr std::array<std::string_view, kNumAttributes> names = {
      "toxicity", "severe_toxicity",  "identity_attack",
      "insult",   "profanity",        "threat",
      "sexually_explicit", "flirtation",
  };
  return names[static_cast<std::size_t>(a)];
}

std::optional<Attribute> attribute_from_name(std::string_view name);

struct AttributeScores {
  std::array<double, kNumAttributes> values{};

  double& operator[](Attribute a) {
    return values[static_cast<std::size_t>(a)];
  }
  double operator[](Attribute a) const {
    return values[static_cast<std::size_t>(a)];
  }
  double toxicity() const { return (*this)[Attribute::kToxicity]; }

  bool operator==(const AttributeScores&) const = default;
};

}  // namespace detox
