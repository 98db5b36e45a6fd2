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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace detox {

// EPITOME communication mechanisms: emotional reactions, interpretations,
// explorations.
enum class EmpathyType : std::size_t { kEr = 0, kIp = 1, kEx = 2 };

inline constexpr std::array<EmpathyType, 3> kAllEmpathyTypes = {
    EmpathyType::kEr, EmpathyType::kIp, EmpathyType::kEx};

std::string_view empathy_type_name(EmpathyType t);      // "ER" / "IP" / "EX"
std::optional<EmpathyType> empathy_type_from_name(std::string_view name);

// Class log-likelihoods for one empathy type; exp of the three sums to 1.
struct ClassLogLikelihoods {
  double ll_no = 0.0;
  double ll_weak = 0.0;
  double ll_strong = 0.0;
};

struct EmpathyScoreRecord {
  std::string id;
  std::string text;
  std::array<ClassLogLikelihoods, 3> per_type;  // indexed by EmpathyType

  const ClassLogLikelihoods& type(EmpathyType t) const {
    return per_type[static_cast<std::size_t>(t)];
  }
  ClassLogLikelihoods& type(EmpathyType t) {
    return per_type[static_cast<std::size_t>(t)];
  }
};

struct ScoreRecordFile {
  std::vector<EmpathyScoreRecord> records;
  std::size_t duplicate_texts_dropped = 0;
};

// JSONL, one record per line with fields
//   {id, text, er_no, er_weak, er_strong, ip_no, ip_weak, ip_strong,
//    ex_no, ex_weak, ex_strong}.
// Values may be log-likelihoods (<= 0, exps summing to 1) or probabilities
// (in [0,1], summing to 1); probabilities are converted to logs on ingest.
// Throws with line numbers for malformed rows, normalization violations
// beyond 1e-6, and duplicate ids. Records with byte-identical text after
// the first are dropped and counted.
ScoreRecordFile load_score_records(const std::filesystem::path& path);
ScoreRecordFile parse_score_records(const std::vector<std::string>& lines);
void save_score_records(const std::filesystem::path& path,
                        std::span<const EmpathyScoreRecord> records);

enum class SelectionStrategy { kMinNo, kCombinedThirds, kRandom, kMaxStrong };

// Parsed form of the CLI strategy string:
//   "min_no:EX" | "combined_thirds" | "random" | "max_strong:IP".
struct SelectionSpec {
  SelectionStrategy strategy = SelectionStrategy::kMinNo;
  std::optional<EmpathyType> type;  // required for min_no / max_strong
  std::size_t size = 1;
  std::uint64_t seed = 0;           // used by random

  std::string to_string() const;
  static SelectionSpec parse(std::string_view strategy_text, std::size_t size,
                             std::uint64_t seed);
};

struct SubsetProvenance {
  std::string input_digest;  // filled by callers that know the source file
  std::string spec;
  std::string tool_version;
};

struct CuratedSubset {
  SelectionSpec spec;
  std::vector<std::string> ids;  // selection order, no duplicates
  std::vector<std::string> warnings;
  SubsetProvenance provenance;
};

// k records with the smallest ll_no for the given type; ties broken by
// ascending record id. k > corpus size yields all records plus a warning.
CuratedSubset select_min_no(std::span<const EmpathyScoreRecord> records,
                            EmpathyType type, std::size_t k);

// k/3 records per type by min ll_no, processed EX, IP, ER with the
// remainder going to the earlier types; a record already selected is
// skipped and the next-ranked one takes its place. Requires k >= 3.
CuratedSubset select_combined(std::span<const EmpathyScoreRecord> records,
                              std::size_t k);

// Uniform sample without replacement, deterministic for a given seed.
CuratedSubset select_random(std::span<const EmpathyScoreRecord> records,
                            std::size_t k, std::uint64_t seed);

// k records with the largest ll_strong for the given type; ties by id.
CuratedSubset select_max_strong(std::span<const EmpathyScoreRecord> records,
                                EmpathyType type, std::size_t k);

CuratedSubset select(std::span<const EmpathyScoreRecord> records,
                     const SelectionSpec& spec);

// counts[type][cls] with cls 0=no, 1=weak, 2=strong; argmax per record,
// ties resolved in the order no > weak > strong.
struct ClassDistribution {
  std::array<std::array<std::size_t, 3>, 3> counts{};
};

ClassDistribution class_distribution(
    std::span<const EmpathyScoreRecord> records);

// One text line per selected record, in subset order.
std::vector<std::string> export_subset_corpus(
    std::span<const EmpathyScoreRecord> records, const CuratedSubset& subset);

// Deterministic stand-in scores for pipeline testing: keyword density per
// type drives the class probabilities, with seeded jitter; outputs are
// normalized log-likelihoods.
std::vector<EmpathyScoreRecord> synthesize_score_records(
    const std::vector<std::string>& corpus_lines,
    const std::array<std::vector<std::string>, 3>& keywords_per_type,
    std::uint64_t seed);

}  // namespace detox
