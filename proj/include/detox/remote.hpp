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

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detox/attributes.hpp"
#include "detox/toxicity.hpp"

namespace detox {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  double backoff_multiplier = 2.0;
};

// Generic client config for a Perspective-like scoring service. The
// request/response field mapping is configurable so the client is not tied
// to one provider's schema.
struct RemoteScorerConfig {
  std::string endpoint;                 // e.g. "http://host:8080/v1/score"
  std::string credential_env = "DETOX_API_KEY";  // env var holding the key
  std::string credential_query_param = "key";    // appended as ?key=...
  std::string credential_header;        // used instead when non-empty
  double requests_per_second = 1.0;
  RetryPolicy retry;
  std::string text_field = "text";      // request body: {text_field: <text>}
  // JSON pointer into the response per attribute; default "/<name>".
  std::map<Attribute, std::string> response_paths;
  std::string scorer_version = "1";

  void validate() const;  // throws std::invalid_argument
};

// Enforces a minimum spacing of 1/rps between acquisitions, shared across
// threads.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_allowed_;
  std::mutex mutex_;
};

class RemoteScoreError : public std::runtime_error {
 public:
  RemoteScoreError(int status, std::string body, const std::string& what)
      : std::runtime_error(what), status_(status), body_(std::move(body)) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

// HTTP scorer with persistent caching and rate limiting. Construction
// resolves the credential from the environment and fails before any
// request when it is missing. Transient failures (connection errors, 429,
// 5xx) are retried per policy; other HTTP errors raise RemoteScoreError
// with status and body.
class RemoteScorer {
 public:
  RemoteScorer(RemoteScorerConfig config, ScoreCache* cache = nullptr);
  ~RemoteScorer();

  AttributeScores score(std::string_view text);
  const std::string& scorer_id() const { return scorer_id_; }

 private:
  struct Impl;
  RemoteScorerConfig config_;
  ScoreCache* cache_;
  std::string scorer_id_;
  RateLimiter limiter_;
  std::unique_ptr<Impl> impl_;

  AttributeScores score_uncached(std::string_view text);
};

struct BatchItemResult {
  std::optional<AttributeScores> scores;
  std::string error;  // empty on success
};

// Order-preserving batch scoring; items that fail are reported in place
// without aborting the rest. workers > 1 runs items concurrently (the
// scorer callable must be thread-safe, as RemoteScorer::score is).
std::vector<BatchItemResult> score_batch(
    const std::vector<std::string>& texts,
    const std::function<AttributeScores(std::string_view)>& scorer,
    int workers = 1);

}  // namespace detox
