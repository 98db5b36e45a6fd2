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

#include "detox/remote.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "detox/io.hpp"

namespace detox {

void RemoteScorerConfig::validate() const {
  if (endpoint.empty()) {
    throw std::invalid_argument("remote scorer: endpoint is required");
  }
  if (endpoint.rfind("http://", 0) != 0) {
    throw std::invalid_argument(
        "remote scorer: endpoint must start with http://");
  }
  if (!(requests_per_second > 0.0)) {
    throw std::invalid_argument("remote scorer: rps must be > 0");
  }
  if (retry.max_attempts < 1) {
    throw std::invalid_argument("remote scorer: max_attempts must be >= 1");
  }
}

RateLimiter::RateLimiter(double requests_per_second)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / requests_per_second))),
      next_allowed_(std::chrono::steady_clock::now()) {
  if (!(requests_per_second > 0.0)) {
    throw std::invalid_argument("rps must be > 0");
  }
}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point wake;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    wake = std::max(now, next_allowed_);
    next_allowed_ = wake + interval_;
  }
  std::this_thread::sleep_until(wake);
}

namespace {

struct ParsedEndpoint {
  std::string host_port;  // "http://host:port"
  std::string path;       // "/v1/score"
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

struct RemoteScorer::Impl {
  httplib::Client client;
  std::string path;
  std::string credential;

  explicit Impl(const ParsedEndpoint& ep) : client(ep.host_port), path(ep.path) {
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
  }
};

RemoteScorer::RemoteScorer(RemoteScorerConfig config, ScoreCache* cache)
    : config_(std::move(config)),
      cache_(cache),
      limiter_(config_.requests_per_second > 0 ? config_.requests_per_second
                                               : 1.0) {
  config_.validate();
  scorer_id_ = "remote:" + config_.endpoint;

  std::string credential;
  if (!config_.credential_env.empty()) {
    const char* value = std::getenv(config_.credential_env.c_str());
    if (value == nullptr || *value == '\0') {
      throw std::invalid_argument(
          "remote scorer: credential environment variable '" +
          config_.credential_env + "' is not set");
    }
    credential = value;
  }

  impl_ = std::make_unique<Impl>(parse_endpoint(config_.endpoint));
  impl_->credential = std::move(credential);
}

RemoteScorer::~RemoteScorer() = default;

AttributeScores RemoteScorer::score_uncached(std::string_view text) {
  nlohmann::json body;
  body[config_.text_field] = std::string(text);
  const std::string payload = body.dump();

  std::string path = impl_->path;
  httplib::Headers headers;
  if (!impl_->credential.empty()) {
    if (!config_.credential_header.empty()) {
      headers.emplace(config_.credential_header, impl_->credential);
    } else {
      path += (path.find('?') == std::string::npos ? "?" : "&") +
              config_.credential_query_param + "=" + impl_->credential;
    }
  }

  auto backoff = config_.retry.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(static_cast<long>(
          static_cast<double>(backoff.count()) *
          config_.retry.backoff_multiplier));
    }
    limiter_.acquire();

    auto res = impl_->client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (transient_status(res->status)) {
      last_error = "transient HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw RemoteScoreError(res->status, res->body,
                             "remote scorer: HTTP " +
                                 std::to_string(res->status) + ": " +
                                 res->body);
    }

    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw RemoteScoreError(res->status, res->body,
                             std::string("remote scorer: invalid JSON: ") +
                                 e.what());
    }
    AttributeScores scores;
    for (Attribute a : kAllAttributes) {
      std::string pointer = "/" + std::string(attribute_name(a));
      auto it = config_.response_paths.find(a);
      if (it != config_.response_paths.end()) pointer = it->second;
      double value;
      try {
        value = parsed.at(nlohmann::json::json_pointer(pointer)).get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw RemoteScoreError(
            res->status, res->body,
            "remote scorer: response missing '" + pointer + "': " + e.what());
      }
      if (value < 0.0 || value > 1.0) {
        throw RemoteScoreError(res->status, res->body,
                               "remote scorer: score out of [0,1] at '" +
                                   pointer + "'");
      }
      scores[a] = value;
    }
    return scores;
  }
  throw RemoteScoreError(
      0, "", "remote scorer: retries exhausted; last error: " + last_error);
}

AttributeScores RemoteScorer::score(std::string_view text) {
  const std::string digest = normalized_text_digest(text);
  if (cache_ != nullptr) {
    auto hit = cache_->lookup(digest, scorer_id_, config_.scorer_version);
    if (hit) return *hit;
  }
  AttributeScores scores = score_uncached(text);
  if (cache_ != nullptr) {
    cache_->insert(digest, scorer_id_, config_.scorer_version, scores);
  }
  return scores;
}

std::vector<BatchItemResult> score_batch(
    const std::vector<std::string>& texts,
    const std::function<AttributeScores(std::string_view)>& scorer,
    int workers) {
  std::vector<BatchItemResult> results(texts.size());
  if (texts.empty()) return results;
  workers = std::max(1, workers);

  std::atomic<std::size_t> next{0};
  auto run = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= texts.size()) break;
      try {
        results[i].scores = scorer(texts[i]);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };

  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace detox
