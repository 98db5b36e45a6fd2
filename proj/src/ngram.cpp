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

#include "detox/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace detox {

namespace {

// Probabilities never underflow to zero; logits stay finite.
constexpr double kProbFloor = 1e-300;

std::string double_to_hex(double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(bits));
  return buf;
}

double hex_to_double(const std::string& s) {
  if (s.size() != 16) throw std::runtime_error("bad hex double: " + s);
  std::uint64_t bits = 0;
  for (char c : s) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else throw std::runtime_error("bad hex double: " + s);
    bits = (bits << 4) | static_cast<std::uint64_t>(v);
  }
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

std::vector<double> normalized_weights(const NGramParams& params) {
  std::vector<double> w = params.interpolation_weights;
  if (w.empty()) {
    w.assign(static_cast<std::size_t>(params.order),
             1.0 / static_cast<double>(params.order));
    return w;
  }
  if (w.size() != static_cast<std::size_t>(params.order)) {
    throw std::invalid_argument(
        "interpolation weights must have one entry per order");
  }
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) {
      throw std::invalid_argument("interpolation weights must be >= 0");
    }
    sum += x;
  }
  if (sum <= 0.0) {
    throw std::invalid_argument("interpolation weights must not all be zero");
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace

NGramModel NGramModel::train(const std::vector<std::string>& corpus_lines,
                             Vocabulary vocab, const NGramParams& params) {
  if (params.order < 1) {
    throw std::invalid_argument("order must be >= 1");
  }
  if (!(params.add_k > 0.0)) {
    throw std::invalid_argument("add_k must be > 0");
  }

  NGramModel model;
  model.vocab_ = std::move(vocab);
  model.order_ = params.order;
  model.add_k_ = params.add_k;
  model.weights_ = normalized_weights(params);
  model.tables_.resize(static_cast<std::size_t>(params.order));

  const std::size_t pad = static_cast<std::size_t>(params.order) - 1;
  std::size_t in_vocab_tokens = 0;
  for (const auto& line : corpus_lines) {
    std::vector<TokenId> ids = model.vocab_.encode(line);
    if (ids.empty()) continue;  // blank line carries no sample
    for (TokenId id : ids) {
      if (id != Vocabulary::kUnk) ++in_vocab_tokens;
    }
    std::vector<TokenId> padded;
    padded.reserve(pad + ids.size() + 1);
    padded.insert(padded.end(), pad, Vocabulary::kBos);
    padded.insert(padded.end(), ids.begin(), ids.end());
    padded.push_back(Vocabulary::kEos);

    for (std::size_t t = pad; t < padded.size(); ++t) {
      TokenId target = padded[t];
      for (std::size_t len = 0; len < static_cast<std::size_t>(params.order);
           ++len) {
        std::vector<TokenId> ctx(padded.begin() + (t - len),
                                 padded.begin() + t);
        auto& cc = model.tables_[len][ctx];
        ++cc.total;
        ++cc.counts[target];
      }
    }
  }

  if (in_vocab_tokens == 0) {
    throw std::invalid_argument("corpus contains no in-vocabulary token");
  }
  return model;
}

NGramModel NGramModel::uniform(Vocabulary vocab) {
  NGramModel model;
  model.vocab_ = std::move(vocab);
  model.order_ = 1;
  model.add_k_ = 0.1;
  model.weights_ = {1.0};
  model.tables_.resize(1);
  return model;
}

std::vector<TokenId> NGramModel::effective_context(
    std::span<const TokenId> ctx) const {
  const std::size_t want = static_cast<std::size_t>(order_) - 1;
  std::vector<TokenId> out;
  out.reserve(want);
  if (ctx.size() >= want) {
    out.assign(ctx.end() - static_cast<std::ptrdiff_t>(want), ctx.end());
  } else {
    out.assign(want - ctx.size(), Vocabulary::kBos);
    out.insert(out.end(), ctx.begin(), ctx.end());
  }
  return out;
}

std::size_t NGramModel::longest_seen_suffix(
    const std::vector<TokenId>& ctx) const {
  for (std::size_t len = ctx.size(); len >= 1; --len) {
    std::vector<TokenId> suffix(ctx.end() - static_cast<std::ptrdiff_t>(len),
                                ctx.end());
    auto it = tables_[len].find(suffix);
    if (it != tables_[len].end() && it->second.total > 0) return len;
  }
  return 0;
}

std::vector<double> NGramModel::next_token_probs(
    std::span<const TokenId> context) const {
  const std::size_t vsize = vocab_.size();
  const std::vector<TokenId> ctx = effective_context(context);
  const std::size_t seen = longest_seen_suffix(ctx);

  double weight_sum = 0.0;
  for (std::size_t o = 0; o <= seen; ++o) weight_sum += weights_[o];

  std::vector<double> probs(vsize, 0.0);
  std::vector<double> counts(vsize);
  const double kv = add_k_ * static_cast<double>(vsize);

  for (std::size_t len = 0; len <= seen; ++len) {
    double lambda = weight_sum > 0.0
                        ? weights_[len] / weight_sum
                        : 1.0 / static_cast<double>(seen + 1);
    if (lambda == 0.0) continue;

    std::fill(counts.begin(), counts.end(), 0.0);
    double total = 0.0;
    std::vector<TokenId> suffix(ctx.end() - static_cast<std::ptrdiff_t>(len),
                                ctx.end());
    auto it = tables_[len].find(suffix);
    if (it != tables_[len].end()) {
      total = static_cast<double>(it->second.total);
      for (const auto& [tok, cnt] : it->second.counts) {
        counts[tok] = static_cast<double>(cnt);
      }
    }
    const double denom = total + kv;
    for (std::size_t t = 0; t < vsize; ++t) {
      probs[t] += lambda * ((counts[t] + add_k_) / denom);
    }
  }
  return probs;
}

LogitVector NGramModel::next_token_logits(
    std::span<const TokenId> context) const {
  std::vector<double> probs = next_token_probs(context);
  LogitVector logits(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    logits[i] = std::log(std::max(probs[i], kProbFloor));
  }
  return logits;
}

double NGramModel::sequence_log_likelihood(
    std::span<const TokenId> seq) const {
  if (seq.empty()) {
    throw std::invalid_argument("empty sequence");
  }
  std::vector<TokenId> history;
  history.reserve(seq.size());
  double ll = 0.0;
  for (std::size_t t = 0; t <= seq.size(); ++t) {
    TokenId target = t < seq.size() ? seq[t] : Vocabulary::kEos;
    std::vector<double> probs = next_token_probs(history);
    ll += std::log(std::max(probs[target], kProbFloor));
    if (t < seq.size()) history.push_back(target);
  }
  return ll;
}

double NGramModel::perplexity(
    const std::vector<std::vector<TokenId>>& seqs) const {
  double total_ll = 0.0;
  std::size_t total_tokens = 0;
  for (const auto& seq : seqs) {
    if (seq.empty()) continue;
    total_ll += sequence_log_likelihood(seq);
    total_tokens += seq.size() + 1;  // terminal EOS is scored too
  }
  if (total_tokens == 0) {
    throw std::invalid_argument("perplexity: empty input");
  }
  return std::exp(-total_ll / static_cast<double>(total_tokens));
}

void NGramModel::save(std::ostream& out) const {
  out << "detox-nglm 1\n";
  out << "order " << order_ << "\n";
  out << "add_k " << double_to_hex(add_k_) << "\n";
  out << "weights " << weights_.size();
  for (double w : weights_) out << " " << double_to_hex(w);
  out << "\n";
  vocab_.save(out);
  for (std::size_t len = 0; len < tables_.size(); ++len) {
    out << "table " << len << " " << tables_[len].size() << "\n";
    for (const auto& [ctx, cc] : tables_[len]) {
      for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (i > 0) out << " ";
        out << ctx[i];
      }
      out << " | " << cc.total << " |";
      for (const auto& [tok, cnt] : cc.counts) {
        out << " " << tok << " " << cnt;
      }
      out << "\n";
    }
  }
  out << "end\n";
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ostringstream buf;
  save(buf);
  auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write model file: " + path.string());
    }
    const std::string& s = buf.str();
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  std::filesystem::rename(tmp, path);
}

NGramModel NGramModel::load(std::istream& in) {
  auto fail = [](const std::string& what) -> std::runtime_error {
    return std::runtime_error("model file corrupt: " + what);
  };

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "detox-nglm" || version != 1) {
    throw fail("bad magic/version");
  }

  NGramModel model;
  std::string tag, hex;
  if (!(in >> tag >> model.order_) || tag != "order" || model.order_ < 1) {
    throw fail("bad order");
  }
  if (!(in >> tag >> hex) || tag != "add_k") throw fail("bad add_k");
  model.add_k_ = hex_to_double(hex);
  std::size_t nweights = 0;
  if (!(in >> tag >> nweights) || tag != "weights" ||
      nweights != static_cast<std::size_t>(model.order_)) {
    throw fail("bad weights");
  }
  model.weights_.resize(nweights);
  for (auto& w : model.weights_) {
    if (!(in >> hex)) throw fail("truncated weights");
    w = hex_to_double(hex);
  }

  model.vocab_ = Vocabulary::load(in);

  model.tables_.resize(static_cast<std::size_t>(model.order_));
  for (std::size_t len = 0; len < model.tables_.size(); ++len) {
    std::size_t expect_len = 0, n_contexts = 0;
    if (!(in >> tag >> expect_len >> n_contexts) || tag != "table" ||
        expect_len != len) {
      throw fail("bad table header");
    }
    in.ignore();
    std::string line;
    for (std::size_t i = 0; i < n_contexts; ++i) {
      if (!std::getline(in, line)) throw fail("truncated table");
      std::istringstream row(line);
      std::vector<TokenId> ctx;
      std::string field;
      while (row >> field && field != "|") {
        ctx.push_back(static_cast<TokenId>(std::stoul(field)));
      }
      if (ctx.size() != len) throw fail("context length mismatch");
      ContextCounts cc;
      if (!(row >> cc.total)) throw fail("missing total");
      if (!(row >> field) || field != "|") throw fail("missing separator");
      TokenId tok;
      std::uint64_t cnt;
      std::uint64_t sum = 0;
      while (row >> tok >> cnt) {
        cc.counts[tok] = cnt;
        sum += cnt;
      }
      if (sum != cc.total) throw fail("count total mismatch");
      model.tables_[len].emplace(std::move(ctx), std::move(cc));
    }
  }
  if (!(in >> tag) || tag != "end") throw fail("missing end marker");
  return model;
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model file: " + path.string());
  }
  return load(in);
}

bool NGramModel::operator==(const NGramModel& other) const {
  auto as_bits = [](double d) {
    std::uint64_t b;
    std::memcpy(&b, &d, sizeof(b));
    return b;
  };
  if (!(vocab_ == other.vocab_) || order_ != other.order_ ||
      as_bits(add_k_) != as_bits(other.add_k_) ||
      weights_.size() != other.weights_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (as_bits(weights_[i]) != as_bits(other.weights_[i])) return false;
  }
  for (std::size_t len = 0; len < tables_.size(); ++len) {
    const auto& a = tables_[len];
    const auto& b = other.tables_[len];
    if (a.size() != b.size()) return false;
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) {
      if (ia->first != ib->first || ia->second.total != ib->second.total ||
          ia->second.counts != ib->second.counts) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detox
