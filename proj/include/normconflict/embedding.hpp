// Copyright 2026 The normconflict Authors.
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

// Sentence embeddings as the mean of pretrained word vectors, and the pair
// features built from them.
//
// Word vectors are read from the plain-text interchange format: an optional
// "count dim" header line, then one line per token holding the token and
// `dim` real numbers separated by spaces or tabs.

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "normconflict/error.hpp"
#include "normconflict/random.hpp"
#include "normconflict/text.hpp"

namespace normconflict {

enum class FeatureMode { kConcat, kOffset };

inline std::string_view FeatureModeName(FeatureMode m) {
  return m == FeatureMode::kConcat ? "concat" : "offset";
}

inline std::optional<FeatureMode> ParseFeatureMode(std::string_view name) {
  if (name == "concat") return FeatureMode::kConcat;
  if (name == "offset") return FeatureMode::kOffset;
  return std::nullopt;
}

// How a token absent from the vocabulary is treated:
//   kSkip       - ignored; it does not count towards the mean's denominator.
//   kZeroVector - contributes a zero vector and counts in the denominator.
enum class UnknownTokenPolicy { kSkip, kZeroVector };

// ---------------------------------------------------------------------------
// WordVectorStore

class WordVectorStore {
 public:
  explicit WordVectorStore(std::size_t dim, bool lowercase = true)
      : dim_(dim), lowercase_(lowercase) {
    if (dim == 0)
      throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  bool lowercase() const { return lowercase_; }
  // Number of tokens that appeared more than once while loading.
  std::size_t duplicate_count() const { return duplicates_; }

  // Returns false when the token was already present (the new vector wins).
  bool Insert(std::string_view token, std::span<const float> values) {
    if (values.size() != dim_)
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(dim_) + " values, got " +
                      std::to_string(values.size()));
    std::string key = lowercase_ ? AsciiLower(token) : std::string(token);
    auto [it, inserted] = index_.try_emplace(std::move(key), rows_);
    if (inserted) {
      data_.insert(data_.end(), values.begin(), values.end());
      ++rows_;
    } else {
      std::copy(values.begin(), values.end(),
                data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
      ++duplicates_;
    }
    return inserted;
  }

  std::optional<std::span<const float>> Find(std::string_view token) const {
    auto it = index_.find(lowercase_ ? AsciiLower(token) : std::string(token));
    if (it == index_.end()) return std::nullopt;
    return std::span<const float>(data_.data() + it->second * dim_, dim_);
  }

  bool Contains(std::string_view token) const { return Find(token).has_value(); }

 private:
  std::size_t dim_;
  bool lowercase_;
  std::size_t rows_ = 0;
  std::size_t duplicates_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

namespace detail {

inline std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !IsSpace(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

inline bool ParseSize(std::string_view s, std::size_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool ParseFloat(std::string_view s, float& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

// Dimension comes from the header when present, otherwise from the first
// vector line. Blank lines are ignored.
inline WordVectorStore ReadWordVectors(std::istream& in, bool lowercase = true) {
  std::optional<WordVectorStore> store;
  std::optional<std::size_t> header_dim;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  std::vector<float> values;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::SplitFields(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0, dim = 0;
      if (fields.size() == 2 && detail::ParseSize(fields[0], count) &&
          detail::ParseSize(fields[1], dim)) {
        if (dim == 0)
          throw Error(ErrorCode::kDimensionMismatch, "header dimension is 0",
                      line_no);
        header_dim = dim;
        continue;
      }
    }
    const std::size_t dim = store ? store->dim()
                            : header_dim ? *header_dim
                                         : fields.size() - 1;
    if (fields.size() - 1 != dim || dim == 0)
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(dim) + " values, got " +
                      std::to_string(fields.size() - 1),
                  line_no);
    values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!detail::ParseFloat(fields[k + 1], values[k]))
        throw Error(ErrorCode::kMalformedNumber,
                    "'" + std::string(fields[k + 1]) + "'", line_no);
    }
    if (!store) store.emplace(dim, lowercase);
    store->Insert(fields[0], values);
  }
  if (!store || store->size() == 0)
    throw Error(ErrorCode::kEmptyVocabulary, "no word vectors found");
  return std::move(*store);
}

inline WordVectorStore LoadWordVectors(const std::filesystem::path& path,
                                       bool lowercase = true) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return ReadWordVectors(in, lowercase);
}

// ---------------------------------------------------------------------------
// Sentence embeddings

struct SentenceEmbedding {
  std::vector<double> vector;
  std::size_t token_count = 0;  // tokens averaged over

  std::size_t dim() const { return vector.size(); }
};

struct EmbedOptions {
  double subsample_prob = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
  UnknownTokenPolicy unknown = UnknownTokenPolicy::kSkip;
};

// Mean of the vectors of the sentence's tokens.
//
// With subsample_prob > 0, tokens are visited in order and each draws one
// SplitMix64(seed).Uniform01() value u; the token is deleted when u < p
// unless it is the only one left. Deletion applies to the tokens that
// survive the unknown-token policy.
inline SentenceEmbedding EmbedSentence(const WordVectorStore& store,
                                       std::string_view sentence,
                                       const EmbedOptions& options = {}) {
  if (!(options.subsample_prob >= 0.0 && options.subsample_prob < 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                "subsample probability must be in [0, 1)");
  std::vector<std::optional<std::span<const float>>> rows;
  for (const auto& tok : Tokenize(sentence)) {
    auto v = store.Find(tok);
    if (v || options.unknown == UnknownTokenPolicy::kZeroVector)
      rows.push_back(v);
  }
  if (rows.empty())
    throw Error(ErrorCode::kNoEmbeddableTokens,
                "'" + std::string(sentence.substr(0, 80)) + "'");

  std::vector<bool> keep(rows.size(), true);
  if (options.subsample_prob > 0.0) {
    SplitMix64 rng(options.seed);
    std::size_t remaining = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double u = rng.Uniform01();
      if (u < options.subsample_prob && remaining > 1) {
        keep[i] = false;
        --remaining;
      }
    }
  }

  SentenceEmbedding out;
  out.vector.assign(store.dim(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!keep[i]) continue;
    ++out.token_count;
    if (!rows[i]) continue;
    const auto& row = *rows[i];
    for (std::size_t k = 0; k < row.size(); ++k) out.vector[k] += row[k];
  }
  const double n = static_cast<double>(out.token_count);
  for (double& x : out.vector) x /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Pair features

struct PairFeature {
  std::vector<double> values;
  FeatureMode mode = FeatureMode::kConcat;

  std::size_t size() const { return values.size(); }
};

inline void CheckSameDim(const SentenceEmbedding& a, const SentenceEmbedding& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

// [e1 | e2], length 2d.
inline PairFeature PairConcat(const SentenceEmbedding& e1,
                              const SentenceEmbedding& e2) {
  CheckSameDim(e1, e2);
  PairFeature f{e1.vector, FeatureMode::kConcat};
  f.values.insert(f.values.end(), e2.vector.begin(), e2.vector.end());
  return f;
}

// e1 - e2, length d.
inline PairFeature PairOffset(const SentenceEmbedding& e1,
                              const SentenceEmbedding& e2) {
  CheckSameDim(e1, e2);
  PairFeature f{e1.vector, FeatureMode::kOffset};
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] -= e2.vector[k];
  return f;
}

inline PairFeature MakePairFeature(const SentenceEmbedding& e1,
                                   const SentenceEmbedding& e2,
                                   FeatureMode mode) {
  return mode == FeatureMode::kConcat ? PairConcat(e1, e2)
                                      : PairOffset(e1, e2);
}

using EmbeddingPair = std::pair<SentenceEmbedding, SentenceEmbedding>;

// Mean over pairs of (v_n1 - v_n2): a single vector summarising how the
// first norm of a conflicting pair differs from the second.
inline std::vector<double> ConflictOffset(std::span<const EmbeddingPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyPairSet, "no pairs");
  const std::size_t dim = pairs.front().first.dim();
  std::vector<double> sum(dim, 0.0);
  for (const auto& [a, b] : pairs) {
    CheckSameDim(a, b);
    if (a.dim() != dim)
      throw Error(ErrorCode::kDimensionMismatch, "pairs differ in dimension");
    for (std::size_t k = 0; k < dim; ++k) sum[k] += a.vector[k] - b.vector[k];
  }
  for (double& x : sum) x /= static_cast<double>(pairs.size());
  return sum;
}

// ---------------------------------------------------------------------------
// Embedded-pair cache: one {"pair_id","mode","vector"} object per line.

struct CachedFeature {
  std::string pair_id;
  PairFeature feature;
};

inline void WritePairCache(std::span<const CachedFeature> entries,
                           std::ostream& out) {
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["pair_id"] = e.pair_id;
    j["mode"] = FeatureModeName(e.feature.mode);
    j["vector"] = e.feature.values;
    out << j.dump() << '\n';
  }
}

inline std::vector<CachedFeature> ReadPairCache(std::istream& in) {
  std::vector<CachedFeature> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto mode = ParseFeatureMode(j.at("mode").get<std::string>());
      if (!mode)
        throw Error(ErrorCode::kMalformedRecord, "unknown mode", line_no);
      out.push_back({j.at("pair_id").get<std::string>(),
                     {j.at("vector").get<std::vector<double>>(), *mode}});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, e.what(), line_no);
    }
  }
  return out;
}

}  // namespace normconflict
