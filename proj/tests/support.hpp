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

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls into the library's random or numeric helpers when it
// serves as an oracle for them.

#pragma once

#include <stdlib.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "normconflict/normconflict.hpp"

namespace nctest {

namespace fs = std::filesystem;
using namespace normconflict;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (fs::temp_directory_path() / "normconflict-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Code of the Error thrown by `f`, or nullopt when nothing is thrown.
inline std::optional<ErrorCode> CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Straight transcription of the published SplitMix64 reference code.
struct ReferenceSplitMix64 {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (~n + 1) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }
};

// Four square clusters centred at (+-5, +-5), points within +-2 of the
// centre on each axis, so any two clusters are at least 6 apart.
inline void MakeBlobs(std::uint64_t seed, std::size_t per_class,
                      std::vector<PairFeature>& x,
                      std::vector<ConflictLabel>& y) {
  ReferenceSplitMix64 rng{seed};
  const double cx[4] = {5, -5, -5, 5};
  const double cy[4] = {5, 5, -5, -5};
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const double a = cx[c] + (rng.uniform01() * 4.0 - 2.0);
      const double b = cy[c] + (rng.uniform01() * 4.0 - 2.0);
      x.push_back({{a, b}, FeatureMode::kOffset});
      y.push_back(kConflictLabels[c]);
    }
  }
}

// Direct evaluation of J with the bias treated as the weight of a constant
// input 1: 1/2 sum_k (|w_k|^2 + b_k^2) + C sum_i l(m_i).
inline double ReferenceObjective(const LinearModel& m,
                                 const std::vector<PairFeature>& x,
                                 const std::vector<ConflictLabel>& y,
                                 double C, bool squared = true) {
  double reg = 0;
  for (double v : m.weights) reg += v * v;
  for (double v : m.biases) reg += v * v;
  double loss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> s(m.num_classes());
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = m.biases[k];
      for (std::size_t j = 0; j < m.dim; ++j)
        s[k] += m.weights[k * m.dim + j] * x[i].values[j];
    }
    std::size_t t = 0;
    while (m.classes[t] != y[i]) ++t;
    double rival = -INFINITY;
    for (std::size_t k = 0; k < s.size(); ++k)
      if (k != t) rival = std::max(rival, s[k]);
    const double h = std::max(0.0, 1.0 - (s[t] - rival));
    loss += squared ? h * h : h;
  }
  return 0.5 * reg + C * loss;
}

// A dataset whose texts are placeholders, with the given count per label in
// canonical label order.
inline Dataset CountsDataset(const std::array<std::size_t, kNumLabels>& counts,
                             const std::string& name = "manifest") {
  Dataset d;
  d.name = name;
  for (auto l : kAllLabels) {
    for (std::size_t i = 0; i < counts[LabelIndex(l)]; ++i) {
      const std::string id =
          std::string(LabelAbbrev(l)) + "-" + std::to_string(i + 1);
      d.pairs.push_back({id, "first norm " + id, "second norm " + id, l,
                         Provenance::kOriginal});
    }
  }
  return d;
}

// The synthetic corpus and vectors that the tools ship with by default.
struct SyntheticBench {
  Dataset dataset;
  WordVectorStore store;
};

inline SyntheticBench MakeSyntheticBench(std::uint64_t seed = 42,
                                         std::size_t dim = 50) {
  auto d = GenerateSyntheticCorpus(SyntheticCorpusConfig::Standard(seed));
  auto store = SyntheticVectorStore(CorpusVocabulary(d), dim, seed);
  return {std::move(d), std::move(store)};
}

}  // namespace nctest
