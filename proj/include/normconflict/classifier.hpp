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

// Multiclass linear SVM in the Crammer-Singer formulation.
//
// For K classes with weight rows w_k and biases b_k, sample (x_i, y_i) has
// scores s_k = w_k . x_i + b_k and margin
//   m_i = s_{y_i} - max_{r != y_i} s_r.
// Training minimizes
//   J(W, b) = 1/2 sum_k |w_k|^2 + C sum_i l(m_i)
// with l(m) = max(0, 1 - m)^2 (squared hinge, default) or max(0, 1 - m).
// Each bias acts as the weight of a constant feature 1 and is regularized
// along with its row, so |w_k|^2 above includes b_k^2.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "normconflict/corpus.hpp"
#include "normconflict/embedding.hpp"
#include "normconflict/error.hpp"
#include "normconflict/random.hpp"

namespace normconflict {

enum class Loss { kSquaredHinge, kHinge };

inline std::string_view LossName(Loss l) {
  return l == Loss::kSquaredHinge ? "squared_hinge" : "hinge";
}

struct TrainConfig {
  double C = 1.0;
  Loss loss = Loss::kSquaredHinge;
  int max_epochs = 1000;
  // Training stops once the duality gap is below tolerance * max(1, J).
  double tolerance = 1e-4;
  // Seeds the per-epoch sample order.
  std::uint64_t seed = 0;

  void Validate() const {
    if (!(C > 0)) throw Error(ErrorCode::kInvalidArgument, "C must be > 0");
    if (max_epochs < 1)
      throw Error(ErrorCode::kInvalidArgument, "max_epochs must be >= 1");
    if (!(tolerance > 0))
      throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");
  }
};

struct LinearModel {
  std::vector<ConflictLabel> classes;
  FeatureMode feature_mode = FeatureMode::kConcat;
  std::size_t dim = 0;          // feature length (2d for concat)
  std::vector<double> weights;  // classes.size() x dim, row-major
  std::vector<double> biases;   // classes.size()

  std::size_t num_classes() const { return classes.size(); }

  std::span<const double> row(std::size_t k) const {
    return {weights.data() + k * dim, dim};
  }
  std::span<double> row(std::size_t k) { return {weights.data() + k * dim, dim}; }

  static LinearModel Zero(std::vector<ConflictLabel> classes, FeatureMode mode,
                          std::size_t dim) {
    LinearModel m;
    m.weights.assign(classes.size() * dim, 0.0);
    m.biases.assign(classes.size(), 0.0);
    m.classes = std::move(classes);
    m.feature_mode = mode;
    m.dim = dim;
    return m;
  }

  void Validate() const {
    if (classes.empty())
      throw Error(ErrorCode::kMalformedModel, "model has no classes");
    for (std::size_t i = 0; i < classes.size(); ++i)
      for (std::size_t j = i + 1; j < classes.size(); ++j)
        if (classes[i] == classes[j])
          throw Error(ErrorCode::kMalformedModel, "duplicate class");
    if (weights.size() != classes.size() * dim ||
        biases.size() != classes.size())
      throw Error(ErrorCode::kMalformedModel, "weight shape mismatch");
  }

  std::optional<std::size_t> ClassIndex(ConflictLabel l) const {
    for (std::size_t k = 0; k < classes.size(); ++k)
      if (classes[k] == l) return k;
    return std::nullopt;
  }

  bool operator==(const LinearModel&) const = default;
};

struct Prediction {
  ConflictLabel label = ConflictLabel::kNonConflict;
  std::size_t class_index = 0;
  std::vector<double> scores;
  std::vector<double> confidence;  // softmax of scores, uncalibrated
};

// Per-epoch J of the kept weights and dual value; entry 0 is the start.
struct TrainingLog {
  std::vector<double> objective;
  std::vector<double> dual;
  int epochs = 0;
  bool converged = false;
};

// ---------------------------------------------------------------------------
// Scoring

inline std::vector<double> Scores(const LinearModel& model,
                                  std::span<const double> x) {
  std::vector<double> s(model.num_classes());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto w = model.row(k);
    double acc = model.biases[k];
    for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * x[j];
    s[k] = acc;
  }
  return s;
}

// Stable softmax; sums to 1 within rounding for any finite input.
inline std::vector<double> Softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

// First index of the maximum; equal scores resolve to the earlier class.
inline std::size_t ArgMax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

inline Prediction Predict(const LinearModel& model, const PairFeature& feature) {
  if (feature.mode != model.feature_mode)
    throw Error(ErrorCode::kModeMismatch,
                "model expects " + std::string(FeatureModeName(model.feature_mode)) +
                    " features");
  if (feature.size() != model.dim)
    throw Error(ErrorCode::kDimensionMismatch,
                "model expects " + std::to_string(model.dim) + " values, got " +
                    std::to_string(feature.size()));
  Prediction p;
  p.scores = Scores(model, feature.values);
  p.class_index = ArgMax(p.scores);
  p.label = model.classes[p.class_index];
  p.confidence = Softmax(p.scores);
  return p;
}

// ---------------------------------------------------------------------------
// Objective and gradient

namespace detail {

// Training data flattened for the solver: X is n x d row-major, y holds
// class indices into the model's class list.
struct Problem {
  std::vector<double> x;
  std::vector<std::size_t> y;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  double C = 1.0;
  Loss loss = Loss::kSquaredHinge;

  std::span<const double> sample(std::size_t i) const {
    return {x.data() + i * d, d};
  }
};

inline Problem MakeProblem(std::span<const PairFeature> features,
                           std::span<const ConflictLabel> labels,
                           const LinearModel& model, double C, Loss loss) {
  if (features.size() != labels.size())
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(features.size()) + " features vs " +
                    std::to_string(labels.size()) + " labels");
  Problem p;
  p.n = features.size();
  p.d = model.dim;
  p.k = model.num_classes();
  p.C = C;
  p.loss = loss;
  p.x.reserve(p.n * p.d);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto& f = features[i];
    if (f.size() != model.dim)
      throw Error(ErrorCode::kDimensionMismatch,
                  "feature " + std::to_string(i) + " has length " +
                      std::to_string(f.size()) + ", expected " +
                      std::to_string(model.dim));
    if (f.mode != model.feature_mode)
      throw Error(ErrorCode::kModeMismatch,
                  "feature " + std::to_string(i) + " has the wrong mode");
    p.x.insert(p.x.end(), f.values.begin(), f.values.end());
    auto idx = model.ClassIndex(labels[i]);
    if (!idx)
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::string(LabelName(labels[i])) +
                      " is not a model class");
    p.y.push_back(*idx);
  }
  return p;
}

// Parameters are laid out as [weights (k*d) | biases (k)].
struct Params {
  std::vector<double> w;
  std::vector<double> b;
};

// Highest-scoring wrong class for sample with true class y; ties go to the
// lowest index.
inline std::size_t RivalClass(std::span<const double> s, std::size_t y) {
  std::size_t r = (y == 0) ? 1 : 0;
  for (std::size_t k = r + 1; k < s.size(); ++k)
    if (k != y && s[k] > s[r]) r = k;
  return r;
}

// Computes J; when `grad` is non-null also writes its (sub)gradient.
inline double Evaluate(const Problem& p, const Params& params, Params* grad) {
  double reg = 0.0;
  for (double v : params.w) reg += v * v;
  for (double v : params.b) reg += v * v;
  double loss = 0.0;
  if (grad) {
    grad->w = params.w;
    grad->b = params.b;
  }
  std::vector<double> s(p.k);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto xi = p.sample(i);
    for (std::size_t c = 0; c < p.k; ++c) {
      const double* w = params.w.data() + c * p.d;
      double acc = params.b[c];
      for (std::size_t j = 0; j < p.d; ++j) acc += w[j] * xi[j];
      s[c] = acc;
    }
    const std::size_t y = p.y[i];
    const std::size_t r = RivalClass(s, y);
    const double slack = 1.0 - (s[y] - s[r]);
    if (slack <= 0.0) continue;
    loss += p.loss == Loss::kSquaredHinge ? slack * slack : slack;
    if (!grad) continue;
    const double coef =
        p.C * (p.loss == Loss::kSquaredHinge ? 2.0 * slack : 1.0);
    double* gy = grad->w.data() + y * p.d;
    for (std::size_t j = 0; j < p.d; ++j) gy[j] -= coef * xi[j];
    grad->b[y] -= coef;
    // Rivals tied exactly for the maximum share the push (e.g. at W = 0).
    std::size_t tied = 0;
    for (std::size_t c = 0; c < p.k; ++c)
      if (c != y && s[c] == s[r]) ++tied;
    const double share = coef / static_cast<double>(tied);
    for (std::size_t c = 0; c < p.k; ++c) {
      if (c == y || s[c] != s[r]) continue;
      double* gc = grad->w.data() + c * p.d;
      for (std::size_t j = 0; j < p.d; ++j) gc[j] += share * xi[j];
      grad->b[c] += share;
    }
  }
  return 0.5 * reg + p.C * loss;
}

inline Params ParamsOf(const LinearModel& m) { return {m.weights, m.biases}; }

}  // namespace detail

// J(W, b) of `model` on the given data.
inline double Objective(const LinearModel& model,
                        std::span<const PairFeature> features,
                        std::span<const ConflictLabel> labels,
                        const TrainConfig& config) {
  auto p = detail::MakeProblem(features, labels, model, config.C, config.loss);
  return detail::Evaluate(p, detail::ParamsOf(model), nullptr);
}

// Gradient of J with respect to the weights and biases, laid out like the
// model. Where several wrong classes tie for the highest score the loss is
// not differentiable; the rival term is then split evenly between them,
// which is a valid subgradient.
inline LinearModel ObjectiveGradient(const LinearModel& model,
                                     std::span<const PairFeature> features,
                                     std::span<const ConflictLabel> labels,
                                     const TrainConfig& config) {
  auto p = detail::MakeProblem(features, labels, model, config.C, config.loss);
  detail::Params g;
  detail::Evaluate(p, detail::ParamsOf(model), &g);
  LinearModel out = model;
  out.weights = std::move(g.w);
  out.biases = std::move(g.b);
  return out;
}

// ---------------------------------------------------------------------------
// Training

// Dual coordinate ascent from alpha = 0 (so W = 0, b = 0).
//
// With one multiplier alpha_im >= 0 per sample i and wrong class m, and
// A_i = sum_m alpha_im, the weights are
//   w_k = sum_i ([y_i = k] A_i - alpha_ik) (x_i, 1)
// and the dual
//   D = -1/2 |W|^2 + sum_im alpha_im - sum_i A_i^2 / (4C)
// is maximized one coordinate at a time in closed form. For the plain hinge
// the quadratic term is dropped and A_i <= C instead. Each epoch visits the
// samples in a seeded random order. The weights after an epoch need not
// lower J, so the best ones seen are kept and returned; the logged J is
// theirs and never increases. Training stops when J - D, which bounds the
// remaining decrease of J, falls below tolerance * max(1, J), or after
// max_epochs. Identical inputs and seed give bit-identical models.
//
// `classes` fixes the model's class order; when empty, the distinct labels
// present are used in canonical order.
inline LinearModel Train(std::span<const PairFeature> features,
                         std::span<const ConflictLabel> labels,
                         const TrainConfig& config,
                         std::vector<ConflictLabel> classes = {},
                         TrainingLog* log = nullptr) {
  config.Validate();
  if (features.size() != labels.size())
    throw Error(ErrorCode::kLengthMismatch, "features and labels differ");
  if (features.size() < 2)
    throw Error(ErrorCode::kDegenerateData, "need at least 2 samples");

  std::vector<ConflictLabel> present;
  for (auto l : kAllLabels)
    if (std::find(labels.begin(), labels.end(), l) != labels.end())
      present.push_back(l);
  if (present.size() < 2)
    throw Error(ErrorCode::kDegenerateData,
                "training data has a single class");
  if (classes.empty()) classes = present;
  if (classes.size() < 2)
    throw Error(ErrorCode::kDegenerateData, "need at least 2 classes");

  const FeatureMode mode = features.front().mode;
  const std::size_t dim = features.front().size();
  LinearModel model = LinearModel::Zero(classes, mode, dim);
  model.Validate();
  const auto p =
      detail::MakeProblem(features, labels, model, config.C, config.loss);
  const bool squared = config.loss == Loss::kSquaredHinge;
  const std::size_t n = p.n, d = p.d, k = p.k;

  detail::Params theta = detail::ParamsOf(model);
  std::vector<double> alpha(n * k, 0.0);
  std::vector<double> a_sum(n, 0.0);
  std::vector<double> q(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (double v : p.sample(i)) q[i] += v * v;

  auto dual_value = [&] {
    double reg = 0.0;
    for (double v : theta.w) reg += v * v;
    for (double v : theta.b) reg += v * v;
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += a_sum[i];
      quad += a_sum[i] * a_sum[i];
    }
    return -0.5 * reg + lin - (squared ? quad / (4.0 * p.C) : 0.0);
  };

  TrainingLog local_log;
  double j = detail::Evaluate(p, theta, nullptr);
  local_log.objective.push_back(j);
  local_log.dual.push_back(0.0);
  detail::Params best = theta;

  SplitMix64 rng(config.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const double diag = squared ? 1.0 / (2.0 * p.C) : 0.0;

  for (int t = 0; t < config.max_epochs; ++t) {
    rng.Shuffle(order);
    for (std::size_t i : order) {
      const auto xi = p.sample(i);
      const std::size_t y = p.y[i];
      double* wy = theta.w.data() + y * d;
      for (std::size_t m = 0; m < k; ++m) {
        if (m == y) continue;
        double* wm = theta.w.data() + m * d;
        double margin = theta.b[y] - theta.b[m];
        for (std::size_t c = 0; c < d; ++c) margin += (wy[c] - wm[c]) * xi[c];
        double& a = alpha[i * k + m];
        const double g = 1.0 - margin - a_sum[i] * diag;
        double delta = g / (2.0 * q[i] + diag);
        delta = std::max(delta, -a);
        if (!squared) delta = std::min(delta, p.C - a_sum[i]);
        if (delta == 0.0) continue;
        a += delta;
        a_sum[i] += delta;
        for (std::size_t c = 0; c < d; ++c) {
          wy[c] += delta * xi[c];
          wm[c] -= delta * xi[c];
        }
        theta.b[y] += delta;
        theta.b[m] -= delta;
      }
    }
    const double j_now = detail::Evaluate(p, theta, nullptr);
    if (j_now < j) {
      j = j_now;
      best = theta;
    }
    const double dual = dual_value();
    local_log.objective.push_back(j);
    local_log.dual.push_back(dual);
    local_log.epochs = t + 1;
    if (j - dual <= config.tolerance * std::max(1.0, std::abs(j))) {
      local_log.converged = true;
      break;
    }
  }

  model.weights = std::move(best.w);
  model.biases = std::move(best.b);
  if (log) *log = std::move(local_log);
  return model;
}

// ---------------------------------------------------------------------------
// Model files
//
//   normconflict-linear-model v1
//   shape <K> <dim>
//   feature_mode <concat|offset>
//   classes <name_1> ... <name_K>
//   weights
//   <K lines of dim numbers>
//   biases
//   <K numbers>
//   end
//
// Numbers are written in shortest round-trip decimal form, so a load
// reproduces the weights bit for bit.

inline constexpr std::string_view kModelMagic = "normconflict-linear-model";
inline constexpr std::string_view kModelVersion = "v1";

namespace detail {

inline std::string FormatDouble(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline double ParseDouble(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::kMalformedModel, "bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline void WriteModel(const LinearModel& model, std::ostream& out) {
  model.Validate();
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "shape " << model.num_classes() << ' ' << model.dim << '\n';
  out << "feature_mode " << FeatureModeName(model.feature_mode) << '\n';
  out << "classes";
  for (auto c : model.classes) out << ' ' << LabelName(c);
  out << "\nweights\n";
  for (std::size_t k = 0; k < model.num_classes(); ++k) {
    const auto w = model.row(k);
    for (std::size_t j = 0; j < w.size(); ++j)
      out << (j ? " " : "") << detail::FormatDouble(w[j]);
    out << '\n';
  }
  out << "biases\n";
  for (std::size_t k = 0; k < model.num_classes(); ++k)
    out << (k ? " " : "") << detail::FormatDouble(model.biases[k]);
  out << "\nend\n";
}

inline LinearModel ReadModel(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line))
      throw Error(ErrorCode::kMalformedModel,
                  std::string("truncated before ") + what);
    return line;
  };
  auto expect_fields = [](const std::string& l, std::string_view key) {
    std::vector<std::string> fields;
    std::istringstream ss(l);
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty() || fields[0] != key)
      throw Error(ErrorCode::kMalformedModel,
                  "expected '" + std::string(key) + "'");
    fields.erase(fields.begin());
    return fields;
  };

  if (!std::getline(in, line))
    throw Error(ErrorCode::kVersionMismatch, "empty model file");
  {
    std::istringstream ss(line);
    std::string magic, version;
    ss >> magic >> version;
    if (magic != kModelMagic || version != kModelVersion)
      throw Error(ErrorCode::kVersionMismatch,
                  "expected '" + std::string(kModelMagic) + " " +
                      std::string(kModelVersion) + "', got '" + line + "'");
  }
  LinearModel m;
  auto shape = expect_fields(next_line("shape"), "shape");
  if (shape.size() != 2)
    throw Error(ErrorCode::kMalformedModel, "shape needs two numbers");
  std::size_t k = 0, dim = 0;
  if (!detail::ParseSize(shape[0], k) || !detail::ParseSize(shape[1], dim) ||
      k == 0 || dim == 0)
    throw Error(ErrorCode::kMalformedModel, "bad shape");
  m.dim = dim;

  auto mode = expect_fields(next_line("feature_mode"), "feature_mode");
  if (mode.size() != 1 || !ParseFeatureMode(mode[0]))
    throw Error(ErrorCode::kMalformedModel, "bad feature_mode");
  m.feature_mode = *ParseFeatureMode(mode[0]);

  auto names = expect_fields(next_line("classes"), "classes");
  if (names.size() != k)
    throw Error(ErrorCode::kMalformedModel, "class count does not match shape");
  for (const auto& n : names) {
    auto l = ParseLabel(n);
    if (!l) throw Error(ErrorCode::kMalformedModel, "unknown class " + n);
    m.classes.push_back(*l);
  }

  expect_fields(next_line("weights"), "weights");
  m.weights.reserve(k * dim);
  for (std::size_t r = 0; r < k; ++r) {
    const std::string row = next_line("weight row");
    auto fields = detail::SplitFields(row);
    if (fields.size() != dim)
      throw Error(ErrorCode::kMalformedModel, "weight row has wrong length");
    for (auto f : fields) m.weights.push_back(detail::ParseDouble(f));
  }
  expect_fields(next_line("biases"), "biases");
  const std::string bias_line = next_line("bias values");
  auto biases = detail::SplitFields(bias_line);
  if (biases.size() != k)
    throw Error(ErrorCode::kMalformedModel, "wrong number of biases");
  for (auto f : biases) m.biases.push_back(detail::ParseDouble(f));
  expect_fields(next_line("end"), "end");
  m.Validate();
  return m;
}

inline void SaveModel(const LinearModel& model,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  WriteModel(model, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

inline LinearModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return ReadModel(in);
}

}  // namespace normconflict
