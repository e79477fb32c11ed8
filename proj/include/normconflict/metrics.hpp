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

#pragma once

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "normconflict/corpus.hpp"
#include "normconflict/error.hpp"

namespace normconflict {

enum class Averaging { kMacro, kWeighted };

inline std::string_view AveragingName(Averaging a) {
  return a == Averaging::kMacro ? "macro" : "weighted";
}

inline std::optional<Averaging> ParseAveraging(std::string_view s) {
  if (s == "macro") return Averaging::kMacro;
  if (s == "weighted") return Averaging::kWeighted;
  return std::nullopt;
}

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<ConflictLabel> classes;
  std::vector<std::size_t> counts;  // K x K row-major

  std::size_t size() const { return classes.size(); }
  std::size_t at(std::size_t t, std::size_t p) const {
    return counts[t * size() + p];
  }
  std::size_t row_sum(std::size_t t) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < size(); ++p) s += at(t, p);
    return s;
  }
  std::size_t col_sum(std::size_t p) const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < size(); ++t) s += at(t, p);
    return s;
  }
  std::size_t trace() const {
    std::size_t s = 0;
    for (std::size_t k = 0; k < size(); ++k) s += at(k, k);
    return s;
  }
  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  ConflictLabel label;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct Metrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  Averaging averaging = Averaging::kMacro;
  std::vector<ClassMetrics> per_class;
  std::size_t total = 0;
};

namespace detail {

inline std::size_t IndexIn(std::span<const ConflictLabel> classes,
                           ConflictLabel l) {
  for (std::size_t k = 0; k < classes.size(); ++k)
    if (classes[k] == l) return k;
  throw Error(ErrorCode::kInvalidArgument,
              "label " + std::string(LabelName(l)) + " not in class list");
}

inline double SafeDiv(double a, double b) { return b == 0 ? 0.0 : a / b; }

}  // namespace detail

inline ConfusionMatrix Confusion(std::span<const ConflictLabel> y_true,
                                 std::span<const ConflictLabel> y_pred,
                                 std::span<const ConflictLabel> classes) {
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(y_true.size()) + " vs " +
                    std::to_string(y_pred.size()));
  if (y_true.empty())
    throw Error(ErrorCode::kInvalidArgument, "no predictions");
  ConfusionMatrix cm;
  cm.classes.assign(classes.begin(), classes.end());
  cm.counts.assign(classes.size() * classes.size(), 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = detail::IndexIn(classes, y_true[i]);
    const auto p = detail::IndexIn(classes, y_pred[i]);
    ++cm.counts[t * classes.size() + p];
  }
  return cm;
}

// Per-class P = TP/(TP+FP), R = TP/(TP+FN), F = 2PR/(P+R), each 0 when its
// denominator is 0. Classes absent from both vectors still count in the
// macro average.
inline Metrics MetricsFromConfusion(const ConfusionMatrix& cm,
                                    Averaging averaging = Averaging::kMacro) {
  Metrics m;
  m.averaging = averaging;
  m.total = cm.total();
  m.accuracy = detail::SafeDiv(static_cast<double>(cm.trace()),
                               static_cast<double>(m.total));
  const std::size_t k = cm.size();
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics cls;
    cls.label = cm.classes[c];
    const double tp = static_cast<double>(cm.at(c, c));
    cls.support = cm.row_sum(c);
    cls.precision = detail::SafeDiv(tp, static_cast<double>(cm.col_sum(c)));
    cls.recall = detail::SafeDiv(tp, static_cast<double>(cls.support));
    cls.f1 = detail::SafeDiv(2 * cls.precision * cls.recall,
                             cls.precision + cls.recall);
    m.per_class.push_back(cls);
  }
  for (const auto& cls : m.per_class) {
    const double w =
        averaging == Averaging::kMacro
            ? 1.0 / static_cast<double>(k)
            : detail::SafeDiv(static_cast<double>(cls.support),
                              static_cast<double>(m.total));
    m.precision += w * cls.precision;
    m.recall += w * cls.recall;
    m.f1 += w * cls.f1;
  }
  return m;
}

inline Metrics ComputeMetrics(std::span<const ConflictLabel> y_true,
                              std::span<const ConflictLabel> y_pred,
                              std::span<const ConflictLabel> classes,
                              Averaging averaging = Averaging::kMacro) {
  return MetricsFromConfusion(Confusion(y_true, y_pred, classes), averaging);
}

inline std::string FormatConfusion(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << std::setw(10) << "true\\pred";
  for (auto c : cm.classes) out << std::setw(7) << LabelAbbrev(c);
  out << '\n';
  for (std::size_t t = 0; t < cm.size(); ++t) {
    out << std::setw(10) << LabelAbbrev(cm.classes[t]);
    for (std::size_t p = 0; p < cm.size(); ++p)
      out << std::setw(7) << cm.at(t, p);
    out << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json MetricsToJson(const Metrics& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["averaging"] = AveragingName(m.averaging);
  j["total"] = m.total;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& c : m.per_class) {
    nlohmann::ordered_json r;
    r["label"] = LabelName(c.label);
    r["precision"] = c.precision;
    r["recall"] = c.recall;
    r["f1"] = c.f1;
    r["support"] = c.support;
    per.push_back(r);
  }
  j["per_class"] = per;
  return j;
}

inline nlohmann::ordered_json ConfusionToJson(const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json names = nlohmann::ordered_json::array();
  for (auto c : cm.classes) names.push_back(LabelName(c));
  j["classes"] = names;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < cm.size(); ++t) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < cm.size(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  j["counts"] = rows;
  return j;
}

}  // namespace normconflict
