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

// Experimental protocol: stratified train/test split, balanced k-fold cross
// validation, best-fold model selection by F-score, and the grid of
// {5-class, 4-class} x {offset, concat} experiments.
//
// Seeds: an experiment with seed s draws negatives with DeriveSeed(s, 1),
// splits with DeriveSeed(s, 2), builds folds with DeriveSeed(s, 3), and
// trains fold f with seed s ^ f.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "normconflict/classifier.hpp"
#include "normconflict/corpus.hpp"
#include "normconflict/embedding.hpp"
#include "normconflict/error.hpp"
#include "normconflict/metrics.hpp"
#include "normconflict/random.hpp"

namespace normconflict {

// kTypeCPlusNon: four conflict types plus non-conflict (5 classes).
// kTypeC: the four conflict types only.
enum class Task { kTypeCPlusNon, kTypeC };

inline std::string_view TaskName(Task t) {
  return t == Task::kTypeCPlusNon ? "TypeC+Non" : "TypeC";
}

inline std::optional<Task> ParseTask(std::string_view s) {
  if (s == "typec+non" || s == "typec-plus-non" || s == "TypeC+Non")
    return Task::kTypeCPlusNon;
  if (s == "typec" || s == "typec-only" || s == "TypeC") return Task::kTypeC;
  return std::nullopt;
}

inline std::vector<ConflictLabel> TaskClasses(Task t) {
  if (t == Task::kTypeCPlusNon)
    return {kAllLabels.begin(), kAllLabels.end()};
  return {kConflictLabels.begin(), kConflictLabels.end()};
}

// How many non-conflict pairs enter a 5-class experiment before splitting.
struct NegativeSampling {
  enum class Kind { kAll, kMatchConflicts, kCount };
  Kind kind = Kind::kAll;
  std::size_t count = 0;

  static NegativeSampling All() { return {}; }
  static NegativeSampling MatchConflicts() { return {Kind::kMatchConflicts, 0}; }
  static NegativeSampling Count(std::size_t n) { return {Kind::kCount, n}; }

  std::string Describe() const {
    switch (kind) {
      case Kind::kAll: return "all";
      case Kind::kMatchConflicts: return "match-conflicts";
      case Kind::kCount: return std::to_string(count);
    }
    return "";
  }

  static std::optional<NegativeSampling> Parse(std::string_view s) {
    if (s == "all") return All();
    if (s == "match-conflicts") return MatchConflicts();
    std::size_t n = 0;
    if (detail::ParseSize(s, n)) return Count(n);
    return std::nullopt;
  }
};

struct ExperimentConfig {
  Task task = Task::kTypeCPlusNon;
  FeatureMode mode = FeatureMode::kConcat;
  std::size_t k = 10;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  NegativeSampling negatives;
  Averaging averaging = Averaging::kMacro;
  TrainConfig train;
  EmbedOptions embed;

  void Validate() const {
    if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
    if (!(test_fraction > 0 && test_fraction < 1))
      throw Error(ErrorCode::kInvalidArgument,
                  "test fraction must be in (0, 1)");
    train.Validate();
  }
};

// ---------------------------------------------------------------------------
// Train/test split

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

// Stratified by label. Each class with n >= 2 members sends
// clamp(round(fraction * n), 1, n - 1) of them to the test set; a class with
// fewer than 2 members stays in training and produces a warning. Both halves
// keep the dataset's record order.
inline TrainTestSplit SplitTrainTest(const Dataset& dataset,
                                     double test_fraction, std::uint64_t seed) {
  if (dataset.empty())
    throw Error(ErrorCode::kInsufficientData, "cannot split an empty dataset");
  if (!(test_fraction > 0 && test_fraction < 1))
    throw Error(ErrorCode::kInvalidArgument, "test fraction must be in (0, 1)");
  SplitMix64 rng(seed);
  std::vector<bool> in_test(dataset.size(), false);
  TrainTestSplit out;
  for (auto label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (dataset.pairs[i].label == label) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < 2) {
      out.warnings.push_back("ClassTooSmall: " + std::string(LabelName(label)) +
                             " has 1 pair; kept in the training split");
      continue;
    }
    rng.Shuffle(members);
    const auto n = static_cast<double>(members.size());
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * n));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    for (std::size_t j = 0; j < n_test; ++j) in_test[members[j]] = true;
  }
  out.train.name = dataset.name + "-train";
  out.test.name = dataset.name + "-test";
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (in_test[i] ? out.test : out.train).pairs.push_back(dataset.pairs[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Folds

struct Folds {
  std::vector<std::vector<std::size_t>> folds;  // indices into the dataset
  std::vector<std::size_t> unused;              // indices left out
};

namespace detail {

// Deals indices into k folds round-robin after grouping them by label in
// canonical order and shuffling within each label, so every fold receives
// a near-equal share of each class.
inline std::vector<std::vector<std::size_t>> DealStratified(
    const Dataset& d, std::vector<std::size_t> indices, std::size_t k,
    SplitMix64& rng) {
  std::vector<std::size_t> order;
  for (auto label : kAllLabels) {
    std::vector<std::size_t> group;
    for (auto i : indices)
      if (d.pairs[i].label == label) group.push_back(i);
    rng.Shuffle(group);
    order.insert(order.end(), group.begin(), group.end());
  }
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t p = 0; p < order.size(); ++p) folds[p % k].push_back(order[p]);
  return folds;
}

}  // namespace detail

// kTypeCPlusNon: conflicts and non-conflicts are both cut down (seeded, no
// replacement) to m = min(#conflicts, #non-conflicts). Conflicts are dealt
// stratified by type; each fold then takes exactly as many non-conflicts as
// it holds conflicts. Requires >= k of each.
//
// kTypeC: only conflicts participate, dealt stratified by type; any
// non-conflict pairs are reported unused. Requires >= k conflicts.
inline Folds MakeFolds(const Dataset& train, std::size_t k, Task task,
                       std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  std::vector<std::size_t> conflicts, negatives;
  for (std::size_t i = 0; i < train.size(); ++i)
    (IsConflict(train.pairs[i].label) ? conflicts : negatives).push_back(i);

  SplitMix64 rng(seed);
  Folds out;
  if (task == Task::kTypeC) {
    if (conflicts.size() < k)
      throw Error(ErrorCode::kInsufficientData,
                  std::to_string(conflicts.size()) + " conflicts for k=" +
                      std::to_string(k));
    out.folds = detail::DealStratified(train, conflicts, k, rng);
    out.unused = negatives;
  } else {
    if (conflicts.size() < k || negatives.size() < k)
      throw Error(ErrorCode::kInsufficientData,
                  std::to_string(conflicts.size()) + " conflicts and " +
                      std::to_string(negatives.size()) +
                      " non-conflicts for k=" + std::to_string(k));
    const std::size_t m = std::min(conflicts.size(), negatives.size());
    auto keep = [&](std::vector<std::size_t>& group) {
      if (group.size() == m) return;
      auto chosen = rng.SampleIndices(group.size(), m);
      std::vector<bool> picked(group.size(), false);
      for (auto c : chosen) picked[c] = true;
      std::vector<std::size_t> kept;
      for (std::size_t j = 0; j < group.size(); ++j)
        (picked[j] ? kept : out.unused).push_back(group[j]);
      group = std::move(kept);
    };
    keep(conflicts);
    keep(negatives);
    out.folds = detail::DealStratified(train, conflicts, k, rng);
    rng.Shuffle(negatives);
    std::size_t next = 0;
    for (auto& fold : out.folds) {
      const std::size_t want = fold.size();
      fold.insert(fold.end(), negatives.begin() + static_cast<std::ptrdiff_t>(next),
                  negatives.begin() + static_cast<std::ptrdiff_t>(next + want));
      next += want;
    }
  }
  for (auto& fold : out.folds) std::sort(fold.begin(), fold.end());
  std::sort(out.unused.begin(), out.unused.end());
  return out;
}

// ---------------------------------------------------------------------------
// Cross validation

struct CrossValidation {
  std::vector<Metrics> fold_metrics;
  std::size_t best_fold = 0;
  LinearModel best_model;
};

// For each fold f, trains on the other folds (seed config.seed ^ f) and
// validates on f. The best fold has the highest F-score, ties going to the
// lowest index; its model is returned.
inline CrossValidation CrossValidate(std::span<const PairFeature> features,
                                     std::span<const ConflictLabel> labels,
                                     const Folds& folds,
                                     const std::vector<ConflictLabel>& classes,
                                     const TrainConfig& config,
                                     Averaging averaging = Averaging::kMacro) {
  if (features.size() != labels.size())
    throw Error(ErrorCode::kLengthMismatch, "features and labels differ");
  if (folds.folds.size() < 2)
    throw Error(ErrorCode::kInsufficientData, "need at least 2 folds");
  CrossValidation cv;
  std::optional<LinearModel> best;
  for (std::size_t f = 0; f < folds.folds.size(); ++f) {
    std::vector<PairFeature> train_x;
    std::vector<ConflictLabel> train_y;
    for (std::size_t g = 0; g < folds.folds.size(); ++g) {
      if (g == f) continue;
      for (auto i : folds.folds[g]) {
        train_x.push_back(features[i]);
        train_y.push_back(labels[i]);
      }
    }
    TrainConfig fold_config = config;
    fold_config.seed = config.seed ^ static_cast<std::uint64_t>(f);
    LinearModel model = Train(train_x, train_y, fold_config, classes);

    std::vector<ConflictLabel> truth, predicted;
    for (auto i : folds.folds[f]) {
      truth.push_back(labels[i]);
      predicted.push_back(Predict(model, features[i]).label);
    }
    Metrics m = truth.empty() ? Metrics{}
                              : ComputeMetrics(truth, predicted, classes,
                                               averaging);
    if (!best || m.f1 > cv.fold_metrics[cv.best_fold].f1) {
      cv.best_fold = f;
      best = std::move(model);
    }
    cv.fold_metrics.push_back(std::move(m));
  }
  cv.best_model = std::move(*best);
  return cv;
}

// ---------------------------------------------------------------------------
// Experiments

struct EmbeddedPairs {
  std::vector<PairFeature> features;
  std::vector<ConflictLabel> labels;
  std::vector<std::string> ids;
  std::size_t skipped = 0;  // pairs with a sentence that could not be embedded
};

// Per-sentence subsampling seeds are DeriveSeed(options.seed, hash(pair id))
// for norm1 and that value + 1 for norm2; they only matter when the
// subsample probability is positive.
inline EmbeddedPairs EmbedPairs(const Dataset& d, const WordVectorStore& store,
                                FeatureMode mode, const EmbedOptions& options) {
  EmbeddedPairs out;
  for (const auto& p : d.pairs) {
    EmbedOptions o1 = options, o2 = options;
    o1.seed = DeriveSeed(options.seed, Fnv1a64(p.id));
    o2.seed = o1.seed + 1;
    try {
      auto e1 = EmbedSentence(store, p.norm1, o1);
      auto e2 = EmbedSentence(store, p.norm2, o2);
      out.features.push_back(MakePairFeature(e1, e2, mode));
      out.labels.push_back(p.label);
      out.ids.push_back(p.id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoEmbeddableTokens) throw;
      ++out.skipped;
    }
  }
  return out;
}

struct ExperimentResult {
  Task task;
  FeatureMode mode;
  std::vector<ConflictLabel> classes;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t fold_pairs = 0;  // pairs placed in folds
  std::size_t unused = 0;      // training pairs left out by balancing
  std::size_t skipped = 0;     // pairs dropped for lack of known tokens
  std::vector<Metrics> fold_metrics;
  std::size_t best_fold = 0;
  Metrics test;
  ConfusionMatrix confusion;
  std::vector<std::string> warnings;
  LinearModel model;
};

// Filters the dataset to the task's classes and applies negative sampling.
inline Dataset PrepareTaskDataset(const Dataset& dataset, Task task,
                                  const NegativeSampling& negatives,
                                  std::uint64_t seed) {
  Dataset out;
  out.name = dataset.name;
  std::vector<std::size_t> neg;
  std::size_t conflicts = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (IsConflict(dataset.pairs[i].label)) ++conflicts;
    else neg.push_back(i);
  }
  std::vector<bool> keep(dataset.size(), true);
  if (task == Task::kTypeC) {
    for (auto i : neg) keep[i] = false;
  } else if (negatives.kind != NegativeSampling::Kind::kAll) {
    const std::size_t want =
        negatives.kind == NegativeSampling::Kind::kMatchConflicts
            ? conflicts
            : negatives.count;
    if (want < neg.size()) {
      SplitMix64 rng(seed);
      auto chosen = rng.SampleIndices(neg.size(), want);
      for (auto i : neg) keep[i] = false;
      for (auto c : chosen) keep[neg[c]] = true;
    }
  }
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (keep[i]) out.pairs.push_back(dataset.pairs[i]);
  return out;
}

inline ExperimentResult RunExperiment(const Dataset& dataset,
                                      const WordVectorStore& store,
                                      const ExperimentConfig& config) {
  config.Validate();
  const std::uint64_t seed = config.seed;
  Dataset data = PrepareTaskDataset(dataset, config.task, config.negatives,
                                    DeriveSeed(seed, 1));
  auto split = SplitTrainTest(data, config.test_fraction, DeriveSeed(seed, 2));

  ExperimentResult r;
  r.task = config.task;
  r.mode = config.mode;
  r.classes = TaskClasses(config.task);
  r.warnings = split.warnings;

  auto train = EmbedPairs(split.train, store, config.mode, config.embed);
  auto test = EmbedPairs(split.test, store, config.mode, config.embed);
  r.skipped = train.skipped + test.skipped;
  if (r.skipped > 0)
    r.warnings.push_back(std::to_string(r.skipped) +
                         " pair(s) skipped: no known tokens");

  // Folds are built over the embeddable training pairs only.
  Dataset train_set;
  train_set.name = split.train.name;
  {
    std::size_t j = 0;
    for (const auto& p : split.train.pairs)
      if (j < train.ids.size() && p.id == train.ids[j]) {
        train_set.pairs.push_back(p);
        ++j;
      }
  }
  auto folds = MakeFolds(train_set, config.k, config.task, DeriveSeed(seed, 3));
  r.train_size = train_set.size();
  r.test_size = test.features.size();
  r.unused = folds.unused.size();
  for (const auto& f : folds.folds) r.fold_pairs += f.size();

  TrainConfig tc = config.train;
  tc.seed = seed;
  auto cv = CrossValidate(train.features, train.labels, folds, r.classes, tc,
                          config.averaging);
  r.fold_metrics = std::move(cv.fold_metrics);
  r.best_fold = cv.best_fold;
  r.model = std::move(cv.best_model);

  if (test.features.empty())
    throw Error(ErrorCode::kInsufficientData, "empty test split");
  std::vector<ConflictLabel> predicted;
  for (const auto& f : test.features)
    predicted.push_back(Predict(r.model, f).label);
  r.confusion = Confusion(test.labels, predicted, r.classes);
  r.test = MetricsFromConfusion(r.confusion, config.averaging);
  return r;
}

struct GridReport {
  ExperimentConfig base;
  std::string dataset_name;
  std::size_t dataset_size = 0;
  std::vector<ExperimentResult> cells;
};

// Runs {TypeC+Non, TypeC} x {offset, concat}, restricted to the given tasks
// and modes, in that row order.
inline GridReport RunExperimentGrid(
    const Dataset& dataset, const WordVectorStore& store,
    const ExperimentConfig& base,
    std::vector<Task> tasks = {Task::kTypeCPlusNon, Task::kTypeC},
    std::vector<FeatureMode> modes = {FeatureMode::kOffset,
                                      FeatureMode::kConcat}) {
  GridReport report;
  report.base = base;
  report.dataset_name = dataset.name;
  report.dataset_size = dataset.size();
  for (auto task : tasks) {
    for (auto mode : modes) {
      ExperimentConfig cfg = base;
      cfg.task = task;
      cfg.mode = mode;
      report.cells.push_back(RunExperiment(dataset, store, cfg));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string CellName(const ExperimentResult& r) {
  return std::string(TaskName(r.task)) + " (" +
         std::string(FeatureModeName(r.mode)) + ")";
}

inline std::string FormatReport(const GridReport& report,
                                bool include_folds = false) {
  std::ostringstream out;
  const auto& b = report.base;
  out << "dataset: " << report.dataset_name << " (" << report.dataset_size
      << " pairs)\n";
  out << "seed: " << b.seed << "  k: " << b.k
      << "  test_fraction: " << b.test_fraction
      << "  negatives: " << b.negatives.Describe()
      << "  averaging: " << AveragingName(b.averaging) << '\n';
  out << "svm: C=" << b.train.C << " loss=" << LossName(b.train.loss)
      << " max_epochs=" << b.train.max_epochs << '\n';
  out << '\n';
  out << std::left << std::setw(22) << "approach" << std::right;
  for (auto h : {"A", "P", "R", "F"}) out << std::setw(8) << h;
  out << std::setw(8) << "best" << std::setw(8) << "test" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& c : report.cells) {
    out << std::left << std::setw(22) << CellName(c) << std::right
        << std::setw(8) << c.test.accuracy << std::setw(8) << c.test.precision
        << std::setw(8) << c.test.recall << std::setw(8) << c.test.f1
        << std::setw(8) << c.best_fold << std::setw(8) << c.test_size << '\n';
  }
  for (const auto& c : report.cells) {
    out << "\nconfusion " << CellName(c) << '\n' << FormatConfusion(c.confusion);
    for (const auto& w : c.warnings) out << "warning: " << w << '\n';
    if (include_folds) {
      for (std::size_t f = 0; f < c.fold_metrics.size(); ++f) {
        const auto& m = c.fold_metrics[f];
        out << "  fold " << f << "  A " << m.accuracy << "  F " << m.f1
            << '\n';
      }
    }
  }
  return out.str();
}

inline nlohmann::ordered_json CellToJson(const ExperimentResult& c,
                                         const GridReport& report) {
  nlohmann::ordered_json j;
  j["task"] = TaskName(c.task);
  j["mode"] = FeatureModeName(c.mode);
  j["seed"] = report.base.seed;
  j["k"] = report.base.k;
  j["test_fraction"] = report.base.test_fraction;
  j["negatives"] = report.base.negatives.Describe();
  j["dataset"] = report.dataset_name;
  j["train_size"] = c.train_size;
  j["test_size"] = c.test_size;
  j["fold_pairs"] = c.fold_pairs;
  j["unused"] = c.unused;
  j["skipped"] = c.skipped;
  j["best_fold"] = c.best_fold;
  j["test"] = MetricsToJson(c.test);
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& m : c.fold_metrics) folds.push_back(MetricsToJson(m));
  j["folds"] = folds;
  j["confusion"] = ConfusionToJson(c.confusion);
  j["warnings"] = c.warnings;
  return j;
}

// One JSON object per experiment cell, one per line.
inline std::string ReportToJsonLines(const GridReport& report) {
  std::string out;
  for (const auto& c : report.cells) out += CellToJson(c, report).dump() + "\n";
  return out;
}

}  // namespace normconflict
