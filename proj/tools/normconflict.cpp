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

// normconflict: extract norms, build datasets, train and evaluate the
// classifier, and serve the annotation backend.
//
// Exit codes: 0 success, 2 input error, 3 pipeline error, 4 service error.

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "normconflict/annotation_http.hpp"
#include "normconflict/normconflict.hpp"

namespace fs = std::filesystem;
using namespace normconflict;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitService = 4;

// Thrown for problems with the command line or its input files.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 42;
  bool no_timestamp = false;
};

std::string Timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void RequireFile(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw InputError("no such file: " + path.string());
}

Dataset LoadDatasetArg(const fs::path& path) {
  RequireFile(path);
  return LoadDataset(path);
}

WordVectorStore LoadVectorsArg(const fs::path& path) {
  RequireFile(path);
  return LoadWordVectors(path);
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::vector<std::string> contracts;
  std::string lexicon;
  std::string out;
  std::string pairs_out;
  std::string scope = "same-contract";
};

int RunExtract(const ExtractArgs& a, const Globals& g) {
  try {
    ModalLexicon lexicon =
        a.lexicon.empty() ? ModalLexicon::Default() : LoadLexicon(a.lexicon);
    std::vector<fs::path> files;
    for (const auto& c : a.contracts) {
      std::error_code ec;
      if (fs::is_directory(c, ec)) {
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(c))
          if (e.is_regular_file()) found.push_back(e.path());
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
      } else {
        RequireFile(c);
        files.emplace_back(c);
      }
    }
    std::vector<Norm> norms;
    for (const auto& f : files) {
      auto part = ExtractNorms(LoadContract(f), lexicon);
      norms.insert(norms.end(), part.begin(), part.end());
    }
    auto out = OpenOut(a.out);
    WriteNorms(norms, out);
    std::size_t pair_count = 0;
    if (!a.pairs_out.empty()) {
      const auto scope = a.scope == "all" ? PairScope::kAllPairs
                                          : PairScope::kSameContract;
      Dataset d;
      d.pairs = GeneratePairs(norms, scope);
      pair_count = d.size();
      auto pout = OpenOut(a.pairs_out);
      WriteDataset(d, pout);
    }
    std::cout << "seed: " << g.seed << '\n'
              << "contracts: " << files.size() << '\n'
              << "norms: " << norms.size() << " -> " << a.out << '\n';
    if (!a.pairs_out.empty())
      std::cout << "pairs: " << pair_count << " -> " << a.pairs_out << '\n';
    return kExitOk;
  } catch (const Error& e) {
    // Every failure of extraction concerns its inputs.
    throw InputError(e.what());
  }
}

// ---------------------------------------------------------------------------
// train

struct ExperimentArgs {
  std::string dataset;
  std::string vectors;
  std::string task = "all";
  std::string mode = "all";
  std::size_t k = 10;
  double test_fraction = 0.2;
  std::string negatives = "all";
  std::string averaging = "macro";
  double C = 1.0;
  int max_epochs = 1000;
  std::string out;
  bool folds = false;
};

ExperimentConfig MakeConfig(const ExperimentArgs& a, const Globals& g) {
  ExperimentConfig c;
  c.k = a.k;
  c.test_fraction = a.test_fraction;
  c.seed = g.seed;
  auto neg = NegativeSampling::Parse(a.negatives);
  if (!neg) throw InputError("bad --negatives: " + a.negatives);
  c.negatives = *neg;
  auto avg = ParseAveraging(a.averaging);
  if (!avg) throw InputError("bad --averaging: " + a.averaging);
  c.averaging = *avg;
  c.train.C = a.C;
  c.train.max_epochs = a.max_epochs;
  return c;
}

std::vector<Task> TasksArg(const std::string& s) {
  if (s == "all") return {Task::kTypeCPlusNon, Task::kTypeC};
  auto t = ParseTask(s);
  if (!t) throw InputError("bad --task: " + s);
  return {*t};
}

std::vector<FeatureMode> ModesArg(const std::string& s) {
  if (s == "all") return {FeatureMode::kOffset, FeatureMode::kConcat};
  auto m = ParseFeatureMode(s);
  if (!m) throw InputError("bad --mode: " + s);
  return {*m};
}

int RunTrain(const ExperimentArgs& a, const std::string& log_path,
             const Globals& g) {
  auto tasks = TasksArg(a.task);
  auto modes = ModesArg(a.mode);
  if (tasks.size() != 1 || modes.size() != 1)
    throw InputError("train needs a single --task and --mode");
  auto config = MakeConfig(a, g);
  config.task = tasks.front();
  config.mode = modes.front();
  config.Validate();
  auto dataset = LoadDatasetArg(a.dataset);
  auto store = LoadVectorsArg(a.vectors);

  Dataset data = PrepareTaskDataset(dataset, config.task, config.negatives,
                                    DeriveSeed(g.seed, 1));
  auto split = SplitTrainTest(data, config.test_fraction, DeriveSeed(g.seed, 2));
  auto train = EmbedPairs(split.train, store, config.mode, config.embed);
  TrainConfig tc = config.train;
  tc.seed = g.seed;
  TrainingLog log;
  auto model = Train(train.features, train.labels, tc,
                     TaskClasses(config.task), &log);
  SaveModel(model, a.out);

  const fs::path lp = log_path.empty() ? fs::path(a.out + ".log") : fs::path(log_path);
  auto out = OpenOut(lp);
  nlohmann::ordered_json head;
  head["seed"] = g.seed;
  head["task"] = TaskName(config.task);
  head["mode"] = FeatureModeName(config.mode);
  head["train_size"] = train.features.size();
  head["epochs"] = log.epochs;
  head["converged"] = log.converged;
  if (!g.no_timestamp) head["timestamp"] = Timestamp();
  out << head.dump() << '\n';
  for (std::size_t e = 0; e < log.objective.size(); ++e) {
    nlohmann::ordered_json row;
    row["epoch"] = e;
    row["objective"] = log.objective[e];
    row["dual"] = log.dual[e];
    out << row.dump() << '\n';
  }
  std::cout << "seed: " << g.seed << '\n'
            << "task: " << TaskName(config.task)
            << "  mode: " << FeatureModeName(config.mode) << '\n'
            << "train pairs: " << train.features.size() << '\n'
            << "epochs: " << log.epochs
            << (log.converged ? " (converged)" : " (epoch limit)") << '\n'
            << "objective: " << log.objective.back() << '\n'
            << "model: " << a.out << "  log: " << lp.string() << '\n';
  for (const auto& w : split.warnings) std::cout << "warning: " << w << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

int RunEvaluate(const ExperimentArgs& a, const Globals& g) {
  auto config = MakeConfig(a, g);
  config.Validate();
  auto tasks = TasksArg(a.task);
  auto modes = ModesArg(a.mode);
  auto dataset = LoadDatasetArg(a.dataset);
  auto store = LoadVectorsArg(a.vectors);
  auto report = RunExperimentGrid(dataset, store, config, tasks, modes);
  std::string text = FormatReport(report, a.folds);
  if (!g.no_timestamp) text = "generated: " + Timestamp() + "\n" + text;
  std::cout << text;
  if (!a.out.empty()) {
    OpenOut(a.out + ".txt") << text;
    OpenOut(a.out + ".jsonl") << ReportToJsonLines(report);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  std::string model;
  std::string vectors;
  std::string norm1;
  std::string norm2;
  std::string pairs;
  std::string out;
};

nlohmann::ordered_json PredictionJson(const LinearModel& model,
                                      const Prediction& p) {
  nlohmann::ordered_json conf;
  for (std::size_t k = 0; k < model.num_classes(); ++k)
    conf[std::string(LabelName(model.classes[k]))] = p.confidence[k];
  nlohmann::ordered_json j;
  j["label"] = LabelName(p.label);
  j["confidence"] = conf;
  return j;
}

int RunClassify(const ClassifyArgs& a, const Globals& g) {
  RequireFile(a.model);
  auto model = LoadModel(a.model);
  auto store = LoadVectorsArg(a.vectors);
  auto classify = [&](const std::string& n1, const std::string& n2) {
    auto f = MakePairFeature(EmbedSentence(store, n1),
                             EmbedSentence(store, n2), model.feature_mode);
    return Predict(model, f);
  };
  std::cout << "seed: " << g.seed << '\n';
  if (a.pairs.empty()) {
    if (a.norm1.empty() || a.norm2.empty())
      throw InputError("give --norm1 and --norm2, or --pairs");
    auto p = classify(a.norm1, a.norm2);
    std::cout << "label: " << LabelName(p.label) << '\n';
    for (std::size_t k = 0; k < model.num_classes(); ++k)
      std::cout << "  " << std::left << std::setw(20)
                << LabelName(model.classes[k]) << std::right << std::fixed
                << std::setprecision(4) << p.confidence[k] << '\n';
    return kExitOk;
  }
  if (a.out.empty()) throw InputError("--pairs needs --out");
  RequireFile(a.pairs);
  std::ifstream in(a.pairs);
  auto out = OpenOut(a.out);
  std::string line;
  std::size_t line_no = 0, count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("norm1") || !j.contains("norm2") ||
        !j["norm1"].is_string() || !j["norm2"].is_string())
      throw Error(ErrorCode::kMalformedRecord, "need norm1 and norm2",
                  line_no);
    nlohmann::ordered_json rec;
    rec["id"] = j.contains("id") ? j["id"] : nlohmann::json(nullptr);
    try {
      auto p = classify(j["norm1"].get<std::string>(),
                        j["norm2"].get<std::string>());
      rec.update(PredictionJson(model, p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoEmbeddableTokens) throw;
      rec["error"] = ErrorCodeName(e.code());
    }
    out << rec.dump() << '\n';
    ++count;
  }
  std::cout << "predictions: " << count << " -> " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// stats, synth, merge

int RunStats(const std::string& dataset, const std::string& format,
             const Globals& g) {
  auto stats = ComputeStats(LoadDatasetArg(dataset));
  if (format == "json") {
    auto j = StatsToJson(stats);
    j["seed"] = g.seed;
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "seed: " << g.seed << '\n' << FormatStatsTable(stats);
  }
  return kExitOk;
}

struct SynthArgs {
  std::string dataset_out;
  std::string vectors_out;
  std::size_t dim = 50;
  std::vector<std::size_t> counts;
};

int RunSynth(const SynthArgs& a, const Globals& g) {
  auto config = SyntheticCorpusConfig::Standard(g.seed);
  if (!a.counts.empty()) {
    if (a.counts.size() != kNumLabels)
      throw InputError("--counts needs 5 values (NC DM DS DO OC)");
    std::copy(a.counts.begin(), a.counts.end(), config.counts.begin());
  }
  auto d = GenerateSyntheticCorpus(config);
  SaveDataset(d, a.dataset_out);
  auto vocab = CorpusVocabulary(d);
  if (!a.vectors_out.empty()) {
    auto out = OpenOut(a.vectors_out);
    WriteSyntheticVectors(vocab, a.dim, g.seed, out);
  }
  std::cout << "seed: " << g.seed << '\n'
            << "pairs: " << d.size() << " -> " << a.dataset_out << '\n';
  if (!a.vectors_out.empty())
    std::cout << "vectors: " << vocab.size() << " x " << a.dim << " -> "
              << a.vectors_out << '\n';
  std::cout << FormatStatsTable(ComputeStats(d));
  return kExitOk;
}

int RunMerge(const std::vector<std::string>& inputs, const std::string& out,
             const Globals& g) {
  Dataset merged;
  merged.name = fs::path(out).stem().string();
  for (const auto& in : inputs)
    merged = MergeDatasets(merged, LoadDatasetArg(in));
  SaveDataset(merged, out);
  std::cout << "seed: " << g.seed << '\n'
            << "pairs: " << merged.size() << " -> " << out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// serve

struct ServeArgs {
  std::string store;
  std::string contracts;
  std::string lexicon;
  std::string bind = "127.0.0.1:8080";
  std::string static_dir;
};

int RunServe(const ServeArgs& a, const Globals& g) {
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw InputError("--bind needs host:port");
  const std::string host = a.bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(a.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad port in --bind " + a.bind);
  }
  ModalLexicon lexicon =
      a.lexicon.empty() ? ModalLexicon::Default() : LoadLexicon(a.lexicon);
  auto norms = LoadContractNorms(a.contracts, lexicon);
  AnnotationService service(std::move(norms), a.store, g.seed);

  // Interrupts are taken by a dedicated thread so that handlers never run
  // inside the server's worker threads.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  httplib::Server server;
  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  MountAnnotationService(server, service, static_dir);

  int bound = -1;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) {
    std::cerr << "error: cannot bind " << a.bind << '\n';
    return kExitService;
  }
  std::cout << "seed: " << g.seed << '\n'
            << "norms: " << service.norms().size() << '\n'
            << "store: " << a.store << '\n'
            << "listening: " << host << ':' << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  const bool ok = server.listen_after_bind();
  // listen_after_bind also returns when stop() is called; wake the waiter
  // in case the server ended on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "stopped" << std::endl;
  return ok ? kExitOk : kExitService;
}

// ---------------------------------------------------------------------------
// Config overlay: a key=value file whose entries act as "--key value"
// flags unless the same flag is given on the command line.

std::vector<std::string> ApplyConfigOverlay(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw InputError("cannot open config " + *path);
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw InputError(*path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    const std::string key(Trim(view.substr(0, eq)));
    const std::string value(Trim(view.substr(eq + 1)));
    const std::string flag = "--" + key;
    if (key.empty() || given(flag)) continue;
    if (value == "true") {
      args.push_back(flag);
    } else if (value != "false") {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

void AddExperimentOptions(CLI::App* cmd, ExperimentArgs& a, bool grid) {
  cmd->add_option("--dataset", a.dataset, "Dataset file (JSONL)")->required();
  cmd->add_option("--vectors", a.vectors, "Word vector file")->required();
  cmd->add_option("--task", a.task,
                  grid ? "all, typec-plus-non or typec-only"
                       : "typec-plus-non or typec-only")
      ->capture_default_str();
  cmd->add_option("--mode", a.mode,
                  grid ? "all, offset or concat" : "offset or concat")
      ->capture_default_str();
  cmd->add_option("--test-fraction", a.test_fraction)->capture_default_str();
  cmd->add_option("--negatives", a.negatives,
                  "all, match-conflicts or a count")
      ->capture_default_str();
  cmd->add_option("--C", a.C, "SVM penalty")->capture_default_str();
  cmd->add_option("--max-epochs", a.max_epochs)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(true);
  CLI::App app{"Norm conflict classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")
      ->capture_default_str();
  app.add_flag("--no-timestamp", g.no_timestamp,
               "Leave wall-clock times out of outputs");
  app.add_option("--config", "key=value file of default flags");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Extract norms from contracts");
  extract->add_option("--contracts", ex.contracts, "Contract files or dirs")
      ->required();
  extract->add_option("--lexicon", ex.lexicon, "Modal lexicon (TSV)");
  extract->add_option("--out", ex.out, "Norms file to write")->required();
  extract->add_option("--pairs-out", ex.pairs_out,
                      "Also write candidate pairs as a dataset");
  extract->add_option("--scope", ex.scope, "same-contract or all")
      ->check(CLI::IsMember({"same-contract", "all"}))
      ->capture_default_str();

  ExperimentArgs tr;
  tr.task = "typec-only";
  tr.mode = "concat";
  std::string log_path;
  auto* train = app.add_subcommand("train", "Train a model on the train split");
  AddExperimentOptions(train, tr, false);
  train->add_option("--out", tr.out, "Model file to write")->required();
  train->add_option("--log", log_path, "Training log (default <out>.log)");

  ExperimentArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Run the experiment grid");
  AddExperimentOptions(evaluate, ev, true);
  evaluate->add_option("--k", ev.k, "Number of folds")->capture_default_str();
  evaluate->add_option("--averaging", ev.averaging, "macro or weighted")
      ->capture_default_str();
  evaluate->add_option("--out", ev.out, "Write <out>.txt and <out>.jsonl");
  evaluate->add_flag("--folds", ev.folds, "Print per-fold scores");

  ClassifyArgs cl;
  auto* classify = app.add_subcommand("classify", "Classify norm pairs");
  classify->add_option("--model", cl.model)->required();
  classify->add_option("--vectors", cl.vectors)->required();
  classify->add_option("--norm1", cl.norm1);
  classify->add_option("--norm2", cl.norm2);
  classify->add_option("--pairs", cl.pairs, "JSONL with norm1, norm2 (, id)");
  classify->add_option("--out", cl.out, "Predictions file for --pairs");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  serve->add_option("--store", sv.store, "Dataset file to append to")
      ->required();
  serve->add_option("--contracts", sv.contracts, "Directory of contracts")
      ->required();
  serve->add_option("--lexicon", sv.lexicon);
  serve->add_option("--bind", sv.bind, "host:port (port 0 picks one)")
      ->capture_default_str();
  serve->add_option("--static", sv.static_dir, "Directory served at /");

  std::string stats_dataset, stats_format = "text";
  auto* stats = app.add_subcommand("stats", "Count pairs per label");
  stats->add_option("--dataset", stats_dataset)->required();
  stats->add_option("--format", stats_format)
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  SynthArgs sy;
  auto* synth = app.add_subcommand(
      "synth", "Write the synthetic corpus and its word vectors");
  synth->add_option("--dataset-out", sy.dataset_out)->required();
  synth->add_option("--vectors-out", sy.vectors_out);
  synth->add_option("--dim", sy.dim)->capture_default_str();
  synth->add_option("--counts", sy.counts,
                    "Pairs per label NC DM DS DO OC (default 11329 97 61 30 40)");

  std::vector<std::string> merge_inputs;
  std::string merge_out;
  auto* merge = app.add_subcommand("merge", "Concatenate datasets");
  merge->add_option("--inputs", merge_inputs)->required();
  merge->add_option("--out", merge_out)->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = ApplyConfigOverlay(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*extract) return RunExtract(ex, g);
    if (*train) return RunTrain(tr, log_path, g);
    if (*evaluate) return RunEvaluate(ev, g);
    if (*classify) return RunClassify(cl, g);
    if (*serve) return RunServe(sv, g);
    if (*stats) return RunStats(stats_dataset, stats_format, g);
    if (*synth) return RunSynth(sy, g);
    if (*merge) return RunMerge(merge_inputs, merge_out, g);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kIoFailure ? kExitInput : kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitInput;
}
