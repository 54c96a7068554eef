// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include "pcil/error.hpp"
#include "pcil/ranpac.hpp"

#ifndef PCIL_VERSION_STRING
#define PCIL_VERSION_STRING "0.0.0"
#endif

namespace pcil {

const char* library_version() noexcept { return PCIL_VERSION_STRING; }

const char* to_string(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::kNcm: return "ncm";
    case LearnerKind::kLda: return "lda";
    case LearnerKind::kRanPac: return "ranpac";
    case LearnerKind::kZeroShot: return "zeroshot";
  }
  return "unknown";
}

LearnerKind learner_kind_from_string(const std::string& s) {
  for (auto k : {LearnerKind::kNcm, LearnerKind::kLda, LearnerKind::kRanPac,
                 LearnerKind::kZeroShot}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::kConfig, "unknown learner '" + s + "' (expected ncm, lda, ranpac or zeroshot)");
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate(bool check_files) const {
  if (tasks < 1) fail(ErrorKind::kConfig, "T must be at least 1");
  if (train_path.empty() || test_path.empty()) {
    fail(ErrorKind::kConfig, "train and test feature files are required");
  }
  if (eval_threads < 1) fail(ErrorKind::kConfig, "eval_threads must be at least 1");
  const auto& l = learner;
  if (l.kind == LearnerKind::kLda && !(l.alpha >= 0.0 && l.alpha <= 1.0)) {
    fail(ErrorKind::kConfig, "lda alpha must lie in [0, 1]");
  }
  if (l.kind == LearnerKind::kRanPac) {
    if (l.hidden_dim == 0) fail(ErrorKind::kConfig, "ranpac M must be positive");
    if (l.lambda && !(*l.lambda > 0.0)) fail(ErrorKind::kConfig, "ranpac lambda must be > 0");
    for (double g : l.lambda_grid) {
      if (!(g > 0.0)) fail(ErrorKind::kConfig, "lambda grid entries must be > 0");
    }
  }
  if (l.kind == LearnerKind::kZeroShot && prototypes_path.empty()) {
    fail(ErrorKind::kConfig, "zeroshot learner needs a prototypes file");
  }
  if (check_files) {
    for (const auto* p : {&train_path, &test_path}) {
      if (!std::filesystem::exists(*p)) fail(ErrorKind::kConfig, "no such file: " + *p);
    }
    if (!prototypes_path.empty() && !std::filesystem::exists(prototypes_path)) {
      fail(ErrorKind::kConfig, "no such file: " + prototypes_path);
    }
  }
}

std::string ExperimentConfig::method_label() const {
  return method.empty() ? std::string(to_string(learner.kind)) : method;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json l;
  l["kind"] = to_string(c.learner.kind);
  l["alpha"] = c.learner.alpha;
  l["M"] = c.learner.hidden_dim;
  l["lambda"] = c.learner.lambda ? nlohmann::json(*c.learner.lambda) : nlohmann::json();
  l["lambda_grid"] = c.learner.lambda_grid;
  l["imbalance_correction"] = c.learner.imbalance_correction;
  l["projection_seed"] = c.learner.projection_seed;
  l["spill_threshold"] = c.learner.spill_threshold;
  return {{"train", c.train_path},
          {"test", c.test_path},
          {"tasks", c.tasks},
          {"seed", c.seed},
          {"learner", std::move(l)},
          {"output_dir", c.output_dir},
          {"prototypes", c.prototypes_path},
          {"method", c.method},
          {"backbone_tag", c.backbone_tag},
          {"dataset", c.dataset},
          {"eval_threads", c.eval_threads}};
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(ErrorKind::kConfig, "unknown " + where + " key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "experiment config must be a JSON object");
  reject_unknown(j, {"train", "test", "tasks", "seed", "learner", "output_dir", "prototypes",
                     "method", "backbone_tag", "dataset", "eval_threads"},
                 "config");
  ExperimentConfig c;
  try {
    c.train_path = j.value("train", c.train_path);
    c.test_path = j.value("test", c.test_path);
    c.tasks = j.value("tasks", c.tasks);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.prototypes_path = j.value("prototypes", c.prototypes_path);
    c.method = j.value("method", c.method);
    c.backbone_tag = j.value("backbone_tag", c.backbone_tag);
    c.dataset = j.value("dataset", c.dataset);
    c.eval_threads = j.value("eval_threads", c.eval_threads);
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      if (l.is_string()) {
        c.learner.kind = learner_kind_from_string(l.get<std::string>());
      } else {
        reject_unknown(l, {"kind", "alpha", "M", "lambda", "lambda_grid", "imbalance_correction",
                           "projection_seed", "spill_threshold"},
                       "learner");
        c.learner.kind = learner_kind_from_string(l.value("kind", std::string("ncm")));
        c.learner.alpha = l.value("alpha", c.learner.alpha);
        c.learner.hidden_dim = l.value("M", c.learner.hidden_dim);
        if (l.contains("lambda") && !l["lambda"].is_null()) c.learner.lambda = l["lambda"].get<double>();
        c.learner.lambda_grid = l.value("lambda_grid", c.learner.lambda_grid);
        c.learner.imbalance_correction =
            l.value("imbalance_correction", c.learner.imbalance_correction);
        c.learner.projection_seed = l.value("projection_seed", c.learner.projection_seed);
        c.learner.spill_threshold = l.value("spill_threshold", c.learner.spill_threshold);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  auto c = experiment_config_from_json(j);
  // Relative paths are taken relative to the config file.
  const auto base = path.parent_path();
  for (auto* p : {&c.train_path, &c.test_path, &c.prototypes_path, &c.output_dir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
  }
  return c;
}

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, std::size_t dim,
                                      const std::string& prototypes_path) {
  switch (config.kind) {
    case LearnerKind::kNcm:
      return std::make_unique<NcmLearner>(dim);
    case LearnerKind::kLda:
      return std::make_unique<LdaLearner>(dim, config.alpha);
    case LearnerKind::kRanPac: {
      RanPacConfig rc;
      rc.hidden_dim = config.hidden_dim;
      rc.projection_seed = config.projection_seed;
      rc.weighting = config.imbalance_correction ? GramWeighting::kInverseClassFrequency
                                                 : GramWeighting::kUnweighted;
      rc.lambda.fixed = config.lambda;
      if (!config.lambda_grid.empty()) rc.lambda.grid_multipliers = config.lambda_grid;
      rc.spill_threshold = config.spill_threshold;
      return std::make_unique<RanPacLearner>(dim, rc);
    }
    case LearnerKind::kZeroShot: {
      const auto protos = load_feature_file(prototypes_path);
      if (protos.dim() != dim) {
        fail(ErrorKind::kShape, "prototype dimension " + std::to_string(protos.dim()) +
                                    " differs from feature dimension " + std::to_string(dim));
      }
      std::map<ClassId, Eigen::VectorXd> map;
      for (std::size_t i = 0; i < protos.size(); ++i) {
        if (!map.emplace(protos.label(i), to_vector(protos.features(i))).second) {
          fail(ErrorKind::kData, "class " + std::to_string(protos.label(i)) +
                                     " has more than one prototype");
        }
      }
      return std::make_unique<FixedPrototypeLearner>(std::move(map));
    }
  }
  fail(ErrorKind::kConfig, "unknown learner kind");
}

// ---------------------------------------------------------------------------
// Access guard

TaskDataGuard::TaskDataGuard(const FeatureDataset& train, const TaskStream& stream)
    : train_(train), task_of_(train.size(), 0), reads_(stream.tasks()) {
  for (auto& row : reads_) row.assign(stream.tasks(), 0);
  for (std::uint32_t t = 0; t < stream.tasks(); ++t) {
    for (auto i : stream.train[t]) task_of_[i] = t;
  }
}

void TaskDataGuard::open_task(std::uint32_t task) {
  if (task >= reads_.size()) fail(ErrorKind::kProtocol, "task index out of range");
  if (open_ && task <= current_) {
    fail(ErrorKind::kProtocol, "tasks must be opened in increasing order");
  }
  current_ = task;
  open_ = true;
}

std::pair<ClassId, std::span<const float>> TaskDataGuard::read(std::size_t index) {
  if (!open_) fail(ErrorKind::kProtocol, "train data read before any task was opened");
  if (index >= task_of_.size()) fail(ErrorKind::kData, "train index out of range");
  const auto owner = task_of_[index];
  if (owner != current_) {
    fail(ErrorKind::kProtocol, "task " + std::to_string(current_ + 1) +
                                   " attempted to read train sample " + std::to_string(index) +
                                   " of task " + std::to_string(owner + 1));
  }
  ++reads_[current_][owner];
  return {train_.label(index), train_.features(index)};
}

// ---------------------------------------------------------------------------
// Experiment loop

namespace {

double evaluate_parallel(const Learner& learner, const FeatureDataset& test,
                         std::span<const std::size_t> indices, std::uint32_t threads) {
  if (indices.empty()) fail(ErrorKind::kEvaluation, "task has no test samples");
  const auto width = std::min<std::size_t>(threads, indices.size());
  if (width <= 1) {
    return evaluate_task([&](std::span<const float> x) { return learner.predict(x).label; },
                         test, indices);
  }
  std::atomic<std::size_t> correct{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (indices.size() + width - 1) / width;
    for (std::size_t w = 0; w < width; ++w) {
      pool.emplace_back([&, w] {
        std::size_t hits = 0;
        const auto end = std::min(indices.size(), (w + 1) * chunk);
        for (std::size_t k = w * chunk; k < end; ++k) {
          const auto i = indices[k];
          hits += learner.predict(test.features(i)).label == test.label(i) ? 1 : 0;
        }
        correct.fetch_add(hits);
      });
    }
  }
  return static_cast<double>(correct.load()) / static_cast<double>(indices.size());
}

template <typename Fn>
void with_task_context(std::uint32_t task, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "task " + std::to_string(task + 1) + ": " + e.what());
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const FeatureDataset& train,
                                const FeatureDataset& test, Learner& learner,
                                std::vector<std::vector<std::size_t>>* access_audit) {
  config.validate(false);
  if (train.dim() != learner.dim()) {
    fail(ErrorKind::kShape, "learner dimension " + std::to_string(learner.dim()) +
                                " differs from feature dimension " + std::to_string(train.dim()));
  }
  std::set<ClassId> all = train.class_ids();
  const auto partition = split_classes_into_tasks(all, config.tasks, config.seed);
  const auto stream = build_task_stream(train, test, partition);
  TaskDataGuard guard(train, stream);

  ExperimentReport report;
  report.config = config;
  report.partition = partition;
  report.accuracy = AccuracyMatrix(config.tasks);
  report.version = library_version();

  for (std::uint32_t t = 0; t < config.tasks; ++t) {
    const auto start = std::chrono::steady_clock::now();
    with_task_context(t, [&] {
      guard.open_task(t);
      const auto classes = partition.classes_of(t);
      learner.begin_task(classes);
      for (auto i : stream.train[t]) {
        const auto [label, x] = guard.read(i);
        learner.observe(label, x);
      }
      learner.end_task();
      for (std::uint32_t i = 0; i <= t; ++i) {
        report.accuracy.set(t, i, evaluate_parallel(learner, test, stream.test[i],
                                                     config.eval_threads));
      }
    });
    report.task_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    report.average.push_back(average_accuracy(report.accuracy, t + 1));
  }
  report.final_average = report.average.back();
  if (access_audit) *access_audit = guard.reads();
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate(true);
  auto train = load_feature_file(config.train_path);
  auto test = load_feature_file(config.test_path);
  if (train.empty()) fail(ErrorKind::kData, "train file has no samples");
  auto learner = make_learner(config.learner, train.dim(), config.prototypes_path);
  return run_experiment(config, train, test, *learner);
}

void ExperimentReport::check_consistency() const {
  if (accuracy.tasks() != config.tasks || average.size() != config.tasks ||
      task_seconds.size() != config.tasks) {
    fail(ErrorKind::kFormat, "report shape does not match T");
  }
  for (std::size_t t = 1; t <= config.tasks; ++t) {
    if (average_accuracy(accuracy, t) != average[t - 1]) {
      fail(ErrorKind::kFormat, "stored A_" + std::to_string(t) + " disagrees with R");
    }
  }
  if (final_average != average.back()) fail(ErrorKind::kFormat, "stored A_T disagrees with R");
}

// ---------------------------------------------------------------------------
// Report output

nlohmann::json to_json(const ExperimentReport& r) {
  auto rows = nlohmann::json::array();
  for (std::size_t t = 0; t < r.accuracy.tasks(); ++t) {
    auto row = r.accuracy.row(t);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"format", "pcil-experiment-report"},
          {"version", r.version},
          {"config", to_json(r.config)},
          {"partition", to_json(r.partition)},
          {"R", std::move(rows)},
          {"A", r.average},
          {"A_T", r.final_average},
          {"task_seconds", r.task_seconds}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  try {
    if (j.value("format", std::string()) != "pcil-experiment-report") {
      fail(ErrorKind::kFormat, "not an experiment report");
    }
    r.version = j.at("version").get<std::string>();
    r.config = experiment_config_from_json(j.at("config"));
    r.partition = partition_from_json(j.at("partition"));
    const auto& rows = j.at("R");
    r.accuracy = AccuracyMatrix(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
      for (std::size_t i = 0; i < rows[t].size(); ++i) {
        r.accuracy.set(t, i, rows[t][i].get<double>());
      }
    }
    r.average = j.at("A").get<std::vector<double>>();
    r.final_average = j.at("A_T").get<double>();
    r.task_seconds = j.at("task_seconds").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("malformed report: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed report: ") + e.what());
  }
  r.check_consistency();
  return r;
}

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv(const ExperimentReport& r) {
  std::vector<std::string> head{"method", "backbone_tag", "dataset", "T", "seed", "A_T"};
  std::vector<std::string> row{csv_field(r.config.method_label()), csv_field(r.config.backbone_tag),
                               csv_field(r.config.dataset), std::to_string(r.config.tasks),
                               std::to_string(r.config.seed), g17(r.final_average)};
  for (std::size_t t = 0; t < r.average.size(); ++t) {
    head.push_back("A_" + std::to_string(t + 1));
    row.push_back(g17(r.average[t]));
  }
  for (std::size_t t = 0; t < r.accuracy.tasks(); ++t) {
    for (std::size_t i = 0; i <= t; ++i) {
      head.push_back("R_" + std::to_string(t + 1) + "_" + std::to_string(i + 1));
      row.push_back(g17(r.accuracy.at(t, i)));
    }
  }
  std::string out;
  for (const auto* line : {&head, &row}) {
    for (std::size_t k = 0; k < line->size(); ++k) out += (k ? "," : "") + (*line)[k];
    out += '\n';
  }
  return out;
}

std::string report_table(std::span<const ExperimentReport> reports) {
  if (reports.empty()) fail(ErrorKind::kConfig, "no reports to tabulate");
  std::string header;
  std::string body;
  for (const auto& r : reports) {
    const auto csv = report_csv(r);
    const auto cut = csv.find('\n') + 1;
    if (header.empty()) {
      header = csv.substr(0, cut);
    } else if (csv.compare(0, cut, header) != 0) {
      fail(ErrorKind::kConfig, "reports have different columns (T differs)");
    }
    body += csv.substr(cut);
  }
  return header + body;
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               ReportFormat formats) {
  report.check_consistency();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  const auto put = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + p.string());
    out << text;
    if (!out) fail(ErrorKind::kIo, "write failed for " + p.string());
    written.push_back(p);
  };
  if (static_cast<int>(formats) & static_cast<int>(ReportFormat::kCsv)) {
    put(dir / "report.csv", report_csv(report));
  }
  if (static_cast<int>(formats) & static_cast<int>(ReportFormat::kJson)) {
    put(dir / "report.json", to_json(report).dump(2) + "\n");
  }
  return written;
}

}  // namespace pcil
