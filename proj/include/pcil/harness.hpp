// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcil/feature_store.hpp"
#include "pcil/learners.hpp"
#include "pcil/metrics.hpp"

namespace pcil {

const char* library_version() noexcept;

enum class LearnerKind { kNcm, kLda, kRanPac, kZeroShot };
const char* to_string(LearnerKind kind) noexcept;
LearnerKind learner_kind_from_string(const std::string& s);

struct LearnerConfig {
  LearnerKind kind = LearnerKind::kNcm;
  double alpha = 0.1;                   // lda shrinkage
  std::size_t hidden_dim = 10000;       // ranpac M
  std::optional<double> lambda;         // ranpac fixed ridge; grid search when absent
  std::vector<double> lambda_grid;      // multipliers of tr(G)/M; empty = default grid
  bool imbalance_correction = true;
  std::uint64_t projection_seed = 0;
  std::size_t spill_threshold = 0;

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

struct ExperimentConfig {
  std::string train_path;
  std::string test_path;
  std::uint32_t tasks = 1;
  std::uint64_t seed = 0;
  LearnerConfig learner;
  std::string output_dir;
  std::string prototypes_path;  // zeroshot only: PFV1 file, one record per class
  std::string method;           // report label; defaults to the learner name
  std::string backbone_tag;
  std::string dataset;
  std::uint32_t eval_threads = 1;

  /// Parameter checks; with `check_files` also that the inputs exist.
  void validate(bool check_files = true) const;
  std::string method_label() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys take the defaults above; unknown keys are configuration errors.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, std::size_t dim,
                                      const std::string& prototypes_path = {});

/// Hands out train samples of the current task only. Every read is checked
/// against the task being trained; a read from any other task is a protocol
/// error. Reads are counted per (current task, sample task) for auditing.
class TaskDataGuard {
 public:
  TaskDataGuard(const FeatureDataset& train, const TaskStream& stream);

  void open_task(std::uint32_t task);
  std::uint32_t current_task() const noexcept { return current_; }
  /// Sample `index` of the train set; it must belong to the open task.
  std::pair<ClassId, std::span<const float>> read(std::size_t index);

  /// reads()[t][s]: samples of task s read while task t was open.
  const std::vector<std::vector<std::size_t>>& reads() const noexcept { return reads_; }

 private:
  const FeatureDataset& train_;
  std::vector<std::uint32_t> task_of_;
  std::uint32_t current_ = 0;
  bool open_ = false;
  std::vector<std::vector<std::size_t>> reads_;
};

struct ExperimentReport {
  ExperimentConfig config;
  TaskPartition partition;
  AccuracyMatrix accuracy;
  std::vector<double> average;  // A_1..A_T
  double final_average = 0.0;   // A_T
  std::vector<double> task_seconds;
  std::string version;

  /// Recomputes A_t from R and requires exact equality.
  void check_consistency() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Core loop on loaded data with a caller-supplied learner. `guard_out`, if
/// given, receives the access audit.
ExperimentReport run_experiment(const ExperimentConfig& config, const FeatureDataset& train,
                                const FeatureDataset& test, Learner& learner,
                                std::vector<std::vector<std::size_t>>* access_audit = nullptr);

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// One header line and one data row: method, backbone_tag, dataset, T, seed,
/// A_T, A_1..A_T, R_t_i for i <= t (1-based). Floats use 17 significant digits.
std::string report_csv(const ExperimentReport& report);
/// Several reports in one table; all must share T (and so the header).
std::string report_table(std::span<const ExperimentReport> reports);

enum class ReportFormat { kCsv = 1, kJson = 2, kBoth = 3 };

/// Writes <dir>/report.csv and/or <dir>/report.json; returns the paths written.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               ReportFormat formats = ReportFormat::kBoth);

}  // namespace pcil
