// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pcil/learners.hpp"

namespace pcil {

/// Frozen random projection W (L x M). Seeded projections draw every entry
/// i.i.d. N(0, 1) from NormalSampler(seed) in column-major order.
class Projection {
 public:
  Projection() = default;
  static Projection from_seed(std::size_t input_dim, std::size_t hidden_dim,
                              std::uint64_t seed);
  /// Arbitrary weights, e.g. an identity in tests. Not checkpointable.
  static Projection from_weights(Eigen::MatrixXd weights);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t hidden_dim() const noexcept { return static_cast<std::size_t>(weights_.cols()); }
  const std::optional<std::uint64_t>& seed() const noexcept { return seed_; }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }

  /// max(0, W^T x) elementwise.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& feature) const;
  Eigen::VectorXd project(std::span<const float> feature) const;

 private:
  Eigen::MatrixXd weights_;
  std::optional<std::uint64_t> seed_;
};

inline constexpr std::size_t kDefaultHiddenDim = 10000;

/// init_projection
inline Projection init_projection(std::size_t input_dim, std::size_t hidden_dim,
                                  std::uint64_t seed) {
  return Projection::from_seed(input_dim, hidden_dim, seed);
}

enum class GramWeighting {
  /// Each sample weighted by 1/pi_y, targets are class means (imbalance-corrected).
  kInverseClassFrequency,
  /// Plain G = H H^T with class-sum targets.
  kUnweighted,
};

/// Either a fixed ridge parameter or a grid of multipliers of tr(G)/M from
/// which the value with lowest one-hot MSE on the last task's buffer is taken.
struct LambdaPolicy {
  std::optional<double> fixed;
  std::vector<double> grid_multipliers = default_grid();

  static std::vector<double> default_grid();
  static LambdaPolicy fixed_value(double lambda) {
    LambdaPolicy p;
    p.fixed = lambda;
    return p;
  }
};

/// Hidden vectors of the current task only. Rows beyond `spill_threshold`
/// are written to an anonymous temporary file (0 disables spilling).
class HiddenBuffer {
 public:
  explicit HiddenBuffer(std::size_t hidden_dim = 0, std::size_t spill_threshold = 0);
  ~HiddenBuffer();
  HiddenBuffer(HiddenBuffer&&) noexcept;
  HiddenBuffer& operator=(HiddenBuffer&&) noexcept;
  HiddenBuffer(const HiddenBuffer&) = delete;
  HiddenBuffer& operator=(const HiddenBuffer&) = delete;

  void append(ClassId label, const Eigen::Ref<const Eigen::VectorXd>& hidden);
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  bool spilled() const noexcept { return spill_ != nullptr; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }

  /// Visits rows in insertion order as (rows x M block, first row index).
  template <typename Fn>
  void for_each_chunk(Fn&& fn, std::size_t chunk_rows = 1024) const;

  /// Row i (reads back from disk when spilled).
  Eigen::VectorXd row(std::size_t i) const;
  void clear();

 private:
  void read_rows(std::size_t first, std::size_t count, Eigen::MatrixXd& out) const;

  std::size_t hidden_dim_ = 0;
  std::size_t spill_threshold_ = 0;
  std::vector<ClassId> labels_;
  std::vector<double> memory_;  // row-major rows not yet spilled
  std::size_t spilled_rows_ = 0;
  std::FILE* spill_ = nullptr;
};

struct RanPacHead {
  std::vector<ClassId> classes;
  Eigen::MatrixXd weights;  // M x K
  double lambda = 0.0;
  double residual = 0.0;  // ||(G + lambda I) W - C||_F / ||C||_F at solve time
};

/// Streaming RanPAC phase-2 state: weighted Gram, per-class hidden sums and
/// counts, and the current-task buffer.
class RanPacState {
 public:
  RanPacState(Projection projection, GramWeighting weighting = GramWeighting::kInverseClassFrequency,
              std::size_t spill_threshold = 0);

  const Projection& projection() const noexcept { return projection_; }
  GramWeighting weighting() const noexcept { return weighting_; }
  std::size_t hidden_dim() const noexcept { return projection_.hidden_dim(); }

  /// Opens a new task. Fails if the previous task was not closed.
  void begin_task();
  /// Projects and buffers one sample of the current task.
  void observe(ClassId label, std::span<const float> feature);
  void observe(ClassId label, const Eigen::Ref<const Eigen::VectorXd>& feature);
  /// Buffers an already-projected hidden vector.
  void observe_hidden(ClassId label, const Eigen::Ref<const Eigen::VectorXd>& hidden);

  /// Folds the buffered task into G: G += w_i h_i h_i^T for each buffered i.
  /// Leaves the buffer in place so select_lambda can still use it.
  void fold_task();
  /// Lowest one-hot MSE over the buffer; ties keep the first candidate.
  double select_lambda(std::span<const double> candidates) const;
  /// Drops the buffer and closes the task.
  void close_task();

  /// fold_task, optional selection, close_task. Returns the lambda to use.
  double end_task(const LambdaPolicy& policy);

  RanPacHead solve(double lambda) const;

  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  const ClassStats& hidden_stats() const noexcept { return stats_; }
  const HiddenBuffer& buffer() const noexcept { return buffer_; }
  std::size_t tasks_folded() const noexcept { return tasks_folded_; }
  /// C-bar: class means (weighted) or class sums (unweighted), M x K.
  Eigen::MatrixXd targets() const;
  /// tr(G)/M, or 1 when G is still zero.
  double lambda_scale() const;

  /// Rebuilds a closed state from checkpointed statistics.
  void restore(Eigen::MatrixXd gram, std::size_t tasks_folded,
               const std::map<ClassId, std::pair<std::uint64_t, Eigen::VectorXd>>& classes);

 private:
  enum class Phase { kOpen, kClosed };
  void require_open(const char* what) const;

  Projection projection_;
  GramWeighting weighting_;
  Eigen::MatrixXd gram_;
  ClassStats stats_;  // over hidden vectors
  std::map<ClassId, std::size_t> folded_in_task_;
  HiddenBuffer buffer_;
  Phase phase_ = Phase::kOpen;
  bool current_folded_ = false;
  std::size_t tasks_folded_ = 0;
};

/// scores = W^T project(feature), smallest-id tie-break.
Prediction ranpac_predict(const RanPacHead& head, const Projection& projection,
                          const Eigen::Ref<const Eigen::VectorXd>& feature);

struct RanPacConfig {
  std::size_t hidden_dim = kDefaultHiddenDim;
  std::uint64_t projection_seed = 0;
  GramWeighting weighting = GramWeighting::kInverseClassFrequency;
  LambdaPolicy lambda;
  std::size_t spill_threshold = 0;
};

class RanPacLearner final : public Learner {
 public:
  RanPacLearner(std::size_t dim, const RanPacConfig& config);
  RanPacLearner(Projection projection, const RanPacConfig& config);

  std::string_view name() const override { return "ranpac"; }
  std::size_t dim() const override { return state_.projection().input_dim(); }
  void begin_task(std::span<const ClassId> classes) override;
  void observe(ClassId label, std::span<const float> feature) override;
  void end_task() override;
  Prediction predict(std::span<const float> feature) const override;

  const RanPacState& state() const noexcept { return state_; }
  const RanPacHead& head() const;
  /// Lambda chosen at each end_task, in task order.
  const std::vector<double>& lambda_history() const noexcept { return lambdas_; }

 private:
  RanPacState state_;
  LambdaPolicy policy_;
  std::unique_ptr<RanPacHead> head_;
  std::vector<double> lambdas_;
};

// ---------------------------------------------------------------------------

template <typename Fn>
void HiddenBuffer::for_each_chunk(Fn&& fn, std::size_t chunk_rows) const {
  Eigen::MatrixXd block;
  for (std::size_t first = 0; first < size(); first += chunk_rows) {
    const std::size_t count = std::min(chunk_rows, size() - first);
    read_rows(first, count, block);
    fn(static_cast<const Eigen::MatrixXd&>(block), first);
  }
}

}  // namespace pcil
