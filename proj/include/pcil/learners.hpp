// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pcil/feature_store.hpp"

namespace pcil {

/// Scores for every known class, ordered by ascending class id.
struct Prediction {
  ClassId label = 0;
  std::vector<ClassId> classes;
  Eigen::VectorXd scores;
};

/// Argmax over scores; ties go to the first (smallest-id) entry.
std::size_t argmax_first(const Eigen::VectorXd& scores);

/// Per-class sample counts and feature sums, accumulated in double.
class ClassStats {
 public:
  struct Entry {
    std::uint64_t count = 0;
    Eigen::VectorXd sum;
  };

  ClassStats() = default;
  explicit ClassStats(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_classes() const noexcept { return entries_.size(); }
  std::uint64_t total_count() const noexcept { return total_; }
  bool contains(ClassId id) const { return entries_.contains(id); }
  const std::map<ClassId, Entry>& entries() const noexcept { return entries_; }

  void observe(ClassId id, std::span<const float> x);
  void observe(ClassId id, const Eigen::Ref<const Eigen::VectorXd>& x);

  std::uint64_t count(ClassId id) const;
  Eigen::VectorXd mean(ClassId id) const;
  std::vector<ClassId> class_ids() const;
  /// dim x K matrix of class means, columns in ascending class id order.
  Eigen::MatrixXd mean_matrix() const;

  /// Restores a checkpointed entry verbatim.
  void restore(ClassId id, std::uint64_t count, Eigen::VectorXd sum);

 private:
  Entry& slot(ClassId id);

  std::size_t dim_ = 0;
  std::uint64_t total_ = 0;
  std::map<ClassId, Entry> entries_;
};

Eigen::VectorXd to_vector(std::span<const float> x);

// ---------------------------------------------------------------------------
// Cosine-similarity classification against prototypes.

/// Fixed prototype set: ids in ascending order, one unit-normalised column per
/// class. Zero-norm prototypes are rejected at construction.
class PrototypeClassifier {
 public:
  PrototypeClassifier() = default;
  explicit PrototypeClassifier(const std::map<ClassId, Eigen::VectorXd>& prototypes);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(unit_.rows()); }
  std::size_t num_classes() const noexcept { return ids_.size(); }
  const std::vector<ClassId>& class_ids() const noexcept { return ids_; }

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& feature) const;

 private:
  std::vector<ClassId> ids_;
  Eigen::MatrixXd unit_;  // dim x K
};

/// ncm_predict: cosine similarity of the feature to each class mean.
Prediction ncm_predict(const ClassStats& stats,
                       const Eigen::Ref<const Eigen::VectorXd>& feature);

/// fixed_prototype_classify with the same scoring rule as ncm_predict.
ClassId fixed_prototype_classify(const std::map<ClassId, Eigen::VectorXd>& prototypes,
                                 const Eigen::Ref<const Eigen::VectorXd>& feature);

// ---------------------------------------------------------------------------
// Streaming LDA with a shared, shrunk covariance.

struct LdaState {
  ClassStats stats;
  Eigen::MatrixXd second_moment;  // S = sum_i x_i x_i^T

  LdaState() = default;
  explicit LdaState(std::size_t dim)
      : stats(dim), second_moment(Eigen::MatrixXd::Zero(dim, dim)) {}

  std::size_t dim() const noexcept { return stats.dim(); }
  std::uint64_t total_count() const noexcept { return stats.total_count(); }

  void observe(ClassId id, std::span<const float> x);
  void observe(ClassId id, const Eigen::Ref<const Eigen::VectorXd>& x);
};

struct LdaHead {
  std::vector<ClassId> classes;
  Eigen::MatrixXd weights;  // dim x K
  Eigen::VectorXd bias;     // K
  double shrinkage = 0.0;

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& feature) const;
};

inline constexpr double kDefaultLdaShrinkage = 0.1;

/// Within-class covariance (S - sum_y n_y m_y m_y^T) / (N - K) shrunk toward
/// tr/L * I, then w_y = Sigma^-1 m_y and b_y = -m_y.w_y/2 + ln(n_y/N).
LdaHead lda_finalize(const LdaState& state, double shrinkage);

// ---------------------------------------------------------------------------
// Common streaming contract used by the experiment harness.

class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t dim() const = 0;
  /// Opens a task whose classes are `classes`.
  virtual void begin_task(std::span<const ClassId> classes) = 0;
  virtual void observe(ClassId label, std::span<const float> feature) = 0;
  /// Closes the current task and brings the head up to date.
  virtual void end_task() = 0;
  virtual Prediction predict(std::span<const float> feature) const = 0;
};

class NcmLearner final : public Learner {
 public:
  explicit NcmLearner(std::size_t dim) : stats_(dim) {}

  std::string_view name() const override { return "ncm"; }
  std::size_t dim() const override { return stats_.dim(); }
  void begin_task(std::span<const ClassId>) override {}
  void observe(ClassId label, std::span<const float> feature) override;
  /// Snapshots the normalised prototypes used by predict().
  void end_task() override;
  Prediction predict(std::span<const float> feature) const override;

  const ClassStats& stats() const noexcept { return stats_; }

 private:
  ClassStats stats_;
  std::unique_ptr<PrototypeClassifier> cached_;
};

class LdaLearner final : public Learner {
 public:
  LdaLearner(std::size_t dim, double shrinkage);

  std::string_view name() const override { return "lda"; }
  std::size_t dim() const override { return state_.dim(); }
  void begin_task(std::span<const ClassId>) override {}
  void observe(ClassId label, std::span<const float> feature) override;
  void end_task() override;
  Prediction predict(std::span<const float> feature) const override;

  const LdaState& state() const noexcept { return state_; }
  const LdaHead& head() const;

 private:
  LdaState state_;
  double shrinkage_;
  std::unique_ptr<LdaHead> head_;
};

/// Zero-shot style learner: never trains; at each task it activates the
/// externally supplied prototypes for that task's classes.
class FixedPrototypeLearner final : public Learner {
 public:
  explicit FixedPrototypeLearner(std::map<ClassId, Eigen::VectorXd> prototypes);

  std::string_view name() const override { return "zeroshot"; }
  std::size_t dim() const override { return dim_; }
  void begin_task(std::span<const ClassId> classes) override;
  void observe(ClassId, std::span<const float>) override {}
  void end_task() override {}
  Prediction predict(std::span<const float> feature) const override;

 private:
  std::map<ClassId, Eigen::VectorXd> all_;
  std::map<ClassId, Eigen::VectorXd> active_;
  PrototypeClassifier classifier_;
  std::size_t dim_ = 0;
};

}  // namespace pcil
