// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/ranpac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "pcil/error.hpp"
#include "pcil/prng.hpp"

namespace pcil {

// ---------------------------------------------------------------------------
// Projection

Projection Projection::from_seed(std::size_t input_dim, std::size_t hidden_dim,
                                 std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0) {
    fail(ErrorKind::kConfig, "projection dimensions must be positive");
  }
  Projection p;
  p.weights_.resize(static_cast<Eigen::Index>(input_dim),
                    static_cast<Eigen::Index>(hidden_dim));
  NormalSampler normal(seed);
  double* data = p.weights_.data();
  for (Eigen::Index k = 0; k < p.weights_.size(); ++k) data[k] = normal();
  p.seed_ = seed;
  return p;
}

Projection Projection::from_weights(Eigen::MatrixXd weights) {
  if (weights.size() == 0) fail(ErrorKind::kConfig, "projection weights are empty");
  if (!weights.allFinite()) fail(ErrorKind::kData, "projection weights are not finite");
  Projection p;
  p.weights_ = std::move(weights);
  return p;
}

Eigen::VectorXd Projection::project(const Eigen::Ref<const Eigen::VectorXd>& feature) const {
  if (static_cast<std::size_t>(feature.size()) != input_dim()) {
    fail(ErrorKind::kShape, "feature has " + std::to_string(feature.size()) +
                                " components, projection expects " +
                                std::to_string(input_dim()));
  }
  Eigen::VectorXd hidden = weights_.transpose() * feature;
  return hidden.cwiseMax(0.0);
}

Eigen::VectorXd Projection::project(std::span<const float> feature) const {
  return project(to_vector(feature));
}

std::vector<double> LambdaPolicy::default_grid() {
  std::vector<double> grid;
  for (int e = -8; e <= 2; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

// ---------------------------------------------------------------------------
// HiddenBuffer

HiddenBuffer::HiddenBuffer(std::size_t hidden_dim, std::size_t spill_threshold)
    : hidden_dim_(hidden_dim), spill_threshold_(spill_threshold) {}

HiddenBuffer::~HiddenBuffer() {
  if (spill_) std::fclose(spill_);
}

HiddenBuffer::HiddenBuffer(HiddenBuffer&& other) noexcept
    : hidden_dim_(other.hidden_dim_),
      spill_threshold_(other.spill_threshold_),
      labels_(std::move(other.labels_)),
      memory_(std::move(other.memory_)),
      spilled_rows_(other.spilled_rows_),
      spill_(std::exchange(other.spill_, nullptr)) {}

HiddenBuffer& HiddenBuffer::operator=(HiddenBuffer&& other) noexcept {
  if (this != &other) {
    if (spill_) std::fclose(spill_);
    hidden_dim_ = other.hidden_dim_;
    spill_threshold_ = other.spill_threshold_;
    labels_ = std::move(other.labels_);
    memory_ = std::move(other.memory_);
    spilled_rows_ = other.spilled_rows_;
    spill_ = std::exchange(other.spill_, nullptr);
  }
  return *this;
}

void HiddenBuffer::append(ClassId label, const Eigen::Ref<const Eigen::VectorXd>& hidden) {
  if (static_cast<std::size_t>(hidden.size()) != hidden_dim_) {
    fail(ErrorKind::kShape, "hidden vector has " + std::to_string(hidden.size()) +
                                " components, expected " + std::to_string(hidden_dim_));
  }
  memory_.insert(memory_.end(), hidden.data(), hidden.data() + hidden.size());
  labels_.push_back(label);
  if (spill_threshold_ > 0 && memory_.size() / hidden_dim_ >= spill_threshold_) {
    if (!spill_) {
      spill_ = std::tmpfile();
      if (!spill_) fail(ErrorKind::kIo, "cannot create spill file for hidden buffer");
    }
    std::fseek(spill_, 0, SEEK_END);
    if (std::fwrite(memory_.data(), sizeof(double), memory_.size(), spill_) !=
        memory_.size()) {
      fail(ErrorKind::kIo, "short write to hidden-buffer spill file");
    }
    spilled_rows_ += memory_.size() / hidden_dim_;
    memory_.clear();
  }
}

void HiddenBuffer::read_rows(std::size_t first, std::size_t count,
                             Eigen::MatrixXd& out) const {
  out.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(hidden_dim_));
  std::vector<double> row(hidden_dim_);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t i = first + r;
    const double* src;
    if (i < spilled_rows_) {
      std::fseek(spill_, static_cast<long>(i * hidden_dim_ * sizeof(double)), SEEK_SET);
      if (std::fread(row.data(), sizeof(double), hidden_dim_, spill_) != hidden_dim_) {
        fail(ErrorKind::kIo, "short read from hidden-buffer spill file");
      }
      src = row.data();
    } else {
      src = memory_.data() + (i - spilled_rows_) * hidden_dim_;
    }
    for (std::size_t c = 0; c < hidden_dim_; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src[c];
    }
  }
}

Eigen::VectorXd HiddenBuffer::row(std::size_t i) const {
  if (i >= size()) fail(ErrorKind::kProtocol, "buffer row out of range");
  Eigen::MatrixXd block;
  read_rows(i, 1, block);
  return block.row(0).transpose();
}

void HiddenBuffer::clear() {
  labels_.clear();
  memory_.clear();
  memory_.shrink_to_fit();
  spilled_rows_ = 0;
  if (spill_) {
    std::fclose(spill_);
    spill_ = nullptr;
  }
}

// ---------------------------------------------------------------------------
// RanPacState

RanPacState::RanPacState(Projection projection, GramWeighting weighting,
                         std::size_t spill_threshold)
    : projection_(std::move(projection)),
      weighting_(weighting),
      gram_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(projection_.hidden_dim()),
                                  static_cast<Eigen::Index>(projection_.hidden_dim()))),
      stats_(projection_.hidden_dim()),
      buffer_(projection_.hidden_dim(), spill_threshold) {
  if (projection_.hidden_dim() == 0) fail(ErrorKind::kConfig, "empty projection");
}

void RanPacState::require_open(const char* what) const {
  if (phase_ != Phase::kOpen) {
    fail(ErrorKind::kProtocol,
         std::string(what) + " after the task was finalized; begin a new task first");
  }
}

void RanPacState::begin_task() {
  if (phase_ == Phase::kOpen && !buffer_.empty()) {
    fail(ErrorKind::kProtocol, "previous task still has buffered samples; end it first");
  }
  phase_ = Phase::kOpen;
  current_folded_ = false;
}

void RanPacState::observe(ClassId label, std::span<const float> feature) {
  observe(label, to_vector(feature));
}

void RanPacState::observe(ClassId label, const Eigen::Ref<const Eigen::VectorXd>& feature) {
  require_open("observe");
  if (!feature.allFinite()) fail(ErrorKind::kData, "feature contains non-finite values");
  observe_hidden(label, projection_.project(feature));
}

void RanPacState::observe_hidden(ClassId label,
                                 const Eigen::Ref<const Eigen::VectorXd>& hidden) {
  require_open("observe");
  if (current_folded_) fail(ErrorKind::kProtocol, "observe after the task was folded");
  const auto it = folded_in_task_.find(label);
  if (it != folded_in_task_.end() && it->second < tasks_folded_) {
    fail(ErrorKind::kProtocol, "class " + std::to_string(label) +
                                   " was already learned in an earlier task");
  }
  stats_.observe(label, hidden);
  buffer_.append(label, hidden);
  folded_in_task_[label] = tasks_folded_;
}

void RanPacState::fold_task() {
  require_open("end_task");
  if (buffer_.empty()) fail(ErrorKind::kProtocol, "end_task on an empty task");
  if (current_folded_) fail(ErrorKind::kProtocol, "task already folded");
  const auto& labels = buffer_.labels();
  // Lower triangle via rank-k updates, chunk by chunk, in insertion order.
  buffer_.for_each_chunk([&](const Eigen::MatrixXd& rows, std::size_t first) {
    Eigen::MatrixXd scaled = rows;
    if (weighting_ == GramWeighting::kInverseClassFrequency) {
      for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
        const auto count = stats_.count(labels[first + static_cast<std::size_t>(r)]);
        scaled.row(r) *= 1.0 / std::sqrt(static_cast<double>(count));
      }
    }
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  });
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  current_folded_ = true;
}

double RanPacState::lambda_scale() const {
  const double t = gram_.trace() / static_cast<double>(hidden_dim());
  return t > 0.0 ? t : 1.0;
}

Eigen::MatrixXd RanPacState::targets() const {
  if (weighting_ == GramWeighting::kInverseClassFrequency) return stats_.mean_matrix();
  Eigen::MatrixXd sums(static_cast<Eigen::Index>(hidden_dim()),
                       static_cast<Eigen::Index>(stats_.num_classes()));
  Eigen::Index k = 0;
  for (const auto& [id, e] : stats_.entries()) sums.col(k++) = e.sum;
  return sums;
}

double RanPacState::select_lambda(std::span<const double> candidates) const {
  if (candidates.empty()) fail(ErrorKind::kConfig, "lambda candidate list is empty");
  if (candidates.size() == 1) return candidates.front();
  if (buffer_.empty()) fail(ErrorKind::kProtocol, "lambda selection needs the task buffer");

  const auto classes = stats_.class_ids();
  std::map<ClassId, Eigen::Index> column;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    column[classes[k]] = static_cast<Eigen::Index>(k);
  }
  const auto& labels = buffer_.labels();

  double best_lambda = candidates.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double lambda : candidates) {
    RanPacHead head;
    try {
      head = solve(lambda);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNumeric) continue;
      throw;
    }
    double sq = 0.0;
    buffer_.for_each_chunk([&](const Eigen::MatrixXd& rows, std::size_t first) {
      Eigen::MatrixXd residual = rows * head.weights;
      for (Eigen::Index r = 0; r < residual.rows(); ++r) {
        residual(r, column.at(labels[first + static_cast<std::size_t>(r)])) -= 1.0;
      }
      sq += residual.squaredNorm();
    });
    const double mse =
        sq / (static_cast<double>(buffer_.size()) * static_cast<double>(classes.size()));
    if (mse < best_mse) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  if (!std::isfinite(best_mse)) {
    fail(ErrorKind::kNumeric, "no lambda candidate produced a solvable system");
  }
  return best_lambda;
}

void RanPacState::close_task() {
  if (!current_folded_) fail(ErrorKind::kProtocol, "close_task before fold_task");
  buffer_.clear();
  phase_ = Phase::kClosed;
  ++tasks_folded_;
}

double RanPacState::end_task(const LambdaPolicy& policy) {
  fold_task();
  double lambda;
  if (policy.fixed) {
    lambda = *policy.fixed;
  } else {
    std::vector<double> candidates;
    const double scale = lambda_scale();
    for (double m : policy.grid_multipliers) candidates.push_back(m * scale);
    lambda = select_lambda(candidates);
  }
  close_task();
  return lambda;
}

RanPacHead RanPacState::solve(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorKind::kConfig, "ridge parameter lambda must be positive and finite");
  }
  if (stats_.num_classes() == 0 || (tasks_folded_ == 0 && !current_folded_)) {
    fail(ErrorKind::kProtocol, "solve requires at least one folded task");
  }
  const Eigen::MatrixXd c_bar = targets();

  RanPacHead head;
  head.classes = stats_.class_ids();
  head.lambda = lambda;

  const auto attempt = [&](double shift) -> bool {
    Eigen::MatrixXd system = gram_;
    system.diagonal().array() += shift;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(system);
    if (llt.info() != Eigen::Success) return false;
    head.weights = llt.solve(c_bar);
    return head.weights.allFinite();
  };
  if (!attempt(lambda)) {
    const double jitter = 1e-10 * lambda_scale();
    if (!attempt(lambda + jitter)) {
      fail(ErrorKind::kNumeric, "Cholesky factorization of G + lambda I failed");
    }
  }
  Eigen::MatrixXd residual = gram_ * head.weights + lambda * head.weights - c_bar;
  const double denom = c_bar.norm();
  head.residual = denom > 0.0 ? residual.norm() / denom : residual.norm();
  return head;
}

void RanPacState::restore(
    Eigen::MatrixXd gram, std::size_t tasks_folded,
    const std::map<ClassId, std::pair<std::uint64_t, Eigen::VectorXd>>& classes) {
  if (gram.rows() != gram_.rows() || gram.cols() != gram_.cols()) {
    fail(ErrorKind::kShape, "checkpointed Gram matrix has the wrong shape");
  }
  gram_ = std::move(gram);
  stats_ = ClassStats(hidden_dim());
  folded_in_task_.clear();
  for (const auto& [id, entry] : classes) {
    stats_.restore(id, entry.first, entry.second);
    folded_in_task_[id] = 0;
  }
  buffer_.clear();
  tasks_folded_ = tasks_folded;
  phase_ = Phase::kClosed;
  current_folded_ = false;
}

Prediction ranpac_predict(const RanPacHead& head, const Projection& projection,
                          const Eigen::Ref<const Eigen::VectorXd>& feature) {
  if (head.classes.empty()) fail(ErrorKind::kProtocol, "RanPAC head has not been solved");
  if (static_cast<std::size_t>(head.weights.rows()) != projection.hidden_dim()) {
    fail(ErrorKind::kShape, "head and projection disagree on hidden dimension");
  }
  Prediction out;
  out.classes = head.classes;
  out.scores = head.weights.transpose() * projection.project(feature);
  out.label = head.classes[argmax_first(out.scores)];
  return out;
}

// ---------------------------------------------------------------------------
// RanPacLearner

RanPacLearner::RanPacLearner(std::size_t dim, const RanPacConfig& config)
    : RanPacLearner(Projection::from_seed(dim, config.hidden_dim, config.projection_seed),
                    config) {}

RanPacLearner::RanPacLearner(Projection projection, const RanPacConfig& config)
    : state_(std::move(projection), config.weighting, config.spill_threshold),
      policy_(config.lambda) {
  if (policy_.fixed && !(*policy_.fixed > 0.0)) {
    fail(ErrorKind::kConfig, "fixed lambda must be positive");
  }
  if (!policy_.fixed && policy_.grid_multipliers.empty()) {
    fail(ErrorKind::kConfig, "lambda grid is empty");
  }
}

void RanPacLearner::begin_task(std::span<const ClassId>) { state_.begin_task(); }

void RanPacLearner::observe(ClassId label, std::span<const float> feature) {
  state_.observe(label, feature);
}

void RanPacLearner::end_task() {
  const double lambda = state_.end_task(policy_);
  lambdas_.push_back(lambda);
  head_ = std::make_unique<RanPacHead>(state_.solve(lambda));
}

const RanPacHead& RanPacLearner::head() const {
  if (!head_) fail(ErrorKind::kProtocol, "RanPAC head requested before end_task");
  return *head_;
}

Prediction RanPacLearner::predict(std::span<const float> feature) const {
  return ranpac_predict(head(), state_.projection(), to_vector(feature));
}

}  // namespace pcil
