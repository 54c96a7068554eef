// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/learners.hpp"

#include <cmath>
#include <string>

#include "pcil/error.hpp"

namespace pcil {

std::size_t argmax_first(const Eigen::VectorXd& scores) {
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
  }
  return best;
}

Eigen::VectorXd to_vector(std::span<const float> x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) v[static_cast<Eigen::Index>(j)] = x[j];
  return v;
}

namespace {

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    fail(ErrorKind::kShape, "feature has " + std::to_string(got) +
                                " components, expected " + std::to_string(expected));
  }
}

void check_finite(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!x.allFinite()) fail(ErrorKind::kData, "feature contains non-finite values");
}

}  // namespace

// ---------------------------------------------------------------------------
// ClassStats

ClassStats::Entry& ClassStats::slot(ClassId id) {
  auto [it, inserted] = entries_.try_emplace(id);
  if (inserted) it->second.sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  return it->second;
}

void ClassStats::observe(ClassId id, std::span<const float> x) {
  check_dim(dim_, x.size());
  observe(id, to_vector(x));
}

void ClassStats::observe(ClassId id, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(dim_, static_cast<std::size_t>(x.size()));
  check_finite(x);
  Entry& e = slot(id);
  e.sum += x;
  ++e.count;
  ++total_;
}

std::uint64_t ClassStats::count(ClassId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.count;
}

Eigen::VectorXd ClassStats::mean(ClassId id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end() || it->second.count == 0) {
    fail(ErrorKind::kDegenerate, "class " + std::to_string(id) + " has no samples");
  }
  return it->second.sum / static_cast<double>(it->second.count);
}

std::vector<ClassId> ClassStats::class_ids() const {
  std::vector<ClassId> ids;
  ids.reserve(entries_.size());
  for (const auto& kv : entries_) ids.push_back(kv.first);
  return ids;
}

Eigen::MatrixXd ClassStats::mean_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(entries_.size()));
  Eigen::Index k = 0;
  for (const auto& [id, e] : entries_) {
    m.col(k++) = e.sum / static_cast<double>(e.count);
  }
  return m;
}

void ClassStats::restore(ClassId id, std::uint64_t count, Eigen::VectorXd sum) {
  check_dim(dim_, static_cast<std::size_t>(sum.size()));
  Entry& e = slot(id);
  total_ = total_ - e.count + count;
  e.count = count;
  e.sum = std::move(sum);
}

// ---------------------------------------------------------------------------
// Cosine classification

PrototypeClassifier::PrototypeClassifier(
    const std::map<ClassId, Eigen::VectorXd>& prototypes) {
  if (prototypes.empty()) fail(ErrorKind::kConfig, "prototype set is empty");
  const auto dim = prototypes.begin()->second.size();
  unit_.resize(dim, static_cast<Eigen::Index>(prototypes.size()));
  Eigen::Index k = 0;
  for (const auto& [id, p] : prototypes) {
    check_dim(static_cast<std::size_t>(dim), static_cast<std::size_t>(p.size()));
    const double norm = p.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      fail(ErrorKind::kDegenerate,
           "prototype of class " + std::to_string(id) + " has zero norm");
    }
    unit_.col(k++) = p / norm;
    ids_.push_back(id);
  }
}

Prediction PrototypeClassifier::predict(
    const Eigen::Ref<const Eigen::VectorXd>& feature) const {
  if (ids_.empty()) fail(ErrorKind::kProtocol, "no prototypes available");
  check_dim(dim(), static_cast<std::size_t>(feature.size()));
  const double norm = feature.norm();
  if (!(norm > 0.0)) fail(ErrorKind::kDegenerate, "feature has zero norm");
  Prediction out;
  out.classes = ids_;
  out.scores = (unit_.transpose() * feature) / norm;
  out.label = ids_[argmax_first(out.scores)];
  return out;
}

Prediction ncm_predict(const ClassStats& stats,
                       const Eigen::Ref<const Eigen::VectorXd>& feature) {
  if (stats.num_classes() == 0) fail(ErrorKind::kProtocol, "no class observed yet");
  std::map<ClassId, Eigen::VectorXd> means;
  for (const auto& [id, e] : stats.entries()) {
    means.emplace(id, e.sum / static_cast<double>(e.count));
  }
  return PrototypeClassifier(means).predict(feature);
}

ClassId fixed_prototype_classify(const std::map<ClassId, Eigen::VectorXd>& prototypes,
                                 const Eigen::Ref<const Eigen::VectorXd>& feature) {
  return PrototypeClassifier(prototypes).predict(feature).label;
}

// ---------------------------------------------------------------------------
// LDA

void LdaState::observe(ClassId id, std::span<const float> x) {
  check_dim(dim(), x.size());
  observe(id, to_vector(x));
}

void LdaState::observe(ClassId id, const Eigen::Ref<const Eigen::VectorXd>& x) {
  stats.observe(id, x);
  // x_i x_j == x_j x_i exactly, so S stays bitwise symmetric.
  second_moment.noalias() += x * x.transpose();
}

LdaHead lda_finalize(const LdaState& state, double shrinkage) {
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    fail(ErrorKind::kConfig, "LDA shrinkage must lie in [0, 1]");
  }
  const auto& stats = state.stats;
  const std::uint64_t n = stats.total_count();
  const std::size_t k = stats.num_classes();
  if (k == 0) fail(ErrorKind::kProtocol, "LDA has not observed any class");
  if (n <= k && shrinkage == 0.0) {
    fail(ErrorKind::kNumeric,
         "within-class covariance is undefined with N <= K; use shrinkage > 0");
  }
  const auto dim = static_cast<Eigen::Index>(state.dim());

  Eigen::MatrixXd scatter = state.second_moment;
  for (const auto& [id, e] : stats.entries()) {
    // n_y m_y m_y^T == s_y s_y^T / n_y
    scatter.noalias() -= (e.sum * e.sum.transpose()) / static_cast<double>(e.count);
  }
  const double dof = n > k ? static_cast<double>(n - k) : 1.0;
  Eigen::MatrixXd cov = scatter / dof;
  cov = 0.5 * (cov + cov.transpose()).eval();

  const double trace = cov.trace();
  const double target = trace > 0.0 ? trace / static_cast<double>(dim) : 1.0;
  Eigen::MatrixXd shrunk = (1.0 - shrinkage) * cov;
  shrunk.diagonal().array() += shrinkage * target;

  const Eigen::MatrixXd means = stats.mean_matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14) {
    fail(ErrorKind::kNumeric,
         "shared covariance is singular; use LDA shrinkage > 0");
  }
  LdaHead head;
  head.shrinkage = shrinkage;
  head.classes = stats.class_ids();
  head.weights = llt.solve(means);
  if (!head.weights.allFinite()) {
    fail(ErrorKind::kNumeric, "shared covariance is singular; use LDA shrinkage > 0");
  }
  head.bias.resize(static_cast<Eigen::Index>(k));
  Eigen::Index col = 0;
  for (const auto& [id, e] : stats.entries()) {
    const double prior = static_cast<double>(e.count) / static_cast<double>(n);
    head.bias[col] = -0.5 * means.col(col).dot(head.weights.col(col)) + std::log(prior);
    ++col;
  }
  return head;
}

Prediction LdaHead::predict(const Eigen::Ref<const Eigen::VectorXd>& feature) const {
  if (classes.empty()) fail(ErrorKind::kProtocol, "LDA head is empty");
  check_dim(static_cast<std::size_t>(weights.rows()),
            static_cast<std::size_t>(feature.size()));
  Prediction out;
  out.classes = classes;
  out.scores = weights.transpose() * feature + bias;
  out.label = classes[argmax_first(out.scores)];
  return out;
}

// ---------------------------------------------------------------------------
// Learner adapters

void NcmLearner::observe(ClassId label, std::span<const float> feature) {
  stats_.observe(label, feature);
  cached_.reset();
}

void NcmLearner::end_task() {
  if (stats_.num_classes() == 0) fail(ErrorKind::kProtocol, "end_task before any sample");
  std::map<ClassId, Eigen::VectorXd> means;
  for (const auto& [id, e] : stats_.entries()) {
    means.emplace(id, e.sum / static_cast<double>(e.count));
  }
  cached_ = std::make_unique<PrototypeClassifier>(means);
}

Prediction NcmLearner::predict(std::span<const float> feature) const {
  check_dim(stats_.dim(), feature.size());
  if (cached_) return cached_->predict(to_vector(feature));
  return ncm_predict(stats_, to_vector(feature));
}

LdaLearner::LdaLearner(std::size_t dim, double shrinkage)
    : state_(dim), shrinkage_(shrinkage) {
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    fail(ErrorKind::kConfig, "LDA shrinkage must lie in [0, 1]");
  }
}

void LdaLearner::observe(ClassId label, std::span<const float> feature) {
  state_.observe(label, feature);
}

void LdaLearner::end_task() {
  head_ = std::make_unique<LdaHead>(lda_finalize(state_, shrinkage_));
}

const LdaHead& LdaLearner::head() const {
  if (!head_) fail(ErrorKind::kProtocol, "LDA head requested before end_task");
  return *head_;
}

Prediction LdaLearner::predict(std::span<const float> feature) const {
  check_dim(state_.dim(), feature.size());
  return head().predict(to_vector(feature));
}

FixedPrototypeLearner::FixedPrototypeLearner(std::map<ClassId, Eigen::VectorXd> prototypes)
    : all_(std::move(prototypes)) {
  if (all_.empty()) fail(ErrorKind::kConfig, "prototype set is empty");
  dim_ = static_cast<std::size_t>(all_.begin()->second.size());
}

void FixedPrototypeLearner::begin_task(std::span<const ClassId> classes) {
  for (ClassId id : classes) {
    const auto it = all_.find(id);
    if (it == all_.end()) {
      fail(ErrorKind::kData, "no prototype supplied for class " + std::to_string(id));
    }
    active_.insert(*it);
  }
  classifier_ = PrototypeClassifier(active_);
}

Prediction FixedPrototypeLearner::predict(std::span<const float> feature) const {
  check_dim(dim_, feature.size());
  return classifier_.predict(to_vector(feature));
}

}  // namespace pcil
