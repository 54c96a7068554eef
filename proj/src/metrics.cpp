// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/metrics.hpp"

#include <cmath>
#include <map>
#include <string>

#include "pcil/error.hpp"

namespace pcil {

AccuracyMatrix::AccuracyMatrix(std::size_t tasks) {
  if (tasks == 0) fail(ErrorKind::kConfig, "accuracy matrix needs at least one task");
  for (std::size_t t = 0; t < tasks; ++t) {
    rows_.emplace_back(t + 1, 0.0);
    set_.emplace_back(t + 1, false);
  }
}

void AccuracyMatrix::set(std::size_t t, std::size_t i, double accuracy) {
  if (t >= tasks() || i > t) {
    fail(ErrorKind::kProtocol, "accuracy entry (" + std::to_string(t + 1) + "," +
                                   std::to_string(i + 1) + ") is outside the lower triangle");
  }
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    fail(ErrorKind::kEvaluation, "accuracy must lie in [0, 1]");
  }
  rows_[t][i] = accuracy;
  set_[t][i] = true;
}

bool AccuracyMatrix::defined(std::size_t t, std::size_t i) const {
  return t < tasks() && i <= t && set_[t][i];
}

double AccuracyMatrix::at(std::size_t t, std::size_t i) const {
  if (!defined(t, i)) {
    fail(ErrorKind::kProtocol, "accuracy entry (" + std::to_string(t + 1) + "," +
                                   std::to_string(i + 1) + ") is undefined");
  }
  return rows_[t][i];
}

bool AccuracyMatrix::row_complete(std::size_t t) const {
  if (t >= tasks()) return false;
  for (bool b : set_[t]) {
    if (!b) return false;
  }
  return true;
}

std::span<const double> AccuracyMatrix::row(std::size_t t) const {
  if (t >= tasks()) fail(ErrorKind::kProtocol, "row out of range");
  return rows_[t];
}

double evaluate_task(const PredictFn& predict, const FeatureDataset& data,
                     std::span<const std::size_t> indices) {
  if (indices.empty()) fail(ErrorKind::kEvaluation, "task has no test samples");
  std::size_t correct = 0;
  for (std::size_t idx : indices) {
    if (predict(data.features(idx)) == data.label(idx)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double average_accuracy(const AccuracyMatrix& r, std::size_t t) {
  if (t == 0 || t > r.tasks()) {
    fail(ErrorKind::kProtocol, "task count " + std::to_string(t) + " out of range");
  }
  if (!r.row_complete(t - 1)) {
    fail(ErrorKind::kProtocol, "row " + std::to_string(t) + " of the accuracy matrix is incomplete");
  }
  double sum = 0.0;
  for (double v : r.row(t - 1)) sum += v;
  return sum / static_cast<double>(t);
}

double final_average_accuracy(const AccuracyMatrix& r) {
  return average_accuracy(r, r.tasks());
}

double balanced_accuracy(std::span<const ClassId> predictions,
                         std::span<const ClassId> labels) {
  if (labels.empty() || predictions.size() != labels.size()) {
    fail(ErrorKind::kEvaluation, "balanced accuracy needs equal, non-empty inputs");
  }
  std::map<ClassId, std::pair<std::size_t, std::size_t>> per_class;  // hits, total
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& c = per_class[labels[i]];
    ++c.second;
    if (predictions[i] == labels[i]) ++c.first;
  }
  double sum = 0.0;
  for (const auto& [id, c] : per_class) {
    sum += static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return sum / static_cast<double>(per_class.size());
}

double plain_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels) {
  if (labels.empty() || predictions.size() != labels.size()) {
    fail(ErrorKind::kEvaluation, "accuracy needs equal, non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace pcil
