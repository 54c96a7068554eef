// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pcil/feature_store.hpp"

namespace pcil {

/// Lower-triangular accuracy matrix. Row t (0-based) holds the accuracy on
/// tasks 0..t measured after training task t. Entries above the diagonal do
/// not exist. Reports present t and i 1-based.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t tasks);

  std::size_t tasks() const noexcept { return rows_.size(); }
  /// Stores R[t][i]; requires i <= t and a value in [0, 1].
  void set(std::size_t t, std::size_t i, double accuracy);
  bool defined(std::size_t t, std::size_t i) const;
  double at(std::size_t t, std::size_t i) const;
  bool row_complete(std::size_t t) const;
  /// Row t as stored (length t + 1 when complete).
  std::span<const double> row(std::size_t t) const;

  friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

 private:
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<bool>> set_;
};

using PredictFn = std::function<ClassId(std::span<const float>)>;

/// Fraction of `indices` (into `data`) that `predict` labels correctly.
double evaluate_task(const PredictFn& predict, const FeatureDataset& data,
                     std::span<const std::size_t> indices);

/// A_t for a 1-based task count t: mean of R[t-1][0..t-1].
double average_accuracy(const AccuracyMatrix& r, std::size_t t);
double final_average_accuracy(const AccuracyMatrix& r);

/// Mean over classes of per-class recall.
double balanced_accuracy(std::span<const ClassId> predictions,
                         std::span<const ClassId> labels);
double plain_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels);

}  // namespace pcil
