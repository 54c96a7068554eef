// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "pcil/error.hpp"
#include "pcil/metrics.hpp"

using namespace pcil;

TEST_CASE("average accuracy over the rows of R") {
  AccuracyMatrix r(3);
  r.set(0, 0, 0.9);
  r.set(1, 0, 0.8);
  r.set(1, 1, 0.7);
  CHECK(average_accuracy(r, 1) == 0.9);
  CHECK(average_accuracy(r, 2) == doctest::Approx(0.75));
  CHECK_THROWS_AS(average_accuracy(r, 3), Error);
  CHECK_THROWS_AS(final_average_accuracy(r), Error);
  r.set(2, 0, 0.6);
  r.set(2, 1, 0.5);
  r.set(2, 2, 1.0);
  CHECK(final_average_accuracy(r) == doctest::Approx(0.7));
  CHECK(r.row(2).size() == 3);
  CHECK_THROWS_AS(r.set(0, 1, 0.5), Error);   // above the diagonal
  CHECK_THROWS_AS(r.set(1, 0, 1.5), Error);   // outside [0, 1]
  CHECK_THROWS_AS(AccuracyMatrix(0), Error);
}

TEST_CASE("plain and balanced accuracy") {
  const std::vector<ClassId> labels{0, 0, 0, 0, 1};
  const std::vector<ClassId> preds{0, 0, 0, 0, 0};
  CHECK(plain_accuracy(preds, labels) == 0.8);
  CHECK(balanced_accuracy(preds, labels) == 0.5);
  CHECK(balanced_accuracy(labels, labels) == 1.0);
  CHECK_THROWS_AS(balanced_accuracy({}, {}), Error);
  CHECK_THROWS_AS(plain_accuracy(preds, std::vector<ClassId>{0}), Error);
}

TEST_CASE("evaluate_task counts hits over the given indices") {
  FeatureDataset ds(1);
  for (int i = 0; i < 6; ++i) {
    const float v = static_cast<float>(i);
    ds.add(i % 2, std::span<const float>(&v, 1));
  }
  const PredictFn even = [](std::span<const float>) { return ClassId{0}; };
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  CHECK(evaluate_task(even, ds, idx) == 0.5);
  CHECK_THROWS_AS(evaluate_task(even, ds, std::vector<std::size_t>{}), Error);
}
