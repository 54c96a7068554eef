// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "pcil/error.hpp"
#include "pcil/learners.hpp"
#include "support/oracles.hpp"

using namespace pcil;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected pcil::Error");
  return ErrorKind::kIo;
}

std::vector<float> vec(std::initializer_list<float> v) { return v; }

}  // namespace

TEST_CASE("class stats accumulate counts, sums and means") {
  ClassStats s(2);
  s.observe(3, vec({1, 2}));
  s.observe(3, vec({3, 4}));
  s.observe(1, vec({-1, 0}));
  CHECK(s.count(3) == 2);
  CHECK(s.total_count() == 3);
  CHECK(s.mean(3).isApprox(Eigen::Vector2d(2, 3)));
  CHECK(s.class_ids() == std::vector<ClassId>{1, 3});
  CHECK(s.mean_matrix().col(0).isApprox(Eigen::Vector2d(-1, 0)));
  CHECK(kind_of([&] { s.observe(1, vec({1, 2, 3})); }) == ErrorKind::kShape);
  CHECK(kind_of([&] { s.observe(1, vec({NAN, 2})); }) == ErrorKind::kData);
}

TEST_CASE("ncm matches a brute-force cosine rule on a Gaussian set") {
  const auto m = testing::make_mixture(8, 5, 1.0, 1.0, 3);
  const auto train = testing::sample(m, {30, 30, 30, 30, 30}, 4);
  const auto test = testing::sample(m, {10, 10, 10, 10, 10}, 5, SplitTag::kTest);
  NcmLearner ncm(8);
  ncm.begin_task(std::vector<ClassId>{0, 1, 2, 3, 4});
  for (std::size_t i = 0; i < train.size(); ++i) ncm.observe(train.label(i), train.features(i));
  ncm.end_task();

  const Eigen::MatrixXd x = testing::feature_matrix(train);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(8, 5);
  for (std::size_t i = 0; i < train.size(); ++i) means.col(train.label(i)) += x.col(static_cast<Eigen::Index>(i)) / 30.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    Eigen::VectorXd f(8);
    for (int j = 0; j < 8; ++j) f[j] = test.features(i)[static_cast<std::size_t>(j)];
    Eigen::VectorXd cos(5);
    for (int k = 0; k < 5; ++k) cos[k] = means.col(k).dot(f) / (means.col(k).norm() * f.norm());
    const auto p = ncm.predict(test.features(i));
    CHECK(p.label == static_cast<ClassId>(testing::first_max(cos)));
    CHECK((p.scores - cos).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("prototype ties go to the smallest class id") {
  std::map<ClassId, Eigen::VectorXd> protos;
  protos[9] = Eigen::Vector2d(1, 1);
  protos[4] = Eigen::Vector2d(2, 2);  // same direction as 9
  protos[1] = Eigen::Vector2d(-1, 0);
  CHECK(fixed_prototype_classify(protos, Eigen::Vector2d(3, 3)) == 4);
  Eigen::VectorXd s(3);
  s << 1.0, 2.0, 2.0;
  CHECK(argmax_first(s) == 1);
}

TEST_CASE("degenerate inputs") {
  std::map<ClassId, Eigen::VectorXd> protos{{1, Eigen::Vector2d(1, 0)}};
  CHECK(kind_of([&] { fixed_prototype_classify(protos, Eigen::Vector2d(0, 0)); }) ==
        ErrorKind::kDegenerate);
  protos[2] = Eigen::Vector2d(0, 0);
  CHECK(kind_of([&] { PrototypeClassifier c(protos); }) == ErrorKind::kDegenerate);
  CHECK(kind_of([] { PrototypeClassifier c(std::map<ClassId, Eigen::VectorXd>{}); }) ==
        ErrorKind::kConfig);
  NcmLearner ncm(2);
  CHECK(kind_of([&] { ncm.end_task(); ncm.predict(vec({1, 0})); }) == ErrorKind::kProtocol);
}

TEST_CASE("lda matches the two-pass batch oracle") {
  const auto m = testing::make_mixture(6, 4, 1.5, 4.0, 8);
  const auto ds = testing::shuffled(testing::sample(m, {40, 25, 15, 30}, 9), 10);
  for (double alpha : {0.0, 0.1, 0.7, 1.0}) {
    LdaState state(6);
    for (std::size_t i = 0; i < ds.size(); ++i) state.observe(ds.label(i), ds.features(i));
    const auto head = lda_finalize(state, alpha);
    const auto oracle = testing::batch_lda(ds, alpha);
    CHECK(head.classes == oracle.classes);
    CHECK(testing::rel_diff(head.weights, oracle.weights) < 1e-9);
    CHECK(testing::rel_diff(head.bias, oracle.bias) < 1e-9);
  }
}

TEST_CASE("lda rejects bad shrinkage and singular covariance") {
  LdaState state(3);
  state.observe(0, vec({1, 0, 0}));
  state.observe(0, vec({2, 0, 0}));
  state.observe(1, vec({0, 1, 0}));
  state.observe(1, vec({0, 3, 0}));
  CHECK(kind_of([&] { lda_finalize(state, 1.5); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { lda_finalize(state, 0.0); }) == ErrorKind::kNumeric);
  CHECK_NOTHROW(lda_finalize(state, 0.2));
  CHECK(kind_of([] { lda_finalize(LdaState(2), 0.1); }) == ErrorKind::kProtocol);
}

TEST_CASE("lda with one sample per class still finalizes under shrinkage") {
  LdaState state(2);
  state.observe(0, vec({1, 0}));
  state.observe(1, vec({0, 1}));
  const auto head = lda_finalize(state, 0.5);
  CHECK(head.weights.allFinite());
  CHECK(head.predict(Eigen::Vector2d(2, 0)).label == 0);
}

TEST_CASE("lda learner is order independent up to rounding") {
  const auto m = testing::make_mixture(5, 3, 2.0, 1.0, 12);
  const auto ds = testing::sample(m, {20, 20, 20}, 13);
  const auto mixed = testing::shuffled(ds, 14);
  LdaLearner a(5, 0.1), b(5, 0.1);
  for (std::size_t i = 0; i < ds.size(); ++i) a.observe(ds.label(i), ds.features(i));
  for (std::size_t i = 0; i < mixed.size(); ++i) b.observe(mixed.label(i), mixed.features(i));
  a.end_task();
  b.end_task();
  CHECK(testing::rel_diff(a.head().weights, b.head().weights) < 1e-12);
}

TEST_CASE("fixed-prototype learner only sees classes of opened tasks") {
  std::map<ClassId, Eigen::VectorXd> protos{
      {1, Eigen::Vector2d(1, 0)}, {2, Eigen::Vector2d(0, 1)}, {3, Eigen::Vector2d(1, 1)}};
  FixedPrototypeLearner zs(protos);
  zs.begin_task(std::vector<ClassId>{1, 2});
  zs.end_task();
  CHECK(zs.predict(vec({1, 1.1f})).label == 2);
  zs.begin_task(std::vector<ClassId>{3});
  CHECK(zs.predict(vec({1, 1.1f})).label == 3);
  CHECK(kind_of([&] { zs.begin_task(std::vector<ClassId>{7}); }) == ErrorKind::kData);
}
