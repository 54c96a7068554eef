// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "pcil/error.hpp"
#include "pcil/feature_store.hpp"
#include "support/synth.hpp"

using namespace pcil;
namespace fs = std::filesystem;

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

fs::path temp_dir(const char* name) {
  auto dir = fs::temp_directory_path() / ("pcil_fs_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

FeatureDataset small() {
  FeatureDataset ds(3);
  const float a[] = {1.0f, -2.5f, 0.0f};
  const float b[] = {0.25f, 4.0f, -1.0f};
  ds.add(7, a);
  ds.add(2, b);
  ds.set_class_name(7, "Pionus menstruus");
  return ds;
}

}  // namespace

TEST_CASE("pfv1 byte layout is little-endian and packed") {
  const auto bytes = encode_pfv1(small());
  REQUIRE(bytes.size() == kPfv1HeaderBytes + 2 * (4 + 3 * 4));
  CHECK(std::memcmp(bytes.data(), "PFV1", 4) == 0);
  CHECK(bytes[4] == 1);                   // version
  CHECK(bytes[8] == 3);                   // L
  CHECK(bytes[12] == 2);                  // N
  CHECK(bytes[20] == 7);                  // first label
  float f = 0;
  std::memcpy(&f, bytes.data() + 28, 4);  // second component of first vector
  CHECK(f == -2.5f);
}

TEST_CASE("pfv1 round trip through files keeps registry and split") {
  const auto dir = temp_dir("roundtrip");
  auto ds = small();
  ds.set_split(SplitTag::kTest);
  write_feature_file(ds, dir / "x.pfv");
  CHECK(fs::exists(dir / "x.pfv.json"));
  const auto back = load_feature_file(dir / "x.pfv");
  CHECK(back == ds);
  CHECK(back.class_registry().at(7) == "Pionus menstruus");
  CHECK(back.class_registry().at(2) == "class_2");
}

TEST_CASE("missing sidecar falls back to defaults") {
  const auto dir = temp_dir("nosidecar");
  write_feature_file(small(), dir / "x.pfv");
  fs::remove(dir / "x.pfv.json");
  const auto back = load_feature_file(dir / "x.pfv");
  CHECK(back.size() == 2);
  CHECK(back.split() == SplitTag::kTrain);
}

TEST_CASE("malformed files are rejected with the right error kind") {
  const auto good = encode_pfv1(small());

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(kind_of([&] { decode_pfv1(bad_magic); }) == ErrorKind::kFormat);

  auto bad_version = good;
  bad_version[4] = 2;
  CHECK(kind_of([&] { decode_pfv1(bad_version); }) == ErrorKind::kFormat);

  for (std::size_t cut : {std::size_t{10}, kPfv1HeaderBytes - 1, good.size() - 1}) {
    std::vector<std::uint8_t> truncated(good.begin(), good.begin() + static_cast<long>(cut));
    CHECK(kind_of([&] { decode_pfv1(truncated); }) == ErrorKind::kCorruption);
  }

  auto trailing = good;
  trailing.push_back(0);
  CHECK(kind_of([&] { decode_pfv1(trailing); }) == ErrorKind::kCorruption);

  auto nan = good;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 24, &q, 4);
  CHECK(kind_of([&] { decode_pfv1(nan); }) == ErrorKind::kData);

  auto zero_dim = good;
  zero_dim[8] = 0;
  CHECK_THROWS_AS(decode_pfv1(zero_dim), Error);
}

TEST_CASE("add rejects wrong length and non-finite values") {
  FeatureDataset ds(2);
  const float three[] = {1, 2, 3};
  CHECK(kind_of([&] { ds.add(0, three); }) == ErrorKind::kShape);
  const float inf[] = {1, std::numeric_limits<float>::infinity()};
  CHECK(kind_of([&] { ds.add(0, inf); }) == ErrorKind::kData);
  CHECK(ds.empty());
}

TEST_CASE("missing file is an io error") {
  CHECK(kind_of([] { load_feature_file("/nonexistent/file.pfv"); }) == ErrorKind::kIo);
}

TEST_CASE("task split: sizes, coverage, determinism") {
  std::set<ClassId> ids;
  for (ClassId c = 0; c < 103; ++c) ids.insert(c * 3 + 1);
  const auto p = split_classes_into_tasks(ids, 10, 42);
  CHECK(p.tasks == 10);
  CHECK(p.assignment.size() == 103);
  CHECK(p.task_size(0) == 13);  // floor(103/10) plus the 3 left over
  for (std::uint32_t t = 1; t < 10; ++t) CHECK(p.task_size(t) == 10);
  std::set<ClassId> seen;
  for (std::uint32_t t = 0; t < 10; ++t) {
    const auto cls = p.classes_of(t);
    CHECK(std::is_sorted(cls.begin(), cls.end()));
    seen.insert(cls.begin(), cls.end());
  }
  CHECK(seen == ids);
  CHECK(split_classes_into_tasks(ids, 10, 42) == p);
  CHECK_FALSE(split_classes_into_tasks(ids, 10, 43) == p);
  CHECK(partition_from_json(to_json(p)) == p);
}

TEST_CASE("task split: the first task is a seeded Fisher-Yates prefix") {
  std::set<ClassId> ids{5, 1, 9, 3};
  const auto p = split_classes_into_tasks(ids, 2, 99);
  // Independent Fisher-Yates over the sorted ids.
  std::vector<ClassId> order{1, 3, 5, 9};
  SplitMix64 rng(99);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<ClassId> first(order.begin(), order.begin() + 2);
  std::sort(first.begin(), first.end());
  CHECK(p.classes_of(0) == first);
}

TEST_CASE("task split: invalid requests") {
  std::set<ClassId> ids{1, 2, 3};
  CHECK(kind_of([&] { split_classes_into_tasks(ids, 0, 1); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { split_classes_into_tasks(ids, 4, 1); }) == ErrorKind::kConfig);
  CHECK(split_classes_into_tasks(ids, 3, 1).task_size(2) == 1);
}

TEST_CASE("task stream assigns samples by class and rejects unknown test classes") {
  FeatureDataset train(1), test(1, SplitTag::kTest);
  const float v[] = {0.5f};
  for (ClassId c : {1u, 2u, 3u, 4u, 1u}) train.add(c, v);
  for (ClassId c : {4u, 1u}) test.add(c, v);
  const auto p = split_classes_into_tasks(train.class_ids(), 2, 5);
  const auto s = build_task_stream(train, test, p);
  std::size_t total = 0;
  for (std::uint32_t t = 0; t < 2; ++t) {
    for (auto i : s.train[t]) CHECK(p.assignment.at(train.label(i)) == t);
    total += s.train[t].size();
  }
  CHECK(total == 5);
  test.add(9, v);
  CHECK(kind_of([&] { build_task_stream(train, test, p); }) == ErrorKind::kData);
}
