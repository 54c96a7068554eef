// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pcil/error.hpp"
#include "pcil/prng.hpp"
#include "byte_io.hpp"

namespace pcil {

const char* to_string(SplitTag tag) noexcept {
  return tag == SplitTag::kTrain ? "train" : "test";
}

SplitTag split_tag_from_string(const std::string& s) {
  if (s == "train") return SplitTag::kTrain;
  if (s == "test") return SplitTag::kTest;
  fail(ErrorKind::kFormat, "unknown split tag '" + s + "'");
}

FeatureDataset::FeatureDataset(std::uint32_t dim, SplitTag split)
    : dim_(dim), split_(split) {
  if (dim == 0) fail(ErrorKind::kConfig, "feature dimension must be positive");
}

std::span<const float> FeatureDataset::features(std::size_t i) const {
  if (i >= labels_.size()) {
    fail(ErrorKind::kData, "sample index " + std::to_string(i) + " out of range");
  }
  return std::span<const float>(values_).subspan(i * dim_, dim_);
}

std::set<ClassId> FeatureDataset::class_ids() const {
  return {labels_.begin(), labels_.end()};
}

void FeatureDataset::add(ClassId label, std::span<const float> vector) {
  if (vector.size() != dim_) {
    fail(ErrorKind::kShape, "sample has " + std::to_string(vector.size()) +
                                " values, dataset dimension is " +
                                std::to_string(dim_));
  }
  for (std::size_t j = 0; j < vector.size(); ++j) {
    if (!std::isfinite(vector[j])) {
      fail(ErrorKind::kData, "non-finite value in sample " +
                                 std::to_string(labels_.size()) + " at component " +
                                 std::to_string(j));
    }
  }
  labels_.push_back(label);
  values_.insert(values_.end(), vector.begin(), vector.end());
  registry_.try_emplace(label, "class_" + std::to_string(label));
}

void FeatureDataset::set_class_name(ClassId id, std::string name) {
  registry_[id] = std::move(name);
}

void FeatureDataset::validate() const {
  if (dim_ == 0) fail(ErrorKind::kData, "feature dimension is zero");
  if (values_.size() != labels_.size() * dim_) {
    fail(ErrorKind::kData, "value count does not match N*L");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!registry_.contains(labels_[i])) {
      fail(ErrorKind::kData, "class id " + std::to_string(labels_[i]) +
                                 " of sample " + std::to_string(i) +
                                 " missing from class registry");
    }
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      fail(ErrorKind::kData,
           "non-finite value in sample " + std::to_string(k / dim_));
    }
  }
}

// ---------------------------------------------------------------------------
// PFV1 codec

std::vector<std::uint8_t> encode_pfv1(const FeatureDataset& dataset) {
  const std::uint32_t dim = dataset.dim();
  detail::ByteWriter out;
  out.bytes().reserve(kPfv1HeaderBytes + dataset.size() * (4 + 4 * std::size_t{dim}));
  out.raw("PFV1");
  out.u32(kPfv1Version);
  out.u32(dim);
  out.u64(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.u32(dataset.label(i));
    for (float v : dataset.features(i)) out.f32(v);
  }
  return out.take();
}

FeatureDataset decode_pfv1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "PFV1", 4) != 0) {
    fail(ErrorKind::kFormat, "bad magic: not a PFV1 feature file");
  }
  detail::ByteReader in(bytes.subspan(4), 4);
  const std::uint32_t version = in.u32();
  if (version != kPfv1Version) {
    fail(ErrorKind::kFormat, "unsupported PFV1 version " + std::to_string(version));
  }
  const std::uint32_t dim = in.u32();
  if (dim == 0) fail(ErrorKind::kFormat, "PFV1 header declares L = 0");
  const std::uint64_t n = in.u64();
  const std::uint64_t record = 4 + 4 * std::uint64_t{dim};
  if (n > 0 && in.remaining() / record < n) {
    const std::uint64_t expected = kPfv1HeaderBytes + n * record;
    fail(ErrorKind::kCorruption,
         "truncated PFV1 payload: header promises " + std::to_string(expected) +
             " bytes, file ends at byte offset " + std::to_string(bytes.size()));
  }
  FeatureDataset ds(dim);
  std::vector<float> row(dim);
  for (std::uint64_t i = 0; i < n; ++i) {
    const ClassId label = in.u32();
    for (auto& v : row) v = in.f32();
    ds.add(label, row);
  }
  if (in.remaining() != 0) {
    fail(ErrorKind::kCorruption, "trailing bytes after last PFV1 record at byte offset " +
                                     std::to_string(in.offset()));
  }
  return ds;
}

std::filesystem::path sidecar_path(const std::filesystem::path& feature_file) {
  auto p = feature_file;
  p += ".json";
  return p;
}

FeatureDataset load_feature_file(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path.string());
  FeatureDataset ds;
  try {
    ds = decode_pfv1(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }

  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream sin(side);
    nlohmann::json j;
    try {
      sin >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, side.string() + ": " + e.what());
    }
    try {
      ds.set_split(split_tag_from_string(j.value("split", "train")));
      if (j.contains("classes")) {
        for (const auto& [key, name] : j.at("classes").items()) {
          ds.set_class_name(static_cast<ClassId>(std::stoul(key)), name.get<std::string>());
        }
      }
      if (j.contains("provenance")) ds.set_provenance(j.at("provenance"));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, side.string() + ": " + e.what());
    } catch (const std::logic_error&) {
      fail(ErrorKind::kFormat, side.string() + ": class keys must be integers");
    }
  }
  return ds;
}

void write_feature_file(const FeatureDataset& dataset,
                        const std::filesystem::path& path) {
  dataset.validate();
  detail::write_file_bytes(path.string(), encode_pfv1(dataset));
  nlohmann::json side;
  side["format"] = "PFV1";
  side["version"] = kPfv1Version;
  side["dim"] = dataset.dim();
  side["count"] = dataset.size();
  side["split"] = to_string(dataset.split());
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [id, name] : dataset.class_registry()) {
    classes[std::to_string(id)] = name;
  }
  side["classes"] = std::move(classes);
  side["provenance"] = dataset.provenance();
  std::ofstream sout(sidecar_path(path), std::ios::trunc);
  if (!sout) fail(ErrorKind::kIo, "cannot write sidecar for " + path.string());
  sout << side.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Task partitioning

std::vector<ClassId> TaskPartition::classes_of(std::uint32_t task) const {
  std::vector<ClassId> out;
  for (const auto& [id, t] : assignment) {
    if (t == task) out.push_back(id);
  }
  return out;
}

std::size_t TaskPartition::task_size(std::uint32_t task) const {
  return static_cast<std::size_t>(std::count_if(
      assignment.begin(), assignment.end(),
      [task](const auto& kv) { return kv.second == task; }));
}

TaskPartition split_classes_into_tasks(const std::set<ClassId>& class_ids,
                                       std::uint32_t tasks, std::uint64_t seed) {
  if (tasks == 0) fail(ErrorKind::kConfig, "number of tasks must be positive");
  if (class_ids.size() < tasks) {
    fail(ErrorKind::kConfig, "cannot split " + std::to_string(class_ids.size()) +
                                 " classes into " + std::to_string(tasks) + " tasks");
  }
  std::vector<ClassId> order(class_ids.begin(), class_ids.end());
  SplitMix64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t per_task = order.size() / tasks;
  const std::size_t leftover = order.size() % tasks;

  TaskPartition p;
  p.tasks = tasks;
  p.seed = seed;
  std::size_t pos = 0;
  for (std::uint32_t t = 0; t < tasks; ++t) {
    const std::size_t take = per_task + (t == 0 ? leftover : 0);
    for (std::size_t k = 0; k < take; ++k) p.assignment[order[pos++]] = t;
  }
  return p;
}

nlohmann::json to_json(const TaskPartition& partition) {
  nlohmann::json j;
  j["tasks"] = partition.tasks;
  j["seed"] = partition.seed;
  nlohmann::json per_task = nlohmann::json::array();
  for (std::uint32_t t = 0; t < partition.tasks; ++t) {
    per_task.push_back(partition.classes_of(t));
  }
  j["task_classes"] = std::move(per_task);
  return j;
}

TaskPartition partition_from_json(const nlohmann::json& j) {
  TaskPartition p;
  try {
    p.tasks = j.at("tasks").get<std::uint32_t>();
    p.seed = j.value("seed", std::uint64_t{0});
    const auto& per_task = j.at("task_classes");
    if (per_task.size() != p.tasks) {
      fail(ErrorKind::kFormat, "partition lists " + std::to_string(per_task.size()) +
                                   " tasks, header says " + std::to_string(p.tasks));
    }
    for (std::uint32_t t = 0; t < p.tasks; ++t) {
      for (const auto& id : per_task[t]) {
        if (!p.assignment.emplace(id.get<ClassId>(), t).second) {
          fail(ErrorKind::kFormat, "class " + id.dump() + " assigned to two tasks");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("malformed partition: ") + e.what());
  }
  return p;
}

TaskStream build_task_stream(const FeatureDataset& train,
                             const FeatureDataset& test,
                             const TaskPartition& partition) {
  if (!train.empty() && !test.empty() && train.dim() != test.dim()) {
    fail(ErrorKind::kShape, "train dimension " + std::to_string(train.dim()) +
                                " differs from test dimension " +
                                std::to_string(test.dim()));
  }
  TaskStream stream;
  stream.partition = partition;
  stream.train.resize(partition.tasks);
  stream.test.resize(partition.tasks);

  const auto group = [&](const FeatureDataset& ds, const char* which,
                         std::vector<std::vector<std::size_t>>& out) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto it = partition.assignment.find(ds.label(i));
      if (it == partition.assignment.end()) {
        fail(ErrorKind::kData, std::string(which) + " sample " + std::to_string(i) +
                                   " has class id " + std::to_string(ds.label(i)) +
                                   " which is absent from the task partition");
      }
      out[it->second].push_back(i);
    }
  };
  group(train, "train", stream.train);
  group(test, "test", stream.test);
  return stream;
}

}  // namespace pcil
