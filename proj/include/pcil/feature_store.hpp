// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pcil {

using ClassId = std::uint32_t;

enum class SplitTag { kTrain, kTest };

const char* to_string(SplitTag tag) noexcept;
SplitTag split_tag_from_string(const std::string& s);

/// Labeled feature vectors stored row-major as 32-bit floats, exactly as they
/// appear in a PFV1 file. Instances are immutable once built.
class FeatureDataset {
 public:
  FeatureDataset() = default;
  explicit FeatureDataset(std::uint32_t dim, SplitTag split = SplitTag::kTrain);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  SplitTag split() const noexcept { return split_; }
  void set_split(SplitTag split) noexcept { split_ = split; }

  ClassId label(std::size_t i) const { return labels_.at(i); }
  std::span<const ClassId> labels() const noexcept { return labels_; }
  std::span<const float> features(std::size_t i) const;
  std::span<const float> raw() const noexcept { return values_; }

  const std::map<ClassId, std::string>& class_registry() const noexcept {
    return registry_;
  }
  std::set<ClassId> class_ids() const;

  /// Free-form provenance carried in the sidecar manifest.
  const nlohmann::json& provenance() const noexcept { return provenance_; }
  void set_provenance(nlohmann::json p) { provenance_ = std::move(p); }

  /// Appends a sample. Rejects non-finite values and wrong lengths. A class
  /// not yet in the registry is registered as "class_<id>".
  void add(ClassId label, std::span<const float> vector);
  void set_class_name(ClassId id, std::string name);

  /// Checks every invariant; throws on the first violation.
  void validate() const;

  friend bool operator==(const FeatureDataset&, const FeatureDataset&) = default;

 private:
  std::uint32_t dim_ = 0;
  SplitTag split_ = SplitTag::kTrain;
  std::vector<ClassId> labels_;
  std::vector<float> values_;
  std::map<ClassId, std::string> registry_;
  nlohmann::json provenance_ = nlohmann::json::object();
};

/// PFV1 layout: "PFV1", u32 version (1), u32 L, u64 N, then N records of
/// u32 class_id + L float32. Everything little-endian.
inline constexpr std::size_t kPfv1HeaderBytes = 4 + 4 + 4 + 8;
inline constexpr std::uint32_t kPfv1Version = 1;

/// Sidecar manifest path for a feature file: "<path>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& feature_file);

/// Reads a PFV1 file and its optional sidecar. Without a sidecar the split
/// tag defaults to train and classes get placeholder names.
FeatureDataset load_feature_file(const std::filesystem::path& path);

/// Writes the PFV1 payload and the sidecar manifest.
void write_feature_file(const FeatureDataset& dataset,
                        const std::filesystem::path& path);

/// PFV1 bytes only (no sidecar); used for byte-level comparisons.
std::vector<std::uint8_t> encode_pfv1(const FeatureDataset& dataset);
FeatureDataset decode_pfv1(std::span<const std::uint8_t> bytes);

struct TaskPartition {
  std::uint32_t tasks = 0;
  std::uint64_t seed = 0;
  std::map<ClassId, std::uint32_t> assignment;

  /// Class ids of task t in ascending order.
  std::vector<ClassId> classes_of(std::uint32_t task) const;
  std::size_t task_size(std::uint32_t task) const;

  friend bool operator==(const TaskPartition&, const TaskPartition&) = default;
};

/// Shuffles the sorted ids (Fisher-Yates over SplitMix64(seed)), then deals
/// floor(K/T) ids to each task in order; task 0 additionally takes the
/// K mod T leftovers, which sit at the front of the shuffled list.
TaskPartition split_classes_into_tasks(const std::set<ClassId>& class_ids,
                                       std::uint32_t tasks, std::uint64_t seed);

nlohmann::json to_json(const TaskPartition& partition);
TaskPartition partition_from_json(const nlohmann::json& j);

struct TaskStream {
  TaskPartition partition;
  std::vector<std::vector<std::size_t>> train;  // per task, sample indices
  std::vector<std::vector<std::size_t>> test;

  std::uint32_t tasks() const noexcept { return partition.tasks; }
};

TaskStream build_task_stream(const FeatureDataset& train,
                             const FeatureDataset& test,
                             const TaskPartition& partition);

}  // namespace pcil
