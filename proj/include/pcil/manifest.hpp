// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcil/prompts.hpp"

namespace pcil {

/// Text-to-image sampling parameters. The defaults are the 256-px generator
/// settings: 40 inference steps at guidance scale 2.0.
struct GenerationParams {
  std::uint32_t image_size = 256;
  std::uint32_t inference_steps = 40;
  double guidance_scale = 2.0;

  void validate() const;
  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

struct GenerationJob {
  std::string job_key;
  std::size_t class_index = 0;
  std::uint32_t replica = 0;
  std::string prompt;  // NFC-normalised UTF-8
  std::uint64_t seed = 0;
  GenerationParams params;
  std::string output_path;  // relative to the run's output root

  friend bool operator==(const GenerationJob&, const GenerationJob&) = default;
};

struct ManifestOptions {
  std::uint64_t seed = 0;
  GenerationParams params;
  ImagePromptStyle style = ImagePromptStyle::kDescription;
  std::string image_extension = "png";
};

struct GenerationManifest {
  RealmSpec realm;
  std::uint64_t seed = 0;
  std::uint32_t per_class = 0;
  ImagePromptStyle style = ImagePromptStyle::kDescription;
  std::vector<ClassSpec> classes;
  std::vector<GenerationJob> jobs;

  /// Checks |jobs| = n * |classes| and key uniqueness.
  void validate() const;
};

/// Stable job identity: FNV-1a 64 over the NFC prompt, class index and replica.
std::string make_job_key(std::string_view nfc_prompt, std::size_t class_index,
                         std::uint32_t replica);

/// Per-job seed: mix_seed(mix_seed(seed, class_index), replica).
std::uint64_t job_seed(std::uint64_t manifest_seed, std::size_t class_index,
                       std::uint32_t replica);

/// n_per_class jobs per class, class-major order. Output paths are
/// "c<class index, 5 digits>/<job key>.<ext>".
GenerationManifest build_generation_manifest(const RealmSpec& realm,
                                             std::span<const ClassSpec> specs,
                                             std::uint32_t n_per_class,
                                             const ManifestOptions& options = {});

nlohmann::json to_json(const GenerationParams& params);
GenerationParams generation_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GenerationManifest& manifest);
GenerationManifest manifest_from_json(const nlohmann::json& j);

void save_manifest(const GenerationManifest& manifest, const std::filesystem::path& path);
GenerationManifest load_manifest(const std::filesystem::path& path);

}  // namespace pcil
