// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "pcil/error.hpp"
#include "pcil/prng.hpp"
#include "pcil/text.hpp"

namespace pcil {

void GenerationParams::validate() const {
  if (image_size == 0 || image_size % 8 != 0) {
    fail(ErrorKind::kConfig, "image size must be a positive multiple of 8");
  }
  if (inference_steps == 0) fail(ErrorKind::kConfig, "inference steps must be positive");
  if (!std::isfinite(guidance_scale) || guidance_scale < 0.0) {
    fail(ErrorKind::kConfig, "guidance scale must be finite and non-negative");
  }
}

void GenerationManifest::validate() const {
  realm.validate();
  if (per_class == 0) fail(ErrorKind::kConfig, "per-class image count must be positive");
  if (jobs.size() != std::size_t{per_class} * classes.size()) {
    fail(ErrorKind::kFormat, "manifest has " + std::to_string(jobs.size()) + " jobs, expected " +
                                 std::to_string(std::size_t{per_class} * classes.size()));
  }
  std::unordered_set<std::string> keys;
  for (const auto& job : jobs) {
    if (job.class_index >= classes.size()) {
      fail(ErrorKind::kFormat, "job " + job.job_key + " refers to a missing class");
    }
    if (!keys.insert(job.job_key).second) {
      fail(ErrorKind::kFormat, "duplicate job key " + job.job_key);
    }
    job.params.validate();
  }
}

std::string make_job_key(std::string_view nfc_prompt, std::size_t class_index,
                         std::uint32_t replica) {
  std::string material(nfc_prompt);
  material += '\x1f';
  material += std::to_string(class_index);
  material += '\x1f';
  material += std::to_string(replica);
  return hex64(fnv1a64(material));
}

std::uint64_t job_seed(std::uint64_t manifest_seed, std::size_t class_index,
                       std::uint32_t replica) {
  return mix_seed(mix_seed(manifest_seed, class_index), replica);
}

GenerationManifest build_generation_manifest(const RealmSpec& realm,
                                             std::span<const ClassSpec> specs,
                                             std::uint32_t n_per_class,
                                             const ManifestOptions& options) {
  realm.validate();
  options.params.validate();
  if (n_per_class == 0) fail(ErrorKind::kConfig, "n_per_class must be positive");
  if (specs.empty()) fail(ErrorKind::kConfig, "manifest needs at least one class");
  if (options.image_extension.empty()) fail(ErrorKind::kConfig, "image extension is empty");

  GenerationManifest m;
  m.realm = realm;
  m.seed = options.seed;
  m.per_class = n_per_class;
  m.style = options.style;
  m.classes.assign(specs.begin(), specs.end());
  m.jobs.reserve(specs.size() * n_per_class);

  std::unordered_set<std::string> keys;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const std::string prompt = nfc_normalize(render_image_prompt(specs[c], options.style, realm));
    char dir[32];
    std::snprintf(dir, sizeof dir, "c%05zu", c);
    for (std::uint32_t r = 0; r < n_per_class; ++r) {
      GenerationJob job;
      job.job_key = make_job_key(prompt, c, r);
      if (!keys.insert(job.job_key).second) {
        fail(ErrorKind::kPipeline, "job key collision at class " + std::to_string(c));
      }
      job.class_index = c;
      job.replica = r;
      job.prompt = prompt;
      job.seed = job_seed(options.seed, c, r);
      job.params = options.params;
      job.output_path = std::string(dir) + "/" + job.job_key + "." + options.image_extension;
      m.jobs.push_back(std::move(job));
    }
  }
  return m;
}

nlohmann::json to_json(const GenerationParams& p) {
  return {{"image_size", p.image_size},
          {"inference_steps", p.inference_steps},
          {"guidance_scale", p.guidance_scale}};
}

GenerationParams generation_params_from_json(const nlohmann::json& j) {
  GenerationParams p;
  try {
    p.image_size = j.value("image_size", p.image_size);
    p.inference_steps = j.value("inference_steps", p.inference_steps);
    p.guidance_scale = j.value("guidance_scale", p.guidance_scale);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("malformed generation params: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const GenerationManifest& m) {
  nlohmann::json j;
  j["format"] = "pcil-generation-manifest";
  j["version"] = 1;
  j["realm"] = to_json(m.realm);
  j["seed"] = m.seed;
  j["per_class"] = m.per_class;
  j["style"] = to_string(m.style);
  auto classes = nlohmann::json::array();
  for (const auto& c : m.classes) classes.push_back(to_json(c));
  j["classes"] = std::move(classes);
  auto jobs = nlohmann::json::array();
  for (const auto& job : m.jobs) {
    jobs.push_back({{"job_key", job.job_key},
                    {"class_index", job.class_index},
                    {"replica", job.replica},
                    {"prompt", job.prompt},
                    {"seed", job.seed},
                    {"params", to_json(job.params)},
                    {"output_path", job.output_path}});
  }
  j["jobs"] = std::move(jobs);
  return j;
}

GenerationManifest manifest_from_json(const nlohmann::json& j) {
  GenerationManifest m;
  try {
    if (j.value("format", std::string()) != "pcil-generation-manifest") {
      fail(ErrorKind::kFormat, "not a generation manifest");
    }
    if (j.value("version", 0) != 1) fail(ErrorKind::kFormat, "unsupported manifest version");
    m.realm = realm_from_json(j.at("realm"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.per_class = j.at("per_class").get<std::uint32_t>();
    m.style = image_prompt_style_from_string(j.at("style").get<std::string>());
    for (const auto& c : j.at("classes")) m.classes.push_back(class_spec_from_json(c));
    for (const auto& jj : j.at("jobs")) {
      GenerationJob job;
      job.job_key = jj.at("job_key").get<std::string>();
      job.class_index = jj.at("class_index").get<std::size_t>();
      job.replica = jj.at("replica").get<std::uint32_t>();
      job.prompt = jj.at("prompt").get<std::string>();
      job.seed = jj.at("seed").get<std::uint64_t>();
      job.params = generation_params_from_json(jj.at("params"));
      job.output_path = jj.at("output_path").get<std::string>();
      m.jobs.push_back(std::move(job));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

void save_manifest(const GenerationManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << to_json(manifest).dump(1) << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

GenerationManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace pcil
