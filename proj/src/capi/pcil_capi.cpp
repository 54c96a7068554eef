// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/pcil.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "pcil/error.hpp"
#include "pcil/feature_store.hpp"
#include "pcil/generation.hpp"
#include "pcil/harness.hpp"
#include "pcil/llm.hpp"
#include "pcil/manifest.hpp"
#include "pcil/prompts.hpp"

struct pcil_dataset {
  pcil::FeatureDataset data;
};
struct pcil_learner {
  std::unique_ptr<pcil::Learner> impl;
};
struct pcil_report {
  pcil::ExperimentReport report;
};
struct pcil_manifest {
  pcil::GenerationManifest manifest;
};
struct pcil_llm_client {
  std::unique_ptr<pcil::LlmClient> impl;
};
struct pcil_image_client {
  std::unique_ptr<pcil::ImageClient> impl;
};
struct pcil_submit_reply {
  pcil::SubmitResult result;
};

namespace {

thread_local std::string g_last_error;

pcil_status status_of(pcil::ErrorKind kind) {
  using pcil::ErrorKind;
  switch (kind) {
    case ErrorKind::kConfig: return PCIL_E_CONFIG;
    case ErrorKind::kFormat: return PCIL_E_FORMAT;
    case ErrorKind::kCorruption: return PCIL_E_CORRUPT;
    case ErrorKind::kData: return PCIL_E_DATA;
    case ErrorKind::kShape: return PCIL_E_SHAPE;
    case ErrorKind::kDegenerate: return PCIL_E_DEGENERATE;
    case ErrorKind::kProtocol: return PCIL_E_PROTOCOL;
    case ErrorKind::kNumeric: return PCIL_E_NUMERIC;
    case ErrorKind::kParse: return PCIL_E_PARSE;
    case ErrorKind::kPipeline: return PCIL_E_PIPELINE;
    case ErrorKind::kIo: return PCIL_E_IO;
    case ErrorKind::kEvaluation: return PCIL_E_EVALUATION;
  }
  return PCIL_E_INTERNAL;
}

struct NullArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

pcil_status set_error(pcil_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

// Runs fn, translating every exception into a status code.
template <typename Fn>
pcil_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return PCIL_OK;
  } catch (const NullArgument& e) {
    return set_error(PCIL_E_INVALID_ARGUMENT, e.what());
  } catch (const pcil::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(PCIL_E_CONFIG, std::string("invalid JSON argument: ") + e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PCIL_E_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(PCIL_E_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(PCIL_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(PCIL_E_INTERNAL, "unknown exception");
  }
}

template <typename... Ptrs>
void require(const char* what, Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) {
    throw NullArgument(std::string("null argument: ") + what);
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

nlohmann::json parse_json(const char* text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw pcil::Error(pcil::ErrorKind::kConfig, std::string(what) + ": " + e.what());
  }
}

nlohmann::json chats_to_json(const std::vector<pcil::ChatPrompt>& chats) {
  auto arr = nlohmann::json::array();
  for (const auto& c : chats) arr.push_back({{"system", c.system}, {"user", c.user}});
  return arr;
}

class CallbackImageClient final : public pcil::ImageClient {
 public:
  CallbackImageClient(pcil_submit_fn fn, void* user) : fn_(fn), user_(user) {}

  pcil::SubmitResult submit(const pcil::ImageRequest& r) override {
    pcil_submit_reply reply;
    reply.result = pcil::SubmitResult::failure("callback gave no reply");
    const int rc = fn_(user_, r.job_key.c_str(), r.prompt.c_str(), r.seed, r.params.image_size,
                       r.params.inference_steps, r.params.guidance_scale, &reply);
    if (rc != 0 && reply.result.ok) {
      return pcil::SubmitResult::failure("callback returned " + std::to_string(rc));
    }
    return std::move(reply.result);
  }

 private:
  pcil_submit_fn fn_;
  void* user_;
};

}  // namespace

extern "C" {

const char* pcil_version(void) { return pcil::library_version(); }

const char* pcil_last_error(void) { return g_last_error.c_str(); }

const char* pcil_status_name(pcil_status status) {
  switch (status) {
    case PCIL_OK: return "ok";
    case PCIL_E_CONFIG: return "configuration error";
    case PCIL_E_FORMAT: return "format error";
    case PCIL_E_CORRUPT: return "corrupt file";
    case PCIL_E_DATA: return "data error";
    case PCIL_E_SHAPE: return "shape mismatch";
    case PCIL_E_DEGENERATE: return "degenerate input";
    case PCIL_E_PROTOCOL: return "protocol error";
    case PCIL_E_NUMERIC: return "numerical failure";
    case PCIL_E_PARSE: return "parse error";
    case PCIL_E_PIPELINE: return "pipeline error";
    case PCIL_E_IO: return "I/O error";
    case PCIL_E_EVALUATION: return "evaluation error";
    case PCIL_E_INVALID_ARGUMENT: return "invalid argument";
    case PCIL_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int pcil_exit_code(pcil_status status) {
  switch (status) {
    case PCIL_OK:
      return 0;
    case PCIL_E_CONFIG:
    case PCIL_E_INVALID_ARGUMENT:
      return 2;
    case PCIL_E_FORMAT:
    case PCIL_E_CORRUPT:
    case PCIL_E_DATA:
    case PCIL_E_SHAPE:
    case PCIL_E_DEGENERATE:
    case PCIL_E_PARSE:
    case PCIL_E_IO:
    case PCIL_E_EVALUATION:
      return 3;
    case PCIL_E_PROTOCOL:
      return 4;
    default:
      return 1;
  }
}

void pcil_string_free(char* s) { std::free(s); }

// ---- datasets

pcil_status pcil_dataset_load(const char* path, pcil_dataset** out) {
  return guarded([&] {
    require("path/out", path, out);
    *out = new pcil_dataset{pcil::load_feature_file(path)};
  });
}

void pcil_dataset_free(pcil_dataset* ds) { delete ds; }

pcil_status pcil_dataset_dim(const pcil_dataset* ds, uint32_t* dim) {
  return guarded([&] {
    require("dataset/dim", ds, dim);
    *dim = ds->data.dim();
  });
}

pcil_status pcil_dataset_size(const pcil_dataset* ds, uint64_t* count) {
  return guarded([&] {
    require("dataset/count", ds, count);
    *count = ds->data.size();
  });
}

pcil_status pcil_dataset_describe(const pcil_dataset* ds, char** json) {
  return guarded([&] {
    require("dataset/json", ds, json);
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [id, name] : ds->data.class_registry()) classes[std::to_string(id)] = name;
    const nlohmann::json j{{"dim", ds->data.dim()},
                           {"count", ds->data.size()},
                           {"split", pcil::to_string(ds->data.split())},
                           {"classes", std::move(classes)}};
    *json = dup_string(j.dump(2));
  });
}

pcil_status pcil_split_classes(const pcil_dataset* ds, uint32_t tasks, uint64_t seed,
                               char** partition_json) {
  return guarded([&] {
    require("dataset/out", ds, partition_json);
    const auto p = pcil::split_classes_into_tasks(ds->data.class_ids(), tasks, seed);
    *partition_json = dup_string(pcil::to_json(p).dump(2));
  });
}

// ---- learners

pcil_status pcil_learner_create(const char* learner_json, uint32_t dim,
                                const char* prototypes_path, pcil_learner** out) {
  return guarded([&] {
    require("learner_json/out", learner_json, out);
    nlohmann::json cfg{{"learner", parse_json(learner_json, "learner config")}};
    const auto config = pcil::experiment_config_from_json(cfg);
    *out = new pcil_learner{
        pcil::make_learner(config.learner, dim, prototypes_path ? prototypes_path : "")};
  });
}

void pcil_learner_free(pcil_learner* learner) { delete learner; }

pcil_status pcil_learner_begin_task(pcil_learner* learner, const uint32_t* class_ids,
                                    size_t count) {
  return guarded([&] {
    require("learner", learner);
    if (count > 0) require("class_ids", class_ids);
    learner->impl->begin_task(std::span<const pcil::ClassId>(class_ids, count));
  });
}

pcil_status pcil_learner_observe(pcil_learner* learner, uint32_t label, const float* feature,
                                 size_t length) {
  return guarded([&] {
    require("learner/feature", learner, feature);
    learner->impl->observe(label, std::span<const float>(feature, length));
  });
}

pcil_status pcil_learner_end_task(pcil_learner* learner) {
  return guarded([&] {
    require("learner", learner);
    learner->impl->end_task();
  });
}

pcil_status pcil_learner_predict(const pcil_learner* learner, const float* feature,
                                 size_t length, uint32_t* label) {
  return guarded([&] {
    require("learner/feature/label", learner, feature, label);
    *label = learner->impl->predict(std::span<const float>(feature, length)).label;
  });
}

// ---- experiments

pcil_status pcil_config_validate(const char* config_json) {
  return guarded([&] {
    require("config_json", config_json);
    pcil::experiment_config_from_json(parse_json(config_json, "experiment config")).validate();
  });
}

pcil_status pcil_experiment_run(const char* config_json, pcil_report** out) {
  return guarded([&] {
    require("config_json/out", config_json, out);
    const auto config =
        pcil::experiment_config_from_json(parse_json(config_json, "experiment config"));
    *out = new pcil_report{pcil::run_experiment(config)};
  });
}

pcil_status pcil_report_load(const char* json_path, pcil_report** out) {
  return guarded([&] {
    require("path/out", json_path, out);
    std::ifstream in(json_path);
    if (!in) pcil::fail(pcil::ErrorKind::kIo, std::string("cannot open ") + json_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      pcil::fail(pcil::ErrorKind::kFormat, std::string(json_path) + ": " + e.what());
    }
    *out = new pcil_report{pcil::report_from_json(j)};
  });
}

void pcil_report_free(pcil_report* report) { delete report; }

pcil_status pcil_report_final_average(const pcil_report* report, double* a_t) {
  return guarded([&] {
    require("report/a_t", report, a_t);
    *a_t = report->report.final_average;
  });
}

pcil_status pcil_report_csv(const pcil_report* report, char** csv) {
  return guarded([&] {
    require("report/csv", report, csv);
    *csv = dup_string(pcil::report_csv(report->report));
  });
}

pcil_status pcil_report_json(const pcil_report* report, char** json) {
  return guarded([&] {
    require("report/json", report, json);
    *json = dup_string(pcil::to_json(report->report).dump(2));
  });
}

pcil_status pcil_report_table(const pcil_report* const* reports, size_t count, char** csv) {
  return guarded([&] {
    require("reports/csv", reports, csv);
    std::vector<pcil::ExperimentReport> all;
    for (size_t i = 0; i < count; ++i) {
      require("report", reports[i]);
      all.push_back(reports[i]->report);
    }
    *csv = dup_string(pcil::report_table(all));
  });
}

pcil_status pcil_report_emit(const pcil_report* report, const char* dir, int formats) {
  return guarded([&] {
    require("report/dir", report, dir);
    if (formats < 1 || formats > 3) pcil::fail(pcil::ErrorKind::kConfig, "bad report formats");
    pcil::emit_report(report->report, dir, static_cast<pcil::ReportFormat>(formats));
  });
}

// ---- prompts

pcil_status pcil_prompts_subtype(const char* realm_json, char** chats_json) {
  return guarded([&] {
    require("realm/out", realm_json, chats_json);
    const auto realm = pcil::realm_from_json(parse_json(realm_json, "realm"));
    *chats_json = dup_string(chats_to_json({pcil::subtype_chat(realm)}).dump(2));
  });
}

pcil_status pcil_prompts_description(const char* realm_json, const char* subtypes_json,
                                     char** chats_json) {
  return guarded([&] {
    require("realm/subtypes/out", realm_json, subtypes_json, chats_json);
    const auto realm = pcil::realm_from_json(parse_json(realm_json, "realm"));
    const auto subtypes =
        parse_json(subtypes_json, "subtype list").get<std::vector<std::string>>();
    std::vector<pcil::ChatPrompt> chats;
    for (const auto& s : subtypes) chats.push_back(pcil::render_description_system_prompt(realm, s));
    *chats_json = dup_string(chats_to_json(chats).dump(2));
  });
}

pcil_status pcil_prompts_class_names(const char* realm_json, const char* names_json,
                                     char** chats_json) {
  return guarded([&] {
    require("realm/names/out", realm_json, names_json, chats_json);
    const auto realm = pcil::realm_from_json(parse_json(realm_json, "realm"));
    const auto names = parse_json(names_json, "name list").get<std::vector<std::string>>();
    *chats_json = dup_string(chats_to_json(pcil::render_class_name_system_prompt(realm, names)).dump(2));
  });
}

pcil_status pcil_llm_client_replay(const char* transcript_path, pcil_llm_client** out) {
  return guarded([&] {
    require("path/out", transcript_path, out);
    *out = new pcil_llm_client{
        std::make_unique<pcil::ReplayLlmClient>(pcil::load_transcript(transcript_path))};
  });
}

pcil_status pcil_llm_client_http_from_env(pcil_llm_client** out) {
  return guarded([&] {
    require("out", out);
    *out = new pcil_llm_client{pcil::make_http_llm_client_from_env()};
  });
}

void pcil_llm_client_free(pcil_llm_client* client) { delete client; }

pcil_status pcil_discover_classes(const char* realm_json, pcil_llm_client* client,
                                  size_t max_subtypes, const char* transcript_out,
                                  char** result_json) {
  return guarded([&] {
    require("realm/client/out", realm_json, client, result_json);
    const auto realm = pcil::realm_from_json(parse_json(realm_json, "realm"));
    pcil::DiscoveryOptions options;
    options.max_subtypes = max_subtypes;
    pcil::RecordingLlmClient recorder(*client->impl);
    const auto save = [&] {
      if (transcript_out) pcil::save_transcript(recorder.entries(), transcript_out);
    };
    pcil::DiscoveryResult result;
    try {
      result = pcil::discover_classes(realm, recorder, options);
    } catch (...) {
      save();
      throw;
    }
    save();
    nlohmann::json j;
    j["subtypes"] = result.subtypes;
    auto classes = nlohmann::json::array();
    for (const auto& c : result.classes) classes.push_back(pcil::to_json(c));
    j["classes"] = std::move(classes);
    auto rejected = nlohmann::json::array();
    for (const auto& r : result.rejected) rejected.push_back(pcil::to_json(r));
    j["rejected"] = std::move(rejected);
    *result_json = dup_string(j.dump(2));
  });
}

pcil_status pcil_class_specs_csv(const char* realm_json, const char* classes_json, char** csv) {
  return guarded([&] {
    require("realm/classes/out", realm_json, classes_json, csv);
    const auto realm = pcil::realm_from_json(parse_json(realm_json, "realm"));
    std::vector<pcil::ClassSpec> specs;
    for (const auto& c : parse_json(classes_json, "class list")) {
      specs.push_back(pcil::class_spec_from_json(c));
    }
    *csv = dup_string(pcil::write_class_specs_csv(specs, pcil::description_schema(realm)));
  });
}

// ---- manifests

pcil_status pcil_manifest_build(const char* request_json, pcil_manifest** out) {
  return guarded([&] {
    require("request/out", request_json, out);
    const auto req = parse_json(request_json, "manifest request");
    const auto realm = pcil::realm_from_json(req.at("realm"));
    std::vector<pcil::ClassSpec> specs;
    if (req.contains("classes")) {
      for (const auto& c : req.at("classes")) specs.push_back(pcil::class_spec_from_json(c));
    } else if (req.contains("classes_csv")) {
      const auto path = req.at("classes_csv").get<std::string>();
      std::ifstream in(path, std::ios::binary);
      if (!in) pcil::fail(pcil::ErrorKind::kIo, "cannot open " + path);
      const std::string text((std::istreambuf_iterator<char>(in)), {});
      specs = pcil::read_class_specs_csv(text);
    } else {
      pcil::fail(pcil::ErrorKind::kConfig, "manifest request needs classes or classes_csv");
    }
    pcil::ManifestOptions options;
    options.seed = req.value("seed", std::uint64_t{0});
    if (req.contains("params")) options.params = pcil::generation_params_from_json(req["params"]);
    options.style = pcil::image_prompt_style_from_string(req.value("style", std::string("description")));
    options.image_extension = req.value("extension", options.image_extension);
    const auto n = req.at("per_class").get<std::uint32_t>();
    *out = new pcil_manifest{pcil::build_generation_manifest(realm, specs, n, options)};
  });
}

pcil_status pcil_manifest_load(const char* path, pcil_manifest** out) {
  return guarded([&] {
    require("path/out", path, out);
    *out = new pcil_manifest{pcil::load_manifest(path)};
  });
}

pcil_status pcil_manifest_save(const pcil_manifest* manifest, const char* path) {
  return guarded([&] {
    require("manifest/path", manifest, path);
    pcil::save_manifest(manifest->manifest, path);
  });
}

pcil_status pcil_manifest_job_count(const pcil_manifest* manifest, uint64_t* count) {
  return guarded([&] {
    require("manifest/count", manifest, count);
    *count = manifest->manifest.jobs.size();
  });
}

void pcil_manifest_free(pcil_manifest* manifest) { delete manifest; }

// ---- generation

void pcil_submit_reply_image(pcil_submit_reply* reply, const uint8_t* bytes, size_t length) {
  if (!reply) return;
  if (!bytes || length == 0) {
    reply->result = pcil::SubmitResult::failure("empty image");
    return;
  }
  reply->result = pcil::SubmitResult::success(std::vector<std::uint8_t>(bytes, bytes + length));
}

void pcil_submit_reply_error(pcil_submit_reply* reply, const char* message, int retryable) {
  if (!reply) return;
  reply->result = pcil::SubmitResult::failure(message ? message : "unspecified", retryable != 0);
}

pcil_status pcil_image_client_callback(pcil_submit_fn fn, void* user_data,
                                       pcil_image_client** out) {
  return guarded([&] {
    require("fn/out", fn, out);
    *out = new pcil_image_client{std::make_unique<CallbackImageClient>(fn, user_data)};
  });
}

pcil_status pcil_image_client_http_from_env(pcil_image_client** out) {
  return guarded([&] {
    require("out", out);
    *out = new pcil_image_client{pcil::make_http_image_client_from_env()};
  });
}

void pcil_image_client_free(pcil_image_client* client) { delete client; }

pcil_status pcil_generation_run(const pcil_manifest* manifest, pcil_image_client* client,
                                const char* options_json, char** report_json) {
  return guarded([&] {
    require("manifest/client/options", manifest, client, options_json);
    const auto o = parse_json(options_json, "generation options");
    pcil::RunOptions options;
    options.output_root = o.at("output_root").get<std::string>();
    options.max_attempts = o.value("max_attempts", options.max_attempts);
    options.initial_backoff =
        std::chrono::milliseconds(o.value("initial_backoff_ms", options.initial_backoff.count()));
    options.backoff_factor = o.value("backoff_factor", options.backoff_factor);
    options.max_backoff =
        std::chrono::milliseconds(o.value("max_backoff_ms", options.max_backoff.count()));
    options.parallelism = o.value("parallelism", options.parallelism);
    options.event_log = o.value("event_log", std::string());
    options.report_path = o.value("report_path", std::string());
    try {
      const auto report = pcil::run_generation(manifest->manifest, *client->impl, options);
      if (report_json) *report_json = dup_string(pcil::to_json(report).dump(2));
    } catch (const pcil::GenerationError& e) {
      if (report_json) *report_json = dup_string(pcil::to_json(e.report()).dump(2));
      throw;
    }
  });
}

}  // extern "C"
