// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
//
// pcil: command-line front end. Talks to the library only through pcil.h.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcil/pcil.h"

namespace {

using json = nlohmann::json;

struct CliFailure {
  int code;
  std::string message;
};

// Exit codes follow the library's status mapping.
void check(pcil_status s, const char* what) {
  if (s == PCIL_OK) return;
  throw CliFailure{pcil_exit_code(s), std::string(what) + ": " + pcil_status_name(s) + ": " +
                                          pcil_last_error()};
}

[[noreturn]] void config_error(const std::string& message) { throw CliFailure{2, message}; }

std::string take(char* s) {
  std::string out = s ? s : "";
  pcil_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<pcil_dataset, Deleter<pcil_dataset, pcil_dataset_free>>;
using Report = std::unique_ptr<pcil_report, Deleter<pcil_report, pcil_report_free>>;
using Manifest = std::unique_ptr<pcil_manifest, Deleter<pcil_manifest, pcil_manifest_free>>;
using LlmClient = std::unique_ptr<pcil_llm_client, Deleter<pcil_llm_client, pcil_llm_client_free>>;
using ImageClient =
    std::unique_ptr<pcil_image_client, Deleter<pcil_image_client, pcil_image_client_free>>;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    config_error(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliFailure{3, "cannot write " + path};
  out << text;
}

// ---------------------------------------------------------------------------

struct RealmArgs {
  std::string file;
  std::string name;
  std::string kind = "biological";
  std::string subtype_noun;
  std::string member_noun;

  void add_to(CLI::App* app) {
    app->add_option("--realm-file", file, "JSON realm description");
    app->add_option("--realm", name, "Realm name, e.g. Birds");
    app->add_option("--kind", kind, "biological or general")
        ->check(CLI::IsMember({"biological", "general"}));
    app->add_option("--subtype-noun", subtype_noun, "Plural subtype noun (default: orders)");
    app->add_option("--member-noun", member_noun, "Singular member noun (default: from realm)");
  }

  std::string to_json_text() const {
    json r = file.empty() ? json::object() : read_json_file(file);
    if (!name.empty()) r["name"] = name;
    if (!r.contains("kind") || !name.empty()) r["kind"] = kind;
    if (!subtype_noun.empty()) r["subtype_noun"] = subtype_noun;
    if (!member_noun.empty()) r["member_noun"] = member_noun;
    if (!r.contains("name")) config_error("a realm is required (--realm or --realm-file)");
    return r.dump();
  }
};

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string features;
  std::uint32_t tasks = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_split(const SplitArgs& a) {
  pcil_dataset* raw = nullptr;
  check(pcil_dataset_load(a.features.c_str(), &raw), "load");
  Dataset ds(raw);
  char* text = nullptr;
  check(pcil_split_classes(ds.get(), a.tasks, a.seed, &text), "split");
  write_text(a.out, take(text));
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::optional<std::string> train, test, learner, output_dir, prototypes, method, backbone_tag,
      dataset;
  std::optional<std::uint32_t> tasks, eval_threads;
  std::optional<std::uint64_t> seed, projection_seed;
  std::optional<double> alpha, lambda;
  std::optional<std::size_t> hidden_dim, spill_threshold;
  std::vector<double> lambda_grid;
  bool no_imbalance = false;
  std::string format = "both";
};

std::string build_config(const TrainArgs& a) {
  json c = a.config.empty() ? json::object() : read_json_file(a.config);
  // Paths inside the file are relative to it; flag values stay relative to the cwd.
  if (!a.config.empty() && c.is_object()) {
    const auto base = std::filesystem::path(a.config).parent_path();
    for (const char* key : {"train", "test", "prototypes", "output_dir"}) {
      if (!c.contains(key) || !c[key].is_string()) continue;
      const std::filesystem::path p = c[key].get<std::string>();
      if (!p.empty() && p.is_relative()) c[key] = (base / p).string();
    }
  }
  const auto set = [&](const char* key, const auto& opt) {
    if (opt) c[key] = *opt;
  };
  set("train", a.train);
  set("test", a.test);
  set("tasks", a.tasks);
  set("seed", a.seed);
  set("output_dir", a.output_dir);
  set("prototypes", a.prototypes);
  set("method", a.method);
  set("backbone_tag", a.backbone_tag);
  set("dataset", a.dataset);
  set("eval_threads", a.eval_threads);

  json l = c.contains("learner") ? c["learner"] : json::object();
  if (l.is_string()) l = json{{"kind", l}};
  const auto lset = [&](const char* key, const auto& opt) {
    if (opt) l[key] = *opt;
  };
  lset("kind", a.learner);
  lset("alpha", a.alpha);
  lset("M", a.hidden_dim);
  lset("lambda", a.lambda);
  lset("projection_seed", a.projection_seed);
  lset("spill_threshold", a.spill_threshold);
  if (!a.lambda_grid.empty()) l["lambda_grid"] = a.lambda_grid;
  if (a.no_imbalance) l["imbalance_correction"] = false;
  c["learner"] = l;
  return c.dump();
}

void run_train(const TrainArgs& a) {
  const auto config = build_config(a);
  check(pcil_config_validate(config.c_str()), "config");
  const auto parsed = json::parse(config);
  const std::string out_dir = parsed.value("output_dir", std::string());
  if (out_dir.empty()) config_error("an output directory is required (--output-dir)");

  pcil_report* raw = nullptr;
  check(pcil_experiment_run(config.c_str(), &raw), "train");
  Report report(raw);
  const int formats = a.format == "csv" ? PCIL_REPORT_CSV
                      : a.format == "json" ? PCIL_REPORT_JSON
                                           : PCIL_REPORT_CSV | PCIL_REPORT_JSON;
  check(pcil_report_emit(report.get(), out_dir.c_str(), formats), "report");
  double a_t = 0.0;
  check(pcil_report_final_average(report.get(), &a_t), "report");
  std::printf("A_T = %.6f\n", a_t);
}

// ---------------------------------------------------------------------------
// prompts

struct PromptArgs {
  RealmArgs realm;
  std::string stage = "subtype";
  std::vector<std::string> subtypes;
  std::string names_file;
  std::string transcript;
  bool live = false;
  std::string record;
  std::size_t max_subtypes = 0;
  std::string out_dir;
  std::string out;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void run_prompts(const PromptArgs& a) {
  const auto realm = a.realm.to_json_text();
  char* text = nullptr;
  if (a.stage == "subtype") {
    check(pcil_prompts_subtype(realm.c_str(), &text), "prompts");
    write_text(a.out, take(text));
    return;
  }
  if (a.stage == "description") {
    if (a.subtypes.empty()) config_error("--subtype is required for the description stage");
    check(pcil_prompts_description(realm.c_str(), json(a.subtypes).dump().c_str(), &text),
          "prompts");
    write_text(a.out, take(text));
    return;
  }
  if (a.stage == "class-names") {
    if (a.names_file.empty()) config_error("--names-file is required for the class-names stage");
    check(pcil_prompts_class_names(realm.c_str(), json(read_lines(a.names_file)).dump().c_str(),
                                   &text),
          "prompts");
    write_text(a.out, take(text));
    return;
  }

  // discover
  if (a.out_dir.empty()) config_error("--out-dir is required for discovery");
  if (a.live == !a.transcript.empty()) {
    config_error("discovery needs exactly one of --transcript or --live");
  }
  pcil_llm_client* raw = nullptr;
  if (a.live) {
    check(pcil_llm_client_http_from_env(&raw), "llm client");
  } else {
    check(pcil_llm_client_replay(a.transcript.c_str(), &raw), "llm client");
  }
  LlmClient client(raw);
  std::filesystem::create_directories(a.out_dir);
  const std::string record =
      !a.record.empty() ? a.record : (a.live ? a.out_dir + "/transcript.json" : std::string());
  check(pcil_discover_classes(realm.c_str(), client.get(), a.max_subtypes,
                              record.empty() ? nullptr : record.c_str(), &text),
        "discover");
  const auto result = json::parse(take(text));
  write_text(a.out_dir + "/classes.json", result["classes"].dump(2) + "\n");
  write_text(a.out_dir + "/rejected.json", result["rejected"].dump(2) + "\n");
  check(pcil_class_specs_csv(realm.c_str(), result["classes"].dump().c_str(), &text), "csv");
  write_text(a.out_dir + "/classes.csv", take(text));
  std::printf("%zu subtypes, %zu classes accepted, %zu lines rejected\n",
              result["subtypes"].size(), result["classes"].size(), result["rejected"].size());
}

// ---------------------------------------------------------------------------
// manifest

struct ManifestArgs {
  RealmArgs realm;
  std::string classes;
  std::string classes_csv;
  std::uint32_t per_class = 0;
  std::uint64_t seed = 0;
  std::string style = "description";
  std::optional<std::uint32_t> image_size, steps;
  std::optional<double> guidance;
  std::string extension = "png";
  std::string out;
};

void run_manifest(const ManifestArgs& a) {
  json req;
  req["realm"] = json::parse(a.realm.to_json_text());
  if (!a.classes.empty() == !a.classes_csv.empty()) {
    config_error("give exactly one of --classes or --classes-csv");
  }
  if (!a.classes.empty()) req["classes"] = read_json_file(a.classes);
  if (!a.classes_csv.empty()) req["classes_csv"] = a.classes_csv;
  req["per_class"] = a.per_class;
  req["seed"] = a.seed;
  req["style"] = a.style;
  req["extension"] = a.extension;
  json params = json::object();
  if (a.image_size) params["image_size"] = *a.image_size;
  if (a.steps) params["inference_steps"] = *a.steps;
  if (a.guidance) params["guidance_scale"] = *a.guidance;
  req["params"] = params;

  pcil_manifest* raw = nullptr;
  check(pcil_manifest_build(req.dump().c_str(), &raw), "manifest");
  Manifest m(raw);
  check(pcil_manifest_save(m.get(), a.out.c_str()), "manifest");
  std::uint64_t jobs = 0;
  check(pcil_manifest_job_count(m.get(), &jobs), "manifest");
  std::printf("%llu jobs written to %s\n", static_cast<unsigned long long>(jobs), a.out.c_str());
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string manifest;
  std::string output;
  std::uint32_t max_attempts = 4;
  std::int64_t backoff_ms = 500;
  double backoff_factor = 2.0;
  std::int64_t max_backoff_ms = 30000;
  std::uint32_t parallelism = 1;
  std::string event_log;
};

void run_generate(const GenerateArgs& a) {
  pcil_manifest* mraw = nullptr;
  check(pcil_manifest_load(a.manifest.c_str(), &mraw), "manifest");
  Manifest m(mraw);
  pcil_image_client* craw = nullptr;
  check(pcil_image_client_http_from_env(&craw), "image client");
  ImageClient client(craw);
  const json options{{"output_root", a.output},
                     {"max_attempts", a.max_attempts},
                     {"initial_backoff_ms", a.backoff_ms},
                     {"backoff_factor", a.backoff_factor},
                     {"max_backoff_ms", a.max_backoff_ms},
                     {"parallelism", a.parallelism},
                     {"event_log", a.event_log.empty() ? a.output + "/events.jsonl" : a.event_log}};
  char* text = nullptr;
  const auto status = pcil_generation_run(m.get(), client.get(), options.dump().c_str(), &text);
  if (text) {
    const auto report = json::parse(take(text));
    std::printf("completed %d, skipped %d, failed %d, submissions %d\n",
                report["completed"].get<int>(), report["skipped"].get<int>(),
                report["failed"].get<int>(), report["submissions"].get<int>());
  }
  check(status, "generate");
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

void run_report(const ReportArgs& a) {
  std::vector<Report> owned;
  std::vector<const pcil_report*> views;
  for (const auto& path : a.inputs) {
    pcil_report* raw = nullptr;
    check(pcil_report_load(path.c_str(), &raw), path.c_str());
    owned.emplace_back(raw);
    views.push_back(raw);
  }
  char* text = nullptr;
  check(pcil_report_table(views.data(), views.size(), &text), "report");
  write_text(a.out, take(text));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcil: exemplar-free class-incremental learning on frozen features"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pcil_version());

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Assign the classes of a feature file to T tasks");
  s->add_option("--features", split.features, "PFV1 feature file")->required();
  s->add_option("--tasks,-T", split.tasks, "Number of tasks")->required();
  s->add_option("--seed", split.seed, "Shuffle seed");
  s->add_option("--out,-o", split.out, "Output JSON (default: stdout)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Run a class-incremental experiment and write reports");
  t->add_option("--config,-c", train.config, "Experiment config JSON (flags override it)");
  t->add_option("--train", train.train, "Train PFV1 file");
  t->add_option("--test", train.test, "Test PFV1 file");
  t->add_option("--tasks,-T", train.tasks, "Number of tasks");
  t->add_option("--seed", train.seed, "Task split seed");
  t->add_option("--learner", train.learner, "ncm, lda, ranpac or zeroshot")
      ->check(CLI::IsMember({"ncm", "lda", "ranpac", "zeroshot"}));
  t->add_option("--alpha", train.alpha, "LDA shrinkage");
  t->add_option("--M", train.hidden_dim, "RanPAC projection width");
  t->add_option("--lambda", train.lambda, "RanPAC ridge parameter (omit to search the grid)");
  t->add_option("--lambda-grid", train.lambda_grid, "Multipliers of tr(G)/M to search");
  t->add_flag("--no-imbalance-correction", train.no_imbalance, "Plain Gram (unweighted)");
  t->add_option("--projection-seed", train.projection_seed, "RanPAC projection seed");
  t->add_option("--spill-threshold", train.spill_threshold, "Rows kept in memory per task");
  t->add_option("--prototypes", train.prototypes, "Prototype PFV1 file for zeroshot");
  t->add_option("--output-dir,-o", train.output_dir, "Directory for report.csv/report.json");
  t->add_option("--method", train.method, "Method label in the report");
  t->add_option("--backbone-tag", train.backbone_tag, "Backbone label in the report");
  t->add_option("--dataset", train.dataset, "Dataset label in the report");
  t->add_option("--eval-threads", train.eval_threads, "Threads for evaluation");
  t->add_option("--format", train.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  PromptArgs prompts;
  auto* p = app.add_subcommand("prompts", "Render LLM prompts or run class discovery");
  prompts.realm.add_to(p);
  p->add_option("--stage", prompts.stage, "subtype, description, class-names or discover")
      ->check(CLI::IsMember({"subtype", "description", "class-names", "discover"}));
  p->add_option("--subtype", prompts.subtypes, "Subtype name(s) for the description stage");
  p->add_option("--names-file", prompts.names_file, "Class names, one per line");
  p->add_option("--transcript", prompts.transcript, "Replay a recorded transcript");
  p->add_flag("--live", prompts.live,
              "Query PCIL_LLM_ENDPOINT (PCIL_LLM_API_KEY, PCIL_LLM_MODEL)");
  p->add_option("--record", prompts.record, "Where to save the exchange transcript");
  p->add_option("--max-subtypes", prompts.max_subtypes, "Use at most this many subtypes");
  p->add_option("--out-dir", prompts.out_dir, "Discovery output directory");
  p->add_option("--out,-o", prompts.out, "Rendered prompts output (default: stdout)");

  ManifestArgs manifest;
  auto* m = app.add_subcommand("manifest", "Build a text-to-image generation manifest");
  manifest.realm.add_to(m);
  m->add_option("--classes", manifest.classes, "Class specs as JSON");
  m->add_option("--classes-csv", manifest.classes_csv, "Class specs as ';'-separated CSV");
  m->add_option("--per-class,-n", manifest.per_class, "Images per class")->required();
  m->add_option("--seed", manifest.seed, "Manifest seed");
  m->add_option("--style", manifest.style, "description or class_only")
      ->check(CLI::IsMember({"description", "class_only"}));
  m->add_option("--image-size", manifest.image_size, "Pixels per side (default 256)");
  m->add_option("--steps", manifest.steps, "Inference steps (default 40)");
  m->add_option("--guidance", manifest.guidance, "Guidance scale (default 2.0)");
  m->add_option("--extension", manifest.extension, "Output file extension");
  m->add_option("--out,-o", manifest.out, "Manifest JSON path")->required();

  GenerateArgs generate;
  auto* g = app.add_subcommand(
      "generate", "Run a manifest against PCIL_IMAGE_ENDPOINT (PCIL_IMAGE_API_KEY)");
  g->add_option("--manifest", generate.manifest, "Manifest JSON")->required();
  g->add_option("--output,-o", generate.output, "Output root")->required();
  g->add_option("--max-attempts", generate.max_attempts, "Attempts per job");
  g->add_option("--backoff-ms", generate.backoff_ms, "Initial retry delay");
  g->add_option("--backoff-factor", generate.backoff_factor, "Delay multiplier per retry");
  g->add_option("--max-backoff-ms", generate.max_backoff_ms, "Delay cap");
  g->add_option("--parallelism,-j", generate.parallelism, "Concurrent submissions");
  g->add_option("--event-log", generate.event_log, "JSON-lines event log");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Tabulate report.json files as CSV");
  r->add_option("inputs", report.inputs, "report.json files")->required();
  r->add_option("--out,-o", report.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*s) run_split(split);
    if (*t) run_train(train);
    if (*p) run_prompts(prompts);
    if (*m) run_manifest(manifest);
    if (*g) run_generate(generate);
    if (*r) run_report(report);
  } catch (const CliFailure& f) {
    std::cerr << "pcil: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "pcil: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
