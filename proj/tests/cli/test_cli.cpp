// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the pcil executable and checks exit codes and outputs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = PCIL_FIXTURE_DIR;
const std::string kCli = PCIL_CLI_PATH;

std::string fixture(const char* name) { return kFixtures + "/" + name; }

fs::path scratch(const char* tag) {
  auto dir = fs::temp_directory_path() / (std::string("pcil_cli_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// Runs the CLI with stdout/stderr captured in dir; returns the exit code.
int run(const fs::path& dir, const std::string& args, const char* env = "") {
  const std::string cmd = std::string(env) + " '" + kCli + "' " + args + " > '" +
                          (dir / "stdout").string() + "' 2> '" + (dir / "stderr").string() + "'";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string data_args() {
  return "--train '" + fixture("harness_train.pfv") + "' --test '" + fixture("harness_test.pfv") +
         "'";
}

}  // namespace

TEST_CASE("help and usage errors") {
  const auto dir = scratch("usage");
  CHECK(run(dir, "--help") == 0);
  CHECK(slurp(dir / "stdout").find("train") != std::string::npos);
  CHECK(run(dir, "") == 2);
  CHECK(run(dir, "train --no-such-flag") == 2);
  CHECK(run(dir, "split --tasks 3") == 2);
  CHECK(run(dir, "train --learner svm") == 2);
}

TEST_CASE("config errors exit 2") {
  const auto dir = scratch("config");
  CHECK(run(dir, "train --config '" + (dir / "missing.json").string() + "'") == 2);
  CHECK(!slurp(dir / "stderr").empty());

  std::ofstream(dir / "bad.json") << R"({"tasks": 3, "unknown_key": true})";
  CHECK(run(dir, "train --config '" + (dir / "bad.json").string() + "' -o out") == 2);

  CHECK(run(dir, "train " + data_args() + " --tasks 21 --learner ncm -o out") == 2);
  CHECK(run(dir, "train " + data_args() + " --tasks 3 --learner ncm") == 2);
}

TEST_CASE("data and format errors exit 3") {
  const auto dir = scratch("data");
  std::ofstream(dir / "corrupt.pfv", std::ios::binary) << "PFV1\x01";
  CHECK(run(dir, "split --features '" + (dir / "corrupt.pfv").string() + "' --tasks 2") == 3);

  std::ofstream(dir / "magic.pfv", std::ios::binary) << "JUNKJUNKJUNKJUNKJUNK";
  CHECK(run(dir, "train --train '" + (dir / "magic.pfv").string() + "' --test '" +
                     fixture("harness_test.pfv") + "' --tasks 2 --learner ncm -o out") == 3);

  // Full-length file cut short of the promised records.
  const auto whole = slurp(fixture("lda_small.pfv"));
  std::ofstream(dir / "short.pfv", std::ios::binary) << whole.substr(0, whole.size() - 1);
  CHECK(run(dir, "split --features '" + (dir / "short.pfv").string() + "' --tasks 2") == 3);
  CHECK(slurp(dir / "stderr").find("truncated") != std::string::npos);
}

TEST_CASE("split") {
  const auto dir = scratch("split");
  const auto out = (dir / "p.json").string();
  REQUIRE(run(dir, "split --features '" + fixture("harness_train.pfv") +
                       "' --tasks 4 --seed 9 -o '" + out + "'") == 0);
  const auto p = json::parse(slurp(out));
  REQUIRE(p["task_classes"].size() == 4);
  for (const auto& t : p["task_classes"]) CHECK(t.size() == 5);
}

TEST_CASE("train and report") {
  const auto dir = scratch("train");
  const auto a = (dir / "a").string();
  REQUIRE(run(dir, "train " + data_args() + " --tasks 4 --seed 5 --learner lda --alpha 0.1 " +
                       "--method lda --dataset synthetic --format both -o '" + a + "'") == 0);
  const auto csv = slurp(fs::path(a) / "report.csv");
  CHECK(csv.rfind("method,backbone_tag,dataset,T,seed,A_T,A_1,A_2,A_3,A_4", 0) == 0);
  CHECK(csv.find("lda,") != std::string::npos);
  const auto rep = json::parse(slurp(fs::path(a) / "report.json"));
  CHECK(rep["R"].size() == 4);
  CHECK(rep["A_T"].get<double>() > 0.5);

  // Config file with relative paths plus a flag override.
  json cfg{{"train", fs::relative(fixture("harness_train.pfv"), dir).string()},
           {"test", fs::relative(fixture("harness_test.pfv"), dir).string()},
           {"tasks", 4},
           {"seed", 5},
           {"learner", {{"kind", "ncm"}}},
           {"output_dir", "b"}};
  std::ofstream(dir / "cfg.json") << cfg.dump(2);
  REQUIRE(run(dir, "train -c '" + (dir / "cfg.json").string() + "' --method ncm") == 0);
  CHECK(fs::exists(dir / "b" / "report.csv"));

  const auto table = (dir / "table.csv").string();
  REQUIRE(run(dir, "report '" + a + "/report.json' '" + (dir / "b").string() +
                       "/report.json' -o '" + table + "'") == 0);
  const auto t = slurp(table);
  CHECK(std::count(t.begin(), t.end(), '\n') == 3);

  // A report whose accuracy matrix lost an entry violates the protocol.
  auto broken = rep;
  broken["R"][3].erase(3);
  std::ofstream(dir / "broken.json") << broken.dump();
  CHECK(run(dir, "report '" + (dir / "broken.json").string() + "'") == 4);
}

TEST_CASE("prompts") {
  const auto dir = scratch("prompts");
  REQUIRE(run(dir, "prompts --stage subtype --realm Birds") == 0);
  const auto chats = json::parse(slurp(dir / "stdout"));
  REQUIRE(chats.size() == 1);
  CHECK(chats[0]["user"].get<std::string>().find("Birds") != std::string::npos);

  CHECK(run(dir, "prompts --stage subtype") == 2);
  CHECK(run(dir, "prompts --stage description --realm Birds") == 2);

  const auto out = (dir / "disc").string();
  REQUIRE(run(dir, "prompts --stage discover --realm-file '" + fixture("birds_realm.json") +
                       "' --transcript '" + fixture("birds_transcript.json") + "' --out-dir '" +
                       out + "'") == 0);
  CHECK(slurp(dir / "stdout").find("3 subtypes, 60 classes accepted, 2 lines rejected") !=
        std::string::npos);
  CHECK(json::parse(slurp(fs::path(out) / "classes.json")).size() == 60);
  CHECK(json::parse(slurp(fs::path(out) / "rejected.json")).size() == 2);
  CHECK(fs::exists(fs::path(out) / "classes.csv"));

  // A realm the transcript never saw cannot be replayed: a pipeline failure.
  CHECK(run(dir, "prompts --stage discover --realm Fish --transcript '" +
                     fixture("birds_transcript.json") + "' --out-dir '" + out + "'") == 1);
  CHECK(slurp(dir / "stderr").find("no response") != std::string::npos);
}

TEST_CASE("manifest and generate") {
  const auto dir = scratch("manifest");
  const auto disc = (dir / "disc").string();
  REQUIRE(run(dir, "prompts --stage discover --realm-file '" + fixture("birds_realm.json") +
                       "' --transcript '" + fixture("birds_transcript.json") + "' --out-dir '" +
                       disc + "'") == 0);
  const auto m = (dir / "m.json").string();
  REQUIRE(run(dir, "manifest --realm-file '" + fixture("birds_realm.json") + "' --classes-csv '" +
                       disc + "/classes.csv' -n 200 --seed 3 -o '" + m + "'") == 0);
  const auto manifest = json::parse(slurp(m));
  CHECK(manifest["jobs"].size() == 12000);

  CHECK(run(dir, "manifest --realm Birds -n 2 -o '" + m + "'") == 2);

  // No endpoint in the environment.
  CHECK(run(dir, "generate --manifest '" + m + "' -o '" + (dir / "img").string() + "'",
            "env -u PCIL_IMAGE_ENDPOINT -u PCIL_IMAGE_API_KEY") == 2);
  CHECK(!fs::exists(dir / "img" / "c00000"));
}
