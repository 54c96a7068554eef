// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"
#include "pcil/error.hpp"
#include "pcil/generation.hpp"
#include "pcil/llm.hpp"

using namespace pcil;

namespace {

const RealmSpec kBirds{"Birds", RealmKind::kBiological, "orders", ""};
const RealmSpec kFood{"Food", RealmKind::kGeneral, "subcategories", ""};

/// Answers from a fixed map keyed by user text; records every prompt.
class ScriptedClient final : public LlmClient {
 public:
  std::map<std::string, std::string> answers;
  std::vector<ChatPrompt> seen;
  std::size_t few_shot_seen = 0;
  std::string chat(const ChatPrompt& p, std::span<const FewShotExample> few) override {
    seen.push_back(p);
    few_shot_seen = few.size();
    return answers.at(p.user);
  }
};

}  // namespace

TEST_CASE("discovery walks subtypes and keeps parse rejects") {
  ScriptedClient llm;
  llm.answers[subtype_chat(kBirds).user] = "1. Psittaciformes\n2. Strigiformes\n";
  llm.answers["Psittaciformes"] =
      "1; Pionus menstruus; Blue-headed Parrot; Blue head and green body.\n"
      "Note: only one.\n";
  llm.answers["Strigiformes"] =
      "1; Tyto alba; Barn Owl; Pale owl with a heart shaped face.\n"
      "2; Pionus menstruus; Blue-headed Parrot; Listed again.\n";
  DiscoveryOptions opt;
  opt.few_shot.push_back({"Example order", "1; A b; C; D."});
  const auto r = discover_classes(kBirds, llm, opt);
  CHECK(r.subtypes == std::vector<std::string>{"Psittaciformes", "Strigiformes"});
  REQUIRE(r.classes.size() == 2);
  CHECK(r.classes[1].source_subtype == "Strigiformes");
  REQUIRE(r.rejected.size() == 2);
  CHECK(r.rejected[0].reason == "column count");
  CHECK(r.rejected[1].reason == "duplicate");
  CHECK(llm.seen.size() == 3);
  CHECK(llm.few_shot_seen == 1);
  CHECK(llm.seen[1] == render_description_system_prompt(kBirds, "Psittaciformes"));
}

TEST_CASE("discovery honours max_subtypes and fails when nothing parses") {
  ScriptedClient llm;
  llm.answers["Food"] = "Cheese\nBread\nFruit";
  llm.answers["Cheese"] = "1; Brie; Soft white cheese.";
  DiscoveryOptions opt;
  opt.max_subtypes = 1;
  const auto r = discover_classes(kFood, llm, opt);
  CHECK(r.subtypes.size() == 1);
  CHECK(r.classes.size() == 1);
  CHECK(llm.seen[0].system == render_subtype_prompt(kFood));

  llm.answers["Cheese"] = "nothing useful";
  CHECK_THROWS_AS(discover_classes(kFood, llm, opt), ParseError);
  llm.answers["Food"] = "Note: none";
  CHECK_THROWS_AS(discover_classes(kFood, llm, opt), Error);
}

TEST_CASE("known class names are described in batches of ten") {
  ScriptedClient llm;
  std::vector<std::string> names;
  for (int i = 0; i < 12; ++i) names.push_back("Bird " + std::to_string(i));
  std::string first, second;
  for (int i = 0; i < 10; ++i) first += std::to_string(i + 1) + "; Bird " + std::to_string(i) + "; Small bird.\n";
  for (int i = 10; i < 12; ++i) second += std::to_string(i - 9) + "; Bird " + std::to_string(i) + "; Small bird.\n";
  const auto prompts = render_class_name_system_prompt(kBirds, names);
  llm.answers[prompts[0].user] = first;
  llm.answers[prompts[1].user] = second;
  const auto r = describe_known_classes(kBirds, names, llm);
  CHECK(r.classes.size() == 12);
  CHECK(llm.seen.size() == 2);
}

TEST_CASE("replay client matches exchanges after NFC and records misses") {
  std::vector<TranscriptEntry> t{{"sys", "Ka\xCC\x84ka\xCC\x84po\xCC\x84", "answer"}};
  const auto path = std::filesystem::temp_directory_path() / "pcil_transcript_test.json";
  save_transcript(t, path);
  ReplayLlmClient replay(load_transcript(path));
  CHECK(replay.chat({"sys", "K\xC4\x81k\xC4\x81p\xC5\x8D"}, {}) == "answer");
  CHECK(replay.calls() == 1);
  try {
    replay.chat({"other", "K\xC4\x81k\xC4\x81p\xC5\x8D"}, {});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kPipeline);
  }

  RecordingLlmClient rec(replay);
  rec.chat({"sys", "K\xC4\x81k\xC4\x81p\xC5\x8D"}, {});
  REQUIRE(rec.entries().size() == 1);
  CHECK(rec.entries()[0].response == "answer");
}

TEST_CASE("transcript files are validated") {
  const auto path = std::filesystem::temp_directory_path() / "pcil_transcript_bad.json";
  std::ofstream(path) << R"({"format": "nope"})";
  CHECK_THROWS_AS(load_transcript(path), Error);
  CHECK_THROWS_AS(load_transcript("/nonexistent/t.json"), Error);
}

TEST_CASE("http clients need their endpoint variables") {
  unsetenv("PCIL_LLM_ENDPOINT");
  unsetenv("PCIL_IMAGE_ENDPOINT");
  try {
    make_http_llm_client_from_env();
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  CHECK_THROWS_AS(make_http_image_client_from_env(), Error);
}
