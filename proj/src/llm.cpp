// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/llm.hpp"

#include <fstream>

#include "pcil/error.hpp"
#include "pcil/text.hpp"

namespace pcil {

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open transcript " + path.string());
  std::vector<TranscriptEntry> out;
  try {
    nlohmann::json j;
    in >> j;
    if (j.value("format", std::string()) != "pcil-llm-transcript") {
      fail(ErrorKind::kFormat, path.string() + ": not an LLM transcript");
    }
    for (const auto& e : j.at("exchanges")) {
      out.push_back({e.value("system", std::string()), e.at("user").get<std::string>(),
                     e.at("response").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return out;
}

void save_transcript(std::span<const TranscriptEntry> entries, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "pcil-llm-transcript";
  j["version"] = 1;
  auto ex = nlohmann::json::array();
  for (const auto& e : entries) {
    ex.push_back({{"system", e.system}, {"user", e.user}, {"response", e.response}});
  }
  j["exchanges"] = std::move(ex);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write transcript " + path.string());
  out << j.dump(2) << '\n';
}

ReplayLlmClient::ReplayLlmClient(std::vector<TranscriptEntry> entries)
    : entries_(std::move(entries)) {
  for (auto& e : entries_) {
    e.system = nfc_normalize(e.system);
    e.user = nfc_normalize(e.user);
  }
}

std::string ReplayLlmClient::chat(const ChatPrompt& prompt, std::span<const FewShotExample>) {
  const auto system = nfc_normalize(prompt.system);
  const auto user = nfc_normalize(prompt.user);
  for (const auto& e : entries_) {
    if (e.system == system && e.user == user) {
      ++calls_;
      return e.response;
    }
  }
  fail(ErrorKind::kPipeline, "transcript has no response for user prompt '" + user + "'");
}

std::string RecordingLlmClient::chat(const ChatPrompt& prompt,
                                     std::span<const FewShotExample> few_shot) {
  auto response = inner_.chat(prompt, few_shot);
  std::lock_guard lock(mu_);
  entries_.push_back({prompt.system, prompt.user, response});
  return response;
}

std::vector<TranscriptEntry> RecordingLlmClient::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

namespace {

void absorb(DiscoveryResult& out, ParseResult&& r) {
  for (auto& s : r.accepted) out.classes.push_back(std::move(s));
  for (auto& x : r.rejected) out.rejected.push_back(std::move(x));
}

void require_classes(const DiscoveryResult& out) {
  if (out.classes.empty()) {
    throw ParseError("no class specification could be parsed from any response", out.rejected);
  }
}

}  // namespace

DiscoveryResult discover_classes(const RealmSpec& realm, LlmClient& client,
                                 const DiscoveryOptions& options) {
  realm.validate();
  DiscoveryResult out;
  out.subtypes = parse_subtype_list(client.chat(subtype_chat(realm), options.few_shot));
  if (out.subtypes.empty()) fail(ErrorKind::kParse, "subtype response lists no subtypes");
  if (options.max_subtypes > 0 && out.subtypes.size() > options.max_subtypes) {
    out.subtypes.resize(options.max_subtypes);
  }
  ClassSpecParser parser(description_schema(realm));
  for (const auto& subtype : out.subtypes) {
    const auto response =
        client.chat(render_description_system_prompt(realm, subtype), options.few_shot);
    absorb(out, parser.parse(response, subtype));
  }
  require_classes(out);
  return out;
}

DiscoveryResult describe_known_classes(const RealmSpec& realm,
                                       std::span<const std::string> names, LlmClient& client,
                                       const DiscoveryOptions& options) {
  DiscoveryResult out;
  ClassSpecParser parser(CsvSchema::kClassName);
  for (const auto& prompt : render_class_name_system_prompt(realm, names)) {
    absorb(out, parser.parse(client.chat(prompt, options.few_shot)));
  }
  require_classes(out);
  return out;
}

nlohmann::json to_json(const RejectedLine& r) {
  return {{"line", r.line_number},
          {"text", r.text},
          {"reason", r.reason},
          {"source_subtype", r.source_subtype}};
}

}  // namespace pcil
