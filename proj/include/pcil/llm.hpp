// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcil/prompts.hpp"

namespace pcil {

/// One user/assistant pair shown to the model before the real question.
struct FewShotExample {
  std::string user;
  std::string assistant;
};

/// Chat-completion contract: chat(system, user, exemplars) -> text.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string chat(const ChatPrompt& prompt, std::span<const FewShotExample> few_shot) = 0;
};

struct TranscriptEntry {
  std::string system;
  std::string user;
  std::string response;
};

/// Recorded exchanges as JSON:
///   {"format": "pcil-llm-transcript", "version": 1,
///    "exchanges": [{"system": ..., "user": ..., "response": ...}, ...]}
std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path);
void save_transcript(std::span<const TranscriptEntry> entries, const std::filesystem::path& path);

/// Answers from a transcript. Lookup is by exact (system, user) after NFC
/// normalisation; an unknown prompt is a pipeline error.
class ReplayLlmClient final : public LlmClient {
 public:
  explicit ReplayLlmClient(std::vector<TranscriptEntry> entries);
  std::string chat(const ChatPrompt& prompt, std::span<const FewShotExample> few_shot) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  std::vector<TranscriptEntry> entries_;
  std::size_t calls_ = 0;
};

/// Forwards to another client and keeps every exchange verbatim.
class RecordingLlmClient final : public LlmClient {
 public:
  explicit RecordingLlmClient(LlmClient& inner) : inner_(inner) {}
  std::string chat(const ChatPrompt& prompt, std::span<const FewShotExample> few_shot) override;
  std::vector<TranscriptEntry> entries() const;

 private:
  LlmClient& inner_;
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
};

/// OpenAI-style chat completions over HTTP(S). Configured from
/// PCIL_LLM_ENDPOINT (full URL), PCIL_LLM_API_KEY and PCIL_LLM_MODEL.
std::unique_ptr<LlmClient> make_http_llm_client_from_env();

struct DiscoveryOptions {
  std::size_t max_subtypes = 0;  // 0 = all returned subtypes
  std::vector<FewShotExample> few_shot;
};

struct DiscoveryResult {
  std::vector<std::string> subtypes;
  std::vector<ClassSpec> classes;
  std::vector<RejectedLine> rejected;
};

/// Two-stage class discovery: subtypes of the realm, then descriptions for
/// each subtype. Duplicates are dropped across subtypes (first kept).
/// Throws ParseError when no class survives.
DiscoveryResult discover_classes(const RealmSpec& realm, LlmClient& client,
                                 const DiscoveryOptions& options = {});

/// Known-class variant: descriptions for given names, ten per request.
DiscoveryResult describe_known_classes(const RealmSpec& realm,
                                       std::span<const std::string> names, LlmClient& client,
                                       const DiscoveryOptions& options = {});

nlohmann::json to_json(const RejectedLine& rejected);

}  // namespace pcil
