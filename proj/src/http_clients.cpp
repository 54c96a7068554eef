// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <mutex>

#include <httplib.h>

#include "pcil/error.hpp"
#include "pcil/generation.hpp"
#include "pcil/llm.hpp"

namespace pcil {
namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

std::string require_env(const char* name) {
  auto v = env_or(name, "");
  if (v.empty()) fail(ErrorKind::kConfig, std::string("environment variable ") + name + " is not set");
  return v;
}

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::kConfig, "endpoint must be a full URL: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    fail(ErrorKind::kConfig, "unsupported endpoint scheme '" + scheme + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") fail(ErrorKind::kConfig, "built without TLS support; use an http endpoint");
#endif
  const auto slash = url.find('/', scheme_end + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

httplib::Headers auth_headers(const std::string& key) {
  httplib::Headers h;
  if (!key.empty()) h.emplace("Authorization", "Bearer " + key);
  return h;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

class HttpChatClient final : public LlmClient {
 public:
  HttpChatClient(Url url, std::string key, std::string model)
      : url_(std::move(url)), key_(std::move(key)), model_(std::move(model)), client_(url_.origin) {
    client_.set_read_timeout(300, 0);
  }

  std::string chat(const ChatPrompt& prompt, std::span<const FewShotExample> few_shot) override {
    auto messages = nlohmann::json::array();
    if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
    for (const auto& ex : few_shot) {
      messages.push_back({{"role", "user"}, {"content", ex.user}});
      messages.push_back({{"role", "assistant"}, {"content", ex.assistant}});
    }
    messages.push_back({{"role", "user"}, {"content", prompt.user}});
    const nlohmann::json body{{"model", model_}, {"messages", std::move(messages)}};

    std::lock_guard lock(mu_);
    auto res = client_.Post(url_.path, auth_headers(key_), body.dump(), "application/json");
    if (!res) fail(ErrorKind::kPipeline, "LLM request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      fail(ErrorKind::kPipeline, "LLM endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body).at("choices").at(0).at("message").at("content");
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kPipeline, std::string("unexpected LLM response: ") + e.what());
    }
  }

 private:
  Url url_;
  std::string key_;
  std::string model_;
  std::mutex mu_;
  httplib::Client client_;
};

class HttpImageClient final : public ImageClient {
 public:
  HttpImageClient(Url url, std::string key) : url_(std::move(url)), key_(std::move(key)) {}

  SubmitResult submit(const ImageRequest& req) override {
    // One connection per call keeps the client usable from several workers.
    httplib::Client client(url_.origin);
    client.set_read_timeout(600, 0);
    const nlohmann::json body{{"prompt", req.prompt},
                              {"seed", req.seed},
                              {"width", req.params.image_size},
                              {"height", req.params.image_size},
                              {"num_inference_steps", req.params.inference_steps},
                              {"guidance_scale", req.params.guidance_scale}};
    auto res = client.Post(url_.path, auth_headers(key_), body.dump(), "application/json");
    if (!res) return SubmitResult::failure("transport: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      return SubmitResult::failure("HTTP " + std::to_string(res->status),
                                   retryable_status(res->status));
    }
    return SubmitResult::success({res->body.begin(), res->body.end()});
  }

 private:
  Url url_;
  std::string key_;
};

}  // namespace

std::unique_ptr<LlmClient> make_http_llm_client_from_env() {
  return std::make_unique<HttpChatClient>(split_url(require_env("PCIL_LLM_ENDPOINT")),
                                          env_or("PCIL_LLM_API_KEY", ""),
                                          env_or("PCIL_LLM_MODEL", "gpt-4"));
}

std::unique_ptr<ImageClient> make_http_image_client_from_env() {
  return std::make_unique<HttpImageClient>(split_url(require_env("PCIL_IMAGE_ENDPOINT")),
                                           env_or("PCIL_IMAGE_API_KEY", ""));
}

}  // namespace pcil
