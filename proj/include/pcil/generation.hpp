// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcil/error.hpp"
#include "pcil/manifest.hpp"

namespace pcil {

struct ImageRequest {
  std::string job_key;
  std::string prompt;
  std::uint64_t seed = 0;
  GenerationParams params;
};

/// Either image bytes or a typed failure. Non-retryable failures end the
/// job immediately.
struct SubmitResult {
  bool ok = false;
  std::vector<std::uint8_t> image;
  std::string error;
  bool retryable = true;

  static SubmitResult success(std::vector<std::uint8_t> bytes) {
    return {true, std::move(bytes), {}, false};
  }
  static SubmitResult failure(std::string why, bool retryable = true) {
    return {false, {}, std::move(why), retryable};
  }
};

/// Text-to-image contract. Must be thread-safe when used with parallelism > 1.
class ImageClient {
 public:
  virtual ~ImageClient() = default;
  virtual SubmitResult submit(const ImageRequest& request) = 0;
};

/// POSTs {prompt, seed, width, height, num_inference_steps, guidance_scale}
/// as JSON to PCIL_IMAGE_ENDPOINT and expects raw image bytes back.
/// PCIL_IMAGE_API_KEY, when set, is sent as a bearer token.
std::unique_ptr<ImageClient> make_http_image_client_from_env();

using SleepFn = std::function<void(std::chrono::milliseconds)>;

struct RunOptions {
  std::filesystem::path output_root;
  std::uint32_t max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
  std::uint32_t parallelism = 1;
  /// Injected for tests; defaults to std::this_thread::sleep_for.
  SleepFn sleep;
  /// JSON-lines event log (one object per submission outcome); empty = none.
  std::filesystem::path event_log;
  /// Where the completion report is written; empty = <output_root>/generation_report.json.
  std::filesystem::path report_path;

  void validate() const;
  /// Delay before attempt `attempt` + 1 (attempt is 1-based).
  std::chrono::milliseconds backoff(std::uint32_t attempt) const;
};

enum class JobStatus { kCompleted, kSkipped, kFailed };
const char* to_string(JobStatus status) noexcept;

struct JobOutcome {
  std::string job_key;
  JobStatus status = JobStatus::kFailed;
  std::uint32_t attempts = 0;
  std::string last_error;
};

struct GenerationReport {
  std::vector<JobOutcome> jobs;  // manifest order
  std::size_t completed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t submissions = 0;
  std::size_t retries = 0;
};

nlohmann::json to_json(const GenerationReport& report);

/// Raised when no job succeeded; carries the full report.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, GenerationReport report)
      : Error(ErrorKind::kPipeline, what), report_(std::move(report)) {}
  const GenerationReport& report() const noexcept { return report_; }

 private:
  GenerationReport report_;
};

/// Runs every job not already on disk. Outputs are written to a ".part" file
/// and renamed into place, so an existing output is always complete. Throws
/// GenerationError (after writing the report) when every job failed.
GenerationReport run_generation(const GenerationManifest& manifest, ImageClient& client,
                                const RunOptions& options);

}  // namespace pcil
