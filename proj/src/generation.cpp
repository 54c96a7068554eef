// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/generation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "byte_io.hpp"
#include "pcil/error.hpp"

namespace pcil {

void RunOptions::validate() const {
  if (output_root.empty()) fail(ErrorKind::kConfig, "generation needs an output directory");
  if (max_attempts == 0) fail(ErrorKind::kConfig, "max_attempts must be at least 1");
  if (parallelism == 0) fail(ErrorKind::kConfig, "parallelism must be at least 1");
  if (!(backoff_factor >= 1.0) || !std::isfinite(backoff_factor)) {
    fail(ErrorKind::kConfig, "backoff factor must be >= 1");
  }
  if (initial_backoff.count() < 0 || max_backoff.count() < 0) {
    fail(ErrorKind::kConfig, "backoff delays must be non-negative");
  }
}

std::chrono::milliseconds RunOptions::backoff(std::uint32_t attempt) const {
  const double ms = static_cast<double>(initial_backoff.count()) *
                    std::pow(backoff_factor, static_cast<double>(attempt) - 1.0);
  const double capped = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

const char* to_string(JobStatus status) noexcept {
  switch (status) {
    case JobStatus::kCompleted: return "completed";
    case JobStatus::kSkipped: return "skipped";
    case JobStatus::kFailed: return "failed";
  }
  return "unknown";
}

nlohmann::json to_json(const GenerationReport& report) {
  nlohmann::json j;
  j["completed"] = report.completed;
  j["skipped"] = report.skipped;
  j["failed"] = report.failed;
  j["submissions"] = report.submissions;
  j["retries"] = report.retries;
  auto jobs = nlohmann::json::array();
  for (const auto& o : report.jobs) {
    nlohmann::json e{{"job_key", o.job_key}, {"status", to_string(o.status)},
                     {"attempts", o.attempts}};
    if (!o.last_error.empty()) e["error"] = o.last_error;
    jobs.push_back(std::move(e));
  }
  j["jobs"] = std::move(jobs);
  return j;
}

namespace {

class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::app);
    if (!out_) fail(ErrorKind::kIo, "cannot open event log " + path.string());
  }

  void write(const nlohmann::json& event) {
    if (!out_.is_open()) return;
    std::lock_guard lock(mu_);
    out_ << event.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

void write_atomically(const std::filesystem::path& target, std::span<const std::uint8_t> bytes) {
  std::filesystem::create_directories(target.parent_path());
  auto part = target;
  part += ".part";
  detail::write_file_bytes(part.string(), bytes);
  std::filesystem::rename(part, target);
}

}  // namespace

GenerationReport run_generation(const GenerationManifest& manifest, ImageClient& client,
                                const RunOptions& options) {
  options.validate();
  manifest.validate();
  std::filesystem::create_directories(options.output_root);
  const SleepFn sleep = options.sleep ? options.sleep : SleepFn([](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  });
  EventLog log(options.event_log);

  GenerationReport report;
  report.jobs.resize(manifest.jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> submissions{0};

  const auto run_job = [&](std::size_t index) {
    const auto& job = manifest.jobs[index];
    auto& outcome = report.jobs[index];
    outcome.job_key = job.job_key;
    const auto target = options.output_root / job.output_path;
    if (std::filesystem::exists(target)) {
      outcome.status = JobStatus::kSkipped;
      log.write({{"event", "skipped"}, {"job_key", job.job_key}});
      return;
    }
    const ImageRequest request{job.job_key, job.prompt, job.seed, job.params};
    for (std::uint32_t attempt = 1; attempt <= options.max_attempts; ++attempt) {
      outcome.attempts = attempt;
      submissions.fetch_add(1);
      SubmitResult result;
      try {
        result = client.submit(request);
      } catch (const std::exception& e) {
        result = SubmitResult::failure(e.what());
      }
      if (result.ok && result.image.empty()) result = SubmitResult::failure("empty image");
      if (result.ok) {
        try {
          write_atomically(target, result.image);
        } catch (const std::exception& e) {
          outcome.status = JobStatus::kFailed;
          outcome.last_error = e.what();
          log.write({{"event", "failed"}, {"job_key", job.job_key}, {"error", e.what()}});
          return;
        }
        outcome.status = JobStatus::kCompleted;
        outcome.last_error.clear();
        log.write({{"event", "completed"}, {"job_key", job.job_key}, {"attempt", attempt},
                   {"bytes", result.image.size()}});
        return;
      }
      outcome.last_error = result.error;
      const bool retry = result.retryable && attempt < options.max_attempts;
      log.write({{"event", retry ? "retry" : "failed"},
                 {"job_key", job.job_key},
                 {"attempt", attempt},
                 {"error", result.error}});
      if (!retry) break;
      sleep(options.backoff(attempt));
    }
    outcome.status = JobStatus::kFailed;
  };

  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < manifest.jobs.size(); i = next.fetch_add(1)) {
      run_job(i);
    }
  };
  const auto width =
      std::min<std::size_t>(options.parallelism, std::max<std::size_t>(1, manifest.jobs.size()));
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  }

  report.submissions = submissions.load();
  for (const auto& o : report.jobs) {
    switch (o.status) {
      case JobStatus::kCompleted: ++report.completed; break;
      case JobStatus::kSkipped: ++report.skipped; break;
      case JobStatus::kFailed: ++report.failed; break;
    }
    if (o.attempts > 1) report.retries += o.attempts - 1;
  }

  const auto report_path = options.report_path.empty()
                               ? options.output_root / "generation_report.json"
                               : options.report_path;
  {
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + report_path.string());
    out << to_json(report).dump(1) << '\n';
  }
  if (!report.jobs.empty() && report.failed == report.jobs.size()) {
    const auto last = report.jobs.back().last_error;
    throw GenerationError("all " + std::to_string(report.failed) +
                              " generation jobs failed; last error: " + last,
                          std::move(report));
  }
  return report;
}

}  // namespace pcil
