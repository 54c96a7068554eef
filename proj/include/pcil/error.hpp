// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pcil {

/// Failure categories. The C API and the CLI exit codes are derived from these.
enum class ErrorKind {
  kConfig,       // invalid parameters or configuration
  kFormat,       // bad magic, version mismatch, malformed file
  kCorruption,   // truncated or internally inconsistent file
  kData,         // non-finite values, unknown class ids
  kShape,        // dimension mismatch
  kDegenerate,   // zero-norm input where a direction is required
  kProtocol,     // calls out of order (observe after finalize, empty task, ...)
  kNumeric,      // factorization failure, singular system
  kParse,        // LLM response could not be parsed
  kPipeline,     // generation run failed as a whole
  kIo,
  kEvaluation,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace pcil
