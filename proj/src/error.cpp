// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/error.hpp"

namespace pcil {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kCorruption: return "corrupt file";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kShape: return "shape mismatch";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kNumeric: return "numerical failure";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kPipeline: return "pipeline error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kEvaluation: return "evaluation error";
  }
  return "error";
}

}  // namespace pcil
