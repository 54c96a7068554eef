// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pcil/learners.hpp"
#include "pcil/ranpac.hpp"

namespace pcil {

// Checkpoint container: "PCKP", u32 version, u32 payload kind, payload.
// Little-endian throughout, doubles as IEEE-754 binary64. RanPAC checkpoints
// store the projection seed and shape (never the weights) together with G,
// per-class counts and hidden sums; raw sample buffers are never written.

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointKind : std::uint32_t {
  kClassStats = 1,
  kLdaHead = 2,
  kRanPacState = 3,
  kRanPacHead = 4,
};

std::vector<std::uint8_t> encode_checkpoint(const ClassStats& stats);
std::vector<std::uint8_t> encode_checkpoint(const LdaHead& head);
std::vector<std::uint8_t> encode_checkpoint(const RanPacState& state);
std::vector<std::uint8_t> encode_checkpoint(const RanPacHead& head);

CheckpointKind checkpoint_kind(std::span<const std::uint8_t> blob);

ClassStats decode_class_stats(std::span<const std::uint8_t> blob);
LdaHead decode_lda_head(std::span<const std::uint8_t> blob);
/// Regenerates the projection from the stored seed.
RanPacState decode_ranpac_state(std::span<const std::uint8_t> blob);
RanPacHead decode_ranpac_head(std::span<const std::uint8_t> blob);

void save_checkpoint(const std::filesystem::path& path, std::span<const std::uint8_t> blob);
std::vector<std::uint8_t> load_checkpoint(const std::filesystem::path& path);

}  // namespace pcil
