// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/checkpoint.hpp"

#include <cstring>
#include <string>

#include "byte_io.hpp"
#include "pcil/error.hpp"

namespace pcil {
namespace {

using detail::ByteReader;
using detail::ByteWriter;

ByteWriter begin(CheckpointKind kind) {
  ByteWriter w;
  w.raw("PCKP");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(kind));
  return w;
}

ByteReader open(std::span<const std::uint8_t> blob, CheckpointKind expected) {
  if (checkpoint_kind(blob) != expected) {
    fail(ErrorKind::kFormat, "checkpoint holds a different payload kind");
  }
  return ByteReader(blob.subspan(12), 12);
}

void finish(const ByteReader& r) {
  if (r.remaining() != 0) {
    fail(ErrorKind::kCorruption,
         "trailing bytes in checkpoint at byte offset " + std::to_string(r.offset()));
  }
}

void put_vector(ByteWriter& w, const Eigen::Ref<const Eigen::VectorXd>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v[i]);
}

Eigen::VectorXd get_vector(ByteReader& r, std::uint64_t n) {
  if (r.remaining() / 8 < n) {
    fail(ErrorKind::kCorruption, "checkpoint truncated at byte offset " + std::to_string(r.offset()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = r.f64();
  return v;
}

// Guards allocations against corrupted size fields.
std::uint64_t get_size(ByteReader& r, std::uint64_t element_bytes) {
  const std::uint64_t n = r.u64();
  if (element_bytes > 0 && n > r.remaining() / element_bytes) {
    fail(ErrorKind::kCorruption,
         "checkpoint size field exceeds payload at byte offset " + std::to_string(r.offset()));
  }
  return n;
}

}  // namespace

CheckpointKind checkpoint_kind(std::span<const std::uint8_t> blob) {
  if (blob.size() < 12 || std::memcmp(blob.data(), "PCKP", 4) != 0) {
    fail(ErrorKind::kFormat, "bad magic: not a checkpoint blob");
  }
  ByteReader r(blob.subspan(4), 4);
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::kFormat, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto kind = r.u32();
  if (kind < 1 || kind > 4) fail(ErrorKind::kFormat, "unknown checkpoint kind " + std::to_string(kind));
  return static_cast<CheckpointKind>(kind);
}

std::vector<std::uint8_t> encode_checkpoint(const ClassStats& stats) {
  auto w = begin(CheckpointKind::kClassStats);
  w.u64(stats.dim());
  w.u64(stats.num_classes());
  for (const auto& [id, e] : stats.entries()) {
    w.u32(id);
    w.u64(e.count);
    put_vector(w, e.sum);
  }
  return w.take();
}

ClassStats decode_class_stats(std::span<const std::uint8_t> blob) {
  auto r = open(blob, CheckpointKind::kClassStats);
  const auto dim = get_size(r, 0);
  const auto k = get_size(r, 12 + 8 * dim);
  ClassStats stats(dim);
  for (std::uint64_t c = 0; c < k; ++c) {
    const ClassId id = r.u32();
    const auto count = r.u64();
    stats.restore(id, count, get_vector(r, dim));
  }
  finish(r);
  return stats;
}

std::vector<std::uint8_t> encode_checkpoint(const LdaHead& head) {
  auto w = begin(CheckpointKind::kLdaHead);
  w.u64(static_cast<std::uint64_t>(head.weights.rows()));
  w.u64(head.classes.size());
  w.f64(head.shrinkage);
  for (std::size_t k = 0; k < head.classes.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    w.u32(head.classes[k]);
    w.f64(head.bias[col]);
    put_vector(w, head.weights.col(col));
  }
  return w.take();
}

LdaHead decode_lda_head(std::span<const std::uint8_t> blob) {
  auto r = open(blob, CheckpointKind::kLdaHead);
  const auto dim = get_size(r, 0);
  const auto k = get_size(r, 12 + 8 * dim);
  LdaHead head;
  head.shrinkage = r.f64();
  head.weights.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k));
  head.bias.resize(static_cast<Eigen::Index>(k));
  for (std::uint64_t c = 0; c < k; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    head.classes.push_back(r.u32());
    head.bias[col] = r.f64();
    head.weights.col(col) = get_vector(r, dim);
  }
  finish(r);
  return head;
}

std::vector<std::uint8_t> encode_checkpoint(const RanPacState& state) {
  const auto& proj = state.projection();
  if (!proj.seed()) {
    fail(ErrorKind::kConfig, "only seeded projections can be checkpointed");
  }
  if (!state.buffer().empty()) {
    fail(ErrorKind::kProtocol, "checkpoint requires a closed task (buffer must be empty)");
  }
  auto w = begin(CheckpointKind::kRanPacState);
  const auto m = state.hidden_dim();
  w.u64(proj.input_dim());
  w.u64(m);
  w.u64(*proj.seed());
  w.u32(state.weighting() == GramWeighting::kInverseClassFrequency ? 1 : 0);
  w.u64(state.tasks_folded());
  const auto& g = state.gram();
  for (Eigen::Index c = 0; c < g.cols(); ++c) put_vector(w, g.col(c));
  const auto& stats = state.hidden_stats();
  w.u64(stats.num_classes());
  for (const auto& [id, e] : stats.entries()) {
    w.u32(id);
    w.u64(e.count);
    put_vector(w, e.sum);
  }
  return w.take();
}

RanPacState decode_ranpac_state(std::span<const std::uint8_t> blob) {
  auto r = open(blob, CheckpointKind::kRanPacState);
  const auto input_dim = r.u64();
  const auto m = get_size(r, 0);
  if (m == 0 || input_dim == 0 || m > r.remaining() / 8 / m) {
    fail(ErrorKind::kCorruption, "checkpoint declares an impossible projection shape");
  }
  const auto seed = r.u64();
  const auto weighting_flag = r.u32();
  const auto tasks = r.u64();
  Eigen::MatrixXd gram(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index c = 0; c < gram.cols(); ++c) gram.col(c) = get_vector(r, m);
  const auto k = get_size(r, 12 + 8 * m);
  std::map<ClassId, std::pair<std::uint64_t, Eigen::VectorXd>> classes;
  for (std::uint64_t c = 0; c < k; ++c) {
    const ClassId id = r.u32();
    const auto count = r.u64();
    classes.emplace(id, std::make_pair(count, get_vector(r, m)));
  }
  finish(r);
  RanPacState state(Projection::from_seed(input_dim, m, seed),
                    weighting_flag == 1 ? GramWeighting::kInverseClassFrequency
                                        : GramWeighting::kUnweighted);
  state.restore(std::move(gram), tasks, classes);
  return state;
}

std::vector<std::uint8_t> encode_checkpoint(const RanPacHead& head) {
  auto w = begin(CheckpointKind::kRanPacHead);
  w.u64(static_cast<std::uint64_t>(head.weights.rows()));
  w.u64(head.classes.size());
  w.f64(head.lambda);
  w.f64(head.residual);
  for (std::size_t k = 0; k < head.classes.size(); ++k) {
    w.u32(head.classes[k]);
    put_vector(w, head.weights.col(static_cast<Eigen::Index>(k)));
  }
  return w.take();
}

RanPacHead decode_ranpac_head(std::span<const std::uint8_t> blob) {
  auto r = open(blob, CheckpointKind::kRanPacHead);
  const auto m = get_size(r, 0);
  const auto k = get_size(r, 4 + 8 * m);
  RanPacHead head;
  head.lambda = r.f64();
  head.residual = r.f64();
  head.weights.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  for (std::uint64_t c = 0; c < k; ++c) {
    head.classes.push_back(r.u32());
    head.weights.col(static_cast<Eigen::Index>(c)) = get_vector(r, m);
  }
  finish(r);
  return head;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const std::uint8_t> blob) {
  detail::write_file_bytes(path.string(), blob);
}

std::vector<std::uint8_t> load_checkpoint(const std::filesystem::path& path) {
  auto bytes = detail::read_file_bytes(path.string());
  checkpoint_kind(bytes);
  return bytes;
}

}  // namespace pcil
