#pragma once

// Binary snapshot layout, all little-endian:
//   "FNSE" | u32 version | u32 n_grid | f64 box_length | f64 alpha | f64 time |
//   u1, u2, u3, p as n^3 f64 each in C order (x slowest).
// A trajectory directory holds snap_NNNNNN.fnse files in time order.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/io/files.hpp"
#include "fracreg/spectral/solver.hpp"

namespace fracreg::io {

inline constexpr char kSnapshotMagic[4] = {'F', 'N', 'S', 'E'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeader = 4 + 4 + 4 + 8 * 3;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>(v >> (8 * k) & 0xffu));
}
inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>(bits >> (8 * k) & 0xffu));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return v;
}
inline double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

}  // namespace detail

inline std::string encode_snapshot(const spectral::Snapshot& s, const AlphaParams& a) {
  const auto& g = s.grid();
  const std::size_t m = g.real_size();
  std::string out;
  out.reserve(kSnapshotHeader + 4 * 8 * m);
  out.append(kSnapshotMagic, 4);
  detail::put_u32(out, kSnapshotVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(g.n()));
  detail::put_f64(out, g.box_length());
  detail::put_f64(out, a.alpha());
  detail::put_f64(out, s.time());
  for (int c = 0; c < 3; ++c)
    for (double v : s.u_real[c]) detail::put_f64(out, v);
  for (double v : s.p_real) detail::put_f64(out, v);
  return out;
}

struct DecodedSnapshot {
  double alpha = 0.0;
  spectral::SnapshotPtr snapshot;
};

/// Pass `grid` to reuse a grid shared by a trajectory; it must match the header.
inline DecodedSnapshot decode_snapshot(const std::string& bytes, spectral::GridPtr grid = nullptr,
                                       const std::string& where = "snapshot") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kSnapshotHeader || std::memcmp(p, kSnapshotMagic, 4) != 0)
    fail(ErrorCode::IoError, where + ": not a snapshot file");
  if (detail::get_u32(p + 4) != kSnapshotVersion) fail(ErrorCode::IoError, where + ": unsupported version");
  const std::uint32_t n = detail::get_u32(p + 8);
  const double L = detail::get_f64(p + 12), alpha = detail::get_f64(p + 20), t = detail::get_f64(p + 28);
  if (n < 4 || n % 2 != 0 || n > 1024) fail(ErrorCode::IoError, where + ": bad grid size");
  const std::size_t m = static_cast<std::size_t>(n) * n * n;
  if (bytes.size() != kSnapshotHeader + 4 * 8 * m) fail(ErrorCode::IoError, where + ": truncated or oversized");
  if (!grid) grid = spectral::make_grid(static_cast<int>(n), L);
  if (grid->n() != static_cast<int>(n) || grid->box_length() != L)
    fail(ErrorCode::IoError, where + ": grid differs from the rest of the trajectory");
  spectral::VectorReal u;
  spectral::RealField pr(m);
  const unsigned char* q = p + kSnapshotHeader;
  for (int c = 0; c < 3; ++c) {
    u[c].resize(m);
    for (std::size_t i = 0; i < m; ++i, q += 8) u[c][i] = detail::get_f64(q);
  }
  for (std::size_t i = 0; i < m; ++i, q += 8) pr[i] = detail::get_f64(q);
  for (int c = 0; c < 3; ++c)
    for (double v : u[c])
      if (!std::isfinite(v)) fail(ErrorCode::IoError, where + ": non-finite velocity");
  return {alpha, spectral::make_snapshot(std::move(grid), t, std::move(u), std::move(pr))};
}

inline std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.fnse", index);
  return buf;
}

inline void save_snapshot(const fs::path& path, const spectral::Snapshot& s, const AlphaParams& a) {
  write_file_atomic(path, encode_snapshot(s, a));
}

inline DecodedSnapshot load_snapshot(const fs::path& path) {
  return decode_snapshot(read_file(path), nullptr, path.string());
}

inline void save_trajectory(const fs::path& dir, const spectral::Trajectory& tr) {
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k)
    save_snapshot(dir / snapshot_name(k), *tr.snapshots[k], tr.alpha);
}

/// Loads every snap_*.fnse in name order; history is not stored.
inline spectral::Trajectory load_trajectory(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("snap_", 0) == 0 && e.path().extension() == ".fnse") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::IoError, "no snapshots in " + dir.string());
  auto first = load_snapshot(files.front());
  const AlphaParams alpha(first.alpha);
  spectral::Trajectory tr{alpha, 0.0, {first.snapshot}, {}};
  for (std::size_t k = 1; k < files.size(); ++k) {
    auto next = decode_snapshot(read_file(files[k]), first.snapshot->u.grid, files[k].string());
    if (next.alpha != first.alpha) fail(ErrorCode::IoError, files[k].string() + ": alpha differs");
    if (!(next.snapshot->time() > tr.snapshots.back()->time()))
      fail(ErrorCode::IoError, files[k].string() + ": snapshot times must increase");
    tr.snapshots.push_back(next.snapshot);
  }
  if (tr.snapshots.size() > 1) tr.dt_output = tr.snapshots[1]->time() - tr.snapshots[0]->time();
  return tr;
}

}  // namespace fracreg::io
