// Copyright 2026 The mpmqir Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// File formats: MNIST-family IDX images, CIFAR-10 binary batches, binary
// PGM/PPM, and the MPMQ checkpoint (the compressed artifact).
//
// MPMQ v1 layout, little-endian:
//   "MPMQ" | version u16 | ansatz u8 | qubits u8 | layers u16 | width u16 |
//   height u16 | channels u8 | channels x (mu f64, sigma f64) |
//   channels x param_count x f64 | crc32 u32 of all preceding bytes

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <zlib.h>

#include "mpmqir/ansatz.hpp"
#include "mpmqir/circuit.hpp"
#include "mpmqir/error.hpp"
#include "mpmqir/postproc.hpp"
#include "mpmqir/statevec.hpp"

namespace mpmqir {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Format, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Format, "write to '" + path.string() + "' failed");
}

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

inline std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

// Bounds-checked little-endian cursor.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t offset() const noexcept { return off_; }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (b_.size() - off_ < n)
      throw ParseError(std::string("truncated ") + what + ": need " + std::to_string(n) + " bytes, " +
                           std::to_string(b_.size() - off_) + " left",
                       off_);
    auto s = b_.subspan(off_, n);
    off_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  std::uint16_t u16(const char* what) {
    auto s = take(2, what);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint64_t u64(const char* what) {
    auto s = take(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t off_ = 0;
};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xff));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }

  Bytes& bytes() noexcept { return out_; }

 private:
  Bytes out_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// IDX

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Parses an IDX3 unsigned-byte image file (MNIST, Fashion-MNIST).
inline std::vector<ByteImage> parse_idx_images(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16)
    throw ParseError("truncated IDX header: " + std::to_string(bytes.size()) + " of 16 bytes", bytes.size());
  const std::uint32_t magic = detail::read_be32(bytes, 0);
  if (magic != kIdxImageMagic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "expected image magic 0x00000803, found 0x%08x", magic);
    throw ParseError(buf, 0);
  }
  const std::uint64_t count = detail::read_be32(bytes, 4);
  const std::uint64_t rows = detail::read_be32(bytes, 8);
  const std::uint64_t cols = detail::read_be32(bytes, 12);
  if (rows == 0 || cols == 0 || rows > 65535 || cols > 65535)
    throw ParseError("invalid IDX image dimensions " + std::to_string(rows) + "x" + std::to_string(cols), 8);
  const std::uint64_t actual = bytes.size() - 16;
  const std::uint64_t expected = count * rows * cols;  // rows, cols < 2^16 and count < 2^32: no overflow
  if (actual != expected)
    throw ParseError("IDX pixel section holds " + std::to_string(actual) + " bytes, header implies " +
                         std::to_string(expected),
                     16 + std::min(actual, expected));
  std::vector<ByteImage> out;
  out.reserve(count);
  const std::size_t px = rows * cols;
  for (std::size_t i = 0; i < count; ++i) {
    const auto* p = bytes.data() + 16 + i * px;
    out.emplace_back(cols, rows, 1, std::vector<std::uint8_t>(p, p + px));
  }
  return out;
}

inline std::vector<ByteImage> load_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(read_file(path));
}

inline ByteImage load_idx_image(const std::filesystem::path& path, std::size_t index) {
  auto images = load_idx_images(path);
  if (index >= images.size())
    throw ConfigError("IDX index " + std::to_string(index) + " out of range (" + std::to_string(images.size()) +
                      " images)");
  return std::move(images[index]);
}

// ---------------------------------------------------------------------------
// CIFAR-10

inline constexpr std::size_t kCifarRecordBytes = 3073;

/// Record `index` of a CIFAR-10 binary batch: one label byte then the 1024
/// red, 1024 green and 1024 blue bytes, each plane row-major.
inline ByteImage parse_cifar10(std::span<const std::uint8_t> bytes, std::size_t index) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0)
    throw ParseError("CIFAR-10 file length " + std::to_string(bytes.size()) + " is not a positive multiple of 3073",
                     bytes.size() - bytes.size() % kCifarRecordBytes);
  const std::size_t records = bytes.size() / kCifarRecordBytes;
  if (index >= records)
    throw ConfigError("CIFAR-10 index " + std::to_string(index) + " out of range (" + std::to_string(records) +
                      " records)");
  const auto* rec = bytes.data() + index * kCifarRecordBytes + 1;
  std::vector<std::uint8_t> v(32 * 32 * 3);
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t i = 0; i < 1024; ++i) v[i * 3 + ch] = rec[ch * 1024 + i];
  return ByteImage(32, 32, 3, std::move(v));
}

inline ByteImage load_cifar10(const std::filesystem::path& path, std::size_t index) {
  return parse_cifar10(read_file(path), index);
}

// ---------------------------------------------------------------------------
// Netpbm (binary P5 / P6, maxval 255)

inline ByteImage parse_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a netpbm file", 0);
  const char variant = static_cast<char>(bytes[1]);
  if (variant == '2' || variant == '3')
    throw ParseError(std::string("unsupported netpbm variant P") + variant + " (only binary P5/P6)", 0);
  if (variant != '5' && variant != '6') throw ParseError("unsupported netpbm variant", 1);
  const std::size_t channels = variant == '5' ? 1 : 3;

  std::size_t pos = 2;
  auto is_space = [](std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
  auto header_number = [&](const char* what) -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
      throw ParseError(std::string("expected ") + what + " in netpbm header", pos);
    std::size_t v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw ParseError(std::string(what) + " too large", pos);
      ++pos;
    }
    return v;
  };
  const std::size_t width = header_number("width");
  const std::size_t height = header_number("height");
  const std::size_t maxval_pos = pos;
  const std::size_t maxval = header_number("maxval");
  if (width == 0 || height == 0) throw ParseError("netpbm image has zero size", maxval_pos);
  if (maxval != 255) throw ParseError("unsupported maxval " + std::to_string(maxval) + " (only 255)", maxval_pos);
  if (pos >= bytes.size() || !is_space(bytes[pos])) throw ParseError("expected whitespace after maxval", pos);
  ++pos;
  const std::size_t need = width * height * channels;
  if (bytes.size() - pos < need)
    throw ParseError("truncated netpbm raster: need " + std::to_string(need) + " bytes, have " +
                         std::to_string(bytes.size() - pos),
                     bytes.size());
  return ByteImage(width, height, channels, std::vector<std::uint8_t>(bytes.begin() + pos, bytes.begin() + pos + need));
}

inline Bytes encode_pnm(const ByteImage& img) {
  const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.values.begin(), img.values.end());
  return out;
}

inline ByteImage read_pnm(const std::filesystem::path& path) { return parse_pnm(read_file(path)); }
inline void write_pnm(const std::filesystem::path& path, const ByteImage& img) { write_file(path, encode_pnm(img)); }

// ---------------------------------------------------------------------------
// Checkpoint

inline constexpr std::uint16_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 15;

struct Checkpoint {
  AnsatzId ansatz = AnsatzId::MPM;
  unsigned qubits = 0;
  unsigned layers = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<ChannelStats> stats;
  std::vector<std::vector<double>> params;

  std::size_t n_theta() const { return param_count(ansatz, qubits, layers); }

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Serialized size of a checkpoint with the given geometry.
inline std::size_t checkpoint_size(std::size_t channels, std::size_t n_theta) {
  return kCheckpointHeaderBytes + channels * 16 + channels * n_theta * 8 + 4;
}

inline void check_checkpoint(const Checkpoint& c) {
  if (c.channels != 1 && c.channels != 3) throw ContractError("checkpoint channels must be 1 or 3");
  if (c.width == 0 || c.height == 0 || c.width > 65535 || c.height > 65535)
    throw ContractError("checkpoint geometry out of range");
  if (c.qubits < 2 || c.qubits > kMaxQubits) throw ContractError("checkpoint qubit count out of range");
  if (c.layers < 1 || c.layers > 65535) throw ContractError("checkpoint layer count out of range");
  if ((std::size_t{1} << c.qubits) < c.width * c.height) throw ContractError("image does not fit in the register");
  if (c.stats.size() != c.channels || c.params.size() != c.channels)
    throw ContractError("checkpoint needs one stats entry and one parameter vector per channel");
  const std::size_t n = c.n_theta();
  for (const auto& p : c.params)
    if (p.size() != n)
      throw ContractError("parameter vector has " + std::to_string(p.size()) + " entries, ansatz expects " +
                          std::to_string(n));
}

inline Bytes encode_checkpoint(const Checkpoint& c) {
  check_checkpoint(c);
  detail::Writer w;
  w.raw("MPMQ");
  w.u16(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(c.ansatz));
  w.u8(static_cast<std::uint8_t>(c.qubits));
  w.u16(static_cast<std::uint16_t>(c.layers));
  w.u16(static_cast<std::uint16_t>(c.width));
  w.u16(static_cast<std::uint16_t>(c.height));
  w.u8(static_cast<std::uint8_t>(c.channels));
  for (const auto& s : c.stats) {
    w.f64(s.mu);
    w.f64(s.sigma);
  }
  for (const auto& p : c.params)
    for (double v : p) w.f64(v);
  w.u32(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

/// Parses and verifies an MPMQ checkpoint. Structural problems raise
/// ParseError; CRC or consistency failures raise IntegrityError.
inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), "MPMQ", 4) != 0) throw ParseError("bad magic, not an MPMQ checkpoint", 0);
  const std::uint16_t version = r.u16("version");
  if (version != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 4);
  if (bytes.size() < kCheckpointHeaderBytes + 4)
    throw ParseError("truncated checkpoint: " + std::to_string(bytes.size()) + " bytes", bytes.size());
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 3; i >= 0; --i) stored = (stored << 8) | bytes[body + static_cast<std::size_t>(i)];
  if (stored != crc32_of(bytes.first(body))) throw IntegrityError("checkpoint CRC mismatch", body);

  Checkpoint c;
  const std::uint8_t ansatz = r.u8("ansatz id");
  if (ansatz > 2) throw ParseError("unknown ansatz id " + std::to_string(ansatz), 6);
  c.ansatz = static_cast<AnsatzId>(ansatz);
  c.qubits = r.u8("qubit count");
  c.layers = r.u16("layer count");
  c.width = r.u16("width");
  c.height = r.u16("height");
  c.channels = r.u8("channel count");
  if (c.qubits < 2 || c.qubits > kMaxQubits)
    throw IntegrityError("qubit count " + std::to_string(c.qubits) + " out of range", 7);
  if (c.layers < 1) throw IntegrityError("layer count is zero", 8);
  if (c.channels != 1 && c.channels != 3)
    throw IntegrityError("channel count " + std::to_string(c.channels) + " is not 1 or 3", 14);
  if (c.width == 0 || c.height == 0) throw IntegrityError("zero image dimension", c.width == 0 ? 10 : 12);
  if ((std::size_t{1} << c.qubits) < c.width * c.height)
    throw IntegrityError(std::to_string(c.width * c.height) + " pixels do not fit in " + std::to_string(c.qubits) +
                         " qubits",
                         7);
  const std::size_t n = c.n_theta();
  if (bytes.size() != checkpoint_size(c.channels, n))
    throw IntegrityError("checkpoint holds " + std::to_string(bytes.size()) + " bytes, " + std::string(to_string(c.ansatz)) +
                         " geometry implies " + std::to_string(checkpoint_size(c.channels, n)),
                         bytes.size());
  for (std::size_t ch = 0; ch < c.channels; ++ch) {
    const std::size_t at = r.offset();
    ChannelStats s;
    s.mu = r.f64("mu");
    s.sigma = r.f64("sigma");
    if (!std::isfinite(s.mu) || !std::isfinite(s.sigma) || s.sigma < 0.0)
      throw IntegrityError("invalid statistics for channel " + std::to_string(ch), at);
    c.stats.push_back(s);
  }
  for (std::size_t ch = 0; ch < c.channels; ++ch) {
    std::vector<double> p(n);
    for (double& v : p) {
      const std::size_t at = r.offset();
      v = r.f64("parameter");
      if (!std::isfinite(v)) throw IntegrityError("non-finite parameter in channel " + std::to_string(ch), at);
    }
    c.params.push_back(std::move(p));
  }
  return c;
}

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file(path, encode_checkpoint(c));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

/// Unit-domain reconstruction: per channel, run the circuit and rescale the
/// first W*H probabilities with the stored statistics.
inline UnitImage reconstruct_unit(const Checkpoint& c) {
  check_checkpoint(c);
  const CircuitTemplate t = build_ansatz(c.ansatz, c.qubits, c.layers);
  std::vector<std::vector<double>> planes;
  for (std::size_t ch = 0; ch < c.channels; ++ch)
    planes.push_back(rescale_probs(run_circuit(t, c.params[ch]), c.width * c.height, c.stats[ch]));
  return UnitImage::from_channels(c.width, c.height, planes);
}

/// Deterministic decompression to bytes (round half up).
inline ByteImage decode_checkpoint_to_image(const Checkpoint& c) { return denormalize(reconstruct_unit(c)); }

}  // namespace mpmqir
