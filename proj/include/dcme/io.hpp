// Copyright 2026 The dcme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Bit-exact serialization.
//
// Vector maps use a little-endian binary layout:
//   bytes 0..7   magic "DCMEVMAP"
//   bytes 8..11  version, unsigned 32-bit, currently 1
//   bytes 12..15 height, unsigned 32-bit
//   bytes 16..19 width, unsigned 32-bit
//   then height*width interleaved (dx, dy) IEEE-754 32-bit pairs, row-major.
//
// Label maps are binary 16-bit PGM (P5, maxval 65535, big-endian samples).

#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcme/grid.hpp"

namespace dcme {

class FormatError : public std::runtime_error {
 public:
  enum class Kind {
    kNotAVecmap,
    kTruncated,
    kCorruptComponents,
    kBadPgm,
    kUnsupportedDepth,
    kBadSceneSpec,
  };

  FormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr char kVecmapMagic[8] = {'D', 'C', 'M', 'E', 'V', 'M', 'A', 'P'};
inline constexpr std::uint32_t kVecmapVersion = 1;

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32_le(std::string& out, float v) {
  put_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

inline float get_f32_le(const unsigned char* p) {
  return std::bit_cast<float>(get_u32_le(p));
}

/// Reads up to `want` bytes; returns how many arrived. Reading in chunks
/// keeps allocation proportional to the actual stream content even when a
/// corrupt header promises an absurd payload.
inline std::uint64_t read_up_to(std::istream& is, std::uint64_t want,
                                std::vector<unsigned char>& buf) {
  constexpr std::uint64_t kChunk = 1 << 20;
  std::uint64_t got = 0;
  while (got < want && is.good()) {
    const std::uint64_t step = std::min(kChunk, want - got);
    const std::size_t old = buf.size();
    buf.resize(old + static_cast<std::size_t>(step));
    is.read(reinterpret_cast<char*>(buf.data() + old), static_cast<std::streamsize>(step));
    const std::uint64_t n = static_cast<std::uint64_t>(is.gcount());
    buf.resize(old + static_cast<std::size_t>(n));
    got += n;
    if (n < step) break;
  }
  return got;
}

}  // namespace detail

inline void write_vecmap(std::ostream& os, const VectorMap& vm) {
  std::string out;
  out.reserve(20 + static_cast<std::size_t>(vm.rows()) * static_cast<std::size_t>(vm.cols()) * 8);
  out.append(kVecmapMagic, sizeof(kVecmapMagic));
  detail::put_u32_le(out, kVecmapVersion);
  detail::put_u32_le(out, static_cast<std::uint32_t>(vm.rows()));
  detail::put_u32_le(out, static_cast<std::uint32_t>(vm.cols()));
  for (Index r = 0; r < vm.rows(); ++r) {
    for (Index c = 0; c < vm.cols(); ++c) {
      detail::put_f32_le(out, vm.dx(r, c));
      detail::put_f32_le(out, vm.dy(r, c));
    }
  }
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline VectorMap read_vecmap(std::istream& is) {
  std::vector<unsigned char> header;
  if (detail::read_up_to(is, 20, header) < 8)
    throw FormatError(FormatError::Kind::kTruncated, "truncated");
  if (std::memcmp(header.data(), kVecmapMagic, 8) != 0)
    throw FormatError(FormatError::Kind::kNotAVecmap, "not a vecmap");
  if (header.size() < 20) throw FormatError(FormatError::Kind::kTruncated, "truncated");
  if (detail::get_u32_le(header.data() + 8) != kVecmapVersion)
    throw FormatError(FormatError::Kind::kNotAVecmap, "not a vecmap: unsupported version");
  const std::uint64_t h = detail::get_u32_le(header.data() + 12);
  const std::uint64_t w = detail::get_u32_le(header.data() + 16);
  if (h == 0 || w == 0)
    throw FormatError(FormatError::Kind::kNotAVecmap, "not a vecmap: zero dims");
  if (h > std::numeric_limits<std::uint64_t>::max() / w / 8)
    throw FormatError(FormatError::Kind::kTruncated, "truncated");
  const std::uint64_t payload = h * w * 8;
  std::vector<unsigned char> body;
  if (detail::read_up_to(is, payload, body) < payload)
    throw FormatError(FormatError::Kind::kTruncated, "truncated");
  VectorMap vm = VectorMap::Zero(static_cast<Index>(h), static_cast<Index>(w));
  const unsigned char* p = body.data();
  for (Index r = 0; r < vm.rows(); ++r) {
    for (Index c = 0; c < vm.cols(); ++c) {
      const float dx = detail::get_f32_le(p);
      const float dy = detail::get_f32_le(p + 4);
      p += 8;
      if (!std::isfinite(dx) || !std::isfinite(dy))
        throw FormatError(FormatError::Kind::kCorruptComponents, "corrupt components");
      vm.dx(r, c) = dx;
      vm.dy(r, c) = dy;
    }
  }
  return vm;
}

namespace detail {

/// Next token after PGM whitespace and '#' comments; empty on EOF.
inline std::string pgm_token(std::istream& is) {
  int ch = is.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = is.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = is.get();
  }
  std::string tok;
  while (ch != EOF && !std::isspace(ch) && ch != '#') {
    tok.push_back(static_cast<char>(ch));
    ch = is.get();
  }
  if (ch != EOF) is.unget();
  return tok;
}

inline std::uint64_t pgm_uint(std::istream& is) {
  const std::string tok = pgm_token(is);
  if (tok.empty()) throw FormatError(FormatError::Kind::kBadPgm, "bad pgm");
  std::uint64_t v = 0;
  for (char ch : tok) {
    if (ch < '0' || ch > '9') throw FormatError(FormatError::Kind::kBadPgm, "bad pgm");
    v = v * 10 + static_cast<std::uint64_t>(ch - '0');
    if (v > (std::uint64_t{1} << 31)) throw FormatError(FormatError::Kind::kBadPgm, "bad pgm");
  }
  return v;
}

}  // namespace detail

inline void write_labelmap(std::ostream& os, const LabelMap& lm) {
  std::string out = "P5\n" + std::to_string(lm.cols()) + " " + std::to_string(lm.rows()) +
                    "\n65535\n";
  out.reserve(out.size() +
              static_cast<std::size_t>(lm.rows()) * static_cast<std::size_t>(lm.cols()) * 2);
  for (Index r = 0; r < lm.rows(); ++r) {
    for (Index c = 0; c < lm.cols(); ++c) {
      const LabelId v = lm(r, c);
      out.push_back(static_cast<char>(v >> 8));
      out.push_back(static_cast<char>(v & 0xff));
    }
  }
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline LabelMap read_labelmap(std::istream& is) {
  if (detail::pgm_token(is) != "P5")
    throw FormatError(FormatError::Kind::kBadPgm, "bad pgm");
  const std::uint64_t w = detail::pgm_uint(is);
  const std::uint64_t h = detail::pgm_uint(is);
  const std::uint64_t maxval = detail::pgm_uint(is);
  if (w == 0 || h == 0) throw FormatError(FormatError::Kind::kBadPgm, "bad pgm");
  if (maxval != 65535)
    throw FormatError(FormatError::Kind::kUnsupportedDepth, "unsupported depth");
  const int sep = is.get();
  if (sep == EOF || !std::isspace(sep))
    throw FormatError(FormatError::Kind::kBadPgm, "bad pgm");
  const std::uint64_t payload = h * w * 2;
  std::vector<unsigned char> body;
  if (detail::read_up_to(is, payload, body) < payload)
    throw FormatError(FormatError::Kind::kTruncated, "truncated");
  LabelMap lm(static_cast<Index>(h), static_cast<Index>(w));
  const unsigned char* p = body.data();
  for (Index r = 0; r < lm.rows(); ++r) {
    for (Index c = 0; c < lm.cols(); ++c) {
      lm(r, c) = static_cast<LabelId>((static_cast<unsigned>(p[0]) << 8) | p[1]);
      p += 2;
    }
  }
  return lm;
}

/// Cityscapes-style instance id rasters: values >= 1000 encode
/// class*1000 + instance; smaller values are class-level (no instance) and
/// map to background. Instance identities are re-indexed densely per image
/// in ascending raw-value order.
struct CityscapesImport {
  LabelMap labels;
  LabelMap classes;
};

inline CityscapesImport import_cityscapes_ids(const LabelMap& raw) {
  std::vector<LabelId> dense(static_cast<std::size_t>(kMaxLabelId) + 1, 0);
  std::vector<bool> seen(dense.size(), false);
  for (Index r = 0; r < raw.rows(); ++r)
    for (Index c = 0; c < raw.cols(); ++c)
      if (raw(r, c) >= 1000) seen[raw(r, c)] = true;
  LabelId next = 0;
  for (std::size_t v = 1000; v < seen.size(); ++v)
    if (seen[v]) dense[v] = ++next;
  CityscapesImport out{LabelMap::Zero(raw.rows(), raw.cols()),
                       LabelMap::Zero(raw.rows(), raw.cols())};
  for (Index r = 0; r < raw.rows(); ++r) {
    for (Index c = 0; c < raw.cols(); ++c) {
      const LabelId v = raw(r, c);
      if (v < 1000) continue;
      out.labels(r, c) = dense[v];
      out.classes(r, c) = static_cast<LabelId>(v / 1000);
    }
  }
  return out;
}

/// Normalizes by the maximum magnitude and scales to 0..255 with half-up
/// rounding; an all-zero map exports all-zero.
template <typename Scalar>
Plane<std::uint8_t> export_magnitude_image(const Plane<Scalar>& mag) {
  Plane<std::uint8_t> img = Plane<std::uint8_t>::Zero(mag.rows(), mag.cols());
  if (mag.size() == 0) return img;
  const double max_m = static_cast<double>(mag.maxCoeff());
  if (max_m <= 0.0) return img;
  for (Index r = 0; r < mag.rows(); ++r)
    for (Index c = 0; c < mag.cols(); ++c)
      img(r, c) = static_cast<std::uint8_t>(
          std::floor(static_cast<double>(mag(r, c)) / max_m * 255.0 + 0.5));
  return img;
}

inline void write_gray8(std::ostream& os, const Plane<std::uint8_t>& img) {
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) +
                    "\n255\n";
  for (Index r = 0; r < img.rows(); ++r)
    for (Index c = 0; c < img.cols(); ++c) out.push_back(static_cast<char>(img(r, c)));
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

// Path convenience wrappers.

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace detail

inline VectorMap read_vecmap(const std::filesystem::path& path) {
  auto is = detail::open_input(path);
  return read_vecmap(is);
}

inline void write_vecmap(const std::filesystem::path& path, const VectorMap& vm) {
  auto os = detail::open_output(path);
  write_vecmap(os, vm);
}

inline LabelMap read_labelmap(const std::filesystem::path& path) {
  auto is = detail::open_input(path);
  return read_labelmap(is);
}

inline void write_labelmap(const std::filesystem::path& path, const LabelMap& lm) {
  auto os = detail::open_output(path);
  write_labelmap(os, lm);
}

inline void write_gray8(const std::filesystem::path& path, const Plane<std::uint8_t>& img) {
  auto os = detail::open_output(path);
  write_gray8(os, img);
}

}  // namespace dcme
