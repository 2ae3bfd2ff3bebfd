#pragma once

// Fixture tensor codec. Layout (all integers and floats little-endian):
//
//   offset 0   8 bytes  magic "SGTENSOR"
//   offset 8   u32      format version (1)
//   offset 12  u32      element type (1 = float32)
//   offset 16  u32      rank, 1..8
//   offset 20  u64[rank] dimensions, each >= 1, product <= 2^40
//   then       float32[product] payload, row-major, last dimension fastest
//
// Values are widened to double on read. The file must end exactly at the end
// of the payload.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"

namespace seedgate {

inline constexpr std::array<char, 8> kTensorMagic{'S', 'G', 'T', 'E', 'N', 'S', 'O', 'R'};
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint32_t kElementFloat32 = 1;
inline constexpr std::uint32_t kMaxRank = 8;
inline constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;

struct Tensor {
  std::vector<std::uint64_t> shape;
  std::vector<double> data;

  std::size_t rank() const noexcept { return shape.size(); }
};

namespace detail {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

template <typename T>
void put(std::vector<unsigned char>& out, std::size_t& pos, T v) {
  const auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(to_little(v));
  std::copy(bytes.begin(), bytes.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
  pos += sizeof(T);
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(ErrorCode short_read, const char* what) {
    require(remaining() >= sizeof(T), short_read, what);
    std::array<unsigned char, sizeof(T)> raw{};
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(std::bit_cast<T>(raw));
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (std::uint64_t d : shape) {
    require(d >= 1, ErrorCode::ShapeOverflow, "tensor dimensions must be at least 1");
    require(d <= kMaxElements && n <= kMaxElements / d, ErrorCode::ShapeOverflow, "tensor element count overflows");
    n *= d;
  }
  return n;
}

inline std::vector<unsigned char> encode_tensor(const Tensor& t) {
  require(t.rank() >= 1 && t.rank() <= kMaxRank, ErrorCode::ShapeOverflow, "tensor rank must lie in [1, 8]");
  const std::uint64_t n = element_count(t.shape);
  require(n == t.data.size(), ErrorCode::ShapeMismatch, "tensor data length does not match its shape");

  std::vector<unsigned char> out(20 + 8 * t.rank() + 4 * t.data.size());
  std::copy(kTensorMagic.begin(), kTensorMagic.end(), out.begin());
  std::size_t pos = kTensorMagic.size();
  detail::put(out, pos, kTensorVersion);
  detail::put(out, pos, kElementFloat32);
  detail::put(out, pos, static_cast<std::uint32_t>(t.rank()));
  for (std::uint64_t d : t.shape) detail::put(out, pos, d);
  for (double v : t.data) {
    const auto f = static_cast<float>(v);
    require(std::isfinite(f), ErrorCode::NonFinite, "fixture values must be finite in float32");
    detail::put(out, pos, f);
  }
  return out;
}

inline Tensor decode_tensor(std::span<const unsigned char> bytes) {
  require(bytes.size() >= kTensorMagic.size() &&
              std::memcmp(bytes.data(), kTensorMagic.data(), kTensorMagic.size()) == 0,
          ErrorCode::BadMagic, "not a tensor fixture");
  detail::Reader r(bytes.subspan(kTensorMagic.size()));
  const auto version = r.get<std::uint32_t>(ErrorCode::TruncatedPayload, "header truncated");
  require(version == kTensorVersion, ErrorCode::UnsupportedVersion,
          "unsupported fixture version " + std::to_string(version));
  const auto dtype = r.get<std::uint32_t>(ErrorCode::TruncatedPayload, "header truncated");
  require(dtype == kElementFloat32, ErrorCode::BadElementType, "unsupported element type " + std::to_string(dtype));
  const auto rank = r.get<std::uint32_t>(ErrorCode::TruncatedPayload, "header truncated");
  require(rank >= 1 && rank <= kMaxRank, ErrorCode::ShapeOverflow, "tensor rank must lie in [1, 8]");

  Tensor t;
  t.shape.reserve(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.shape.push_back(r.get<std::uint64_t>(ErrorCode::TruncatedPayload, "shape truncated"));
  }
  const std::uint64_t n = element_count(t.shape);
  require(r.remaining() >= n * 4, ErrorCode::TruncatedPayload,
          "payload holds " + std::to_string(r.remaining() / 4) + " of " + std::to_string(n) + " elements");
  require(r.remaining() == n * 4, ErrorCode::TrailingPayload, "bytes follow the payload");
  t.data.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float f = r.get<float>(ErrorCode::TruncatedPayload, "payload truncated");
    require(std::isfinite(f), ErrorCode::NonFinite, "fixture payload holds a non-finite value");
    t.data.push_back(static_cast<double>(f));
  }
  return t;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::MissingFixture, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::IoFailure, "read failed for " + path.string());
  return bytes;
}

// Writes to a sibling temporary and renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoFailure, "cannot move fixture into place at " + path.string());
  }
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()),
                                                         text.size()));
}

inline Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path)); }

inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_atomic(path, encode_tensor(t));
}

// Rank 2 reads as an h x w scalar map, rank 3 as h x w x d.
inline DenseMap to_dense_map(Tensor t) {
  require(t.rank() == 2 || t.rank() == 3, ErrorCode::ShapeMismatch,
          "dense maps need rank 2 or 3, got rank " + std::to_string(t.rank()));
  const int h = static_cast<int>(t.shape[0]);
  const int w = static_cast<int>(t.shape[1]);
  const int d = t.rank() == 3 ? static_cast<int>(t.shape[2]) : 1;
  return DenseMap(h, w, d, std::move(t.data));
}

inline EmbeddingVector to_embedding(Tensor t, EmbeddingSource source = EmbeddingSource::Other) {
  require(t.rank() == 1, ErrorCode::ShapeMismatch, "embeddings are rank-1 tensors");
  return EmbeddingVector(std::move(t.data), source);
}

inline Tensor from_dense_map(const DenseMap& m) {
  Tensor t;
  t.shape = {static_cast<std::uint64_t>(m.height()), static_cast<std::uint64_t>(m.width())};
  if (m.channels() > 1) t.shape.push_back(static_cast<std::uint64_t>(m.channels()));
  t.data = m.data();
  return t;
}

inline Tensor from_embedding(const EmbeddingVector& e) { return Tensor{{e.size()}, e.values}; }

inline DenseMap read_dense_map(const std::filesystem::path& path) { return to_dense_map(read_tensor(path)); }

inline EmbeddingVector read_embedding(const std::filesystem::path& path,
                                      EmbeddingSource source = EmbeddingSource::Other) {
  return to_embedding(read_tensor(path), source);
}

}  // namespace seedgate
