#pragma once

// Shared helpers for the test suites: seeded generators, a scratch directory,
// and brute-force oracles that are deliberately independent of the library's
// implementation paths.

#include <algorithm>
#include <bit>
#include <cstring>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "seedgate/core_maps.hpp"
#include "seedgate/metrics.hpp"
#include "seedgate/tensor_io.hpp"

namespace seedgate::testing {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("seedgate_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline DenseMap random_map(std::mt19937_64& rng, int h, int w, int d, double lo = -1.0, double hi = 1.0) {
  return DenseMap(h, w, d, random_vector(rng, static_cast<std::size_t>(h) * w * d, lo, hi));
}

inline BinaryMask mask_from_bits(int h, int w, std::uint64_t bits) {
  BinaryMask m(h, w);
  for (int i = 0; i < h * w; ++i) m.set(i / w, i % w, (bits >> i) & 1U);
  return m;
}

// --- metric oracles --------------------------------------------------------

inline double oracle_dice(const BinaryMask& a, const BinaryMask& b) {
  int na = 0, nb = 0, both = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      na += a.get(y, x);
      nb += b.get(y, x);
      both += a.get(y, x) && b.get(y, x);
    }
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * both / (na + nb);
}

inline std::vector<std::pair<int, int>> oracle_boundary(const BinaryMask& m) {
  std::vector<std::pair<int, int>> out;
  const int dy[] = {-1, 1, 0, 0};
  const int dx[] = {0, 0, -1, 1};
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.get(y, x)) continue;
      bool edge = false;
      for (int k = 0; k < 4; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        const bool inside = ny >= 0 && nx >= 0 && ny < m.height() && nx < m.width();
        if (!inside || !m.get(ny, nx)) edge = true;
      }
      if (edge) out.emplace_back(x, y);
    }
  }
  return out;
}

inline double oracle_nearest(std::pair<int, int> p, const std::vector<std::pair<int, int>>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) {
    best = std::min(best, std::sqrt(double((p.first - q.first) * (p.first - q.first) +
                                           (p.second - q.second) * (p.second - q.second))));
  }
  return best;
}

inline double oracle_asd(const BinaryMask& a, const BinaryMask& b) {
  const auto ba = oracle_boundary(a);
  const auto bb = oracle_boundary(b);
  if (ba.empty() && bb.empty()) return 0.0;
  if (ba.empty() || bb.empty()) return std::sqrt(double(a.height() * a.height() + a.width() * a.width()));
  double sa = 0.0, sb = 0.0;
  for (const auto& p : ba) sa += oracle_nearest(p, bb);
  for (const auto& p : bb) sb += oracle_nearest(p, ba);
  return 0.5 * (sa / ba.size() + sb / bb.size());
}

inline double oracle_f_boundary(const BinaryMask& a, const BinaryMask& b, double tol) {
  const auto ba = oracle_boundary(a);
  const auto bb = oracle_boundary(b);
  if (ba.empty() && bb.empty()) return 1.0;
  if (ba.empty() || bb.empty()) return 0.0;
  int pa = 0, pb = 0;
  for (const auto& p : ba) pa += oracle_nearest(p, bb) <= tol + 1e-12;
  for (const auto& p : bb) pb += oracle_nearest(p, ba) <= tol + 1e-12;
  const double precision = double(pa) / ba.size();
  const double recall = double(pb) / bb.size();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

// --- NMS oracle -------------------------------------------------------------
// Exhaustive rescan each round: the best pixel in the box that is farther than
// r (Chebyshev) from the click and from every accepted point.
inline std::vector<Pixel> oracle_nms(const DenseMap& map, Pixel click, const Box& box, int r, int max_aux) {
  std::vector<Pixel> taken;
  auto far_enough = [&](int x, int y) {
    if (std::max(std::abs(x - click.x), std::abs(y - click.y)) <= r) return false;
    for (const auto& p : taken) {
      if (std::max(std::abs(x - p.x), std::abs(y - p.y)) <= r) return false;
    }
    return true;
  };
  while (static_cast<int>(taken.size()) < max_aux) {
    bool found = false;
    Pixel best{};
    double best_v = -std::numeric_limits<double>::infinity();
    for (int y = box.y0; y < box.y1; ++y) {
      for (int x = box.x0; x < box.x1; ++x) {
        if (!far_enough(x, y)) continue;
        const double v = map.at(y, x);
        if (v <= -1.0) continue;
        if (!found || v > best_v) {
          found = true;
          best_v = v;
          best = {x, y};
        }
      }
    }
    if (!found) break;
    taken.push_back(best);
  }
  return taken;
}

// --- codec fuzzing ----------------------------------------------------------

// Random shape (rank 1..4, dims 1..6) filled with random finite float32 bit
// patterns, so the payload covers subnormals, signed zeros and extremes.
inline Tensor random_tensor(std::mt19937_64& rng) {
  Tensor t;
  const int rank = 1 + static_cast<int>(rng() % 4);
  std::uint64_t n = 1;
  for (int i = 0; i < rank; ++i) {
    t.shape.push_back(1 + rng() % 6);
    n *= t.shape.back();
  }
  while (t.data.size() < n) {
    const auto bits = static_cast<std::uint32_t>(rng());
    const float f = std::bit_cast<float>(bits);
    if (std::isfinite(f)) t.data.push_back(static_cast<double>(f));
  }
  return t;
}

inline std::size_t header_size(const std::vector<unsigned char>& bytes) {
  std::uint32_t rank = 0;
  std::memcpy(&rank, bytes.data() + 16, 4);
  return 20 + 8 * static_cast<std::size_t>(rank);
}

// Corrupts one header field of an encoded tensor in a way that can never
// leave a valid fixture behind. `kind` selects the field (0..5).
inline std::vector<unsigned char> mutate_header(std::vector<unsigned char> bytes, std::mt19937_64& rng, int kind) {
  auto put_u32 = [&](std::size_t at, std::uint32_t v) { std::memcpy(bytes.data() + at, &v, 4); };
  auto put_u64 = [&](std::size_t at, std::uint64_t v) { std::memcpy(bytes.data() + at, &v, 8); };
  std::uint32_t rank = 0;
  std::memcpy(&rank, bytes.data() + 16, 4);
  switch (kind) {
    case 0:  // magic
      bytes[rng() % 8] ^= static_cast<unsigned char>(1 + rng() % 255);
      break;
    case 1:  // version
      put_u32(8, 2 + static_cast<std::uint32_t>(rng() % 1000));
      break;
    case 2:  // element type
      put_u32(12, rng() % 2 ? 0 : 2 + static_cast<std::uint32_t>(rng() % 1000));
      break;
    case 3:  // rank outside [1, 8]
      put_u32(16, rng() % 2 ? 0 : 9 + static_cast<std::uint32_t>(rng() % 100));
      break;
    case 4: {  // a dimension grows, or becomes zero
      const std::size_t at = 20 + 8 * (rng() % rank);
      std::uint64_t d = 0;
      std::memcpy(&d, bytes.data() + at, 8);
      put_u64(at, rng() % 3 == 0 ? 0 : d + 1 + rng() % 1000);
      break;
    }
    default:  // header cut short
      bytes.resize(rng() % header_size(bytes));
      break;
  }
  return bytes;
}

}  // namespace seedgate::testing
