#pragma once

// Dense-map and vector primitives shared by every stage of the pipeline:
// cosine similarity, min-max normalization, entropy / energy statistics over
// scalar maps, and masked average pooling of feature grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seedgate/error.hpp"

namespace seedgate {

enum class EmbeddingSource { ImageCrop, TextCategory, Other };

struct EmbeddingVector {
  std::vector<double> values;
  EmbeddingSource source = EmbeddingSource::Other;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> v, EmbeddingSource s = EmbeddingSource::Other)
      : values(std::move(v)), source(s) {}

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

struct StabilityConfig {
  double epsilon = 1e-8;

  void validate() const {
    require(epsilon > 0.0 && std::isfinite(epsilon), ErrorCode::BadConfig,
            "epsilon must be a finite positive number");
  }
};

// Pixel coordinates: x is the column, y is the row.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

inline int chebyshev(Pixel a, Pixel b) noexcept {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

// Half-open pixel box [x0, x1) x [y0, y1).
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  bool contains(Pixel p) const noexcept { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
  bool inside(int frame_h, int frame_w) const noexcept {
    return x0 >= 0 && y0 >= 0 && x1 <= frame_w && y1 <= frame_h && x0 < x1 && y0 < y1;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

// Row-major h x w x d grid, channel index fastest. Scalar maps have d == 1.
class DenseMap {
 public:
  DenseMap() = default;

  DenseMap(int height, int width, int channels = 1, double fill = 0.0)
      : h_(height), w_(width), d_(channels) {
    require(height >= 0 && width >= 0 && channels >= 1, ErrorCode::ShapeMismatch,
            "DenseMap dimensions must be non-negative with at least one channel");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  DenseMap(int height, int width, int channels, std::vector<double> data)
      : h_(height), w_(width), d_(channels), data_(std::move(data)) {
    require(height >= 0 && width >= 0 && channels >= 1, ErrorCode::ShapeMismatch,
            "DenseMap dimensions must be non-negative with at least one channel");
    require(data_.size() == static_cast<std::size_t>(height) * width * channels,
            ErrorCode::ShapeMismatch, "DenseMap data length does not match h*w*d");
    for (double v : data_) require(std::isfinite(v), ErrorCode::NonFinite, "DenseMap entry is not finite");
  }

  static DenseMap scalar(int height, int width, std::vector<double> data) {
    return DenseMap(height, width, 1, std::move(data));
  }

  int height() const noexcept { return h_; }
  int width() const noexcept { return w_; }
  int channels() const noexcept { return d_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(h_) * w_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool same_grid(const DenseMap& o) const noexcept { return h_ == o.h_ && w_ == o.w_; }
  bool in_bounds(Pixel p) const noexcept { return p.x >= 0 && p.y >= 0 && p.x < w_ && p.y < h_; }

  double& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<const double> feature(int y, int x) const {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(d_)};
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  friend bool operator==(const DenseMap&, const DenseMap&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * w_ + x) * d_ + c;
  }

  int h_ = 0;
  int w_ = 0;
  int d_ = 1;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double cosine(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch,
          "cosine of vectors with lengths " + std::to_string(a.size()) + " and " +
              std::to_string(b.size()));
  require(!a.empty(), ErrorCode::EmptyInput, "cosine of empty vectors");
  const double na = norm(a);
  const double nb = norm(b);
  require(na > 0.0 && nb > 0.0, ErrorCode::ZeroNorm, "cosine with a zero-norm vector");
  // Rounding can push |cos| a hair past 1 for (anti)parallel inputs.
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

inline double clamp_nonneg(double x) noexcept { return x > 0.0 ? x : 0.0; }

// Affine map onto [0, 1]. An all-equal list has no spread and maps to all
// ones, so a degenerate score channel drops out of a product of scores.
inline std::vector<double> minmax_normalize(std::span<const double> values) {
  require(!values.empty(), ErrorCode::EmptyInput, "min-max normalization of an empty list");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 1.0);
  if (hi == lo) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / span;
  return out;
}

inline DenseMap distribution_from_map(const DenseMap& attribution, StabilityConfig eps = {}) {
  require(attribution.channels() == 1, ErrorCode::ShapeMismatch, "expected a scalar map");
  double total = 0.0;
  for (double v : attribution.data()) {
    require(v >= 0.0, ErrorCode::NegativeEntry, "attribution maps must be non-negative");
    total += v;
  }
  DenseMap out = attribution;
  const double denom = total + eps.epsilon;
  if (denom == 0.0) return out;  // all-zero map with epsilon == 0
  for (double& v : out.data()) v /= denom;
  return out;
}

// -sum P log P / log N, natural log throughout; zero-probability terms add 0.
inline double normalized_entropy(const DenseMap& distribution) {
  require(distribution.channels() == 1, ErrorCode::ShapeMismatch, "expected a scalar map");
  const std::size_t n = distribution.pixels();
  require(n >= 2, ErrorCode::SinglePixel, "normalized entropy needs at least two tokens");
  double h = 0.0;
  for (double p : distribution.data()) {
    require(p >= 0.0, ErrorCode::NegativeEntry, "probabilities must be non-negative");
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(n)), 0.0, 1.0);
}

inline double energy_density(const DenseMap& attribution) {
  require(attribution.channels() == 1, ErrorCode::ShapeMismatch, "expected a scalar map");
  require(!attribution.empty(), ErrorCode::EmptyInput, "energy density of an empty map");
  double total = 0.0;
  for (double v : attribution.data()) total += v;
  return total / static_cast<double>(attribution.pixels());
}

inline double mask_mass(const DenseMap& mask) {
  double total = 0.0;
  for (double m : mask.data()) total += m;
  return total;
}

// sum_x M(x) F(x) / (sum_x M(x) + eps), per channel.
inline EmbeddingVector masked_average_pool(const DenseMap& features, const DenseMap& mask,
                                           StabilityConfig eps = {}) {
  require(mask.channels() == 1 && features.same_grid(mask), ErrorCode::ShapeMismatch,
          "mask and feature grid disagree");
  const int d = features.channels();
  std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
  double mass = 0.0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const double m = mask.at(y, x);
      require(m >= 0.0 && m <= 1.0, ErrorCode::MaskOutOfRange, "mask probabilities must lie in [0, 1]");
      if (m == 0.0) continue;
      mass += m;
      auto f = features.feature(y, x);
      for (int c = 0; c < d; ++c) acc[c] += m * f[c];
    }
  }
  const double denom = mass + eps.epsilon;
  if (denom > 0.0) {
    for (double& a : acc) a /= denom;
  }
  return EmbeddingVector(std::move(acc));
}

}  // namespace seedgate
