#pragma once

// Segmentation metrics: Dice, symmetric average surface distance and the
// boundary F-measure. Boundary distances use an exact squared Euclidean
// distance transform (lower envelope of parabolas, separable in rows and
// columns), so results match a nearest-pair search to rounding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"

namespace seedgate {

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width) : h_(height), w_(width), data_(static_cast<std::size_t>(height) * width, 0) {}
  BinaryMask(int height, int width, std::vector<std::uint8_t> data) : h_(height), w_(width), data_(std::move(data)) {
    require(data_.size() == static_cast<std::size_t>(height) * width, ErrorCode::ShapeMismatch,
            "mask data length does not match h*w");
    for (auto v : data_) require(v <= 1, ErrorCode::MaskOutOfRange, "binary mask entries must be 0 or 1");
  }

  // Probability maps binarize at M > threshold.
  static BinaryMask from_probabilities(const DenseMap& prob, double threshold = 0.5) {
    require(prob.channels() == 1, ErrorCode::ShapeMismatch, "expected a scalar mask");
    BinaryMask m(prob.height(), prob.width());
    for (std::size_t i = 0; i < prob.size(); ++i) m.data_[i] = prob[i] > threshold ? 1 : 0;
    return m;
  }

  int height() const noexcept { return h_; }
  int width() const noexcept { return w_; }
  bool same_shape(const BinaryMask& o) const noexcept { return h_ == o.h_ && w_ == o.w_; }
  bool get(int y, int x) const { return data_[static_cast<std::size_t>(y) * w_ + x] != 0; }
  void set(int y, int x, bool v) { data_[static_cast<std::size_t>(y) * w_ + x] = v ? 1 : 0; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1)); }
  double diagonal() const noexcept { return std::hypot(static_cast<double>(h_), static_cast<double>(w_)); }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<std::uint8_t> data_;
};

inline double dice(const BinaryMask& pred, const BinaryMask& gt) {
  require(pred.same_shape(gt), ErrorCode::ShapeMismatch, "dice of masks with different shapes");
  std::size_t inter = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    inter += pred.data()[i] & gt.data()[i];
    total += pred.data()[i] + gt.data()[i];
  }
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

// Foreground pixels with a background 4-neighbour; outside the image counts as
// background. Returned in row-major order.
inline std::vector<Pixel> boundary_pixels(const BinaryMask& m) {
  std::vector<Pixel> out;
  auto bg = [&](int y, int x) { return y < 0 || x < 0 || y >= m.height() || x >= m.width() || !m.get(y, x); };
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.get(y, x)) continue;
      if (bg(y - 1, x) || bg(y + 1, x) || bg(y, x - 1) || bg(y, x + 1)) out.push_back({x, y});
    }
  }
  return out;
}

namespace detail {

inline constexpr double kFar = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of sampled function f (Felzenszwalb & Huttenlocher).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kFar) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kFar;
      z[1] = kFar;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {  // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kFar;
      z[1] = kFar;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kFar);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace detail

// Squared Euclidean distance from every pixel to the nearest pixel of `sites`.
inline std::vector<double> squared_distance_transform(int height, int width, const std::vector<Pixel>& sites) {
  std::vector<double> grid(static_cast<std::size_t>(height) * width, detail::kFar);
  for (const Pixel& p : sites) grid[static_cast<std::size_t>(p.y) * width + p.x] = 0.0;
  const int n = std::max(height, width);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  f.resize(height);
  d.resize(height);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[y] = grid[static_cast<std::size_t>(y) * width + x];
    detail::edt_1d(f, d, v, z);
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = d[y];
  }
  f.resize(width);
  d.resize(width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) f[x] = grid[static_cast<std::size_t>(y) * width + x];
    detail::edt_1d(f, d, v, z);
    for (int x = 0; x < width; ++x) grid[static_cast<std::size_t>(y) * width + x] = d[x];
  }
  return grid;
}

namespace detail {

inline double mean_directed_distance(const std::vector<Pixel>& from, const std::vector<double>& sq_dt, int width) {
  double total = 0.0;
  for (const Pixel& p : from) total += std::sqrt(sq_dt[static_cast<std::size_t>(p.y) * width + p.x]);
  return total / static_cast<double>(from.size());
}

inline std::size_t count_within(const std::vector<Pixel>& from, const std::vector<double>& sq_dt, int width,
                                double tol) {
  const double tol_sq = tol * tol;
  std::size_t n = 0;
  for (const Pixel& p : from) n += sq_dt[static_cast<std::size_t>(p.y) * width + p.x] <= tol_sq ? 1 : 0;
  return n;
}

}  // namespace detail

// Symmetric ASD in pixels. No boundary on either side gives 0; a boundary on
// only one side gives the image diagonal as a finite failure value.
inline double average_surface_distance(const BinaryMask& pred, const BinaryMask& gt) {
  require(pred.same_shape(gt), ErrorCode::ShapeMismatch, "ASD of masks with different shapes");
  const auto bp = boundary_pixels(pred);
  const auto bg = boundary_pixels(gt);
  if (bp.empty() && bg.empty()) return 0.0;
  if (bp.empty() || bg.empty()) return pred.diagonal();
  const int h = pred.height();
  const int w = pred.width();
  const auto dt_gt = squared_distance_transform(h, w, bg);
  const auto dt_pred = squared_distance_transform(h, w, bp);
  return 0.5 * (detail::mean_directed_distance(bp, dt_gt, w) + detail::mean_directed_distance(bg, dt_pred, w));
}

// 0.8% of the image diagonal, rounded up.
inline double default_boundary_tolerance(int height, int width) {
  return std::ceil(0.008 * std::hypot(static_cast<double>(height), static_cast<double>(width)));
}

inline double f_boundary(const BinaryMask& pred, const BinaryMask& gt, double tol) {
  require(pred.same_shape(gt), ErrorCode::ShapeMismatch, "F-boundary of masks with different shapes");
  require(tol >= 0.0, ErrorCode::BadConfig, "boundary tolerance must be non-negative");
  const auto bp = boundary_pixels(pred);
  const auto bg = boundary_pixels(gt);
  if (bp.empty() && bg.empty()) return 1.0;
  if (bp.empty() || bg.empty()) return 0.0;
  const int w = pred.width();
  const auto dt_gt = squared_distance_transform(pred.height(), w, bg);
  const auto dt_pred = squared_distance_transform(pred.height(), w, bp);
  const double precision =
      static_cast<double>(detail::count_within(bp, dt_gt, w, tol)) / static_cast<double>(bp.size());
  const double recall = static_cast<double>(detail::count_within(bg, dt_pred, w, tol)) / static_cast<double>(bg.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

inline double f_boundary(const BinaryMask& pred, const BinaryMask& gt) {
  return f_boundary(pred, gt, default_boundary_tolerance(pred.height(), pred.width()));
}

struct FrameMetrics {
  double dice = 0.0;
  double asd = 0.0;
  double f_boundary = 0.0;
};

inline FrameMetrics evaluate_frame(const BinaryMask& pred, const BinaryMask& gt) {
  return {dice(pred, gt), average_surface_distance(pred, gt), f_boundary(pred, gt)};
}

struct MetricsReport {
  std::vector<FrameMetrics> frames;
  FrameMetrics mean;

  void add(const FrameMetrics& m) {
    frames.push_back(m);
    mean = {};
    for (const auto& f : frames) {
      mean.dice += f.dice;
      mean.asd += f.asd;
      mean.f_boundary += f.f_boundary;
    }
    const double n = static_cast<double>(frames.size());
    mean.dice /= n;
    mean.asd /= n;
    mean.f_boundary /= n;
  }
};

}  // namespace seedgate
