#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"

namespace seedgate {

struct SimilarityMap {
  DenseMap map;  // scalar, values in [-1, 1]
  Pixel anchor;
};

struct RefineConfig {
  int nms_radius = 6;
  int max_aux = 3;
  // Peaks at or below this value are never accepted. Off by default.
  double similarity_floor = -std::numeric_limits<double>::infinity();

  void validate() const {
    require(nms_radius >= 1, ErrorCode::BadConfig, "NMS radius must be at least 1");
    require(max_aux >= 0 && max_aux <= 3, ErrorCode::BadConfig, "max_aux must lie in [0, 3]");
  }
};

enum class PromptLabel { Positive };

struct PointPrompt {
  Pixel point;
  PromptLabel label = PromptLabel::Positive;
};

struct PromptSet {
  std::vector<PointPrompt> points;  // points[0] is the user click
};

// Cosine of every pixel feature against the feature at the click. Pixels with
// a zero feature vector get -1 and are never picked as peaks.
inline SimilarityMap dense_similarity(const DenseMap& features, Pixel click) {
  require(features.in_bounds(click), ErrorCode::ClickOutOfBounds, "click lies outside the feature grid");
  const auto anchor = features.feature(click.y, click.x);
  const double anchor_norm = norm(anchor);
  require(anchor_norm > 0.0, ErrorCode::ZeroNormAnchor, "feature at the click has zero norm");

  SimilarityMap sim{DenseMap(features.height(), features.width(), 1), click};
  for (int y = 0; y < features.height(); ++y) {
    for (int x = 0; x < features.width(); ++x) {
      const auto f = features.feature(y, x);
      const double n = norm(f);
      sim.map.at(y, x) = n > 0.0 ? std::clamp(dot(anchor, f) / (anchor_norm * n), -1.0, 1.0) : -1.0;
    }
  }
  sim.map.at(click.y, click.x) = 1.0;
  return sim;
}

// Greedy NMS inside `box`: the click's neighbourhood is suppressed up front,
// then the highest remaining pixel is accepted and its Chebyshev r-square
// suppressed until max_aux peaks are found or the box is exhausted. Equal
// values resolve in row-major order. Output is in acceptance order, which is
// descending similarity.
inline std::vector<Pixel> nms_peaks(const SimilarityMap& sim, const Box& box, const RefineConfig& cfg) {
  cfg.validate();
  const auto& map = sim.map;
  require(box.inside(map.height(), map.width()), ErrorCode::BoxOutOfBounds, "NMS box exceeds the map");

  const int bw = box.width();
  const int bh = box.height();
  std::vector<unsigned char> suppressed(static_cast<std::size_t>(bw) * bh, 0);
  auto suppress_around = [&](Pixel p) {
    const int r = cfg.nms_radius;
    for (int y = std::max(box.y0, p.y - r); y <= std::min(box.y1 - 1, p.y + r); ++y) {
      for (int x = std::max(box.x0, p.x - r); x <= std::min(box.x1 - 1, p.x + r); ++x) {
        suppressed[static_cast<std::size_t>(y - box.y0) * bw + (x - box.x0)] = 1;
      }
    }
  };
  suppress_around(sim.anchor);

  std::vector<std::size_t> order(suppressed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto value_of = [&](std::size_t i) {
    return map.at(box.y0 + static_cast<int>(i) / bw, box.x0 + static_cast<int>(i) % bw);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return value_of(a) > value_of(b); });

  std::vector<Pixel> peaks;
  for (std::size_t i : order) {
    if (static_cast<int>(peaks.size()) >= cfg.max_aux) break;
    if (suppressed[i]) continue;
    const double v = value_of(i);
    if (v <= -1.0 || v <= cfg.similarity_floor) break;
    const Pixel p{box.x0 + static_cast<int>(i) % bw, box.y0 + static_cast<int>(i) / bw};
    peaks.push_back(p);
    suppress_around(p);
  }
  return peaks;
}

inline PromptSet assemble_prompts(Pixel click, const std::vector<Pixel>& aux) {
  require(aux.size() <= 3, ErrorCode::TooManyPrompts, "at most three auxiliary prompts are allowed");
  PromptSet set;
  set.points.push_back({click});
  for (const Pixel& p : aux) {
    for (const auto& existing : set.points) {
      require(!(existing.point == p), ErrorCode::DuplicatePoint, "auxiliary prompt repeats an existing point");
    }
    set.points.push_back({p});
  }
  return set;
}

// Feature grids coarser than the frame map cell i to frame pixel stride*i + stride/2.
inline Pixel grid_to_frame(Pixel cell, int stride) {
  return {stride * cell.x + stride / 2, stride * cell.y + stride / 2};
}

inline Pixel frame_to_grid(Pixel p, int stride) { return {p.x / stride, p.y / stride}; }

inline Box frame_box_to_grid(const Box& b, int stride, int grid_h, int grid_w) {
  Box g{b.x0 / stride, b.y0 / stride, (b.x1 + stride - 1) / stride, (b.y1 + stride - 1) / stride};
  g.x1 = std::min(g.x1, grid_w);
  g.y1 = std::min(g.y1, grid_h);
  return g;
}

}  // namespace seedgate
