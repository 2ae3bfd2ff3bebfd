#pragma once

// Stage I scale selection. A pyramid of click-centred crops is scored on two
// channels: semantic agreement between crop and category embeddings, and the
// S.E.E.D. spatial score (energy density times normalized entropy) of the
// text-conditioned attribution map. The crop maximizing the product of the
// min-max normalized channels becomes the observation window.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"

namespace seedgate {

struct InteractionSpec {
  Pixel click;
  std::string category;

  void validate(int frame_h, int frame_w) const {
    require(click.x >= 0 && click.y >= 0 && click.x < frame_w && click.y < frame_h,
            ErrorCode::ClickOutOfBounds, "click lies outside the frame");
    require(!category.empty(), ErrorCode::InvalidInteraction, "category name is empty");
  }
};

struct FrameSize {
  int height = 0;
  int width = 0;
};

inline const std::vector<double>& default_scale_schedule() {
  static const std::vector<double> schedule{1.0, 0.8, 0.6, 0.4, 0.2};
  return schedule;
}

inline void validate_schedule(const std::vector<double>& schedule) {
  require(!schedule.empty(), ErrorCode::BadSchedule, "scale schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double s = schedule[k];
    require(std::isfinite(s) && s > 0.0 && s <= 1.0, ErrorCode::BadSchedule,
            "scale factors must lie in (0, 1]");
    if (k > 0) {
      require(s < schedule[k - 1], ErrorCode::BadSchedule, "scale factors must strictly decrease");
    }
  }
}

struct CropPyramid {
  std::vector<double> scales;
  std::vector<Box> boxes;
};

inline constexpr int kMinCropSide = 8;

inline Box centered_box(FrameSize frame, Pixel center, double sigma) {
  auto side_for = [](double sigma, int extent) {
    const int side = static_cast<int>(std::lround(sigma * extent));
    return std::min(extent, std::max(kMinCropSide, side));
  };
  const int side_w = side_for(sigma, frame.width);
  const int side_h = side_for(sigma, frame.height);
  // Translate rather than shrink at borders so the crop keeps its area.
  const int x0 = std::clamp(center.x - side_w / 2, 0, frame.width - side_w);
  const int y0 = std::clamp(center.y - side_h / 2, 0, frame.height - side_h);
  return Box{x0, y0, x0 + side_w, y0 + side_h};
}

inline CropPyramid build_crop_pyramid(FrameSize frame, Pixel click, const std::vector<double>& schedule) {
  require(frame.height > 0 && frame.width > 0, ErrorCode::BadConfig, "frame size must be positive");
  require(click.x >= 0 && click.y >= 0 && click.x < frame.width && click.y < frame.height,
          ErrorCode::ClickOutOfBounds, "click lies outside the frame");
  validate_schedule(schedule);
  CropPyramid pyramid;
  pyramid.scales = schedule;
  pyramid.boxes.reserve(schedule.size());
  for (double sigma : schedule) pyramid.boxes.push_back(centered_box(frame, click, sigma));
  return pyramid;
}

inline double semantic_score(const EmbeddingVector& crop_embedding, const EmbeddingVector& text_embedding) {
  return clamp_nonneg(cosine(crop_embedding, text_embedding));
}

// Spatial affinity normalization: per-crop min-max over the token affinities.
inline std::vector<double> psi_normalize(std::span<const double> affinities) {
  return minmax_normalize(affinities);
}

// Inputs for one layer's attribution map. Gradients with respect to the class
// token's attention output arrive precomputed as channel_weights.
struct AttributionIngredients {
  int layer_id = 0;
  std::vector<double> channel_weights;  // d_c
  DenseMap affinities;                  // h x w x 1, raw class-query / key scores
  DenseMap values;                      // h x w x d_c
};

inline DenseMap layer_attribution(const AttributionIngredients& ing) {
  const auto& values = ing.values;
  require(ing.affinities.channels() == 1, ErrorCode::ShapeMismatch, "affinities must be a scalar grid");
  require(values.same_grid(ing.affinities), ErrorCode::ShapeMismatch,
          "values and affinities cover different token grids");
  require(static_cast<std::size_t>(values.channels()) == ing.channel_weights.size(), ErrorCode::ShapeMismatch,
          "channel weight count does not match value channels");
  require(!ing.affinities.empty(), ErrorCode::EmptyInput, "empty token grid");

  const std::vector<double> spatial = psi_normalize(ing.affinities.data());
  DenseMap out(values.height(), values.width(), 1);
  const std::size_t n = values.pixels();
  const std::span<const double> weights(ing.channel_weights);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> v(values.data().data() + i * weights.size(), weights.size());
    out[i] = clamp_nonneg(spatial[i] * dot(weights, v));
  }
  return out;
}

inline DenseMap aggregate_layers(const std::vector<DenseMap>& maps) {
  require(!maps.empty(), ErrorCode::EmptyInput, "no layer maps to aggregate");
  DenseMap out(maps.front().height(), maps.front().width(), maps.front().channels());
  for (const auto& m : maps) {
    require(m.same_grid(out) && m.channels() == out.channels(), ErrorCode::ShapeMismatch,
            "layer maps have different shapes");
    for (std::size_t i = 0; i < m.size(); ++i) out[i] += m[i];
  }
  const double inv = 1.0 / static_cast<double>(maps.size());
  for (double& v : out.data()) v *= inv;
  return out;
}

inline double seed_score(const DenseMap& attribution, StabilityConfig eps = {}) {
  require(attribution.pixels() >= 2, ErrorCode::SinglePixel, "S.E.E.D. needs at least two tokens");
  const DenseMap p = distribution_from_map(attribution, eps);
  return energy_density(attribution) * normalized_entropy(p);
}

struct ScaleCandidate {
  int k = 0;
  double sigma = 1.0;
  Box box;
  EmbeddingVector crop_embedding;
  double s_sem = 0.0;
  DenseMap attribution;
  double s_spa = 0.0;
};

struct NormalizedScores {
  double sem = 0.0;
  double spa = 0.0;
  double product = 0.0;
};

struct ScaleSelection {
  int k_star = 0;  // 0-based index into the candidate list
  Box box;
  std::vector<NormalizedScores> normalized;
};

// Ties resolve toward the smaller index, i.e. the larger context.
inline ScaleSelection select_scale(const std::vector<ScaleCandidate>& candidates) {
  require(candidates.size() >= 2, ErrorCode::TooFewCandidates, "scale selection needs at least two candidates");
  std::vector<double> sem;
  std::vector<double> spa;
  for (const auto& c : candidates) {
    sem.push_back(c.s_sem);
    spa.push_back(c.s_spa);
  }
  const auto sem_hat = minmax_normalize(sem);
  const auto spa_hat = minmax_normalize(spa);

  ScaleSelection sel;
  double best = -1.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double product = sem_hat[k] * spa_hat[k];
    sel.normalized.push_back({sem_hat[k], spa_hat[k], product});
    if (product > best) {
      best = product;
      sel.k_star = static_cast<int>(k);
    }
  }
  sel.box = candidates[static_cast<std::size_t>(sel.k_star)].box;
  return sel;
}

struct CropFixture {
  EmbeddingVector embedding;
  std::vector<AttributionIngredients> layers;
};

struct Stage1Inputs {
  FrameSize frame;
  InteractionSpec interaction;
  std::vector<double> schedule = default_scale_schedule();
  EmbeddingVector text_embedding;
  std::vector<CropFixture> crops;  // one per schedule entry
  StabilityConfig eps;
};

struct Stage1Result {
  CropPyramid pyramid;
  std::vector<ScaleCandidate> candidates;
  ScaleSelection selection;
};

inline ScaleCandidate score_candidate(int k, double sigma, const Box& box, const CropFixture& crop,
                                      const EmbeddingVector& text_embedding, StabilityConfig eps) {
  require(!crop.layers.empty(), ErrorCode::MissingFixture,
          "crop " + std::to_string(k) + " has no attribution layers");
  const std::size_t channels = crop.layers.front().channel_weights.size();
  std::vector<DenseMap> layer_maps;
  layer_maps.reserve(crop.layers.size());
  for (const auto& layer : crop.layers) {
    require(layer.channel_weights.size() == channels, ErrorCode::ShapeMismatch,
            "value width differs across layers of one crop");
    layer_maps.push_back(layer_attribution(layer));
  }

  ScaleCandidate c;
  c.k = k;
  c.sigma = sigma;
  c.box = box;
  c.crop_embedding = crop.embedding;
  c.s_sem = semantic_score(crop.embedding, text_embedding);
  c.attribution = aggregate_layers(layer_maps);
  c.s_spa = seed_score(c.attribution, eps);
  return c;
}

inline Stage1Result run_stage1(const Stage1Inputs& in) {
  in.interaction.validate(in.frame.height, in.frame.width);
  Stage1Result result;
  result.pyramid = build_crop_pyramid(in.frame, in.interaction.click, in.schedule);
  require(in.crops.size() == in.schedule.size(), ErrorCode::MissingFixture,
          "expected " + std::to_string(in.schedule.size()) + " crop fixtures, got " +
              std::to_string(in.crops.size()));
  for (std::size_t k = 0; k < in.crops.size(); ++k) {
    result.candidates.push_back(score_candidate(static_cast<int>(k), in.schedule[k], result.pyramid.boxes[k],
                                                in.crops[k], in.text_embedding, in.eps));
  }
  result.selection = select_scale(result.candidates);
  return result;
}

}  // namespace seedgate
