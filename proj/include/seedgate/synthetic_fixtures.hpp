#pragma once

// Writes small, hand-designed fixture sets plus manifests to disk so the
// stage1 / gate / eval commands can run without any model-side extractor.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedgate/core_maps.hpp"
#include "seedgate/propagation_sim.hpp"
#include "seedgate/tensor_io.hpp"

namespace seedgate::synthetic {

namespace fs = std::filesystem;

// Stage I case: 64x64 frame, click (32, 32), schedule {1.0, 0.6, 0.3}, a
// 4-channel text embedding e0 and per-crop 4x4 token grids with two layers.
//   crop 0: weak semantic match, diffuse uniform attribution
//   crop 1: good match, attribution concentrated on a 2x2 block
//   crop 2: best match, attribution collapsed onto one token
// VFM features live on a 32x32 grid (stride 2). Feature direction rotates
// away from e0 with distance to the nearest of five hot spots: the click
// cell, three cells inside the selected window and one outside it.
struct Stage1Case {
  fs::path manifest;
  Pixel click{32, 32};
  std::vector<Pixel> hot_spots;  // grid cells, click cell first
};

inline constexpr int kCaseTokens = 4;

inline std::vector<double> crop_attribution(int k) {
  std::vector<double> a(kCaseTokens * kCaseTokens, 0.0);
  switch (k) {
    case 0:
      std::fill(a.begin(), a.end(), 0.2);
      break;
    case 1:
      std::fill(a.begin(), a.end(), 0.1);
      for (int y = 1; y <= 2; ++y)
        for (int x = 1; x <= 2; ++x) a[y * kCaseTokens + x] = 1.0;
      break;
    default:
      a[5] = 4.0;
      break;
  }
  return a;
}

inline std::vector<double> crop_embedding(int k) {
  switch (k) {
    case 0: return {0.6, 0.8, 0.0, 0.0};
    case 1: return {0.9, std::sqrt(1.0 - 0.81), 0.0, 0.0};
    default: return {0.95, 0.0, std::sqrt(1.0 - 0.9025), 0.0};
  }
}

inline Stage1Case write_stage1_case(const fs::path& dir) {
  fs::create_directories(dir);
  Stage1Case c;
  c.manifest = dir / "manifest.json";
  c.hot_spots = {{16, 16}, {16, 9}, {23, 22}, {9, 23}, {2, 2}};

  const std::vector<double> schedule{1.0, 0.6, 0.3};
  write_tensor(dir / "text.sgt", Tensor{{4}, {1.0, 0.0, 0.0, 0.0}});

  nlohmann::json crops = nlohmann::json::array();
  const std::uint64_t n = kCaseTokens;
  for (int k = 0; k < 3; ++k) {
    const std::string p = "crop" + std::to_string(k);
    write_tensor(dir / (p + "_emb.sgt"), Tensor{{4}, crop_embedding(k)});
    const auto attribution = crop_attribution(k);
    nlohmann::json layers = nlohmann::json::array();
    for (int l = 0; l < 2; ++l) {
      const std::string lp = p + "_l" + std::to_string(l);
      // Channel 1 carries junk that a zero channel weight removes; layer 1
      // doubles the signal so the layer mean is 1.5x the designed map.
      std::vector<double> values;
      for (std::size_t i = 0; i < attribution.size(); ++i) {
        values.push_back(attribution[i] * (l + 1));
        values.push_back(std::sin(static_cast<double>(i) + k));
      }
      write_tensor(dir / (lp + "_w.sgt"), Tensor{{2}, {1.0, 0.0}});
      write_tensor(dir / (lp + "_aff.sgt"), Tensor{{n, n}, std::vector<double>(n * n, 3.0)});
      write_tensor(dir / (lp + "_v.sgt"), Tensor{{n, n, 2}, values});
      layers.push_back({{"channel_weights", lp + "_w.sgt"}, {"affinities", lp + "_aff.sgt"}, {"values", lp + "_v.sgt"}});
    }
    crops.push_back({{"embedding", p + "_emb.sgt"}, {"layers", layers}});
  }

  const int g = 32;
  DenseMap vfm(g, g, 3);
  for (int y = 0; y < g; ++y) {
    for (int x = 0; x < g; ++x) {
      double dmin = 1e9;
      for (const Pixel& s : c.hot_spots) dmin = std::min(dmin, std::hypot(x - s.x, y - s.y));
      const double theta = std::min(0.12 * dmin, 1.5);
      vfm.at(y, x, 0) = std::cos(theta);
      vfm.at(y, x, 1) = std::sin(theta);
      vfm.at(y, x, 2) = 0.0;
    }
  }
  write_tensor(dir / "vfm.sgt", from_dense_map(vfm));

  // Frames for the gate: three frames whose masks cover the target (e0) and
  // one frame (index 2) whose mask lands on background (e1).
  nlohmann::json frames = nlohmann::json::array();
  for (int t = 0; t < 4; ++t) {
    DenseMap feat(8, 8, 2);
    DenseMap mask(8, 8, 1);
    DenseMap gt(8, 8, 1);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const bool target = x >= 2 && x < 5 && y >= 2 && y < 5;
        feat.at(y, x, 0) = target ? 1.0 : 0.0;
        feat.at(y, x, 1) = target ? 0.0 : 1.0;
        gt.at(y, x) = target ? 1.0 : 0.0;
        const bool predicted = t == 2 ? (x >= 5 && y >= 5) : target;
        mask.at(y, x) = predicted ? 1.0 : 0.0;
      }
    }
    const std::string tp = "frame" + std::to_string(t);
    write_tensor(dir / (tp + "_feat.sgt"), from_dense_map(feat));
    write_tensor(dir / (tp + "_mask.sgt"), from_dense_map(mask));
    write_tensor(dir / (tp + "_gt.sgt"), from_dense_map(gt));
    frames.push_back({{"features", tp + "_feat.sgt"}, {"mask", tp + "_mask.sgt"}, {"gt_mask", tp + "_gt.sgt"}});
  }

  nlohmann::json doc{
      {"schema_version", 1},
      {"frame_size", {64, 64}},
      {"interaction", {{"click", {c.click.x, c.click.y}}, {"category", "left ventricle"}}},
      {"frames", frames},
      {"stage1",
       {{"schedule", schedule}, {"text_embedding", "text.sgt"}, {"vfm_features", "vfm.sgt"}, {"crops", crops}}},
      {"config", {{"epsilon", 1e-8}, {"nms_radius", 6}, {"max_aux", 3}, {"tau", 0.5}, {"bank_capacity", 7}}},
      {"provenance", {{"vlm", "synthetic"}, {"vfm", "synthetic"}, {"segmentor", "synthetic"}, {"stride", 2}}}};
  write_file_atomic(c.manifest, doc.dump(2) + "\n");
  return c;
}

}  // namespace seedgate::synthetic
