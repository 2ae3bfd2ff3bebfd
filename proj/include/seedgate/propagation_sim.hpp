#pragma once

// Desk-scale propagation harness. A synthetic feature video (a disc carrying a
// target signature on a background signature, with an optional window where
// the disc's appearance is replaced by a corruption signature) is segmented by
// a descriptor-matching stand-in for a memory-based segmentor. Only the memory
// write policy differs between the greedy and gated runs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"
#include "seedgate/memory_gate.hpp"
#include "seedgate/metrics.hpp"
#include "seedgate/prompt_refine.hpp"

namespace seedgate {

// 64-bit LCG (Knuth MMIX constants). Each draw advances the state once and
// uses its top 53 bits as a double in [0, 1).
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct Disc {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;

  bool contains(int x, int y) const noexcept {
    const double dx = x - cx;
    const double dy = y - cy;
    return dx * dx + dy * dy <= radius * radius;
  }
};

struct FrameWindow {
  int first = 0;
  int last = 0;  // inclusive

  bool contains(int t) const noexcept { return t >= first && t <= last; }
};

struct SynthConfig {
  int frames = 40;
  int height = 24;
  int width = 24;
  int channels = 8;
  std::vector<Disc> trajectory;  // one per frame
  EmbeddingVector target_signature;
  EmbeddingVector background_signature;
  EmbeddingVector corruption_signature;
  std::optional<FrameWindow> corruption;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(frames >= 1 && height >= 1 && width >= 1 && channels >= 1, ErrorCode::BadConfig,
            "frame count and grid dimensions must be positive");
    require(static_cast<int>(trajectory.size()) == frames, ErrorCode::BadConfig,
            "trajectory needs one disc per frame");
    for (const auto& d : trajectory) {
      require(d.radius >= 0.0 && std::isfinite(d.radius), ErrorCode::BadConfig, "disc radius must be >= 0");
      const int x = static_cast<int>(std::lround(d.cx));
      const int y = static_cast<int>(std::lround(d.cy));
      require(x >= 0 && y >= 0 && x < width && y < height && d.contains(x, y), ErrorCode::BadConfig,
              "disc centre must fall on a pixel inside the grid");
    }
    const std::size_t d = static_cast<std::size_t>(channels);
    const EmbeddingVector* sigs[] = {&target_signature, &background_signature, &corruption_signature};
    for (const auto* s : sigs) {
      require(s->size() == d, ErrorCode::BadConfig, "signature length must equal the channel count");
      require(norm(s->values) > 0.0, ErrorCode::BadConfig, "signatures must be nonzero");
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        require(std::abs(cosine(*sigs[i], *sigs[j])) < 1.0 - 1e-12, ErrorCode::BadConfig,
                "signatures must be pairwise non-parallel");
      }
    }
    if (corruption) {
      require(corruption->first >= 1 && corruption->last <= frames - 1 && corruption->first <= corruption->last,
              ErrorCode::BadConfig, "corruption window must lie inside [1, T-1]");
    }
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), ErrorCode::BadConfig, "noise sigma must be >= 0");
  }
};

inline EmbeddingVector basis_vector(int dim, int axis) {
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  v[static_cast<std::size_t>(axis)] = 1.0;
  return EmbeddingVector(std::move(v));
}

inline std::vector<Disc> linear_trajectory(int frames, Disc start, Disc end) {
  std::vector<Disc> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const double a = frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.0;
    out.push_back({start.cx + a * (end.cx - start.cx), start.cy + a * (end.cy - start.cy),
                   start.radius + a * (end.radius - start.radius)});
  }
  return out;
}

// 40 frames on a 24x24x8 grid; a small target (radius 2.5) drifts left to
// right, orthogonal signatures, 2% noise and a corrupted appearance over
// frames 10-17.
inline SynthConfig reference_corrupted_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.frames = 40;
  cfg.height = 24;
  cfg.width = 24;
  cfg.channels = 8;
  cfg.trajectory = linear_trajectory(cfg.frames, {9.0, 12.0, 2.5}, {15.0, 12.0, 2.5});
  cfg.target_signature = basis_vector(cfg.channels, 0);
  cfg.background_signature = basis_vector(cfg.channels, 1);
  cfg.corruption_signature = basis_vector(cfg.channels, 2);
  cfg.corruption = FrameWindow{10, 17};
  cfg.noise_sigma = 0.02;
  cfg.seed = seed;
  return cfg;
}

struct SynthFrame {
  DenseMap features;
  BinaryMask gt_mask;
};

// Noise is uniform with standard deviation noise_sigma, one draw per
// element in frame, row, column, channel order.
inline std::vector<SynthFrame> synth_sequence(const SynthConfig& cfg) {
  cfg.validate();
  Lcg64 rng(cfg.seed);
  const double half_width = cfg.noise_sigma * std::sqrt(3.0);
  std::vector<SynthFrame> frames;
  frames.reserve(static_cast<std::size_t>(cfg.frames));
  for (int t = 0; t < cfg.frames; ++t) {
    const Disc& disc = cfg.trajectory[static_cast<std::size_t>(t)];
    const bool corrupted = cfg.corruption && cfg.corruption->contains(t);
    SynthFrame f{DenseMap(cfg.height, cfg.width, cfg.channels), BinaryMask(cfg.height, cfg.width)};
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        const bool inside = disc.contains(x, y);
        f.gt_mask.set(y, x, inside);
        const EmbeddingVector& sig =
            inside ? (corrupted ? cfg.corruption_signature : cfg.target_signature) : cfg.background_signature;
        for (int c = 0; c < cfg.channels; ++c) {
          const double noise = half_width * (2.0 * rng.uniform() - 1.0);
          f.features.at(y, x, c) = sig[static_cast<std::size_t>(c)] + noise;
        }
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

// Stand-in decoder: c(x) = clamp_nonneg(max_b cos(F(x), f_b)) over bank
// descriptors, optionally passed through a logistic centred at 0.5 with the
// given temperature. Temperature 0 returns c(x) itself; with it, background
// pixels keep noise-sized mask weights that feed back through the pooled
// descriptors.
struct StandinConfig {
  double decoder_temperature = 0.05;

  void validate() const {
    require(std::isfinite(decoder_temperature) && decoder_temperature >= 0.0, ErrorCode::BadConfig,
            "decoder temperature must be >= 0");
  }
};

inline DenseMap standin_predict(const DenseMap& features, const MemoryBank& bank, const StandinConfig& standin = {}) {
  standin.validate();
  const double temperature = standin.decoder_temperature;
  require(bank.size() > 0, ErrorCode::EmptyBank, "memory bank is empty");
  std::vector<std::span<const double>> descs;
  std::vector<double> norms;
  for (const auto& e : bank.entries()) {
    require(static_cast<int>(e.descriptor.size()) == features.channels(), ErrorCode::LengthMismatch,
            "bank descriptor length differs from feature channels");
    descs.emplace_back(e.descriptor.values);
    norms.push_back(norm(e.descriptor.values));
  }
  DenseMap mask(features.height(), features.width(), 1);
  for (int y = 0; y < features.height(); ++y) {
    for (int x = 0; x < features.width(); ++x) {
      const auto f = features.feature(y, x);
      const double nf = norm(f);
      if (nf == 0.0) continue;
      double best = 0.0;
      for (std::size_t b = 0; b < descs.size(); ++b) {
        if (norms[b] == 0.0) continue;
        best = std::max(best, dot(f, descs[b]) / (nf * norms[b]));
      }
      best = std::min(best, 1.0);
      mask.at(y, x) = temperature > 0.0 ? 1.0 / (1.0 + std::exp(-(best - 0.5) / temperature)) : best;
    }
  }
  return mask;
}

// Stand-in for the segmentor's first-frame decoder: a pixel is foreground when
// its best cosine to any prompt pixel's feature exceeds 0.5.
inline constexpr double kPromptMaskThreshold = 0.5;

inline DenseMap mask_from_prompts(const DenseMap& features, const PromptSet& prompts) {
  require(!prompts.points.empty(), ErrorCode::EmptyInput, "prompt set is empty");
  DenseMap mask(features.height(), features.width(), 1);
  for (const auto& pp : prompts.points) {
    const SimilarityMap sim = dense_similarity(features, pp.point);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (sim.map[i] > kPromptMaskThreshold) mask[i] = 1.0;
    }
  }
  return mask;
}

enum class Policy { Greedy, Gated };

constexpr std::string_view to_string(Policy p) noexcept { return p == Policy::Greedy ? "greedy" : "gated"; }

struct BankWrite {
  int frame_index = 0;
  double g = 0.0;  // cosine to the anchor at write time
};

struct PolicyReport {
  Policy policy = Policy::Greedy;
  double tau = 0.5;
  MetricsReport metrics;               // one row per frame, frame 0 included
  std::vector<GateDecision> decisions;  // frames 1..T-1
  std::vector<BankWrite> writes;        // every descriptor the bank absorbed
  std::vector<int> final_bank_frames;
  std::vector<BinaryMask> predictions;

  double rejection_rate() const { return seedgate::rejection_rate(decisions); }
};

// Greedy writes every frame; gated writes only when the gate passes. Both skip
// frames whose predicted mask is empty, since a zero descriptor carries no
// evidence and cannot be compared by cosine.
inline PolicyReport propagate(const std::vector<SynthFrame>& seq, const PromptSet& prompts, Policy policy,
                              const GateConfig& cfg, StabilityConfig eps = {}, const StandinConfig& standin = {}) {
  require(!seq.empty(), ErrorCode::EmptyInput, "sequence has no frames");
  cfg.validate();
  PolicyReport report;
  report.policy = policy;
  report.tau = cfg.tau;

  const DenseMap mask0 = mask_from_prompts(seq[0].features, prompts);
  MemoryBank bank(init_anchor(seq[0].features, mask0, eps), cfg.bank_capacity);
  const EmbeddingVector anchor = bank.anchor().descriptor;
  {
    const BinaryMask pred = BinaryMask::from_probabilities(mask0);
    report.metrics.add(evaluate_frame(pred, seq[0].gt_mask));
    report.predictions.push_back(pred);
  }

  for (std::size_t t = 1; t < seq.size(); ++t) {
    const int frame = static_cast<int>(t);
    const DenseMap prob = standin_predict(seq[t].features, bank, standin);
    const FrameDescriptor fd = compute_descriptor(seq[t].features, prob, eps);
    GateDecision decision = gate_decision(frame, fd.descriptor, anchor, cfg, fd.empty_mask);
    if (policy == Policy::Greedy && !fd.empty_mask) {
      decision.written = true;
      decision.reason = GateReason::Written;
    }
    if (decision.written) {
      bank.write(MemoryEntry{frame, fd.descriptor, false});
      report.writes.push_back({frame, decision.g});
    }
    report.decisions.push_back(decision);

    const BinaryMask pred = BinaryMask::from_probabilities(prob);
    report.metrics.add(evaluate_frame(pred, seq[t].gt_mask));
    report.predictions.push_back(pred);
  }
  for (const auto& e : bank.entries()) report.final_bank_frames.push_back(e.frame_index);
  return report;
}

struct PolicyComparison {
  PolicyReport greedy;
  PolicyReport gated;
  FrameMetrics delta;  // gated minus greedy, on the means
};

inline PolicyComparison compare_policies(const std::vector<SynthFrame>& seq, const PromptSet& prompts,
                                         const GateConfig& cfg, StabilityConfig eps = {},
                                         const StandinConfig& standin = {}) {
  PolicyComparison cmp{propagate(seq, prompts, Policy::Greedy, cfg, eps, standin),
                       propagate(seq, prompts, Policy::Gated, cfg, eps, standin), {}};
  cmp.delta.dice = cmp.gated.metrics.mean.dice - cmp.greedy.metrics.mean.dice;
  cmp.delta.asd = cmp.gated.metrics.mean.asd - cmp.greedy.metrics.mean.asd;
  cmp.delta.f_boundary = cmp.gated.metrics.mean.f_boundary - cmp.greedy.metrics.mean.f_boundary;
  return cmp;
}

// The frame-0 click used when a configuration does not name one: the rounded
// centre of the first disc.
inline Pixel default_click(const SynthConfig& cfg) {
  const Disc& d = cfg.trajectory.front();
  return {static_cast<int>(std::lround(d.cx)), static_cast<int>(std::lround(d.cy))};
}

}  // namespace seedgate
