#pragma once

// Reliability-gated memory. Each predicted frame is summarized by a masked
// average pool of its memory features; the frame is admitted to the bank only
// when that descriptor agrees with the first-frame anchor (cosine strictly
// above tau). A low score skips the write and nothing else.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"

namespace seedgate {

struct GateConfig {
  double tau = 0.5;
  int bank_capacity = 7;  // the pinned conditioning entry plus six recent frames

  // tau = -1 is accepted so the gate can be disabled outright.
  void validate() const {
    require(std::isfinite(tau) && tau >= -1.0 && tau <= 1.0, ErrorCode::BadConfig, "tau must lie in [-1, 1]");
    require(bank_capacity >= 2, ErrorCode::BadConfig, "bank capacity must be at least 2");
  }
};

struct MemoryEntry {
  int frame_index = 0;
  EmbeddingVector descriptor;
  bool pinned = false;
};

class MemoryBank {
 public:
  MemoryBank(MemoryEntry conditioning, int capacity) : capacity_(capacity) {
    require(capacity >= 2, ErrorCode::BadConfig, "bank capacity must be at least 2");
    conditioning.pinned = true;
    entries_.push_back(std::move(conditioning));
  }

  // Appends, then evicts the oldest unpinned entry while over capacity.
  void write(MemoryEntry entry) {
    require(entry.frame_index > entries_.back().frame_index, ErrorCode::OutOfOrderWrite,
            "frame " + std::to_string(entry.frame_index) + " written after frame " +
                std::to_string(entries_.back().frame_index));
    entry.pinned = false;
    entries_.push_back(std::move(entry));
    while (static_cast<int>(entries_.size()) > capacity_) entries_.erase(entries_.begin() + 1);
  }

  const std::vector<MemoryEntry>& entries() const noexcept { return entries_; }
  const MemoryEntry& anchor() const noexcept { return entries_.front(); }
  int capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<MemoryEntry> entries_;
  int capacity_;
};

inline MemoryBank bank_write(MemoryBank bank, MemoryEntry entry) {
  bank.write(std::move(entry));
  return bank;
}

inline MemoryEntry init_anchor(const DenseMap& features, const DenseMap& mask, StabilityConfig eps = {}) {
  require(mask.channels() == 1 && features.same_grid(mask), ErrorCode::ShapeMismatch,
          "mask and feature grid disagree");
  require(mask_mass(mask) > 0.0, ErrorCode::EmptyInitialMask, "first-frame mask is empty");
  return MemoryEntry{0, masked_average_pool(features, mask, eps), true};
}

inline constexpr double kEmptyMaskMass = 1e-6;

struct FrameDescriptor {
  EmbeddingVector descriptor;
  bool empty_mask = false;
};

inline FrameDescriptor compute_descriptor(const DenseMap& features, const DenseMap& mask, StabilityConfig eps = {}) {
  FrameDescriptor out{masked_average_pool(features, mask, eps), false};
  out.empty_mask = mask_mass(mask) < kEmptyMaskMass;
  return out;
}

enum class GateReason { Written, BelowThreshold, EmptyMask };

constexpr std::string_view to_string(GateReason r) noexcept {
  switch (r) {
    case GateReason::Written: return "written";
    case GateReason::BelowThreshold: return "below-threshold";
    case GateReason::EmptyMask: return "empty-mask";
  }
  return "unknown";
}

struct GateDecision {
  int frame_index = 0;
  double g = 0.0;  // 0 when the mask was empty
  bool written = false;
  GateReason reason = GateReason::BelowThreshold;
};

inline GateDecision gate_decision(int frame_index, const EmbeddingVector& descriptor, const EmbeddingVector& anchor,
                                  const GateConfig& cfg, bool empty_mask = false) {
  require(descriptor.size() == anchor.size(), ErrorCode::LengthMismatch, "descriptor and anchor lengths differ");
  GateDecision d{frame_index, 0.0, false, GateReason::EmptyMask};
  if (empty_mask) return d;
  d.g = cosine(descriptor, anchor);
  // tau = -1 disables the gate, including for exactly anti-parallel descriptors.
  d.written = cfg.tau <= -1.0 || d.g > cfg.tau;
  d.reason = d.written ? GateReason::Written : GateReason::BelowThreshold;
  return d;
}

// Pure evaluation of the gate over a descriptor stream (frames 1..n), with no
// feedback from the bank into the descriptors.
inline std::vector<GateDecision> run_gated_stream(const std::vector<EmbeddingVector>& descriptors,
                                                  const EmbeddingVector& anchor, const GateConfig& cfg) {
  require(!descriptors.empty(), ErrorCode::EmptyInput, "descriptor stream is empty");
  std::vector<GateDecision> out;
  out.reserve(descriptors.size());
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    out.push_back(gate_decision(static_cast<int>(i) + 1, descriptors[i], anchor, cfg));
  }
  return out;
}

inline double rejection_rate(const std::vector<GateDecision>& decisions) {
  if (decisions.empty()) return 0.0;
  std::size_t skipped = 0;
  for (const auto& d : decisions) skipped += d.written ? 0 : 1;
  return static_cast<double>(skipped) / static_cast<double>(decisions.size());
}

}  // namespace seedgate
