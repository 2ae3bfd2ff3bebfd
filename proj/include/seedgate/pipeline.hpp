#pragma once

// Drivers that bind fixtures on disk to the stage algorithms: Stage I scale
// selection and prompt synthesis, the gate decision log over recorded
// predictions, directory-level evaluation, and simulator configuration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedgate/manifest.hpp"
#include "seedgate/memory_gate.hpp"
#include "seedgate/metrics.hpp"
#include "seedgate/prompt_refine.hpp"
#include "seedgate/propagation_sim.hpp"
#include "seedgate/scale_space.hpp"
#include "seedgate/tensor_io.hpp"

namespace seedgate {

struct Stage1Report {
  Stage1Result stage1;
  PromptSet prompts;  // frame pixel coordinates
  std::vector<double> aux_similarity;
  int stride = 1;
  int grid_radius = 1;
};

inline int grid_radius(int nms_radius, int stride) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(nms_radius) / stride)));
}

inline Stage1Report run_stage1_prompts(const Stage1Inputs& in, const DenseMap& vfm_features, const RefineConfig& refine,
                                       int stride) {
  Stage1Report report;
  report.stride = stride;
  report.stage1 = run_stage1(in);

  const Pixel click_cell = frame_to_grid(in.interaction.click, stride);
  const SimilarityMap sim = dense_similarity(vfm_features, click_cell);
  const Box window =
      frame_box_to_grid(report.stage1.selection.box, stride, vfm_features.height(), vfm_features.width());
  RefineConfig grid_cfg = refine;
  grid_cfg.nms_radius = report.grid_radius = grid_radius(refine.nms_radius, stride);

  std::vector<Pixel> aux;
  for (const Pixel& cell : nms_peaks(sim, window, grid_cfg)) {
    aux.push_back(grid_to_frame(cell, stride));
    report.aux_similarity.push_back(sim.map.at(cell.y, cell.x));
  }
  report.prompts = assemble_prompts(in.interaction.click, aux);
  return report;
}

inline Stage1Report run_stage1_pipeline(const SequenceManifest& m) {
  const Stage1Inputs in = load_stage1_inputs(m);
  const DenseMap vfm = read_dense_map(m.stage1->vfm_features);
  return run_stage1_prompts(in, vfm, m.refine, m.provenance.stride);
}

struct GateRun {
  std::vector<GateDecision> decisions;
  std::vector<int> final_bank_frames;
  std::optional<MetricsReport> metrics;

  double rejection_rate() const { return seedgate::rejection_rate(decisions); }
};

// Replays recorded per-frame predictions through the gate. Frame 0's mask
// yields the anchor; later frames are pooled, gated and written in order.
inline GateRun run_gate_pipeline(const SequenceManifest& m, const GateConfig& cfg) {
  cfg.validate();
  for (std::size_t t = 0; t < m.frames.size(); ++t) {
    require(m.frames[t].mask.has_value(), ErrorCode::SchemaViolation,
            "frames[" + std::to_string(t) + "].mask is required by the gate");
  }
  const bool with_gt = std::all_of(m.frames.begin(), m.frames.end(), [](const auto& f) { return f.gt_mask.has_value(); });

  GateRun run;
  if (with_gt) run.metrics.emplace();
  auto score = [&](const DenseMap& mask, const FrameFixturePaths& f) {
    if (!with_gt) return;
    const BinaryMask gt = BinaryMask::from_probabilities(read_dense_map(*f.gt_mask));
    run.metrics->add(evaluate_frame(BinaryMask::from_probabilities(mask), gt));
  };

  const DenseMap f0 = read_dense_map(m.frames[0].features);
  const DenseMap m0 = read_dense_map(*m.frames[0].mask);
  MemoryBank bank(init_anchor(f0, m0, m.eps), cfg.bank_capacity);
  score(m0, m.frames[0]);
  for (std::size_t t = 1; t < m.frames.size(); ++t) {
    const DenseMap ft = read_dense_map(m.frames[t].features);
    const DenseMap mt = read_dense_map(*m.frames[t].mask);
    const FrameDescriptor fd = compute_descriptor(ft, mt, m.eps);
    const GateDecision d = gate_decision(static_cast<int>(t), fd.descriptor, bank.anchor().descriptor, cfg, fd.empty_mask);
    if (d.written) bank.write(MemoryEntry{static_cast<int>(t), fd.descriptor, false});
    run.decisions.push_back(d);
    score(mt, m.frames[t]);
  }
  for (const auto& e : bank.entries()) run.final_bank_frames.push_back(e.frame_index);
  return run;
}

struct EvalResult {
  std::vector<std::string> names;
  MetricsReport metrics;
  double tolerance = 0.0;
};

// Pairs prediction and ground-truth fixtures by file name. Both are read as
// probability maps and binarized at 0.5.
inline EvalResult evaluate_directories(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                       std::optional<double> tolerance = std::nullopt) {
  require(std::filesystem::is_directory(gt_dir), ErrorCode::MissingFixture, gt_dir.string() + " is not a directory");
  require(std::filesystem::is_directory(pred_dir), ErrorCode::MissingFixture,
          pred_dir.string() + " is not a directory");
  std::vector<std::filesystem::path> gt_files;
  for (const auto& entry : std::filesystem::directory_iterator(gt_dir)) {
    if (entry.is_regular_file()) gt_files.push_back(entry.path());
  }
  std::sort(gt_files.begin(), gt_files.end());
  require(!gt_files.empty(), ErrorCode::EmptyInput, "no ground-truth masks in " + gt_dir.string());

  EvalResult result;
  for (const auto& gt_path : gt_files) {
    const auto pred_path = pred_dir / gt_path.filename();
    require(std::filesystem::is_regular_file(pred_path), ErrorCode::MissingFixture,
            "no prediction for " + gt_path.filename().string());
    const BinaryMask gt = BinaryMask::from_probabilities(read_dense_map(gt_path));
    const BinaryMask pred = BinaryMask::from_probabilities(read_dense_map(pred_path));
    require(pred.same_shape(gt), ErrorCode::ShapeMismatch, gt_path.filename().string() + " shapes differ");
    const double tol = tolerance.value_or(default_boundary_tolerance(gt.height(), gt.width()));
    result.tolerance = tol;
    result.names.push_back(gt_path.filename().string());
    result.metrics.add({dice(pred, gt), average_surface_distance(pred, gt), f_boundary(pred, gt, tol)});
  }
  return result;
}

struct SimulationSpec {
  SynthConfig synth = reference_corrupted_config(2025);
  GateConfig gate;
  StabilityConfig eps;
  StandinConfig standin;
  std::optional<Pixel> click;
  std::vector<Pixel> aux;

  Pixel effective_click() const { return click.value_or(default_click(synth)); }
  PromptSet prompts() const { return assemble_prompts(effective_click(), aux); }
};

namespace detail {

inline EmbeddingVector embedding_field(const nlohmann::json& v, const std::string& where) {
  require(v.is_array() && !v.empty(), ErrorCode::BadConfig, where + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    require(x.is_number(), ErrorCode::BadConfig, where + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return EmbeddingVector(std::move(out));
}

inline Disc disc_field(const nlohmann::json& v, const std::string& where) {
  require(v.is_object() && v.contains("center") && v.contains("radius"), ErrorCode::BadConfig,
          where + " needs center and radius");
  const auto& c = v["center"];
  require(c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number() && v["radius"].is_number(),
          ErrorCode::BadConfig, where + " has malformed center or radius");
  return {c[0].get<double>(), c[1].get<double>(), v["radius"].get<double>()};
}

}  // namespace detail

// Every key is optional; omitted keys take the reference corrupted
// configuration's values. See docs/formats.md.
inline SimulationSpec parse_simulation_spec(const nlohmann::json& doc) {
  require(doc.is_object(), ErrorCode::BadConfig, "simulation config must be a JSON object");
  SimulationSpec spec;
  auto& s = spec.synth;
  try {
    if (doc.contains("seed")) s.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("frames")) s.frames = doc["frames"].get<int>();
    if (doc.contains("grid")) {
      const auto& g = doc["grid"];
      require(g.is_array() && g.size() == 3, ErrorCode::BadConfig, "grid must be [h, w, d]");
      s.height = g[0].get<int>();
      s.width = g[1].get<int>();
      s.channels = g[2].get<int>();
    }
    const bool dims_changed = doc.contains("grid");
    if (dims_changed || doc.contains("frames")) {
      // Reference signatures and trajectory no longer fit; rebuild defaults.
      s.target_signature = basis_vector(s.channels, 0);
      s.background_signature = basis_vector(s.channels, std::min(1, s.channels - 1));
      s.corruption_signature = basis_vector(s.channels, std::min(2, s.channels - 1));
      const double cy = (s.height - 1) / 2.0;
      s.trajectory = linear_trajectory(s.frames, {s.width * 0.375, cy, 2.5}, {s.width * 0.625, cy, 2.5});
    }
    if (doc.contains("trajectory")) {
      const auto& tr = doc["trajectory"];
      if (tr.is_array()) {
        s.trajectory.clear();
        for (std::size_t i = 0; i < tr.size(); ++i) {
          s.trajectory.push_back(detail::disc_field(tr[i], "trajectory[" + std::to_string(i) + "]"));
        }
      } else {
        require(tr.is_object() && tr.contains("start") && tr.contains("end"), ErrorCode::BadConfig,
                "trajectory must be a list of discs or {start, end}");
        s.trajectory = linear_trajectory(s.frames, detail::disc_field(tr["start"], "trajectory.start"),
                                         detail::disc_field(tr["end"], "trajectory.end"));
      }
    }
    if (doc.contains("target_signature")) s.target_signature = detail::embedding_field(doc["target_signature"], "target_signature");
    if (doc.contains("background_signature")) {
      s.background_signature = detail::embedding_field(doc["background_signature"], "background_signature");
    }
    if (doc.contains("corruption_signature")) {
      s.corruption_signature = detail::embedding_field(doc["corruption_signature"], "corruption_signature");
    }
    if (doc.contains("corruption_window")) {
      const auto& cw = doc["corruption_window"];
      if (cw.is_null()) {
        s.corruption.reset();
      } else {
        require(cw.is_array() && cw.size() == 2, ErrorCode::BadConfig, "corruption_window must be [first, last] or null");
        s.corruption = FrameWindow{cw[0].get<int>(), cw[1].get<int>()};
      }
    }
    if (doc.contains("noise_sigma")) s.noise_sigma = doc["noise_sigma"].get<double>();
    if (doc.contains("tau")) spec.gate.tau = doc["tau"].get<double>();
    if (doc.contains("bank_capacity")) spec.gate.bank_capacity = doc["bank_capacity"].get<int>();
    if (doc.contains("epsilon")) spec.eps.epsilon = doc["epsilon"].get<double>();
    if (doc.contains("decoder_temperature")) spec.standin.decoder_temperature = doc["decoder_temperature"].get<double>();
    if (doc.contains("click")) {
      const auto& c = doc["click"];
      require(c.is_array() && c.size() == 2, ErrorCode::BadConfig, "click must be [x, y]");
      spec.click = Pixel{c[0].get<int>(), c[1].get<int>()};
    }
    if (doc.contains("aux_prompts")) {
      for (const auto& p : doc["aux_prompts"]) {
        require(p.is_array() && p.size() == 2, ErrorCode::BadConfig, "aux_prompts entries must be [x, y]");
        spec.aux.push_back({p[0].get<int>(), p[1].get<int>()});
      }
    }
  } catch (const nlohmann::json::type_error& e) {
    fail(ErrorCode::BadConfig, std::string("simulation config has a wrongly typed field: ") + e.what());
  }
  s.validate();
  spec.gate.validate();
  spec.eps.validate();
  spec.standin.validate();
  const Pixel click = spec.effective_click();
  require(click.x >= 0 && click.y >= 0 && click.x < s.width && click.y < s.height, ErrorCode::ClickOutOfBounds,
          "simulation click lies outside the grid");
  return spec;
}

}  // namespace seedgate
