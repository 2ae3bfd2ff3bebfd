#pragma once

// JSON / CSV serialization of run results. Report bodies are deterministic:
// object keys are emitted in sorted order and no wall-clock data enters the
// body. The generation timestamp lives in the envelope only.

#include <chrono>
#include <ctime>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedgate/manifest.hpp"
#include "seedgate/pipeline.hpp"
#include "seedgate/propagation_sim.hpp"

namespace seedgate {

inline constexpr const char* kEngineVersion = "0.1.0";

using Json = nlohmann::json;

inline Json to_json(Pixel p) { return Json::array({p.x, p.y}); }

inline Json to_json(const Box& b) { return Json{{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}}; }

inline Json to_json(const PromptSet& set) {
  Json points = Json::array();
  for (const auto& p : set.points) points.push_back(Json{{"x", p.point.x}, {"y", p.point.y}, {"label", "positive"}});
  return points;
}

inline Json to_json(const GateDecision& d) {
  return Json{{"frame", d.frame_index}, {"g", d.g}, {"written", d.written}, {"reason", std::string(to_string(d.reason))}};
}

inline Json to_json(const std::vector<GateDecision>& log) {
  Json out = Json::array();
  for (const auto& d : log) out.push_back(to_json(d));
  return out;
}

inline Json to_json(const FrameMetrics& m) {
  return Json{{"dice", m.dice}, {"asd", m.asd}, {"f_boundary", m.f_boundary}};
}

inline Json to_json(const MetricsReport& r) {
  Json frames = Json::array();
  for (const auto& f : r.frames) frames.push_back(to_json(f));
  return Json{{"frames", frames}, {"mean", to_json(r.mean)}};
}

inline Json to_json(const Stage1Report& r) {
  const auto& sel = r.stage1.selection;
  Json scales = Json::array();
  for (std::size_t k = 0; k < r.stage1.candidates.size(); ++k) {
    const auto& c = r.stage1.candidates[k];
    const auto& n = sel.normalized[k];
    scales.push_back(Json{{"k", c.k},
                          {"sigma", c.sigma},
                          {"box", to_json(c.box)},
                          {"s_sem", c.s_sem},
                          {"s_spa", c.s_spa},
                          {"s_sem_hat", n.sem},
                          {"s_spa_hat", n.spa},
                          {"product", n.product}});
  }
  return Json{{"k_star", sel.k_star},
              {"box", to_json(sel.box)},
              {"scales", scales},
              {"prompts", to_json(r.prompts)},
              {"aux_similarity", r.aux_similarity},
              {"stride", r.stride},
              {"nms_radius_cells", r.grid_radius}};
}

inline Json to_json(const PolicyReport& r) {
  Json writes = Json::array();
  for (const auto& w : r.writes) writes.push_back(Json{{"frame", w.frame_index}, {"g", w.g}});
  return Json{{"policy", std::string(to_string(r.policy))},
              {"tau", r.tau},
              {"metrics", to_json(r.metrics)},
              {"decisions", to_json(r.decisions)},
              {"rejection_rate", r.rejection_rate()},
              {"bank_writes", writes},
              {"final_bank_frames", r.final_bank_frames}};
}

inline Json to_json(const SimulationSpec& s) {
  const auto& c = s.synth;
  Json trajectory = Json::array();
  for (const auto& d : c.trajectory) trajectory.push_back(Json{{"center", {d.cx, d.cy}}, {"radius", d.radius}});
  Json aux = Json::array();
  for (const auto& p : s.aux) aux.push_back(to_json(p));
  return Json{{"seed", c.seed},
              {"frames", c.frames},
              {"grid", {c.height, c.width, c.channels}},
              {"trajectory", trajectory},
              {"target_signature", c.target_signature.values},
              {"background_signature", c.background_signature.values},
              {"corruption_signature", c.corruption_signature.values},
              {"corruption_window", c.corruption ? Json::array({c.corruption->first, c.corruption->last}) : Json()},
              {"noise_sigma", c.noise_sigma},
              {"tau", s.gate.tau},
              {"bank_capacity", s.gate.bank_capacity},
              {"epsilon", s.eps.epsilon},
              {"decoder_temperature", s.standin.decoder_temperature},
              {"click", to_json(s.effective_click())},
              {"aux_prompts", aux}};
}

inline Json manifest_echo(const SequenceManifest& m) {
  return Json{{"frame_count", m.frame_count()},
              {"frame_size", {m.frame.height, m.frame.width}},
              {"click", to_json(m.interaction.click)},
              {"category", m.interaction.category},
              {"epsilon", m.eps.epsilon},
              {"nms_radius", m.refine.nms_radius},
              {"max_aux", m.refine.max_aux},
              {"tau", m.gate.tau},
              {"bank_capacity", m.gate.bank_capacity},
              {"provenance",
               {{"vlm", m.provenance.vlm},
                {"vfm", m.provenance.vfm},
                {"segmentor", m.provenance.segmentor},
                {"stride", m.provenance.stride}}}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// {"schema_version", "engine_version", "command", "body", "envelope"}. Only
// the envelope may differ between runs with identical inputs.
inline Json make_run_report(const std::string& command, Json body) {
  return Json{{"schema_version", kSchemaVersion},
              {"engine_version", kEngineVersion},
              {"command", command},
              {"body", std::move(body)},
              {"envelope", {{"generated_at", utc_timestamp()}}}};
}

inline std::string body_bytes(const Json& report) { return report.at("body").dump(); }

inline std::string policy_csv(const std::vector<const PolicyReport*>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "policy,frame,dice,asd,f_boundary,g,written,reason\n";
  for (const auto* r : reports) {
    for (std::size_t t = 0; t < r->metrics.frames.size(); ++t) {
      const auto& m = r->metrics.frames[t];
      out << to_string(r->policy) << ',' << t << ',' << m.dice << ',' << m.asd << ',' << m.f_boundary << ',';
      if (t == 0) {
        out << "1,1,anchor\n";
      } else {
        const auto& d = r->decisions[t - 1];
        out << d.g << ',' << (d.written ? 1 : 0) << ',' << to_string(d.reason) << '\n';
      }
    }
  }
  return out.str();
}

inline std::string metrics_csv(const std::vector<std::string>& names, const MetricsReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "name,dice,asd,f_boundary\n";
  for (std::size_t i = 0; i < r.frames.size(); ++i) {
    out << names[i] << ',' << r.frames[i].dice << ',' << r.frames[i].asd << ',' << r.frames[i].f_boundary << '\n';
  }
  return out.str();
}

}  // namespace seedgate
