#pragma once

// Sequence manifest: a JSON document naming every fixture a run needs, plus
// the run configuration. The schema is documented in docs/formats.md. Paths
// are resolved relative to the manifest's directory and checked for existence
// at load time.

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"
#include "seedgate/memory_gate.hpp"
#include "seedgate/prompt_refine.hpp"
#include "seedgate/scale_space.hpp"
#include "seedgate/tensor_io.hpp"

namespace seedgate {

inline constexpr int kSchemaVersion = 1;

struct FrameFixturePaths {
  std::filesystem::path features;
  std::optional<std::filesystem::path> mask;     // predicted probabilities
  std::optional<std::filesystem::path> gt_mask;  // ground truth
};

struct LayerFixturePaths {
  std::filesystem::path channel_weights;
  std::filesystem::path affinities;
  std::filesystem::path values;
};

struct CropFixturePaths {
  std::filesystem::path embedding;
  std::vector<LayerFixturePaths> layers;
};

struct Stage1FixturePaths {
  std::vector<double> schedule;
  std::filesystem::path text_embedding;
  std::filesystem::path vfm_features;
  std::vector<CropFixturePaths> crops;
  std::optional<int> last_layers;  // aggregate only the last L layers
};

struct Provenance {
  std::string vlm;
  std::string vfm;
  std::string segmentor;
  int stride = 1;
};

struct SequenceManifest {
  std::filesystem::path source;
  FrameSize frame;
  InteractionSpec interaction;
  std::vector<FrameFixturePaths> frames;
  std::optional<Stage1FixturePaths> stage1;
  StabilityConfig eps;
  RefineConfig refine;
  GateConfig gate;
  Provenance provenance;

  int frame_count() const noexcept { return static_cast<int>(frames.size()); }
};

namespace detail {

using nlohmann::json;

inline const json& field(const json& obj, const char* key, const std::string& where) {
  require(obj.is_object(), ErrorCode::SchemaViolation, where + " must be an object");
  auto it = obj.find(key);
  require(it != obj.end(), ErrorCode::SchemaViolation, where + "." + key + " is required");
  return *it;
}

inline int as_int(const json& v, const std::string& where) {
  require(v.is_number_integer(), ErrorCode::SchemaViolation, where + " must be an integer");
  return v.get<int>();
}

inline double as_number(const json& v, const std::string& where) {
  require(v.is_number(), ErrorCode::SchemaViolation, where + " must be a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& where) {
  require(v.is_string(), ErrorCode::SchemaViolation, where + " must be a string");
  return v.get<std::string>();
}

inline std::filesystem::path fixture_path(const json& v, const std::filesystem::path& base, const std::string& where) {
  const std::filesystem::path p = base / as_string(v, where);
  require(std::filesystem::is_regular_file(p), ErrorCode::MissingFixture, where + " -> " + p.string() + " not found");
  return p;
}

inline std::pair<int, int> int_pair(const json& v, const std::string& where) {
  require(v.is_array() && v.size() == 2, ErrorCode::SchemaViolation, where + " must be a two-element array");
  return {as_int(v[0], where + "[0]"), as_int(v[1], where + "[1]")};
}

}  // namespace detail

inline SequenceManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base) {
  using detail::field;
  SequenceManifest m;

  require(doc.is_object(), ErrorCode::SchemaViolation, "manifest must be a JSON object");
  const int version = detail::as_int(field(doc, "schema_version", "manifest"), "schema_version");
  require(version == kSchemaVersion, ErrorCode::SchemaViolation,
          "unsupported schema_version " + std::to_string(version));

  const auto [h, w] = detail::int_pair(field(doc, "frame_size", "manifest"), "frame_size");
  require(h > 0 && w > 0, ErrorCode::SchemaViolation, "frame_size entries must be positive");
  m.frame = {h, w};

  const auto& inter = field(doc, "interaction", "manifest");
  const auto [cx, cy] = detail::int_pair(field(inter, "click", "interaction"), "interaction.click");
  m.interaction.click = {cx, cy};
  m.interaction.category = detail::as_string(field(inter, "category", "interaction"), "interaction.category");
  m.interaction.validate(h, w);

  const auto& frames = field(doc, "frames", "manifest");
  require(frames.is_array() && !frames.empty(), ErrorCode::SchemaViolation, "frames must be a non-empty array");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string where = "frames[" + std::to_string(t) + "]";
    FrameFixturePaths fp;
    fp.features = detail::fixture_path(field(frames[t], "features", where), base, where + ".features");
    if (frames[t].contains("mask")) fp.mask = detail::fixture_path(frames[t]["mask"], base, where + ".mask");
    if (frames[t].contains("gt_mask")) {
      fp.gt_mask = detail::fixture_path(frames[t]["gt_mask"], base, where + ".gt_mask");
    }
    m.frames.push_back(std::move(fp));
  }

  if (doc.contains("stage1")) {
    const auto& s1 = doc["stage1"];
    Stage1FixturePaths sp;
    if (s1.contains("schedule")) {
      require(s1["schedule"].is_array(), ErrorCode::SchemaViolation, "stage1.schedule must be an array");
      for (const auto& v : s1["schedule"]) sp.schedule.push_back(detail::as_number(v, "stage1.schedule[]"));
    } else {
      sp.schedule = default_scale_schedule();
    }
    validate_schedule(sp.schedule);
    sp.text_embedding = detail::fixture_path(field(s1, "text_embedding", "stage1"), base, "stage1.text_embedding");
    sp.vfm_features = detail::fixture_path(field(s1, "vfm_features", "stage1"), base, "stage1.vfm_features");
    const auto& crops = field(s1, "crops", "stage1");
    require(crops.is_array(), ErrorCode::SchemaViolation, "stage1.crops must be an array");
    require(crops.size() == sp.schedule.size(), ErrorCode::SchemaViolation,
            "stage1.crops needs one entry per schedule scale");
    for (std::size_t k = 0; k < crops.size(); ++k) {
      const std::string where = "stage1.crops[" + std::to_string(k) + "]";
      CropFixturePaths cp;
      cp.embedding = detail::fixture_path(field(crops[k], "embedding", where), base, where + ".embedding");
      const auto& layers = field(crops[k], "layers", where);
      require(layers.is_array() && !layers.empty(), ErrorCode::MissingFixture, where + ".layers is empty");
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string lw = where + ".layers[" + std::to_string(l) + "]";
        cp.layers.push_back({detail::fixture_path(field(layers[l], "channel_weights", lw), base, lw + ".channel_weights"),
                             detail::fixture_path(field(layers[l], "affinities", lw), base, lw + ".affinities"),
                             detail::fixture_path(field(layers[l], "values", lw), base, lw + ".values")});
      }
      sp.crops.push_back(std::move(cp));
    }
    if (s1.contains("layers")) {
      const int L = detail::as_int(s1["layers"], "stage1.layers");
      require(L >= 1, ErrorCode::SchemaViolation, "stage1.layers must be at least 1");
      sp.last_layers = L;
    }
    m.stage1 = std::move(sp);
  }

  if (doc.contains("config")) {
    const auto& c = doc["config"];
    require(c.is_object(), ErrorCode::SchemaViolation, "config must be an object");
    if (c.contains("epsilon")) m.eps.epsilon = detail::as_number(c["epsilon"], "config.epsilon");
    if (c.contains("nms_radius")) m.refine.nms_radius = detail::as_int(c["nms_radius"], "config.nms_radius");
    if (c.contains("max_aux")) m.refine.max_aux = detail::as_int(c["max_aux"], "config.max_aux");
    if (c.contains("similarity_floor") && !c["similarity_floor"].is_null()) {
      m.refine.similarity_floor = detail::as_number(c["similarity_floor"], "config.similarity_floor");
    }
    if (c.contains("tau")) m.gate.tau = detail::as_number(c["tau"], "config.tau");
    if (c.contains("bank_capacity")) m.gate.bank_capacity = detail::as_int(c["bank_capacity"], "config.bank_capacity");
  }
  m.eps.validate();
  m.refine.validate();
  m.gate.validate();

  if (doc.contains("provenance")) {
    const auto& p = doc["provenance"];
    require(p.is_object(), ErrorCode::SchemaViolation, "provenance must be an object");
    if (p.contains("vlm")) m.provenance.vlm = detail::as_string(p["vlm"], "provenance.vlm");
    if (p.contains("vfm")) m.provenance.vfm = detail::as_string(p["vfm"], "provenance.vfm");
    if (p.contains("segmentor")) m.provenance.segmentor = detail::as_string(p["segmentor"], "provenance.segmentor");
    if (p.contains("stride")) m.provenance.stride = detail::as_int(p["stride"], "provenance.stride");
  }
  require(m.provenance.stride >= 1, ErrorCode::SchemaViolation, "provenance.stride must be at least 1");
  return m;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, path.string() + " is not valid JSON: " + e.what());
  }
}

inline SequenceManifest load_manifest(const std::filesystem::path& path) {
  require(std::filesystem::is_regular_file(path), ErrorCode::MissingFixture, "manifest " + path.string() + " not found");
  SequenceManifest m = parse_manifest(read_json_file(path), path.parent_path());
  m.source = path;
  return m;
}

inline AttributionIngredients load_layer(const LayerFixturePaths& p, int layer_id) {
  AttributionIngredients ing;
  ing.layer_id = layer_id;
  ing.channel_weights = read_embedding(p.channel_weights).values;
  ing.affinities = read_dense_map(p.affinities);
  ing.values = read_dense_map(p.values);
  return ing;
}

inline Stage1Inputs load_stage1_inputs(const SequenceManifest& m) {
  require(m.stage1.has_value(), ErrorCode::SchemaViolation, "manifest has no stage1 block");
  const auto& s1 = *m.stage1;
  Stage1Inputs in;
  in.frame = m.frame;
  in.interaction = m.interaction;
  in.schedule = s1.schedule;
  in.text_embedding = read_embedding(s1.text_embedding, EmbeddingSource::TextCategory);
  in.eps = m.eps;
  for (const auto& crop : s1.crops) {
    CropFixture cf;
    cf.embedding = read_embedding(crop.embedding, EmbeddingSource::ImageCrop);
    const std::size_t total = crop.layers.size();
    const std::size_t keep = s1.last_layers ? std::min<std::size_t>(total, static_cast<std::size_t>(*s1.last_layers))
                                            : total;
    for (std::size_t l = total - keep; l < total; ++l) cf.layers.push_back(load_layer(crop.layers[l], static_cast<int>(l)));
    in.crops.push_back(std::move(cf));
  }
  return in;
}

}  // namespace seedgate
