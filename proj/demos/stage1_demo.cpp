// Writes the bundled synthetic fixture set to a directory, then runs the
// stage1 and gate pipelines on it and prints what they chose.
//
//   stage1_demo [output-dir]

#include <cstdio>
#include <filesystem>

#include "seedgate/pipeline.hpp"
#include "seedgate/synthetic_fixtures.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "seedgate_demo";
  try {
    const auto c = seedgate::synthetic::write_stage1_case(dir);
    const auto m = seedgate::load_manifest(c.manifest);
    std::printf("fixtures: %s\n", c.manifest.string().c_str());

    const auto s1 = seedgate::run_stage1_pipeline(m);
    for (const auto& cand : s1.stage1.candidates) {
      const auto& n = s1.stage1.selection.normalized[static_cast<std::size_t>(cand.k)];
      std::printf("  k=%d sigma=%.2f box=[%d,%d)x[%d,%d) s_sem=%.4f s_spa=%.4f product=%.4f\n", cand.k, cand.sigma,
                  cand.box.x0, cand.box.x1, cand.box.y0, cand.box.y1, cand.s_sem, cand.s_spa, n.product);
    }
    std::printf("selected k*=%d\n", s1.stage1.selection.k_star);
    for (const auto& p : s1.prompts.points) std::printf("  prompt (%d, %d)\n", p.point.x, p.point.y);

    const auto gate = seedgate::run_gate_pipeline(m, m.gate);
    for (const auto& d : gate.decisions) {
      std::printf("  frame %d g=%.4f %s\n", d.frame_index, d.g, std::string(seedgate::to_string(d.reason)).c_str());
    }
  } catch (const seedgate::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
