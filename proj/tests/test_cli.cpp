#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "seedgate/cli.hpp"
#include "seedgate/synthetic_fixtures.hpp"
#include "test_support.hpp"

using namespace seedgate;
using seedgate::testing::ScratchDir;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::cli_dispatch(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

json body_of(const std::filesystem::path& p) { return read_json_file(p).at("body"); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, Stage1OnTheSyntheticCase) {
  ScratchDir dir("cli_stage1");
  const auto c = synthetic::write_stage1_case(dir.path());
  const auto out = dir / "stage1.json";
  const auto r = run({"stage1", "--manifest", c.manifest.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;

  const auto report = read_json_file(out);
  EXPECT_EQ(report["command"], "stage1");
  EXPECT_EQ(report["schema_version"], 1);
  EXPECT_TRUE(report["envelope"].contains("generated_at"));
  const auto& s1 = report["body"]["stage1"];
  EXPECT_EQ(s1["k_star"], 1);
  EXPECT_EQ(s1["box"], (json{{"x0", 13}, {"y0", 13}, {"x1", 51}, {"y1", 51}}));
  EXPECT_EQ(s1["nms_radius_cells"], 3);
  const json expected_prompts = json::array({json{{"x", 32}, {"y", 32}, {"label", "positive"}},
                                             json{{"x", 33}, {"y", 19}, {"label", "positive"}},
                                             json{{"x", 47}, {"y", 45}, {"label", "positive"}},
                                             json{{"x", 19}, {"y", 47}, {"label", "positive"}}});
  EXPECT_EQ(s1["prompts"], expected_prompts);
  for (const auto& s : s1["aux_similarity"]) EXPECT_NEAR(s.get<double>(), 1.0, 1e-6);
  EXPECT_EQ(s1["scales"].size(), 3u);
}

TEST(Cli, GateSkipsTheOffTargetFrame) {
  ScratchDir dir("cli_gate");
  const auto c = synthetic::write_stage1_case(dir.path());
  const auto out = dir / "gate.json";
  const auto r = run({"gate", "--manifest", c.manifest.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto body = body_of(out);
  ASSERT_EQ(body["decisions"].size(), 3u);
  EXPECT_EQ(body["decisions"][0]["written"], true);
  EXPECT_EQ(body["decisions"][1]["written"], false);
  EXPECT_EQ(body["decisions"][1]["reason"], "below-threshold");
  EXPECT_EQ(body["decisions"][2]["written"], true);
  EXPECT_EQ(body["final_bank_frames"], json::array({0, 1, 3}));
  EXPECT_NEAR(body["rejection_rate"].get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(body["metrics"]["frames"][2]["dice"], 0.0);
  EXPECT_EQ(body["metrics"]["frames"][1]["dice"], 1.0);

  const auto r2 = run({"gate", "--manifest", c.manifest.string(), "--out", out.string(), "--tau", "-1"});
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(body_of(out)["final_bank_frames"], json::array({0, 1, 2, 3}));
}

TEST(Cli, SimulateIsByteStable) {
  ScratchDir dir("cli_sim");
  const auto a = dir / "a.json";
  const auto b = dir / "b.json";
  ASSERT_EQ(run({"simulate", "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"simulate", "--out", b.string()}).code, 0);
  EXPECT_EQ(body_of(a).dump(), body_of(b).dump());
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));

  const auto body = body_of(a);
  EXPECT_GT(body["delta"]["dice"].get<double>(), 0.0);
  EXPECT_LT(body["delta"]["asd"].get<double>(), 0.0);
  EXPECT_EQ(body["config"]["seed"], 2025);

  const auto c = dir / "c.json";
  ASSERT_EQ(run({"simulate", "--out", c.string(), "--seed", "42", "--policy", "greedy"}).code, 0);
  const auto single = body_of(c);
  EXPECT_TRUE(single.contains("greedy"));
  EXPECT_FALSE(single.contains("gated"));
  EXPECT_EQ(single["config"]["seed"], 42);
}

TEST(Cli, SimulateReadsAConfigFile) {
  ScratchDir dir("cli_sim_cfg");
  write_file_atomic(dir / "cfg.json", json{{"seed", 9}, {"corruption_window", nullptr}, {"noise_sigma", 0.0}}.dump());
  const auto out = dir / "r.json";
  const auto r = run({"simulate", "--config", (dir / "cfg.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto body = body_of(out);
  EXPECT_EQ(body["greedy"]["metrics"]["mean"]["dice"], 1.0);
  EXPECT_EQ(body["gated"]["rejection_rate"], 0.0);
}

TEST(Cli, SweepOverAStreamIsMonotone) {
  ScratchDir dir("cli_sweep");
  // Anchor e0; descriptors at cosines 0.95, 0.2, 0.75, 0.4, 0.85.
  std::vector<double> rows{1.0, 0.0};
  for (double c : {0.95, 0.2, 0.75, 0.4, 0.85}) {
    rows.push_back(c);
    rows.push_back(std::sqrt(1.0 - c * c));
  }
  write_tensor(dir / "stream.sgt", Tensor{{6, 2}, rows});
  const auto out = dir / "sweep.json";
  const auto r = run({"sweep-tau", "--stream", (dir / "stream.sgt").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows_json = body_of(out)["rows"];
  ASSERT_EQ(rows_json.size(), 5u);
  const std::vector<double> expected{0.0, 0.2, 0.4, 0.4, 0.8};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(rows_json[i]["rejection_rate"].get<double>(), expected[i], 1e-6);
  EXPECT_NE(slurp(dir / "sweep.csv").find("tau,rejection_rate,mean_dice,mean_asd"), std::string::npos);
}

TEST(Cli, SweepOverTheSimulator) {
  ScratchDir dir("cli_sweep_sim");
  const auto out = dir / "sweep.json";
  const auto r = run({"sweep-tau", "--config", "", "--taus", "0.1,0.5,0.9", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = body_of(out)["rows"];
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0]["mean_dice"].is_number());
}

TEST(Cli, EvalScoresMatchingFiles) {
  ScratchDir dir("cli_eval");
  std::filesystem::create_directories(dir / "pred");
  std::filesystem::create_directories(dir / "gt");
  DenseMap gt(6, 6, 1), pred(6, 6, 1);
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x) gt.at(y, x) = 1.0;
  pred = gt;
  write_tensor(dir / "gt" / "a.sgt", from_dense_map(gt));
  write_tensor(dir / "pred" / "a.sgt", from_dense_map(pred));
  write_tensor(dir / "gt" / "b.sgt", from_dense_map(gt));
  write_tensor(dir / "pred" / "b.sgt", from_dense_map(DenseMap(6, 6, 1)));
  const auto out = dir / "eval.json";
  const auto r = run({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto body = body_of(out);
  EXPECT_EQ(body["names"], json::array({"a.sgt", "b.sgt"}));
  EXPECT_EQ(body["metrics"]["frames"][0]["dice"], 1.0);
  EXPECT_EQ(body["metrics"]["frames"][1]["dice"], 0.0);
  EXPECT_EQ(body["metrics"]["mean"]["dice"], 0.5);
  EXPECT_EQ(body["tolerance"], 1.0);
  EXPECT_NE(slurp(dir / "eval.csv").find("a.sgt,1,0,1"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"stage1", "--out", "x.json"}).code, 1);
  EXPECT_EQ(run({"stage1", "--manifest", "/nonexistent/m.json", "--out", "x.json"}).code, 1);
  EXPECT_EQ(run({"simulate", "--policy", "lazy", "--out", "x.json"}).code, 1);
  EXPECT_EQ(run({"simulate", "--tau", "3", "--out", "x.json"}).code, 1);
  EXPECT_EQ(run({"sweep-tau", "--taus", "0.1,,0.3", "--out", "x.json"}).code, 1);
  const auto unwritable = run({"simulate", "--out", "/nonexistent/dir/x.json"});
  EXPECT_EQ(unwritable.code, 2);
  EXPECT_NE(unwritable.err.find("error:"), std::string::npos);
}
