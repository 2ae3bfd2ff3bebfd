#pragma once

// Command-line surface: stage1, gate, simulate, eval and sweep-tau. Exit codes
// are 0 on success, 1 on invalid input (bad arguments, schema or fixture
// validation failures) and 2 on runtime failures such as unwritable outputs.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seedgate/error.hpp"
#include "seedgate/log.hpp"
#include "seedgate/manifest.hpp"
#include "seedgate/pipeline.hpp"
#include "seedgate/propagation_sim.hpp"
#include "seedgate/report.hpp"
#include "seedgate/tensor_io.hpp"

namespace seedgate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

inline std::vector<double> parse_taus(const std::string& csv) {
  std::vector<double> taus;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    require(!item.empty(), ErrorCode::BadConfig, "empty entry in --taus");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      fail(ErrorCode::BadConfig, "cannot parse tau '" + item + "'");
    }
    require(used == item.size(), ErrorCode::BadConfig, "cannot parse tau '" + item + "'");
    taus.push_back(v);
  }
  require(!taus.empty(), ErrorCode::BadConfig, "--taus is empty");
  return taus;
}

inline std::filesystem::path csv_path_for(const std::filesystem::path& out) {
  auto p = out;
  p.replace_extension(".csv");
  return p;
}

inline void write_report(const std::filesystem::path& out, const Json& report) {
  if (out.has_parent_path() && !std::filesystem::exists(out.parent_path())) {
    fail(ErrorCode::IoFailure, "output directory " + out.parent_path().string() + " does not exist");
  }
  write_file_atomic(out, report.dump(2) + "\n");
  log::info("wrote " + out.string());
}

struct Options {
  std::string manifest;
  std::string out;
  std::string config;
  std::string stream;
  std::string pred;
  std::string gt;
  std::string policy;
  std::string taus = "0.1,0.3,0.5,0.7,0.9";
  std::optional<double> tau;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

inline SimulationSpec load_simulation(const Options& o) {
  SimulationSpec spec = o.config.empty() ? parse_simulation_spec(Json::object())
                                         : parse_simulation_spec(read_json_file(o.config));
  if (o.seed) spec.synth.seed = *o.seed;
  if (o.tau) spec.gate.tau = *o.tau;
  spec.gate.validate();
  return spec;
}

inline int run_stage1_cmd(const Options& o) {
  const SequenceManifest m = load_manifest(o.manifest);
  const Stage1Report r = run_stage1_pipeline(m);
  log::info("selected scale k*=" + std::to_string(r.stage1.selection.k_star));
  write_report(o.out, make_run_report("stage1", Json{{"config", manifest_echo(m)}, {"stage1", to_json(r)}}));
  return kExitOk;
}

inline int run_gate_cmd(const Options& o) {
  const SequenceManifest m = load_manifest(o.manifest);
  GateConfig cfg = m.gate;
  if (o.tau) cfg.tau = *o.tau;
  const GateRun run = run_gate_pipeline(m, cfg);
  Json body{{"config", manifest_echo(m)},
            {"tau", cfg.tau},
            {"decisions", to_json(run.decisions)},
            {"rejection_rate", run.rejection_rate()},
            {"final_bank_frames", run.final_bank_frames}};
  if (run.metrics) body["metrics"] = to_json(*run.metrics);
  write_report(o.out, make_run_report("gate", std::move(body)));
  return kExitOk;
}

inline int run_simulate_cmd(const Options& o) {
  const SimulationSpec spec = load_simulation(o);
  const auto seq = synth_sequence(spec.synth);
  const PromptSet prompts = spec.prompts();
  Json body{{"config", to_json(spec)}};
  std::string csv;
  if (o.policy.empty()) {
    const auto cmp = compare_policies(seq, prompts, spec.gate, spec.eps, spec.standin);
    body["greedy"] = to_json(cmp.greedy);
    body["gated"] = to_json(cmp.gated);
    body["delta"] = to_json(cmp.delta);
    csv = policy_csv({&cmp.greedy, &cmp.gated});
  } else {
    const Policy policy = o.policy == "greedy" ? Policy::Greedy : Policy::Gated;
    const auto rep = propagate(seq, prompts, policy, spec.gate, spec.eps, spec.standin);
    body[std::string(to_string(policy))] = to_json(rep);
    csv = policy_csv({&rep});
  }
  write_report(o.out, make_run_report("simulate", std::move(body)));
  write_file_atomic(csv_path_for(o.out), csv);
  return kExitOk;
}

inline int run_eval_cmd(const Options& o) {
  const EvalResult r = evaluate_directories(o.pred, o.gt, o.tol);
  Json body{{"names", r.names}, {"tolerance", r.tolerance}, {"metrics", to_json(r.metrics)}};
  write_report(o.out, make_run_report("eval", std::move(body)));
  write_file_atomic(csv_path_for(o.out), metrics_csv(r.names, r.metrics));
  return kExitOk;
}

// The stream fixture is a rank-2 tensor: row 0 is the anchor descriptor,
// rows 1.. are the per-frame descriptors.
inline int run_sweep_cmd(const Options& o) {
  require(o.stream.empty() || o.config.empty(), ErrorCode::BadConfig, "pass either --stream or --config, not both");
  const std::vector<double> taus = parse_taus(o.taus);
  Json rows = Json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "tau,rejection_rate,mean_dice,mean_asd\n";

  if (!o.stream.empty()) {
    const Tensor t = read_tensor(o.stream);
    require(t.rank() == 2 && t.shape[0] >= 2, ErrorCode::ShapeMismatch,
            "stream must be a rank-2 tensor with an anchor row and at least one descriptor");
    const std::size_t d = t.shape[1];
    auto row = [&](std::size_t i) {
      return EmbeddingVector(std::vector<double>(t.data.begin() + i * d, t.data.begin() + (i + 1) * d));
    };
    const EmbeddingVector anchor = row(0);
    std::vector<EmbeddingVector> descriptors;
    for (std::size_t i = 1; i < t.shape[0]; ++i) descriptors.push_back(row(i));
    for (double tau : taus) {
      GateConfig cfg;
      cfg.tau = tau;
      cfg.validate();
      const double rate = rejection_rate(run_gated_stream(descriptors, anchor, cfg));
      rows.push_back(Json{{"tau", tau}, {"rejection_rate", rate}, {"mean_dice", nullptr}, {"mean_asd", nullptr}});
      csv << tau << ',' << rate << ",,\n";
    }
  } else {
    SimulationSpec spec = load_simulation(o);
    const auto seq = synth_sequence(spec.synth);
    const PromptSet prompts = spec.prompts();
    for (double tau : taus) {
      spec.gate.tau = tau;
      const auto rep = propagate(seq, prompts, Policy::Gated, spec.gate, spec.eps, spec.standin);
      rows.push_back(Json{{"tau", tau},
                          {"rejection_rate", rep.rejection_rate()},
                          {"mean_dice", rep.metrics.mean.dice},
                          {"mean_asd", rep.metrics.mean.asd}});
      csv << tau << ',' << rep.rejection_rate() << ',' << rep.metrics.mean.dice << ',' << rep.metrics.mean.asd << '\n';
    }
  }
  write_report(o.out, make_run_report("sweep-tau", Json{{"rows", rows}}));
  write_file_atomic(csv_path_for(o.out), csv.str());
  return kExitOk;
}

inline int cli_dispatch(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"seedgate: scale-space prompting and reliability-gated memory engine", "seedgate"};
  app.require_subcommand(1);
  Options o;

  auto* stage1 = app.add_subcommand("stage1", "select the crop scale and synthesize point prompts");
  stage1->add_option("--manifest", o.manifest, "sequence manifest (JSON)")->required();
  stage1->add_option("--out", o.out, "report path (JSON)")->required();

  auto* gate = app.add_subcommand("gate", "replay recorded predictions through the memory write gate");
  gate->add_option("--manifest", o.manifest, "sequence manifest (JSON)")->required();
  gate->add_option("--out", o.out, "decision log path (JSON)")->required();
  gate->add_option("--tau", o.tau, "reliability threshold override");

  auto* simulate = app.add_subcommand("simulate", "run the synthetic greedy-vs-gated propagation experiment");
  simulate->add_option("--config", o.config, "simulation config (JSON); defaults to the reference config");
  simulate->add_option("--out", o.out, "report path (JSON); per-frame CSV is written next to it")->required();
  simulate->add_option("--seed", o.seed, "noise seed override");
  simulate->add_option("--tau", o.tau, "reliability threshold override");
  simulate->add_option("--policy", o.policy, "run a single policy")->check(CLI::IsMember({"greedy", "gated"}));

  auto* eval = app.add_subcommand("eval", "score prediction masks against ground truth");
  eval->add_option("--pred", o.pred, "directory of predicted mask fixtures")->required();
  eval->add_option("--gt", o.gt, "directory of ground-truth mask fixtures")->required();
  eval->add_option("--out", o.out, "report path (JSON); CSV is written next to it")->required();
  eval->add_option("--tol", o.tol, "boundary tolerance in pixels (default 0.8% of the diagonal, rounded up)");

  auto* sweep = app.add_subcommand("sweep-tau", "rejection rate (and simulated quality) across thresholds");
  sweep->add_option("--stream", o.stream, "descriptor stream fixture (row 0 = anchor)");
  sweep->add_option("--config", o.config, "simulation config (JSON) to sweep instead of a stream");
  sweep->add_option("--seed", o.seed, "noise seed override for --config");
  sweep->add_option("--taus", o.taus, "comma-separated thresholds");
  sweep->add_option("--out", o.out, "report path (JSON)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (stage1->parsed()) return run_stage1_cmd(o);
    if (gate->parsed()) return run_gate_cmd(o);
    if (simulate->parsed()) return run_simulate_cmd(o);
    if (eval->parsed()) return run_eval_cmd(o);
    if (sweep->parsed()) return run_sweep_cmd(o);
    fail(ErrorCode::UnknownSubcommand, "no subcommand given");
  } catch (const Error& e) {
    log::error(e.what());
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::IoFailure ? kExitRuntime : kExitValidation;
  } catch (const std::exception& e) {
    log::error(e.what());
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

inline int cli_dispatch(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(std::move(args), out, err);
}

}  // namespace seedgate::cli
