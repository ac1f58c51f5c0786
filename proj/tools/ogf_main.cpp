#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ogf/ann.hpp"
#include "ogf/ccp.hpp"
#include "ogf/error.hpp"
#include "ogf/model.hpp"
#include "ogf/network.hpp"
#include "ogf/pipeline.hpp"
#include "ogf/synthetic.hpp"
#include "ogf/text.hpp"

namespace {

using namespace ogf;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw Error("write to '" + path + "' failed");
}

struct Globals {
  std::uint64_t seed = 1;
  std::string config;
  std::string out;
  int workers = 1;

  CcpConfig ccp() const { return config.empty() ? CcpConfig{} : parse_ccp_config(read_file(config)); }
};

std::vector<Scenario> load_scenarios(const GasNetwork& net, const std::string& path) {
  return read_scenarios_csv(net, read_file(path));
}

Scenario pick_scenario(const GasNetwork& net, const std::string& path, int id, bool has_id) {
  const std::vector<Scenario> all = load_scenarios(net, path);
  if (all.empty()) throw Error("scenario file '" + path + "' is empty");
  if (!has_id) return all.front();
  for (const Scenario& s : all) {
    if (s.id == id) return s;
  }
  throw Error("scenario " + std::to_string(id) + " not found in '" + path + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (std::string_view part : split(text, ',')) out.push_back(static_cast<int>(parse_double(part)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warm-started convex-concave optimal gas flow toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->default_val(1);
  app.add_option("--config", g.config, "JSON file with CCP parameter overrides");
  app.add_option("--out", g.out, "Output path (stdout when omitted)");
  app.add_option("--workers", g.workers, "Worker threads")->default_val(1)->check(CLI::PositiveNumber);

  // gen-net
  auto* gen = app.add_subcommand("gen-net", "Emit a network document")->fallthrough();
  std::string gen_preset;
  SyntheticSpec gen_spec;
  gen->add_option("--preset", gen_preset, "t1, t2, net7 or net20");
  gen->add_option("--nodes", gen_spec.nodes, "Node count for a custom synthetic network");
  gen->add_option("--sources", gen_spec.sources, "Source count");
  gen->add_option("--compressors", gen_spec.compressors, "Compressor count");
  gen->add_option("--loops", gen_spec.loops, "Extra pipelines closing loops");
  gen->add_option("--pressure-floor", gen_spec.pressure_floor, "pi_min as a fraction of the operating pressure");
  gen->add_option("--pressure-ceiling", gen_spec.pressure_ceiling, "pi_max as a fraction of the operating pressure");
  gen->add_option("--name", gen_spec.name, "Network name")->default_val("custom");

  // sample
  auto* sample = app.add_subcommand("sample", "Draw load scenarios as CSV")->fallthrough();
  std::string sample_net;
  int sample_count = 50;
  double sample_fluct = 0.1;
  int sample_horizon = 1;
  sample->add_option("--network", sample_net, "Network name or file")->required();
  sample->add_option("--count", sample_count, "Number of scenarios")->default_val(50)->check(CLI::PositiveNumber);
  sample->add_option("--fluctuation", sample_fluct, "Load multipliers drawn from [1-f, 1+f]")->default_val(0.1);
  sample->add_option("--horizon", sample_horizon, "Time slots")->default_val(1)->check(CLI::PositiveNumber);

  // presolve
  auto* pre = app.add_subcommand("presolve", "Multi-start cold CCP over scenarios; emits a dataset CSV")->fallthrough();
  std::string pre_net;
  std::string pre_scen;
  int pre_restarts = 3;
  double pre_test = 0.2;
  pre->add_option("--network", pre_net, "Network name or file")->required();
  pre->add_option("--scenarios", pre_scen, "Scenario CSV")->required();
  pre->add_option("--restarts", pre_restarts, "Cold restarts per scenario")->default_val(3)->check(CLI::PositiveNumber);
  pre->add_option("--test-fraction", pre_test, "Held-out share of rows")->default_val(0.2);

  // train
  auto* tr = app.add_subcommand("train", "Train the pressure predictor on a dataset")->fallthrough();
  std::string tr_data;
  std::string tr_hidden;
  TrainConfig tr_cfg;
  tr->add_option("--dataset", tr_data, "Dataset CSV from presolve")->required();
  tr->add_option("--hidden", tr_hidden, "Hidden widths, comma separated (default 2 x nodes)");
  tr->add_option("--epochs", tr_cfg.epochs, "Training epochs")->default_val(tr_cfg.epochs);
  tr->add_option("--eta", tr_cfg.eta, "Learning rate")->default_val(tr_cfg.eta);
  tr->add_option("--batch-size", tr_cfg.batch_size, "Minibatch size")->default_val(tr_cfg.batch_size);
  tr->add_option("--decay", tr_cfg.decay, "RMSprop decay")->default_val(tr_cfg.decay);

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one scenario with CCP; prints the result JSON")->fallthrough();
  std::string solve_net;
  std::string solve_scen;
  std::string solve_model;
  int solve_id = 0;
  solve->add_option("--network", solve_net, "Network name or file")->required();
  auto* solve_scen_opt = solve->add_option("--scenario", solve_scen, "Scenario CSV");
  auto* solve_id_opt = solve->add_option("--scenario-id", solve_id, "Scenario id inside the file (default: first)");
  solve->add_option("--warm", solve_model, "Model file for a warm start (cold start otherwise)");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark cold/warm CCP and the oracle")->fallthrough();
  std::string bench_net;
  std::string bench_scen;
  std::string bench_model;
  std::string bench_methods = "cold-ccp,warm-ccp";
  std::string bench_csv;
  int bench_count = 50;
  double bench_fluct = 0.1;
  int bench_horizon = 1;
  int bench_restarts = 3;
  bool bench_no_timing = false;
  bench->add_option("--network", bench_net, "Network name or file")->required();
  bench->add_option("--scenarios", bench_scen, "Scenario CSV (sampled with --seed when omitted)");
  bench->add_option("--count", bench_count, "Sampled scenario count")->default_val(50)->check(CLI::PositiveNumber);
  bench->add_option("--fluctuation", bench_fluct, "Sampled load fluctuation")->default_val(0.1);
  bench->add_option("--horizon", bench_horizon, "Sampled time slots")->default_val(1)->check(CLI::PositiveNumber);
  bench->add_option("--model", bench_model, "Model file (required for warm-ccp)");
  bench->add_option("--methods", bench_methods, "Comma list of cold-ccp, warm-ccp, oracle")->default_val(bench_methods);
  bench->add_option("--baseline-restarts", bench_restarts, "Extra cold restarts for the best-known objective")
      ->default_val(3);
  bench->add_option("--csv", bench_csv, "Also write the per-run table as CSV");
  bench->add_flag("--no-timing", bench_no_timing, "Zero wall times for byte-stable output");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Brute-force grid reference for tiny networks")->fallthrough();
  std::string orc_net;
  std::string orc_scen;
  int orc_id = 0;
  double orc_res = 1e-3;
  orc->add_option("--network", orc_net, "Network name or file")->required();
  orc->add_option("--scenario", orc_scen, "Scenario CSV (nominal loads when omitted)");
  auto* orc_id_opt = orc->add_option("--scenario-id", orc_id, "Scenario id inside the file");
  orc->add_option("--resolution", orc_res, "Grid step")->default_val(1e-3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      GasNetwork net = [&] {
        if (!gen_preset.empty()) return resolve_network(gen_preset);
        gen_spec.seed = g.seed;
        return generate_network(gen_spec);
      }();
      emit(serialize_network(net), g.out);
    } else if (sample->parsed()) {
      const GasNetwork net = resolve_network(sample_net);
      emit(write_scenarios_csv(net, sample_scenarios(net, sample_count, sample_fluct, sample_horizon, g.seed)), g.out);
    } else if (pre->parsed()) {
      const GasNetwork net = resolve_network(pre_net);
      std::vector<Scenario> scenarios = load_scenarios(net, pre_scen);
      PresolveConfig pc;
      pc.restarts = pre_restarts;
      pc.seed = g.seed;
      pc.workers = g.workers;
      pc.ccp = g.ccp();
      fill_initial_linepack(net, scenarios, pc);
      Dataset data = build_training_set(net, scenarios, pc);
      if (pre_test > 0.0) split_dataset(data, pre_test, g.seed);
      std::cerr << "presolve: " << data.size() << " rows, " << data.dropped << " dropped\n";
      emit(dataset_to_csv(data), g.out);
    } else if (tr->parsed()) {
      Dataset data = dataset_from_csv(read_file(tr_data));
      if (data.train_rows.empty()) split_dataset(data, 0.2, g.seed);
      tr_cfg.seed = g.seed;
      const FitResult fit = fit_pressure_model(data, ModelSpec{parse_int_list(tr_hidden)}, tr_cfg);
      const PressureModel& model = fit.model;
      const MaeReport mae = evaluate_mae([&](const Eigen::VectorXd& x) { return model.predict(x); }, data);
      std::cerr << "train: test MAE " << format_double(mae.average) << '\n';
      emit(write_model(model), g.out);
    } else if (solve->parsed()) {
      const GasNetwork net = resolve_network(solve_net);
      std::vector<Scenario> scenarios{solve_scen_opt->count() > 0
                                          ? pick_scenario(net, solve_scen, solve_id, solve_id_opt->count() > 0)
                                          : nominal_scenario(net)};
      PresolveConfig pc;
      pc.seed = g.seed;
      pc.ccp = g.ccp();
      fill_initial_linepack(net, scenarios, pc);
      const ProblemInstance instance = build_instance(net, scenarios.front());
      LinearizationPoint start;
      if (!solve_model.empty()) {
        const PressureModel model = read_model(read_file(solve_model));
        start = warm_start_from_pressures(instance, model.predict_profile(scenarios.front()));
      } else {
        start = cold_start(instance, scenario_cold_seed(g.seed, scenarios.front().id, 0));
      }
      const CcpResult result = run_ccp(instance, start, pc.ccp);
      emit(ccp_result_to_json(instance, result), g.out);
      if (result.status != CcpStatus::converged) return 3;
    } else if (bench->parsed()) {
      const GasNetwork net = resolve_network(bench_net);
      std::vector<Scenario> scenarios = bench_scen.empty()
                                            ? sample_scenarios(net, bench_count, bench_fluct, bench_horizon, g.seed)
                                            : load_scenarios(net, bench_scen);
      BenchmarkConfig bc;
      bc.methods.clear();
      for (std::string_view m : split(bench_methods, ',')) bc.methods.push_back(parse_method(m));
      bc.ccp = g.ccp();
      bc.seed = g.seed;
      bc.workers = g.workers;
      bc.baseline_restarts = bench_restarts;
      PresolveConfig pc;
      pc.seed = g.seed;
      pc.ccp = bc.ccp;
      fill_initial_linepack(net, scenarios, pc);
      std::optional<PressureModel> model;
      if (!bench_model.empty()) model = read_model(read_file(bench_model));
      const BenchmarkReport report = run_benchmark(net, scenarios, bc, model ? &*model : nullptr);
      emit(report_to_json(report, !bench_no_timing), g.out);
      if (!bench_csv.empty()) emit(report_to_csv(report, !bench_no_timing), bench_csv);
    } else if (orc->parsed()) {
      const GasNetwork net = resolve_network(orc_net);
      const Scenario scenario =
          orc_scen.empty() ? nominal_scenario(net) : pick_scenario(net, orc_scen, orc_id, orc_id_opt->count() > 0);
      const OracleResult r = brute_force_oracle(net, scenario, orc_res);
      nlohmann::ordered_json doc;
      doc["objective"] = r.objective;
      doc["resolution"] = r.resolution;
      doc["evaluations"] = r.evaluations;
      nlohmann::ordered_json pressures = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < net.node_count(); ++i) pressures[net.nodes()[i].id] = r.pressures[i];
      doc["pressures"] = pressures;
      nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
      for (std::size_t s = 0; s < net.sources().size(); ++s) outputs[net.sources()[s].id] = r.source_outputs[s];
      doc["source_outputs"] = outputs;
      emit(doc.dump(2) + "\n", g.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
