// plvar command line: learn sparse GVAR structures from CSV time series,
// simulate synthetic models, and evaluate estimates against ground truth or
// held-out data.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plvar/plvar.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;       // malformed or unusable input
constexpr int kExitDegenerate = 3;  // numerical degeneracy in the data
constexpr int kExitSimulation = 4;  // simulation could not produce a model

struct LearnArgs {
  std::string data_path;
  int max_lag = 5;
  double gamma = 0.5;
  bool no_center = false;
  bool detrend = false;
  double delta = 1e-6;
  double jitter = 0.0;
  int threads = 1;
  std::string out_path = "model.json";
};

int run_learn(const LearnArgs& args) {
  plvar::TimeSeries series = plvar::read_csv(args.data_path);
  if (series.length() <= args.max_lag) {
    throw plvar::InputError("series has " + std::to_string(series.length()) +
                            " rows, needs more than max lag " +
                            std::to_string(args.max_lag));
  }
  if (args.detrend) series = plvar::detrend(series).series;
  if (!args.no_center) series = plvar::center(series).series;

  plvar::SearchOptions options{args.jitter, args.threads};
  plvar::LearnResult result = plvar::learn_structure(series, args.max_lag, args.gamma,
                                                     options);

  const auto fit_start = std::chrono::steady_clock::now();
  plvar::FitOptions fit_options;
  fit_options.delta = args.delta;
  auto [model, fit] = plvar::fit_parameters(series, result.structure, fit_options);
  result.timings.fit_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - fit_start)
                              .count();
  result.timings.total_ms += result.timings.fit_ms;
  result.model = model;

  plvar::ModelRecord record = plvar::record_of(model, result.structure, args.gamma);
  plvar::LearnDiagnostics diagnostics;
  diagnostics.objective_per_k = result.temporal.objective_per_k;
  diagnostics.loglik_trajectory = fit.loglik_trajectory;
  diagnostics.timings_ms = {{"temporal", result.timings.temporal_ms},
                            {"contemporaneous", result.timings.contemporaneous_ms},
                            {"fit", result.timings.fit_ms},
                            {"total", result.timings.total_ms}};
  record.diagnostics = std::move(diagnostics);
  plvar::write_model_json(record, args.out_path);

  std::cout << "selected lag   " << result.structure.k << "\n"
            << "n_t (temporal) " << result.structure.temporal_edges.size() << "\n"
            << "n_c (contemp)  " << result.structure.contemporaneous_edges.size() << "\n"
            << "fit iterations " << fit.iterations
            << (fit.converged ? "" : " (not converged)") << "\n"
            << "time total     " << result.timings.total_ms << " ms"
            << " (temporal " << result.timings.temporal_ms << ", contemporaneous "
            << result.timings.contemporaneous_ms << ", fit " << result.timings.fit_ms
            << ")\n"
            << "model written  " << args.out_path << "\n";
  if (!fit.converged) {
    std::cerr << "warning: parameter estimation hit the iteration cap\n";
  }
  return kExitOk;
}

struct SimulateArgs {
  int d = 1;
  int k = 1;
  double q = 0.0;
  int n = 100;
  std::uint64_t seed = 0;
  std::string out_prefix = "sim";
  int burn_in = 500;
  double coef_lo = 0.1;
  double coef_hi = 0.9;
  double contemp_strength = 0.3;
  double margin = 0.05;
  int max_attempts = 1000;
};

int run_simulate(const SimulateArgs& args) {
  plvar::SimConfig config;
  config.d = args.d;
  config.k = args.k;
  config.q = args.q;
  config.seed = args.seed;
  config.burn_in = args.burn_in;
  config.coef_lo = args.coef_lo;
  config.coef_hi = args.coef_hi;
  config.contemp_strength = args.contemp_strength;
  config.stability_margin = args.margin;
  config.max_attempts = args.max_attempts;

  plvar::SimulatedGvar sim = plvar::random_gvar(config);
  plvar::TimeSeries series =
      plvar::draw_series(sim.model, args.n, config.burn_in, config.seed);

  const std::string data_path = args.out_prefix + "_data.csv";
  const std::string truth_path = args.out_prefix + "_truth.json";
  plvar::write_csv(series, data_path);
  plvar::write_model_json(plvar::record_of(sim.model, sim.structure), truth_path);
  std::cout << "data  " << data_path << "  (" << series.length() << " x "
            << series.dims() << ")\n"
            << "truth " << truth_path << "  (" << sim.structure.temporal_edges.size()
            << " temporal, " << sim.structure.contemporaneous_edges.size()
            << " contemporaneous edges)\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string model_path;
  std::string truth_path;
  std::string test_path;
  std::string json_path;
};

int run_evaluate(const EvaluateArgs& args) {
  const plvar::ModelRecord record = plvar::read_model_json(args.model_path);
  nlohmann::json out;
  out["model"] = args.model_path;
  out["n_t"] = record.temporal_edges.size();
  out["n_c"] = record.contemporaneous_edges.size();
  std::cout << "n_t " << record.temporal_edges.size() << "  n_c "
            << record.contemporaneous_edges.size() << "\n";

  if (!args.truth_path.empty()) {
    const plvar::ModelRecord truth = plvar::read_model_json(args.truth_path);
    const plvar::StructureMetrics metrics =
        plvar::precision_recall(record.structure(), truth.structure());
    std::cout << "temporal       precision " << metrics.temporal.precision << "  recall "
              << metrics.temporal.recall << "\n"
              << "contemporaneous precision " << metrics.contemporaneous.precision
              << "  recall " << metrics.contemporaneous.recall << "\n";
    out["temporal"] = {{"precision", metrics.temporal.precision},
                       {"recall", metrics.temporal.recall}};
    out["contemporaneous"] = {{"precision", metrics.contemporaneous.precision},
                              {"recall", metrics.contemporaneous.recall}};
  }
  if (!args.test_path.empty()) {
    const plvar::TimeSeries test = plvar::read_csv(args.test_path);
    const double mse = plvar::one_step_mse(record.model(), test);
    std::cout << "one-step MSE   " << mse << "\n";
    out["mse"] = mse;
  }
  if (!args.json_path.empty()) {
    std::ofstream json_out(args.json_path);
    if (!json_out) throw plvar::InputError("cannot write '" + args.json_path + "'");
    json_out << out.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Gaussian VAR structure learning and estimation"};
  app.require_subcommand(1);

  LearnArgs learn;
  CLI::App* learn_cmd =
      app.add_subcommand("learn", "Learn structure and parameters from a CSV series");
  learn_cmd->add_option("data", learn.data_path, "input CSV (rows = time steps)")
      ->required();
  learn_cmd->add_option("--max-lag,-K", learn.max_lag, "largest lag to consider")
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--gamma,-g", learn.gamma, "structure prior strength")
      ->check(CLI::NonNegativeNumber);
  learn_cmd->add_flag("--no-center", learn.no_center, "skip column mean-centering");
  learn_cmd->add_flag("--detrend", learn.detrend, "remove per-column linear trend");
  learn_cmd->add_option("--delta", learn.delta, "parameter fit convergence threshold");
  learn_cmd->add_option("--jitter", learn.jitter,
                        "diagonal ridge for near-singular scatter matrices");
  learn_cmd->add_option("--threads,-t", learn.threads, "worker cap for per-node search")
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--out,-o", learn.out_path, "output model JSON path");

  SimulateArgs simulate;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Draw a random sparse GVAR model and a series");
  sim_cmd->add_option("--d,-d", simulate.d, "number of variables")->required();
  sim_cmd->add_option("--k,-k", simulate.k, "lag length")->required();
  sim_cmd->add_option("--q,-q", simulate.q, "target average temporal indegree")
      ->required();
  sim_cmd->add_option("--n,-n", simulate.n, "series length")->required();
  sim_cmd->add_option("--seed,-s", simulate.seed, "random seed");
  sim_cmd->add_option("--out,-o", simulate.out_prefix,
                      "output prefix for <prefix>_data.csv and <prefix>_truth.json");
  sim_cmd->add_option("--burn-in", simulate.burn_in, "discarded leading steps");
  sim_cmd->add_option("--coef-lo", simulate.coef_lo, "lag coefficient magnitude lower bound");
  sim_cmd->add_option("--coef-hi", simulate.coef_hi, "lag coefficient magnitude upper bound");
  sim_cmd->add_option("--contemp-strength", simulate.contemp_strength,
                      "precision off-diagonal magnitude");
  sim_cmd->add_option("--margin", simulate.margin, "stability margin");
  sim_cmd->add_option("--max-attempts", simulate.max_attempts,
                      "stabilization attempt cap");

  EvaluateArgs evaluate;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "Score a model against truth and/or test data");
  eval_cmd->add_option("model", evaluate.model_path, "model JSON")->required();
  eval_cmd->add_option("--truth", evaluate.truth_path, "ground-truth model JSON");
  eval_cmd->add_option("--test", evaluate.test_path, "held-out CSV for one-step MSE");
  eval_cmd->add_option("--json", evaluate.json_path, "write metrics JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (learn_cmd->parsed()) return run_learn(learn);
    if (sim_cmd->parsed()) return run_simulate(simulate);
    if (eval_cmd->parsed()) {
      if (evaluate.truth_path.empty() && evaluate.test_path.empty()) {
        std::cerr << "evaluate: provide --truth and/or --test\n";
        return kExitInput;
      }
      return run_evaluate(evaluate);
    }
  } catch (const plvar::SingularScatterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const plvar::SingularDesignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const plvar::DegenerateResidualsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const plvar::SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSimulation;
  } catch (const plvar::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
