// Command-line front end: config ingestion, Riccati solve, Monte Carlo
// strategy comparison, impact curves and hydrodynamic-limit checks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridexec/config_io.hpp"
#include "hybridexec/hydro.hpp"
#include "hybridexec/impact.hpp"
#include "hybridexec/market.hpp"
#include "hybridexec/riccati.hpp"
#include "hybridexec/simulator.hpp"
#include "hybridexec/stats.hpp"
#include "hybridexec/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hybridexec;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct RunOptions {
  int n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 12345;
  int grid_points = 2000;
  std::string output_dir;
  std::vector<std::string> strategies;
};

struct LoadedConfig {
  MarketConfig market;
  RunOptions run;
};

LoadedConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file: " + path);
  json j;
  in >> j;
  LoadedConfig lc;
  lc.market = market_config_from_json(j.contains("market") ? j.at("market") : j);
  if (j.contains("run")) {
    const auto& r = j.at("run");
    lc.run.n_paths = r.value("n_paths", lc.run.n_paths);
    lc.run.dt = r.value("dt", lc.run.dt);
    lc.run.seed = r.value("seed", lc.run.seed);
    lc.run.grid_points = r.value("grid_points", lc.run.grid_points);
    lc.run.output_dir = r.value("output_dir", lc.run.output_dir);
  }
  if (j.contains("strategies"))
    lc.run.strategies = j.at("strategies").get<std::vector<std::string>>();
  return lc;
}

fs::path resolve_outdir(const std::string& flag_out, const RunOptions& run) {
  std::string dir = flag_out;
  if (dir.empty()) dir = run.output_dir;
  if (dir.empty()) {
    const char* env = std::getenv("HYBRIDEXEC_OUT");
    dir = env ? env : "out";
  }
  fs::create_directories(dir);
  return dir;
}

int require_valid(const MarketConfig& market) {
  const ValidationReport rep = validate_config(market);
  if (!rep.config_ok) {
    std::cerr << "configuration invalid:\n" << rep.summary();
    return kExitValidation;
  }
  return 0;
}

// Solves R(t) by the linearized flow, falling back to direct integration if
// the flow matrix N(t) turns near singular; linear terms follow either way.
std::shared_ptr<RiccatiSolution> solve_full(const MarketConfig& market,
                                            const StateMatrices& mats,
                                            const EffectiveParams& eff,
                                            int grid_points) {
  const auto grid = uniform_grid(market.horizon, grid_points);
  RiccatiSolution sol;
  try {
    sol = solve_riccati_linearized(mats, eff, grid);
  } catch (const SolverError& e) {
    std::cerr << "linearized solve failed (" << e.what()
              << "); falling back to direct integration\n";
    sol = integrate_riccati_direct(mats, eff, grid);
  }
  solve_linear_terms(mats, eff, sol, market.mu);
  return std::make_shared<RiccatiSolution>(std::move(sol));
}

std::vector<Strategy> build_strategies(const std::vector<std::string>& names,
                                       const MarketConfig& market,
                                       const EffectiveParams& eff,
                                       const StateMatrices& mats,
                                       std::shared_ptr<RiccatiSolution> sol) {
  std::vector<Strategy> out;
  for (const auto& name : names)
    out.push_back(
        make_strategy(strategy_kind_from_string(name), market, eff, mats, sol));
  return out;
}

void export_metric(const std::vector<double>& samples, const std::string& stem,
                   const fs::path& outdir, bool figures) {
  {
    std::ofstream f(outdir / (stem + "_stats.json"));
    f << stats_json(summarize(samples)).dump(2) << "\n";
  }
  const Histogram h = histogram(samples, 60);
  {
    std::ofstream f(outdir / (stem + "_hist.csv"));
    write_histogram_csv(h, f);
  }
  const double bw = silverman_bandwidth(samples);
  std::vector<double> grid(256);
  const double lo = h.edges.front() - 3 * bw, hi = h.edges.back() + 3 * bw;
  for (size_t i = 0; i < grid.size(); ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (grid.size() - 1);
  {
    std::ofstream f(outdir / (stem + "_kde.csv"));
    write_kde_csv(grid, kde(samples, grid, bw), f);
  }
  if (figures)
    write_histogram_svg(samples, 60, stem, (outdir / (stem + ".svg")).string());
}

int cmd_solve(const std::string& config_path, const std::string& out_flag,
              int grid_override) {
  const LoadedConfig lc = load_run_config(config_path);
  if (int rc = require_valid(lc.market)) return rc;
  const fs::path outdir = resolve_outdir(out_flag, lc.run);

  const EffectiveParams eff = derive_effective_params(lc.market);
  const StateMatrices mats = build_state_matrices(lc.market, eff);
  const int gp = grid_override > 0 ? grid_override : lc.run.grid_points;
  auto sol = solve_full(lc.market, mats, eff, gp);

  write_solution_csv(*sol, (outdir / "riccati_solution.csv").string());

  VectorXd x0 = VectorXd::Zero(mats.dim());
  x0[mats.n()] = lc.market.x0;
  const double w0 = value_function(0.0, x0, *sol);
  json j;
  j["w0"] = w0;
  j["method"] = sol->method == RiccatiMethod::linearized ? "linearized" : "direct";
  j["grid_points"] = gp;
  std::ofstream(outdir / "value_at_origin.json") << j.dump(2) << "\n";
  std::cout << "w(0, initial state) = " << w0 << "\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_flag,
                RunOptions over, bool figures) {
  LoadedConfig lc = load_run_config(config_path);
  if (int rc = require_valid(lc.market)) return rc;
  if (over.n_paths > 0) lc.run.n_paths = over.n_paths;
  if (over.dt > 0) lc.run.dt = over.dt;
  if (over.seed != 0) lc.run.seed = over.seed;
  const fs::path outdir = resolve_outdir(out_flag, lc.run);

  if (lc.run.strategies.empty()) {
    std::cerr << "no strategies configured\n";
    return kExitValidation;
  }

  const EffectiveParams eff = derive_effective_params(lc.market);
  const StateMatrices mats = build_state_matrices(lc.market, eff);
  auto sol = solve_full(lc.market, mats, eff, lc.run.grid_points);
  const auto strategies =
      build_strategies(lc.run.strategies, lc.market, eff, mats, sol);

  const SimResult res = monte_carlo(strategies, lc.market, mats, eff,
                                    lc.run.n_paths, lc.run.dt, lc.run.seed);

  {
    std::ofstream f(outdir / "outcomes.csv");
    write_outcomes_csv(res, f);
  }
  {
    std::ofstream f(outdir / "mean_trajectories.csv");
    write_mean_trajectories_csv(res, f);
  }
  if (figures) {
    std::vector<SvgSeries> series;
    for (size_t s = 0; s < strategies.size(); ++s)
      series.push_back(
          {strategies[s].name(), res.times, res.mean_position[s]});
    write_line_chart_svg(series, "expected remaining position",
                         (outdir / "mean_trajectories.svg").string());
  }

  json summary;
  summary["seed"] = res.seed;
  summary["n_paths"] = res.n_paths;
  summary["dt"] = res.dt;
  for (size_t s = 0; s < strategies.size(); ++s) {
    const std::string name = strategies[s].name();
    std::vector<double> econ, lq, xT;
    for (const auto& o : res.outcomes[s]) {
      econ.push_back(o.objective_econ);
      lq.push_back(o.objective_lq);
      xT.push_back(o.terminal_position);
    }
    export_metric(econ, "objective_econ_" + name, outdir, figures);
    export_metric(lq, "objective_lq_" + name, outdir, figures);
    export_metric(xT, "terminal_position_" + name, outdir, figures);
    summary["strategies"][name]["objective_econ"] = stats_json(summarize(econ));
    summary["strategies"][name]["objective_lq"] = stats_json(summarize(lq));
    summary["strategies"][name]["terminal_position"] =
        stats_json(summarize(xT));
  }

  // Paired CRN differences of the LQ objective against the first strategy.
  std::cout << "paired LQ-objective differences vs " << strategies[0].name()
            << ":\n";
  for (size_t s = 1; s < strategies.size(); ++s) {
    std::vector<double> diff(res.outcomes[0].size());
    for (size_t p = 0; p < diff.size(); ++p)
      diff[p] = res.outcomes[0][p].objective_lq - res.outcomes[s][p].objective_lq;
    const SummaryStats d = summarize(diff);
    const double z = d.mean / d.std_error;
    std::cout << "  vs " << strategies[s].name() << ": mean " << d.mean
              << ", z = " << z << "\n";
    summary["dominance"][strategies[s].name()] = {{"mean_diff", d.mean},
                                                  {"z", z}};
  }
  std::ofstream(outdir / "summary.json") << summary.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_flag,
                 RunOptions over) {
  LoadedConfig lc = load_run_config(config_path);
  if (int rc = require_valid(lc.market)) return rc;
  if (over.n_paths > 0) lc.run.n_paths = over.n_paths;
  if (over.dt > 0) lc.run.dt = over.dt;
  if (over.seed != 0) lc.run.seed = over.seed;
  const fs::path outdir = resolve_outdir(out_flag, lc.run);
  if (lc.run.strategies.empty()) {
    std::cerr << "no strategies configured\n";
    return kExitValidation;
  }

  const EffectiveParams eff = derive_effective_params(lc.market);
  const StateMatrices mats = build_state_matrices(lc.market, eff);
  auto sol = solve_full(lc.market, mats, eff, lc.run.grid_points);
  const auto strategies =
      build_strategies(lc.run.strategies, lc.market, eff, mats, sol);
  const SimResult res = monte_carlo(strategies, lc.market, mats, eff,
                                    lc.run.n_paths, lc.run.dt, lc.run.seed);
  std::ofstream f(outdir / "outcomes.csv");
  write_outcomes_csv(res, f);
  std::cout << "wrote " << (outdir / "outcomes.csv").string() << "\n";
  return 0;
}

int cmd_impact(const std::string& config_path, const std::string& out_flag,
               double rate, double t_exec, double horizon, bool figures) {
  LoadedConfig lc = load_run_config(config_path);
  lc.market.mu = 0.0;  // impact curve is defined at zero drift
  if (int rc = require_valid(lc.market)) return rc;
  const fs::path outdir = resolve_outdir(out_flag, lc.run);

  if (rate <= 0) rate = lc.market.x0 / lc.market.horizon;
  if (t_exec <= 0) t_exec = lc.market.horizon;
  if (horizon <= 0) horizon = 3.0 * t_exec;

  const auto schedule = RateSchedule::constant_execution(rate, t_exec);
  const auto grid = uniform_grid(horizon, 2001);
  const auto curve = impact_curve(schedule, lc.market, grid);

  {
    std::ofstream f(outdir / "impact_curve.csv");
    f << "t,impact\n";
    f.precision(17);
    for (size_t i = 0; i < grid.size(); ++i)
      f << grid[i] << "," << curve[i] << "\n";
  }
  if (figures)
    write_line_chart_svg({{"impact", grid, curve}}, "expected price impact",
                         (outdir / "impact_curve.svg").string());

  try {
    const double asym = impact_asymptote(schedule, lc.market);
    const ExpFit fit = fit_exponential_decay(
        grid, curve, t_exec + 0.05 * (horizon - t_exec), asym);
    std::cout << "post-execution exponential fit: rate = " << fit.rate
              << ", R^2 = " << fit.r_squared << "\n";
  } catch (const FitInvalid& e) {
    std::cout << "exponential fit not applicable: " << e.what() << "\n";
  }
  return 0;
}

int cmd_hydro(double A, double kappa, double nu, double mu, double sigma,
              std::vector<double> h_list, double T, int n_paths,
              std::uint64_t seed, const std::string& out_flag) {
  QuoteModelParams p{A, kappa, nu, mu, sigma};
  RunOptions run;
  const fs::path outdir = resolve_outdir(out_flag, run);
  if (h_list.empty()) h_list = {0.5, 0.25, 0.125};
  const HydroReport rep = convergence_check(p, h_list, T, n_paths, seed);
  const json j = hydro_report_json(rep);
  std::ofstream(outdir / "hydro_report.json") << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal-execution engine under hybrid price impact"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  RunOptions over;
  over.n_paths = 0;
  over.dt = 0;
  over.seed = 0;
  int grid_override = 0;
  bool figures = false;
  double imp_rate = 0, imp_texec = 0, imp_horizon = 0;
  double hy_A = 10, hy_kappa = 2, hy_nu = 0.5, hy_mu = 2, hy_sigma = 2,
         hy_T = 1;
  int hy_paths = 10000;
  std::uint64_t hy_seed = 7;
  std::vector<double> hy_h;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_flag, "output directory");
  };

  auto* solve = app.add_subcommand("solve", "solve the Riccati system");
  add_common(solve, true);
  solve->add_option("--grid-points", grid_override);

  auto* compare = app.add_subcommand("compare", "full strategy comparison");
  add_common(compare, true);
  compare->add_option("--paths", over.n_paths);
  compare->add_option("--dt", over.dt);
  compare->add_option("--seed", over.seed);
  compare->add_flag("--figures", figures, "emit SVG figures");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo, CSV only");
  add_common(simulate, true);
  simulate->add_option("--paths", over.n_paths);
  simulate->add_option("--dt", over.dt);
  simulate->add_option("--seed", over.seed);

  auto* impact = app.add_subcommand("impact", "expected impact curve");
  add_common(impact, true);
  impact->add_option("--rate", imp_rate, "execution rate (default x0/T)");
  impact->add_option("--texec", imp_texec, "execution end time");
  impact->add_option("--horizon", imp_horizon, "curve horizon");
  impact->add_flag("--figures", figures);

  auto* hydro = app.add_subcommand("hydro", "hydrodynamic-limit check");
  hydro->add_option("--A", hy_A);
  hydro->add_option("--kappa", hy_kappa);
  hydro->add_option("--nu", hy_nu);
  hydro->add_option("--mu", hy_mu);
  hydro->add_option("--sigma", hy_sigma);
  hydro->add_option("--jump-sizes", hy_h, "jump sizes h, decreasing");
  hydro->add_option("--T", hy_T);
  hydro->add_option("--paths", hy_paths);
  hydro->add_option("--seed", hy_seed);
  hydro->add_option("--out", out_flag);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config_path, out_flag, grid_override);
    if (compare->parsed())
      return cmd_compare(config_path, out_flag, over, figures);
    if (simulate->parsed()) return cmd_simulate(config_path, out_flag, over);
    if (impact->parsed())
      return cmd_impact(config_path, out_flag, imp_rate, imp_texec,
                        imp_horizon, figures);
    if (hydro->parsed())
      return cmd_hydro(hy_A, hy_kappa, hy_nu, hy_mu, hy_sigma, hy_h, hy_T,
                       hy_paths, hy_seed, out_flag);
  } catch (const ClosedFormUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
