#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hybridexec/config_io.hpp"
#include "hybridexec/simulator.hpp"

using namespace hybridexec;

namespace {

Strategy zero_rate() {
  return {StrategyKind::twap, [](double, const VectorXd&) { return 0.0; }};
}

}  // namespace

TEST_CASE("step_count rejects non-divisible steps") {
  CHECK(step_count(1.0, 1e-3) == 1000);
  CHECK_THROWS_AS(step_count(1.0, 3e-4), std::invalid_argument);
}

TEST_CASE("noiseless TWAP liquidates linearly") {
  MarketConfig c = table1_config(0.0, true);
  c.m = 0.0;
  for (auto& mk : c.makers) mk.sigma_q = 0.0;
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const Strategy s = make_strategy(StrategyKind::twap, c, eff, m);
  GaussianStream g(1, 0);
  const SimPath p = simulate_path(s, m, c, 1e-3, g);
  for (int k = 0; k <= p.steps(); k += 100) {
    const double t = p.times[k];
    CHECK(p.X(k) ==
          Catch::Approx(c.x0 * (1.0 - t / c.horizon)).margin(1e-9 * c.x0));
  }
  CHECK(std::abs(p.terminal_position()) < 1e-9 * c.x0);
}

TEST_CASE("unforced makers stay flat; forced makers relax to capacity") {
  SECTION("zero capacity, zero feedback") {
    MarketConfig c = table1_config(0.0, false);
    c.m = 0.0;
    for (auto& mk : c.makers) {
      mk.sigma_q = 0.0;
      mk.qbar0 = 0.0;
    }
    const EffectiveParams eff = derive_effective_params(c);
    const StateMatrices m = build_state_matrices(c, eff);
    GaussianStream g(1, 0);
    const SimPath p =
        simulate_path(make_strategy(StrategyKind::twap, c, eff, m), m, c,
                      1e-3, g);
    for (int k = 0; k <= p.steps(); k += 250)
      CHECK(p.state[k].head(10).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("OU mean with noise: Monte Carlo vs analytic") {
    MarketConfig c;
    c.makers = {{2.0, 0.3, 0.0, 0.5, 1.0}};  // theta=2, sigma=0.3, qbar0=0.5
    c.eta = 1.0;
    c.beta = 1.0;
    c.sigma_s = 1.0;
    c.x0 = 1.0;
    const EffectiveParams eff = derive_effective_params(c);
    const StateMatrices m = build_state_matrices(c, eff);
    const int n_paths = 10000;
    double mean = 0.0, m2 = 0.0;
    for (int path = 0; path < n_paths; ++path) {
      GaussianStream g(55, path);
      const SimPath p = simulate_path(zero_rate(), m, c, 1e-2, g);
      const double q = p.state.back()[0];
      mean += q;
      m2 += q * q;
    }
    mean /= n_paths;
    const double var = m2 / n_paths - mean * mean;
    const double se = std::sqrt(var / n_paths);
    const double target = 0.5 * (1.0 - std::exp(-2.0));
    CHECK(std::abs(mean - target) < 3.0 * se + 1e-2 * target);
  }
}

TEST_CASE("deterministic TWAP P&L matches the closed-form cost") {
  MarketConfig c = table1_config(0.0, false);
  c.m = 0.0;
  c.sigma_s = 0.0;
  c.phi = 0.0;
  for (auto& mk : c.makers) mk.sigma_q = 0.0;
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  GaussianStream g(1, 0);
  const SimPath p = simulate_path(make_strategy(StrategyKind::twap, c, eff, m),
                                  m, c, 1e-4, g);
  const double expected = -0.5 * c.gamma * c.x0 * c.x0 -
                          c.eta * c.x0 * c.x0 / c.horizon;
  CHECK(pnl_definitional(p, c) == Catch::Approx(expected).epsilon(1e-3));
  CHECK(pnl_closed_form(p, c) == Catch::Approx(expected).epsilon(1e-3));
}

TEST_CASE("quadratic variation trivial cases") {
  MarketConfig c = table1_config(0.0, false);
  SECTION("all noise coefficients zero") {
    MarketConfig z = c;
    z.m = 0.0;
    z.sigma_s = 0.0;
    z.phi = 0.0;
    for (auto& mk : z.makers) mk.sigma_q = 0.0;
    const EffectiveParams eff = derive_effective_params(z);
    const StateMatrices m = build_state_matrices(z, eff);
    GaussianStream g(1, 0);
    const SimPath p = simulate_path(
        make_strategy(StrategyKind::twap, z, eff, m), m, z, 1e-3, g);
    CHECK(quadratic_variation(p, z) == 0.0);
  }
  SECTION("frozen state integrand") {
    // v = 0 and no state noise: X stays at x0, Q at 0.
    MarketConfig z = c;
    z.m = 0.0;
    for (auto& mk : z.makers) {
      mk.sigma_q = 0.0;
      mk.qbar0 = 0.0;
    }
    const EffectiveParams eff = derive_effective_params(z);
    const StateMatrices m = build_state_matrices(z, eff);
    GaussianStream g(1, 0);
    const SimPath p = simulate_path(zero_rate(), m, z, 1e-3, g);
    const double cx = z.phi * z.phi * 0.0 + z.sigma_s * z.sigma_s;
    CHECK(quadratic_variation(p, z) ==
          Catch::Approx(cx * z.x0 * z.x0 * z.horizon).epsilon(1e-12));
  }
}

TEST_CASE("LQ penalty terms reproduce -lambda x QV integrand pathwise") {
  MarketConfig ca = table1_config(0.001, true);
  MarketConfig cn = ca;
  cn.lambda = 0.0;
  const EffectiveParams ea = derive_effective_params(ca);
  const EffectiveParams en = derive_effective_params(cn);
  const StateMatrices ma = build_state_matrices(ca, ea);
  const StateMatrices mn = build_state_matrices(cn, en);

  GaussianStream g(321, 5);
  const SimPath p = simulate_path(make_strategy(StrategyKind::twap, ca, ea, ma),
                                  ma, ca, 1e-3, g);
  const double sqm = ea.sigma_qm;
  const double cx = ca.phi * ca.phi * sqm * sqm +
                    ca.m * ca.m * ca.gamma * ca.gamma +
                    ca.sigma_s * ca.sigma_s;
  for (int k = 0; k < p.steps(); k += 37) {
    const double v = p.rate[k];
    const VectorXd& x = p.state[k];
    const double X = x[10];
    const double lhs = 2.0 * v * (ma.k - mn.k).dot(x) -
                       (ea.eta_tilde - en.eta_tilde) * v * v -
                       ea.psi * X * X;
    const double qv_int = ca.m * ca.m * ca.eta * ca.eta * v * v +
                          2.0 * ca.m * ca.m * ca.eta * ca.gamma * X * v +
                          cx * X * X;
    const double rhs = -ca.lambda * qv_int;
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("objective trivial cases") {
  MarketConfig c = table1_config(0.0, false);
  c.m = 0.0;
  c.sigma_s = 1e-300;  // effectively zero but sign-valid
  c.phi = 0.0;
  for (auto& mk : c.makers) mk.sigma_q = 0.0;
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  GaussianStream g(1, 0);
  const SimPath p = simulate_path(zero_rate(), m, c, 1e-2, g);
  const PathOutcome o = evaluate_path(p, c, m, eff);
  CHECK(o.terminal_position == c.x0);
  CHECK(o.block_penalty == Catch::Approx(c.beta * c.x0 * c.x0).epsilon(1e-12));
  CHECK(o.objective_econ ==
        Catch::Approx(-c.beta * c.x0 * c.x0).epsilon(1e-6));
}

TEST_CASE("martingale sanity of the integrated P&L") {
  MarketConfig c = table1_config(0.0, false);
  c.phi = 0.0;
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const int n_paths = 4000;
  double mean = 0.0, m2 = 0.0;
  for (int path = 0; path < n_paths; ++path) {
    GaussianStream g(808, path);
    const SimPath p = simulate_path(zero_rate(), m, c, 2e-3, g);
    const double v = pnl_closed_form(p, c);
    mean += v;
    m2 += v * v;
  }
  mean /= n_paths;
  const double se = std::sqrt((m2 / n_paths - mean * mean) / n_paths);
  const double target = c.gamma * c.m * c.m * c.horizon;
  CHECK(std::abs(mean - target) < 3.0 * se);
}

TEST_CASE("monte_carlo is deterministic and CRN-consistent") {
  MarketConfig c = table1_config(0.001, true);
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const std::vector<Strategy> strategies = {
      make_strategy(StrategyKind::twap, c, eff, m),
      make_strategy(StrategyKind::adapted_twap, c, eff, m)};
  const SimResult a = monte_carlo(strategies, c, m, eff, 20, 1e-2, 99);
  const SimResult b = monte_carlo(strategies, c, m, eff, 20, 1e-2, 99);
  for (size_t s = 0; s < strategies.size(); ++s)
    for (int p = 0; p < 20; ++p) {
      CHECK(a.outcomes[s][p].pnl_def == b.outcomes[s][p].pnl_def);
      CHECK(a.outcomes[s][p].objective_lq == b.outcomes[s][p].objective_lq);
    }
}

TEST_CASE("paired P&L computations converge together as dt shrinks") {
  MarketConfig c = table1_config(0.001, true);
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const Strategy s = make_strategy(StrategyKind::twap, c, eff, m);
  double prev = 0.0;
  int i = 0;
  for (double dt : {4e-3, 1e-3}) {
    double acc = 0.0;
    const int n_paths = 200;
    for (int path = 0; path < n_paths; ++path) {
      GaussianStream g(606, path);
      const SimPath p = simulate_path(s, m, c, dt, g);
      acc += std::abs(pnl_definitional(p, c) - pnl_closed_form(p, c));
    }
    acc /= n_paths;
    if (i++ > 0) CHECK(acc < prev);
    prev = acc;
  }
}
