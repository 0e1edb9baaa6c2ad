#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hybridexec/config_io.hpp"
#include "hybridexec/impact.hpp"
#include "hybridexec/riccati.hpp"

using namespace hybridexec;

namespace {

MarketConfig one_maker(double theta, double qbar1, double qbar0, double gamma,
                       double phi) {
  MarketConfig c;
  c.makers = {{theta, 0.0, qbar1, qbar0, 1.0}};
  c.gamma = gamma;
  c.eta = 2.5e-6;
  c.phi = phi;
  c.sigma_s = 0.5;
  c.s0 = 50.0;
  c.x0 = 10000.0;
  c.horizon = 1.0;
  c.beta = 2.5e-4;
  return c;
}

}  // namespace

TEST_CASE("rate schedule bookkeeping") {
  const auto s = RateSchedule::constant_execution(100.0, 0.5);
  CHECK(s.rate(0.2) == 100.0);
  CHECK(s.rate(0.7) == 0.0);
  CHECK(s.total_volume() == 50.0);
}

TEST_CASE("expected state at equilibrium stays put") {
  MarketConfig c = one_maker(2.0, 0.0, 0.0, 0.0, 1e-3);
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const RateSchedule off{{}};
  const auto traj = expected_state(off, m, c.x0, uniform_grid(2.0, 101));
  for (const auto& x : traj) {
    CHECK(x[0] == 0.0);
    CHECK(x[1] == c.x0);
  }
}

TEST_CASE("unforced single maker follows the scalar ODE solution") {
  const double theta = 2.0, qbar0 = 0.4;
  MarketConfig c = one_maker(theta, 0.0, qbar0, 0.0, 1e-3);
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const RateSchedule off{{}};
  const auto grid = uniform_grid(2.0, 401);
  const auto traj = expected_state(off, m, c.x0, grid);
  for (size_t i = 0; i < grid.size(); i += 40) {
    const double exact = qbar0 * (1.0 - std::exp(-theta * grid[i]));
    CHECK(traj[i][0] == Catch::Approx(exact).margin(1e-10));
  }
}

TEST_CASE("RK4 on the expected state is 4th order") {
  MarketConfig c = one_maker(3.0, 0.01, 0.1, 1e-6, 1e-3);
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const auto sched = RateSchedule::constant_execution(c.x0, 2.0);

  auto terminal = [&](int points) {
    return expected_state(sched, m, c.x0, uniform_grid(2.0, points)).back();
  };
  const VectorXd fine = terminal(3201);  // reference
  const double e1 = (terminal(101) - fine).norm();
  const double e2 = (terminal(201) - fine).norm();
  CHECK(e1 / e2 > 10.0);  // ~16x for a 4th-order method
}

TEST_CASE("impact curve basics") {
  SECTION("mu != 0 rejected") {
    MarketConfig c = one_maker(2.0, 0.0, 0.0, 1e-6, 1e-3);
    c.mu = 0.1;
    CHECK_THROWS_AS(impact_curve(RateSchedule{{}}, c, uniform_grid(1.0, 11)),
                    std::invalid_argument);
  }
  SECTION("phi = gamma = 0 gives the zero curve") {
    MarketConfig c = one_maker(2.0, 0.01, 0.1, 0.0, 0.0);
    const auto sched = RateSchedule::constant_execution(c.x0, 1.0);
    for (double v : impact_curve(sched, c, uniform_grid(2.0, 101)))
      CHECK(v == 0.0);
  }
  SECTION("phi = 0: linear during execution, flat after") {
    MarketConfig c = one_maker(2.0, 0.0, 0.0, 2.5e-7, 0.0);
    const double V = c.x0;
    const auto sched = RateSchedule::constant_execution(V, 1.0);
    const auto grid = uniform_grid(2.0, 201);
    const auto curve = impact_curve(sched, c, grid);
    for (size_t i = 0; i < grid.size(); ++i) {
      const double expected =
          -c.gamma * V * std::min(grid[i], 1.0);
      CHECK(curve[i] == Catch::Approx(expected).margin(1e-12 * c.gamma * V));
    }
  }
}

TEST_CASE("superposition at gamma = 0") {
  MarketConfig both = one_maker(1.0, 0.02, 0.1, 0.0, 1e-3);
  both.makers = {{1.0, 0.0, 0.02, 0.1, 0.6}, {4.0, 0.0, 0.005, 0.025, 0.4}};
  MarketConfig alone1 = both, alone2 = both;
  alone1.makers = {both.makers[0]};
  alone1.makers[0].weight = 1.0;
  alone2.makers = {both.makers[1]};
  alone2.makers[0].weight = 1.0;

  const auto sched = RateSchedule::constant_execution(both.x0, 1.0);
  const auto grid = uniform_grid(2.0, 201);
  const auto c0 = impact_curve(sched, both, grid);
  const auto c1 = impact_curve(sched, alone1, grid);
  const auto c2 = impact_curve(sched, alone2, grid);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(c0[i] == Catch::Approx(0.6 * c1[i] + 0.4 * c2[i]).margin(1e-12));
}

TEST_CASE("fit recovers its own model class") {
  std::vector<double> t = uniform_grid(3.0, 301);
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i)
    y[i] = -0.5 + 0.2 * std::exp(-1.7 * t[i]);
  const ExpFit fit = fit_exponential_decay(t, y, 0.0, -0.5);
  CHECK(fit.rate == Catch::Approx(1.7).epsilon(1e-6));
  CHECK(fit.r_squared >= 1.0 - 1e-10);
}

TEST_CASE("fit rejects pathological residuals") {
  std::vector<double> t = uniform_grid(1.0, 101);
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i) y[i] = std::sin(8.0 * t[i]);
  CHECK_THROWS_AS(fit_exponential_decay(t, y, 0.0, 0.0), FitInvalid);
}

TEST_CASE("single maker relaxes at its own rate; ensembles do not") {
  const double t_exec = 1.0, horizon = 2.0;
  const auto grid = uniform_grid(horizon, 2001);

  SECTION("n = 1, theta = 3") {
    MarketConfig c = one_maker(3.0, 1.0 / 300.0, 0.1 / 3.0, 0.0, 2.5e-4);
    const auto sched =
        RateSchedule::constant_execution(c.x0 / t_exec, t_exec);
    const auto curve = impact_curve(sched, c, grid);
    const double asym = impact_asymptote(sched, c);
    const ExpFit fit = fit_exponential_decay(grid, curve, 1.05, asym);
    CHECK(fit.rate == Catch::Approx(3.0).epsilon(1e-3));
    CHECK(fit.r_squared >= 0.999);
  }
  SECTION("n = 10 gamma-weighted ensemble") {
    MarketConfig c = table1_config(0.0, true);
    c.mu = 0.0;
    const auto sched =
        RateSchedule::constant_execution(c.x0 / t_exec, t_exec);
    const auto curve = impact_curve(sched, c, grid);
    const double asym = impact_asymptote(sched, c);
    const ExpFit fit = fit_exponential_decay(grid, curve, 1.05, asym);
    CHECK(fit.r_squared < 0.999);
  }
  SECTION("monotone relaxation after execution") {
    MarketConfig c = table1_config(0.0, false);  // qbar1 = 0
    const auto sched =
        RateSchedule::constant_execution(c.x0 / t_exec, t_exec);
    const auto curve = impact_curve(sched, c, grid);
    const double asym = impact_asymptote(sched, c);
    double prev = 1e300;
    for (size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] < t_exec) continue;
      const double d = std::abs(curve[i] - asym);
      CHECK(d <= prev * (1.0 + 1e-9));
      prev = d;
    }
  }
}
