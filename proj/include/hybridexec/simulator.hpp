#pragma once

// Monte Carlo engine for the execution state SDE with common random numbers
// across strategies: every strategy in a batch replays the identical per-path
// Brownian increments.  Steps use a Heun predictor-corrector, which for this
// additive-noise system is weak order 2 -- a plain Euler step leaves an O(dt)
// bias in expected functionals that is visible next to the Monte Carlo error
// when the trading rate front-loads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridexec/market.hpp"
#include "hybridexec/rng.hpp"
#include "hybridexec/strategies.hpp"

namespace hybridexec {

struct SimPath {
  std::vector<double> times;          // steps + 1
  std::vector<VectorXd> state;        // steps + 1, state = (Q_1..Q_n, X)
  std::vector<double> rate;           // steps, applied v (piecewise constant)
  std::vector<double> rate_node;      // steps + 1, v(t_k, x_k) at the nodes
  std::vector<double> price;          // steps + 1, fair price S
  std::vector<double> traded_price;   // steps, S~ = S - eta v at left points
  std::vector<double> dBq, dBx, dBs;  // steps, increments with variance dt

  int steps() const { return static_cast<int>(rate.size()); }
  double dt() const { return times[1] - times[0]; }
  double X(int k) const { return state[k][state[k].size() - 1]; }
  double terminal_position() const { return X(steps()); }
};

inline int step_count(double T, double dt) {
  const double s = T / dt;
  const long long k = std::llround(s);
  if (k < 1 || std::abs(s - static_cast<double>(k)) > 1e-9)
    throw std::invalid_argument("dt must divide the horizon");
  return static_cast<int>(k);
}

// One simulated path under the given strategy.  Each step predicts with an
// Euler stage, re-evaluates the strategy at the predicted endpoint, and
// applies the averaged rate / drift (Heun).  The stored per-step rate is the
// applied average, so Delta X = -v dt + m dB_X holds exactly and the P&L
// identities below stay discrete identities.  Increments are drawn from `g`;
// replaying the same stream reproduces the path bit for bit.
inline SimPath simulate_path(const Strategy& strategy, const StateMatrices& m,
                             const MarketConfig& c, double dt,
                             GaussianStream& g) {
  const int n = c.n();
  const int d = n + 1;
  const int steps = step_count(c.horizon, dt);
  const double sdt = std::sqrt(dt);

  SimPath p;
  p.times.resize(steps + 1);
  p.state.resize(steps + 1);
  p.rate.resize(steps);
  p.rate_node.resize(steps + 1);
  p.price.resize(steps + 1);
  p.traded_price.resize(steps);
  p.dBq.resize(steps);
  p.dBx.resize(steps);
  p.dBs.resize(steps);

  VectorXd x = VectorXd::Zero(d);
  x[n] = c.x0;
  const VectorXd nu = c.weights();

  double Bs = 0.0;
  p.times[0] = 0.0;
  p.state[0] = x;
  p.price[0] = c.s0;

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double v1 = strategy.rate(t, x);
    p.rate_node[k] = v1;
    const double dq = g() * sdt;
    const double dx = g() * sdt;
    const double ds = g() * sdt;
    p.dBq[k] = dq;
    p.dBx[k] = dx;
    p.dBs[k] = ds;

    VectorXd noise(2);
    noise << dq, dx;
    const VectorXd diffusion = m.Sigma * noise;
    const VectorXd xp = x + (m.A * x + m.a * v1 + m.b) * dt + diffusion;
    const double v2 = strategy.rate(t + dt, xp);
    const double v = 0.5 * (v1 + v2);
    p.rate[k] = v;
    p.traded_price[k] = p.price[k] - c.eta * v;
    x = x + (0.5 * m.A * (x + xp) + m.a * v + m.b) * dt + diffusion;
    if (!x.allFinite())
      throw std::runtime_error("simulate_path: non-finite state at step " +
                               std::to_string(k + 1));
    Bs += ds;

    const double qm = nu.dot(x.head(n));
    p.times[k + 1] = (k + 1) * dt;
    p.state[k + 1] = x;
    p.price[k + 1] = c.s0 + c.mu * p.times[k + 1] + c.sigma_s * Bs +
                     c.gamma * (x[n] - c.x0) - c.phi * qm;
  }
  p.rate_node[steps] = strategy.rate(c.horizon, x);
  return p;
}

// P&L from the definition: X(T)(S(T) - S(0)) + int (S(0) - S~) dX, with
// left-point S~ and dX carrying both the -v dt and m dB_X parts.
inline double pnl_definitional(const SimPath& p, const MarketConfig& c) {
  const double dt = p.dt();
  double acc = 0.0;
  for (int k = 0; k < p.steps(); ++k) {
    const double dX = -p.rate[k] * dt + c.m * p.dBx[k];
    acc += (c.s0 - p.traded_price[k]) * dX;
  }
  return p.terminal_position() * (p.price[p.steps()] - c.s0) + acc;
}

// P&L from the integrated expression (the cross-check route).
inline double pnl_closed_form(const SimPath& p, const MarketConfig& c) {
  const double dt = p.dt();
  const int n = c.n();
  double sqm = 0.0;
  for (const auto& mk : c.makers) sqm += mk.weight * mk.sigma_q;

  double acc = c.gamma * c.m * c.m * c.horizon;
  for (int k = 0; k < p.steps(); ++k) {
    const double v = p.rate[k];
    const VectorXd& x = p.state[k];
    const double X = x[n];
    double drift_q = 0.0;  // phi sum_i nu_i theta_i (qbar_i(t) - Q_i)
    for (int i = 0; i < n; ++i) {
      const auto& mk = c.makers[i];
      drift_q += mk.weight * mk.theta * (mk.qbar1 * v + mk.qbar0 - x[i]);
    }
    acc += (-c.eta * v * v - c.gamma * v * X + (c.mu - c.phi * drift_q) * X) * dt;
    acc += -c.phi * sqm * X * p.dBq[k] +
           c.m * (c.eta * v + c.gamma * X) * p.dBx[k] +
           c.sigma_s * X * p.dBs[k];
  }
  return acc;
}

// Accumulated quadratic variation of the P&L process.
inline double quadratic_variation(const SimPath& p, const MarketConfig& c) {
  const double dt = p.dt();
  const int n = c.n();
  double sqm = 0.0;
  for (const auto& mk : c.makers) sqm += mk.weight * mk.sigma_q;
  const double cx = c.phi * c.phi * sqm * sqm + c.m * c.m * c.gamma * c.gamma +
                    c.sigma_s * c.sigma_s;
  double acc = 0.0;
  for (int k = 0; k < p.steps(); ++k) {
    const double v = p.rate[k];
    const double X = p.state[k][n];
    acc += (c.m * c.m * c.eta * c.eta * v * v +
            2.0 * c.m * c.m * c.eta * c.gamma * X * v + cx * X * X) *
           dt;
  }
  return acc;
}

// Pathwise LQ functional: x(T)' G x(T) + int (2v k'x - eta~ v^2 - psi X^2
// + mu X) du.  Its expectation under the optimal feedback equals w(t, x).
// The running cost is integrated with the trapezoid rule over the nodes,
// pairing each node state with the instantaneous node rate v(t_k, x_k):
// a left Riemann sum, or pairing nodes with the interval-average applied
// rate, both leave O(dt) biases that are large compared to the Monte Carlo
// error when the rate front-loads.  (This is an ordinary time integral,
// not a stochastic one, so the choice of rule is free.)
inline double objective_lq(const SimPath& p, const StateMatrices& m,
                           const EffectiveParams& eff, double mu) {
  const double dt = p.dt();
  const int n = m.n();
  const int steps = p.steps();
  auto f = [&](int j) {
    const double v = p.rate_node[j];
    const VectorXd& x = p.state[j];
    const double X = x[n];
    return 2.0 * v * m.k.dot(x) - eff.eta_tilde * v * v - eff.psi * X * X +
           mu * X;
  };
  double acc = 0.5 * (f(0) + f(steps));
  for (int k = 1; k < steps; ++k) acc += f(k);
  const VectorXd& xT = p.state[steps];
  return xT.dot(m.G * xT) + acc * dt;
}

struct PathOutcome {
  double pnl_def = 0.0;
  double pnl_cf = 0.0;
  double qv = 0.0;
  double terminal_position = 0.0;
  double block_penalty = 0.0;
  double objective_econ = 0.0;
  double objective_lq = 0.0;
};

inline PathOutcome evaluate_path(const SimPath& p, const MarketConfig& c,
                                 const StateMatrices& m,
                                 const EffectiveParams& eff) {
  PathOutcome o;
  o.pnl_def = pnl_definitional(p, c);
  o.pnl_cf = pnl_closed_form(p, c);
  o.qv = quadratic_variation(p, c);
  o.terminal_position = p.terminal_position();
  o.block_penalty = c.beta * o.terminal_position * o.terminal_position;
  o.objective_econ = o.pnl_def - o.block_penalty - c.lambda * o.qv;
  o.objective_lq = objective_lq(p, m, eff, c.mu);
  return o;
}

struct SimResult {
  std::vector<Strategy> strategies;
  std::vector<std::vector<PathOutcome>> outcomes;      // [strategy][path]
  std::vector<std::vector<double>> mean_position;      // [strategy][step]
  std::vector<double> times;
  std::uint64_t seed = 0;
  int n_paths = 0;
  double dt = 0.0;
};

// Runs every strategy over the same Brownian increments (one substream per
// path id).  Deterministic given (seed, n_paths, dt, config, strategies).
inline SimResult monte_carlo(const std::vector<Strategy>& strategies,
                             const MarketConfig& c, const StateMatrices& m,
                             const EffectiveParams& eff, int n_paths, double dt,
                             std::uint64_t seed) {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  const int steps = step_count(c.horizon, dt);
  const int ns = static_cast<int>(strategies.size());

  SimResult res;
  res.strategies = strategies;
  res.seed = seed;
  res.n_paths = n_paths;
  res.dt = dt;
  res.outcomes.assign(ns, {});
  for (auto& v : res.outcomes) v.reserve(n_paths);
  res.mean_position.assign(ns, std::vector<double>(steps + 1, 0.0));
  res.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) res.times[k] = k * dt;

  for (int path = 0; path < n_paths; ++path) {
    for (int s = 0; s < ns; ++s) {
      GaussianStream g(seed, static_cast<std::uint64_t>(path));  // CRN replay
      const SimPath p = simulate_path(strategies[s], m, c, dt, g);
      res.outcomes[s].push_back(evaluate_path(p, c, m, eff));
      for (int k = 0; k <= steps; ++k)
        res.mean_position[s][k] += (p.X(k) - res.mean_position[s][k]) /
                                   static_cast<double>(path + 1);
    }
  }
  return res;
}

// One row per path per strategy.
inline void write_outcomes_csv(const SimResult& res, std::ostream& out) {
  out << "strategy,path,pnl_def,pnl_cf,qv,terminal_position,block_penalty,"
         "objective_econ,objective_lq\n";
  out.precision(17);
  for (size_t s = 0; s < res.outcomes.size(); ++s)
    for (size_t p = 0; p < res.outcomes[s].size(); ++p) {
      const auto& o = res.outcomes[s][p];
      out << res.strategies[s].name() << "," << p << "," << o.pnl_def << ","
          << o.pnl_cf << "," << o.qv << "," << o.terminal_position << ","
          << o.block_penalty << "," << o.objective_econ << ","
          << o.objective_lq << "\n";
    }
}

inline void write_mean_trajectories_csv(const SimResult& res,
                                        std::ostream& out) {
  out << "t";
  for (const auto& s : res.strategies) out << "," << s.name();
  out << "\n";
  out.precision(17);
  for (size_t k = 0; k < res.times.size(); ++k) {
    out << res.times[k];
    for (const auto& traj : res.mean_position) out << "," << traj[k];
    out << "\n";
  }
}

}  // namespace hybridexec
