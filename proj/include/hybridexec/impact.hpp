#pragma once

// Deterministic expected price-impact trajectory of a meta-order: the state
// ODE in expectation, the implied impact curve at zero drift, and a
// single-exponential fit used to probe the relaxation shape.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hybridexec/market.hpp"

namespace hybridexec {

// Piecewise-constant trading rate: rate(t) = pieces[j].rate for
// t < pieces[j].t_end (pieces sorted), 0 beyond the last piece.
struct RateSchedule {
  struct Piece {
    double t_end;
    double rate;
  };
  std::vector<Piece> pieces;

  static RateSchedule constant_execution(double rate, double t_exec) {
    return {{{t_exec, rate}}};
  }

  double rate(double t) const {
    for (const auto& p : pieces)
      if (t < p.t_end) return p.rate;
    return 0.0;
  }
  double total_volume() const {
    double v = 0.0, t = 0.0;
    for (const auto& p : pieces) {
      v += p.rate * (p.t_end - t);
      t = p.t_end;
    }
    return v;
  }
};

// RK4 on dx/dt = A x + a v(t) + b from x(0) = (0..0, x0).
inline std::vector<VectorXd> expected_state(const RateSchedule& schedule,
                                            const StateMatrices& m, double x0,
                                            const std::vector<double>& grid) {
  const int d = m.dim();
  std::vector<VectorXd> traj(grid.size());
  VectorXd x = VectorXd::Zero(d);
  x[d - 1] = x0;
  traj[0] = x;
  // The rate is piecewise constant, so each step reads it once at the step
  // midpoint: stages at a breakpoint shared with the grid would otherwise
  // mix the two pieces and degrade the order.
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i];
    const double h = grid[i + 1] - grid[i];
    const double v = schedule.rate(t + 0.5 * h);
    auto f = [&](const VectorXd& y) -> VectorXd {
      return m.A * y + m.a * v + m.b;
    };
    const VectorXd k1 = f(x);
    const VectorXd k2 = f(x + 0.5 * h * k1);
    const VectorXd k3 = f(x + 0.5 * h * k2);
    const VectorXd k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    traj[i + 1] = x;
  }
  return traj;
}

// E[S(t) - s0] along the expected trajectory; defined at zero drift only.
inline std::vector<double> impact_curve(const RateSchedule& schedule,
                                        const MarketConfig& c,
                                        const std::vector<double>& grid) {
  if (c.mu != 0.0)
    throw std::invalid_argument("impact_curve requires mu = 0");
  const EffectiveParams eff = derive_effective_params(c);
  const StateMatrices m = build_state_matrices(c, eff);
  const auto traj = expected_state(schedule, m, c.x0, grid);
  const VectorXd nu = c.weights();
  const int n = c.n();
  std::vector<double> curve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i)
    curve[i] = c.gamma * (traj[i][n] - c.x0) - c.phi * nu.dot(traj[i].head(n));
  return curve;
}

// Analytic t -> infinity limit of the impact curve: X stops moving once the
// schedule ends and every Q_i relaxes to its upfront capacity.
inline double impact_asymptote(const RateSchedule& schedule,
                               const MarketConfig& c) {
  double qm = 0.0;
  for (const auto& mk : c.makers) qm += mk.weight * mk.qbar0;
  return -c.gamma * schedule.total_volume() - c.phi * qm;
}

struct FitInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExpFit {
  double rate = 0.0;
  double r_squared = 0.0;
};

// Least squares of log|curve - asymptote| against t on [t_start, end].
inline ExpFit fit_exponential_decay(const std::vector<double>& times,
                                    const std::vector<double>& curve,
                                    double t_start, double asymptote) {
  std::vector<double> ts, logs;
  double prev = std::numeric_limits<double>::infinity();
  int sign = 0;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_start) continue;
    const double d = curve[i] - asymptote;
    if (d == 0.0) continue;
    const int s = d > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign)
      throw FitInvalid("fit_exponential_decay: residual changes sign");
    const double mag = std::abs(d);
    if (mag > prev * (1.0 + 1e-9))
      throw FitInvalid("fit_exponential_decay: residual not monotone");
    prev = mag;
    ts.push_back(times[i]);
    logs.push_back(std::log(mag));
  }
  if (ts.size() < 3)
    throw FitInvalid("fit_exponential_decay: too few usable points");

  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += logs[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * logs[i];
    syy += logs[i] * logs[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - slope * (sty - st * sy / n);
  ExpFit fit;
  fit.rate = -slope;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace hybridexec
