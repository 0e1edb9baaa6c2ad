#pragma once

// Backward terminal-value problem for the quadratic value function
//   w(t, x) = x' R(t) x + r'(t) x + phi(t),
// solved two ways: through the linearized doubled flow (matrix exponential
// propagation plus a linear solve R N = M per grid point) and by direct
// backward Runge-Kutta integration of the matrix Riccati ODE.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridexec/expm.hpp"
#include "hybridexec/market.hpp"

namespace hybridexec {

struct SolverError : std::runtime_error {
  double t;
  SolverError(const std::string& msg, double time)
      : std::runtime_error(msg + " at t = " + std::to_string(time)), t(time) {}
};

enum class RiccatiMethod { linearized, direct };

struct RiccatiSolution {
  std::vector<double> grid;     // increasing, grid.back() == T
  std::vector<MatrixXd> R;      // per grid point, symmetric
  std::vector<VectorXd> r;      // per grid point (empty until solve_linear_terms)
  std::vector<double> phi;
  RiccatiMethod method = RiccatiMethod::direct;

  int size() const { return static_cast<int>(grid.size()); }

  // Index of the interval containing t plus the interpolation fraction.
  std::pair<int, double> locate(double t) const {
    const double T = grid.back();
    if (t < grid.front() - 1e-12 || t > T + 1e-12)
      throw std::out_of_range("time " + std::to_string(t) + " outside [" +
                              std::to_string(grid.front()) + ", " +
                              std::to_string(T) + "]");
    t = std::clamp(t, grid.front(), T);
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    int i = static_cast<int>(it - grid.begin()) - 1;
    i = std::clamp(i, 0, size() - 2);
    const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
    return {i, w};
  }

  MatrixXd R_at(double t) const {
    auto [i, w] = locate(t);
    return (1.0 - w) * R[i] + w * R[i + 1];
  }
  VectorXd r_at(double t) const {
    auto [i, w] = locate(t);
    return (1.0 - w) * r[i] + w * r[i + 1];
  }
  double phi_at(double t) const {
    auto [i, w] = locate(t);
    return (1.0 - w) * phi[i] + w * phi[i + 1];
  }
};

inline std::vector<double> uniform_grid(double T, int points) {
  if (points < 2) throw std::invalid_argument("grid needs >= 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = T * static_cast<double>(i) / (points - 1);
  g.back() = T;
  return g;
}

namespace detail {

// Right-hand side of dR/dt = psi e e' - (1/eta~){R aa' R + C'R + R C + kk'},
// with C = eta~ A + a k'.
inline MatrixXd riccati_rhs(const MatrixXd& R, const StateMatrices& m,
                            const EffectiveParams& eff) {
  const MatrixXd C = eff.eta_tilde * m.A + m.a * m.k.transpose();
  const VectorXd Ra = R * m.a;
  return eff.psi * (m.e_last * m.e_last.transpose()) -
         (Ra * Ra.transpose() + C.transpose() * R + R * C +
          m.k * m.k.transpose()) /
             eff.eta_tilde;
}

inline void check_uniform(const std::vector<double>& grid) {
  const double dt = grid[1] - grid[0];
  for (size_t i = 1; i + 1 < grid.size(); ++i)
    if (std::abs((grid[i + 1] - grid[i]) - dt) > 1e-9 * dt)
      throw std::invalid_argument("solver requires a uniform grid");
}

}  // namespace detail

// Hamiltonian block matrix of the doubled linear flow.
inline MatrixXd doubled_flow_matrix(const StateMatrices& m,
                                    const EffectiveParams& eff) {
  const int d = m.dim();
  const MatrixXd D = m.A + (m.a * m.k.transpose()) / eff.eta_tilde;
  MatrixXd Psi(2 * d, 2 * d);
  Psi.topLeftCorner(d, d) = -D.transpose();
  Psi.topRightCorner(d, d) = eff.psi * (m.e_last * m.e_last.transpose()) -
                             (m.k * m.k.transpose()) / eff.eta_tilde;
  Psi.bottomLeftCorner(d, d) = (m.a * m.a.transpose()) / eff.eta_tilde;
  Psi.bottomRightCorner(d, d) = D;
  return Psi;
}

// Propagates [M; N](t) = e^{-(T-t) Psi} [G; I] backward across a uniform
// grid and recovers R(t) from the linear system R N = M.
//
// The off-diagonal blocks of Psi live on very different scales (the source
// block ~ psi, the aa'/eta~ block ~ 1/eta~), which makes the raw matrix
// badly non-normal and poisons the squaring phase of the exponential.  A
// block-diagonal similarity diag(c I, I) with c^2 = |P| / |Q| equalizes the
// two blocks; M just picks up the factor c.
inline RiccatiSolution solve_riccati_linearized(const StateMatrices& m,
                                                const EffectiveParams& eff,
                                                const std::vector<double>& grid,
                                                double rcond_floor = 1e-12) {
  detail::check_uniform(grid);
  const int d = m.dim();
  const int K = static_cast<int>(grid.size());
  const double dt = grid[1] - grid[0];

  MatrixXd Psi = doubled_flow_matrix(m, eff);
  const double normP = Psi.topRightCorner(d, d).norm();
  const double normQ = Psi.bottomLeftCorner(d, d).norm();
  const double c = (normP > 0.0 && normQ > 0.0) ? std::sqrt(normP / normQ)
                                                : 1.0;
  Psi.topRightCorner(d, d) /= c;
  Psi.bottomLeftCorner(d, d) *= c;
  const MatrixXd Estep = matrix_exponential(-dt * Psi);

  RiccatiSolution sol;
  sol.grid = grid;
  sol.method = RiccatiMethod::linearized;
  sol.R.resize(K);

  MatrixXd Y(2 * d, d);
  Y.topRows(d) = m.G / c;
  Y.bottomRows(d) = MatrixXd::Identity(d, d);

  for (int i = K - 1; i >= 0; --i) {
    const MatrixXd M = c * Y.topRows(d);
    const MatrixXd N = Y.bottomRows(d);
    // Solve N' R' = M' column-wise; never form N^{-1}.
    Eigen::PartialPivLU<MatrixXd> lu(N.transpose());
    if (lu.rcond() < rcond_floor)
      throw SolverError("linearized Riccati flow: N(t) is near singular",
                        grid[i]);
    MatrixXd R = lu.solve(M.transpose()).transpose();
    sol.R[i] = 0.5 * (R + R.transpose());
    if (i > 0) Y = Estep * Y;
  }
  sol.R[K - 1] = m.G;  // terminal datum exact
  return sol;
}

// Backward fixed-step classical Runge-Kutta of the Riccati ODE itself.
inline RiccatiSolution integrate_riccati_direct(const StateMatrices& m,
                                                const EffectiveParams& eff,
                                                const std::vector<double>& grid,
                                                double blowup_bound = 1e12) {
  const int K = static_cast<int>(grid.size());
  RiccatiSolution sol;
  sol.grid = grid;
  sol.method = RiccatiMethod::direct;
  sol.R.resize(K);
  sol.R[K - 1] = m.G;

  for (int i = K - 1; i > 0; --i) {
    const double h = grid[i - 1] - grid[i];  // negative: backward step
    const MatrixXd& R = sol.R[i];
    const MatrixXd k1 = detail::riccati_rhs(R, m, eff);
    const MatrixXd k2 = detail::riccati_rhs(R + 0.5 * h * k1, m, eff);
    const MatrixXd k3 = detail::riccati_rhs(R + 0.5 * h * k2, m, eff);
    const MatrixXd k4 = detail::riccati_rhs(R + h * k3, m, eff);
    MatrixXd Rn = R + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Rn = 0.5 * (Rn + Rn.transpose());  // suppress asymmetry drift
    if (!Rn.allFinite() || Rn.cwiseAbs().maxCoeff() > blowup_bound)
      throw SolverError("Riccati integration diverged", grid[i - 1]);
    sol.R[i - 1] = Rn;
  }
  return sol;
}

// Backward integration of the linear and constant terms r(t), phi(t) given
// the already-computed R(t); R at half steps is taken as the interval mean.
inline void solve_linear_terms(const StateMatrices& m, const EffectiveParams& eff,
                               RiccatiSolution& sol, double mu) {
  const int K = sol.size();
  sol.r.assign(K, VectorXd::Zero(m.dim()));
  sol.phi.assign(K, 0.0);

  auto r_rhs = [&](const VectorXd& r, const MatrixXd& R) -> VectorXd {
    return -(m.A.transpose() * r + 2.0 * R * m.b + mu * m.e_last +
             ((R * m.a) * m.a.transpose() + m.k * m.a.transpose()) * r /
                 eff.eta_tilde);
  };
  auto phi_rhs = [&](const VectorXd& r, const MatrixXd& R) -> double {
    const double ar = m.a.dot(r);
    return -((m.Sigma * m.Sigma.transpose() * R).trace() + m.b.dot(r) +
             ar * ar / (4.0 * eff.eta_tilde));
  };

  for (int i = K - 1; i > 0; --i) {
    const double h = sol.grid[i - 1] - sol.grid[i];
    const MatrixXd& R1 = sol.R[i];
    const MatrixXd& R0 = sol.R[i - 1];
    const MatrixXd Rh = 0.5 * (R0 + R1);

    const VectorXd& r = sol.r[i];
    const VectorXd k1 = r_rhs(r, R1);
    const VectorXd k2 = r_rhs(r + 0.5 * h * k1, Rh);
    const VectorXd k3 = r_rhs(r + 0.5 * h * k2, Rh);
    const VectorXd k4 = r_rhs(r + h * k3, R0);
    sol.r[i - 1] = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double p = sol.phi[i];
    const double p1 = phi_rhs(r, R1);
    const double p2 = phi_rhs(r + 0.5 * h * k1, Rh);
    const double p3 = phi_rhs(r + 0.5 * h * k2, Rh);
    const double p4 = phi_rhs(r + h * k3, R0);
    sol.phi[i - 1] = p + (h / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
  }
}

inline double value_function(double t, const VectorXd& x,
                             const RiccatiSolution& sol) {
  const MatrixXd R = sol.R_at(t);
  double w = x.dot(R * x);
  if (!sol.r.empty()) w += sol.r_at(t).dot(x);
  if (!sol.phi.empty()) w += sol.phi_at(t);
  return w;
}

// Frobenius norm of the Riccati ODE residual at interior grid point i,
// with dR/dt by central difference.
inline double riccati_residual(const RiccatiSolution& sol,
                               const StateMatrices& m,
                               const EffectiveParams& eff, int i) {
  if (i <= 0 || i >= sol.size() - 1)
    throw std::invalid_argument("riccati_residual: interior grid point required");
  const MatrixXd Rdot =
      (sol.R[i + 1] - sol.R[i - 1]) / (sol.grid[i + 1] - sol.grid[i - 1]);
  return (Rdot - detail::riccati_rhs(sol.R[i], m, eff)).norm();
}

// One row per grid point: t, upper triangle of R (row-major), r, phi.
inline void write_solution_csv(const RiccatiSolution& sol, std::ostream& out) {
  const int d = static_cast<int>(sol.R.front().rows());
  out << "t";
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out << ",R_" << i + 1 << "_" << j + 1;
  for (int i = 0; i < d; ++i) out << ",r_" << i + 1;
  out << ",phi\n";
  out.precision(17);
  for (int k = 0; k < sol.size(); ++k) {
    out << sol.grid[k];
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) out << "," << sol.R[k](i, j);
    for (int i = 0; i < d; ++i)
      out << "," << (sol.r.empty() ? 0.0 : sol.r[k][i]);
    out << "," << (sol.phi.empty() ? 0.0 : sol.phi[k]) << "\n";
  }
}

inline void write_solution_csv(const RiccatiSolution& sol,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_solution_csv(sol, out);
}

}  // namespace hybridexec
