#pragma once

// Market model description and the derived linear-quadratic coefficients.
//
// The market consists of n mean-reverting market-maker inventories coupled
// to the trader's position through permanent (gamma), temporary (eta) and
// inventory (phi) price impact.  Everything downstream (Riccati solver,
// strategies, simulator) consumes the state-space form assembled here.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hybridexec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct MarketMakerSpec {
  double theta = 1.0;    // mean-reversion rate, > 0
  double sigma_q = 0.0;  // inventory volatility, >= 0
  double qbar1 = 0.0;    // feedback coefficient on the trader's rate
  double qbar0 = 0.0;    // upfront capacity (long-term mean at v = 0)
  double weight = 1.0;   // relative importance nu_i, > 0
};

struct MarketConfig {
  std::vector<MarketMakerSpec> makers;

  double gamma = 0.0;    // permanent impact, >= 0
  double eta = 1.0;      // temporary impact, > 0
  double phi = 0.0;      // inventory-cost impact, >= 0

  double mu = 0.0;       // price drift, >= 0
  double sigma_s = 1.0;  // price volatility, > 0
  double s0 = 1.0;       // initial price, > 0

  double x0 = 1.0;       // initial position to liquidate, > 0
  double m = 0.0;        // order-fill uncertainty, >= 0
  double horizon = 1.0;  // T, > 0
  double beta = 1.0;     // block-trade penalty, > 0
  double lambda = 0.0;   // risk aversion, >= 0

  int n() const { return static_cast<int>(makers.size()); }

  VectorXd weights() const {
    VectorXd nu(n());
    for (int i = 0; i < n(); ++i) nu[i] = makers[i].weight;
    return nu;
  }
  VectorXd thetas() const {
    VectorXd th(n());
    for (int i = 0; i < n(); ++i) th[i] = makers[i].theta;
    return th;
  }
  VectorXd qbar0s() const {
    VectorXd q(n());
    for (int i = 0; i < n(); ++i) q[i] = makers[i].qbar0;
    return q;
  }
  VectorXd qbar1s() const {
    VectorXd q(n());
    for (int i = 0; i < n(); ++i) q[i] = makers[i].qbar1;
    return q;
  }
  bool zero_feedback() const {
    for (const auto& mk : makers)
      if (mk.qbar1 != 0.0) return false;
    return true;
  }
};

// Effective LQ coefficients after folding the quadratic-variation penalty
// into the running cost.
struct EffectiveParams {
  double eta_tilde = 0.0;  // eta (1 + lambda m^2 eta)
  double xi_tilde = 0.0;   // 2 gamma lambda m^2 eta
  double psi = 0.0;        // lambda (phi^2 sigma_qm^2 + m^2 gamma^2 + sigma_s^2)
  double sigma_qm = 0.0;   // sum_i nu_i sigma_qi
  double zeta = 0.0;       // sqrt(psi / eta_tilde), 0 when lambda = 0
};

inline EffectiveParams derive_effective_params(const MarketConfig& c) {
  EffectiveParams e;
  double sqm = 0.0;
  for (const auto& mk : c.makers) sqm += mk.weight * mk.sigma_q;
  e.sigma_qm = sqm;
  const double lm2e = c.lambda * c.m * c.m * c.eta;
  e.eta_tilde = c.eta * (1.0 + lm2e);
  e.xi_tilde = 2.0 * c.gamma * lm2e;
  e.psi = c.lambda * (c.phi * c.phi * sqm * sqm + c.m * c.m * c.gamma * c.gamma +
                      c.sigma_s * c.sigma_s);
  e.zeta = c.lambda > 0.0 ? std::sqrt(e.psi / e.eta_tilde) : 0.0;
  return e;
}

// The (n+1)-dimensional state-space data.  State = (Q_1..Q_n, X).
struct StateMatrices {
  MatrixXd A;      // diag(-theta_1..-theta_n, 0)
  VectorXd a;      // [theta_i qbar1_i ; -1]
  VectorXd b;      // [theta_i qbar0_i ; 0]
  MatrixXd Sigma;  // (n+1) x 2 noise loading, columns (B_Q, B_X)
  MatrixXd G;      // terminal quadratic cost
  VectorXd k;      // running bilinear cost vector
  VectorXd Theta;  // diag entries theta_1..theta_n
  VectorXd e_last; // unit vector e_{n+1}

  int dim() const { return static_cast<int>(a.size()); }
  int n() const { return dim() - 1; }
};

inline StateMatrices build_state_matrices(const MarketConfig& c,
                                          const EffectiveParams& eff) {
  const int n = c.n();
  const int d = n + 1;
  StateMatrices m;
  m.A = MatrixXd::Zero(d, d);
  m.a = VectorXd::Zero(d);
  m.b = VectorXd::Zero(d);
  m.Sigma = MatrixXd::Zero(d, 2);
  m.G = MatrixXd::Zero(d, d);
  m.k = VectorXd::Zero(d);
  m.Theta = VectorXd::Zero(n);
  m.e_last = VectorXd::Zero(d);
  m.e_last[n] = 1.0;

  for (int i = 0; i < n; ++i) {
    const auto& mk = c.makers[i];
    m.A(i, i) = -mk.theta;
    m.a[i] = mk.theta * mk.qbar1;
    m.b[i] = mk.theta * mk.qbar0;
    m.Sigma(i, 0) = mk.sigma_q;
    m.Theta[i] = mk.theta;
    const double g = -0.5 * c.phi * mk.weight;
    m.G(i, n) = g;
    m.G(n, i) = g;  // assign both halves so symmetry is bitwise
    m.k[i] = g;
  }
  m.a[n] = -1.0;
  m.Sigma(n, 1) = c.m;
  m.G(n, n) = 0.5 * c.gamma - c.beta;
  m.k[n] = -0.5 * eff.xi_tilde;
  return m;
}

// Weights proportional to the gamma(shape, scale 1) density at i = 1..n.
inline VectorXd gamma_weights(int n, double shape = 3.0) {
  if (n < 1) throw std::invalid_argument("gamma_weights: n must be >= 1");
  if (shape <= 0.0) throw std::invalid_argument("gamma_weights: shape must be > 0");
  VectorXd w(n);
  for (int i = 1; i <= n; ++i)
    w[i - 1] = std::pow(static_cast<double>(i), shape - 1.0) * std::exp(-i);
  return w / w.sum();
}

struct ValidationCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool config_ok = true;       // required conditions
  bool closed_form_ok = true;  // Corollary 3.7 / 3.9 path only

  std::string summary() const {
    std::string s;
    for (const auto& c : checks)
      s += (c.ok ? "[ok]   " : "[FAIL] ") + c.name +
           (c.detail.empty() ? "" : " (" + c.detail + ")") + "\n";
    return s;
  }
};

inline ValidationReport validate_config(const MarketConfig& c) {
  ValidationReport r;
  auto required = [&](const std::string& name, bool ok, std::string detail = "") {
    r.checks.push_back({name, ok, std::move(detail)});
    if (!ok) r.config_ok = false;
  };
  auto closed_form = [&](const std::string& name, bool ok, std::string detail = "") {
    r.checks.push_back({name, ok, std::move(detail)});
    if (!ok) r.closed_form_ok = false;
  };

  bool signs = c.eta > 0 && c.gamma >= 0 && c.phi >= 0 && c.mu >= 0 &&
               c.sigma_s > 0 && c.s0 > 0 && c.x0 > 0 && c.m >= 0 &&
               c.horizon > 0 && c.beta > 0 && c.lambda >= 0;
  for (const auto& mk : c.makers)
    signs = signs && mk.theta > 0 && mk.weight > 0 && mk.sigma_q >= 0;
  required("parameter sign constraints", signs);

  double wsum = 0.0;
  for (const auto& mk : c.makers) wsum += mk.weight;
  required("weights sum to 1", c.n() == 0 || std::abs(wsum - 1.0) <= 1e-12,
           "sum = " + std::to_string(wsum));

  required("beta > gamma/2", c.beta > 0.5 * c.gamma);

  const EffectiveParams eff = derive_effective_params(c);
  const double half = 0.5 * (c.gamma + eff.xi_tilde);
  closed_form("all qbar1 = 0", c.zero_feedback(),
              "feedback terms require the generic Riccati path");
  closed_form("beta - (gamma+xi~)/2 > 0", c.beta - half > 0.0);
  closed_form("((gamma+xi~)/2 - beta)^2 > psi eta~",
              (half - c.beta) * (half - c.beta) > eff.psi * eff.eta_tilde);
  return r;
}

}  // namespace hybridexec
