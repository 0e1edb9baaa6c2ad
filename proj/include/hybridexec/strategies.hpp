#pragma once

// Trading rates: the generic optimal feedback from the Riccati solution,
// the two closed-form optimal rates available when the makers do not react
// to the trader (qbar1 = 0), and the TWAP / adapted TWAP / Almgren-Chriss
// benchmarks.

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridexec/market.hpp"
#include "hybridexec/riccati.hpp"

namespace hybridexec {

struct ClosedFormUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// alpha for the adapted TWAP, also the psi -> 0 limit of alpha~.
inline double adapted_twap_alpha(const MarketConfig& c) {
  return 2.0 * c.eta / (2.0 * c.beta - c.gamma);
}

// alpha~ = (1/zeta) asinh( sqrt(psi eta~) / sqrt(|((gamma+xi~)/2 - beta)^2
// - psi eta~|) ), defined under the risk-averse closed-form conditions.
inline double tilde_alpha(const EffectiveParams& eff, double gamma, double beta) {
  if (eff.psi <= 0.0)
    throw ClosedFormUnavailable("tilde_alpha requires lambda > 0 (psi = 0)");
  const double half = 0.5 * (gamma + eff.xi_tilde);
  const double disc = (half - beta) * (half - beta) - eff.psi * eff.eta_tilde;
  if (beta - half <= 0.0)
    throw ClosedFormUnavailable("closed form requires beta > (gamma + xi~)/2");
  if (disc <= 0.0)
    throw ClosedFormUnavailable(
        "closed form requires ((gamma + xi~)/2 - beta)^2 > psi eta~");
  return std::asinh(std::sqrt(eff.psi * eff.eta_tilde / disc)) / eff.zeta;
}

struct ClosedFormCoefficients {
  double alpha_tilde = 0.0;
  double zeta = 0.0;
  VectorXd theta;      // diagonal of Theta (possibly perturbed, see below)
  VectorXd resolvent;  // diagonal of (I - Theta^2/zeta^2)^{-1}
  VectorXd nu;
  VectorXd qbar0;
  bool perturbed = false;  // some theta_i sat on the removable singularity
};

inline ClosedFormCoefficients closed_form_coefficients(const MarketConfig& c,
                                                       const EffectiveParams& eff) {
  if (!c.zero_feedback())
    throw ClosedFormUnavailable("closed form requires all qbar1 = 0");
  ClosedFormCoefficients cf;
  cf.zeta = eff.zeta;
  cf.alpha_tilde = tilde_alpha(eff, c.gamma, c.beta);
  cf.theta = c.thetas();
  cf.nu = c.weights();
  cf.qbar0 = c.qbar0s();
  cf.resolvent = VectorXd(c.n());
  for (int i = 0; i < c.n(); ++i) {
    // Eqs. for Lambda have a removable singularity at theta_i = zeta; nudge
    // past it and flag.
    if (std::abs(cf.theta[i] - cf.zeta) < 1e-8 * cf.zeta) {
      cf.theta[i] += 1e-6 * cf.zeta;
      cf.perturbed = true;
    }
    const double x = cf.theta[i] / cf.zeta;
    cf.resolvent[i] = 1.0 / (1.0 - x * x);
  }
  return cf;
}

// The two diagonal matrix kernels weighting current inventories and upfront
// capacities in the risk-averse closed-form rate.
inline std::pair<MatrixXd, MatrixXd> lambda_matrices(
    double u, double T, const ClosedFormCoefficients& cf) {
  const int n = static_cast<int>(cf.theta.size());
  const double z = cf.zeta;
  const double at = cf.alpha_tilde;
  const double s = std::sinh(z * at) / std::sinh(z * (T - u + at));
  const double coth_at = std::cosh(z * at) / std::sinh(z * at);
  const double coth_Tu =
      std::cosh(z * (T - u + at)) / std::sinh(z * (T - u + at));

  VectorXd lam(n), lam0(n);
  for (int i = 0; i < n; ++i) {
    const double th = cf.theta[i];
    const double res = cf.resolvent[i];
    const double E = std::exp((u - T) * th);
    const double bracket = 1.0 - res + res * th * coth_at / z;
    lam[i] = s * E * bracket + res - res * th * coth_Tu / z;
    lam0[i] = s * (1.0 - E) * bracket +
              res * th / z *
                  (-std::cosh(z * at) / std::sinh(z * (T - u + at)) + coth_Tu) -
              res * th * th / (z * z) * (1.0 - s);
  }
  return {lam.asDiagonal().toDenseMatrix(), lam0.asDiagonal().toDenseMatrix()};
}

// Risk-averse closed-form optimal rate (qbar1 = 0, lambda > 0).
inline double closed_form_rate_risk_averse(double u, const VectorXd& Q, double X,
                                           const ClosedFormCoefficients& cf,
                                           const EffectiveParams& eff, double mu,
                                           double phi, double T) {
  const double z = cf.zeta;
  const double at = cf.alpha_tilde;
  const double sh = std::sinh(z * (T - u + at));
  const double coth_Tu = std::cosh(z * (T - u + at)) / sh;

  double v = z * coth_Tu * X;
  if (phi != 0.0) {
    auto [lam, lam0] = lambda_matrices(u, T, cf);
    v += -phi / (2.0 * eff.eta_tilde) * cf.nu.dot(Q) +
         phi / (2.0 * eff.eta_tilde) *
             cf.nu.dot(lam * Q + lam0 * cf.qbar0);
  }
  if (mu != 0.0)
    v += mu / (2.0 * std::sqrt(eff.psi * eff.eta_tilde)) *
         (std::cosh(z * at) / sh - coth_Tu);
  return v;
}

// Risk-neutral closed-form optimal rate (qbar1 = 0, lambda = 0).
inline double closed_form_rate_risk_neutral(double u, const VectorXd& Q,
                                            double X, const VectorXd& theta,
                                            const VectorXd& nu,
                                            const VectorXd& qbar0, double eta,
                                            double mu, double phi, double alpha,
                                            double T) {
  const double rem = T - u + alpha;
  double v = X / rem;
  if (mu != 0.0) v -= mu / (4.0 * eta) * (rem - alpha * alpha / rem);
  if (phi != 0.0) {
    const int n = static_cast<int>(theta.size());
    double inv_term = 0.0;
    for (int i = 0; i < n; ++i) {
      if (theta[i] == 0.0)
        throw std::invalid_argument("risk-neutral closed form: singular Theta");
      const double E = std::exp(-(T - u) * theta[i]);
      // Weight alpha E + (1 - E)/theta: the zeta -> 0 limit of the
      // risk-averse kernel (both Q and qbar0 columns reduce to it).
      inv_term += nu[i] * (alpha * E + (1.0 - E) / theta[i]) *
                  (Q[i] - qbar0[i]);
    }
    v += phi / (2.0 * eta) * (nu.dot(qbar0) - nu.dot(Q)) +
         phi / (2.0 * eta) * inv_term / rem;
  }
  return v;
}

// Generic affine feedback v = ((k + R a)'x) / eta~ + a'r / (2 eta~).
inline double feedback_rate(double u, const VectorXd& state,
                            const RiccatiSolution& sol, const StateMatrices& m,
                            const EffectiveParams& eff) {
  const MatrixXd R = sol.R_at(u);
  double v = (m.k + R * m.a).dot(state) / eff.eta_tilde;
  if (!sol.r.empty()) v += m.a.dot(sol.r_at(u)) / (2.0 * eff.eta_tilde);
  return v;
}

inline double twap_rate(const MarketConfig& c) { return c.x0 / c.horizon; }

inline double adapted_twap_rate(double t, double X, double alpha, double T) {
  return X / (T - t + alpha);
}

inline double ac_kappa(const MarketConfig& c) {
  if (c.lambda <= 0.0)
    throw std::invalid_argument("Almgren-Chriss requires lambda > 0");
  return std::sqrt(c.lambda * c.sigma_s * c.sigma_s / c.eta);
}

inline double ac_position(double t, const MarketConfig& c) {
  const double kappa = ac_kappa(c);
  return c.x0 * std::sinh(kappa * (c.horizon - t)) / std::sinh(kappa * c.horizon);
}

inline double ac_rate(double t, const MarketConfig& c) {
  const double kappa = ac_kappa(c);
  return c.x0 * kappa * std::cosh(kappa * (c.horizon - t)) /
         std::sinh(kappa * c.horizon);
}

enum class StrategyKind {
  optimal_feedback,
  closed_form_risk_averse,
  closed_form_risk_neutral,
  twap,
  adapted_twap,
  almgren_chriss,
};

inline std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::optimal_feedback: return "optimal_feedback";
    case StrategyKind::closed_form_risk_averse: return "closed_form_risk_averse";
    case StrategyKind::closed_form_risk_neutral: return "closed_form_risk_neutral";
    case StrategyKind::twap: return "twap";
    case StrategyKind::adapted_twap: return "adapted_twap";
    case StrategyKind::almgren_chriss: return "almgren_chriss";
  }
  return "?";
}

inline StrategyKind strategy_kind_from_string(const std::string& s) {
  for (auto k : {StrategyKind::optimal_feedback,
                 StrategyKind::closed_form_risk_averse,
                 StrategyKind::closed_form_risk_neutral, StrategyKind::twap,
                 StrategyKind::adapted_twap, StrategyKind::almgren_chriss})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown strategy: " + s);
}

// A strategy is a deterministic rate v(t, state), state = (Q_1..Q_n, X).
struct Strategy {
  StrategyKind kind;
  std::function<double(double, const VectorXd&)> rate;
  std::string name() const { return to_string(kind); }
};

// Builds an evaluable strategy.  `sol` is required for optimal_feedback and
// must carry r(t) (solve_linear_terms); closed forms validate their own
// preconditions and throw ClosedFormUnavailable with the violated condition.
inline Strategy make_strategy(StrategyKind kind, const MarketConfig& c,
                              const EffectiveParams& eff,
                              const StateMatrices& mats,
                              std::shared_ptr<const RiccatiSolution> sol = {}) {
  const int n = c.n();
  const double T = c.horizon;
  switch (kind) {
    case StrategyKind::optimal_feedback: {
      if (!sol || sol->r.empty())
        throw std::invalid_argument(
            "optimal_feedback needs a Riccati solution with linear terms");
      // Precompute per-grid affine coefficients for fast interpolation.
      auto coef = std::make_shared<std::vector<VectorXd>>();
      auto off = std::make_shared<std::vector<double>>();
      for (int i = 0; i < sol->size(); ++i) {
        coef->push_back((mats.k + sol->R[i] * mats.a) / eff.eta_tilde);
        off->push_back(mats.a.dot(sol->r[i]) / (2.0 * eff.eta_tilde));
      }
      return {kind, [sol, coef, off](double t, const VectorXd& x) {
                auto [i, w] = sol->locate(t);
                const VectorXd cvec =
                    (1.0 - w) * (*coef)[i] + w * (*coef)[i + 1];
                return cvec.dot(x) + (1.0 - w) * (*off)[i] + w * (*off)[i + 1];
              }};
    }
    case StrategyKind::closed_form_risk_averse: {
      auto cf = std::make_shared<ClosedFormCoefficients>(
          closed_form_coefficients(c, eff));
      const double mu = c.mu, phi = c.phi;
      return {kind, [cf, eff, mu, phi, T, n](double t, const VectorXd& x) {
                return closed_form_rate_risk_averse(t, x.head(n), x[n], *cf,
                                                    eff, mu, phi, T);
              }};
    }
    case StrategyKind::closed_form_risk_neutral: {
      if (c.lambda != 0.0)
        throw ClosedFormUnavailable(
            "risk-neutral closed form requires lambda = 0");
      if (!c.zero_feedback())
        throw ClosedFormUnavailable("closed form requires all qbar1 = 0");
      const VectorXd theta = c.thetas(), nu = c.weights(), q0 = c.qbar0s();
      const double alpha = adapted_twap_alpha(c);
      const double eta = c.eta, mu = c.mu, phi = c.phi;
      return {kind,
              [=](double t, const VectorXd& x) {
                return closed_form_rate_risk_neutral(
                    t, x.head(n), x[n], theta, nu, q0, eta, mu, phi, alpha, T);
              }};
    }
    case StrategyKind::twap: {
      const double v = twap_rate(c);
      return {kind, [v](double, const VectorXd&) { return v; }};
    }
    case StrategyKind::adapted_twap: {
      const double alpha = adapted_twap_alpha(c);
      return {kind, [alpha, T, n](double t, const VectorXd& x) {
                return adapted_twap_rate(t, x[n], alpha, T);
              }};
    }
    case StrategyKind::almgren_chriss: {
      const double kappa = ac_kappa(c);
      const double x0 = c.x0;
      return {kind, [kappa, x0, T](double t, const VectorXd&) {
                return x0 * kappa * std::cosh(kappa * (T - t)) /
                       std::sinh(kappa * T);
              }};
    }
  }
  throw std::invalid_argument("unknown strategy kind");
}

}  // namespace hybridexec
