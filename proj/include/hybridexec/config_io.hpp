#pragma once

// JSON ingestion of MarketConfig plus the stock configuration used in the
// numerical study (10 makers, theta_i = i, gamma-density weights).

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hybridexec/market.hpp"

namespace hybridexec {

// theta_i = i, qbar0_i = 1/(10 theta_i), qbar1_i = 1/(100 theta_i) or 0.
inline std::vector<MarketMakerSpec> generate_makers(int n, double weight_shape,
                                                    double sigma_q,
                                                    bool feedback_qbar1) {
  VectorXd nu = gamma_weights(n, weight_shape);
  std::vector<MarketMakerSpec> makers(n);
  for (int i = 0; i < n; ++i) {
    const double theta = static_cast<double>(i + 1);
    makers[i].theta = theta;
    makers[i].sigma_q = sigma_q;
    makers[i].qbar0 = 1.0 / (10.0 * theta);
    makers[i].qbar1 = feedback_qbar1 ? 1.0 / (100.0 * theta) : 0.0;
    makers[i].weight = nu[i];
  }
  return makers;
}

// The baseline numerical configuration: x0 = 200,000 shares over one day,
// gamma = 2.5e-7, eta = 2.5e-6, beta = phi = 100 eta, m = 20,000.
inline MarketConfig table1_config(double lambda, bool feedback_qbar1) {
  MarketConfig c;
  c.makers = generate_makers(10, 3.0, 0.1, feedback_qbar1);
  c.gamma = 2.5e-7;
  c.eta = 2.5e-6;
  c.phi = 100.0 * c.eta;
  c.mu = 0.0;
  c.sigma_s = 0.5;
  c.s0 = 50.0;
  c.x0 = 200000.0;
  c.m = 20000.0;
  c.horizon = 1.0;
  c.beta = 100.0 * c.eta;
  c.lambda = lambda;
  return c;
}

inline MarketConfig market_config_from_json(const nlohmann::json& j) {
  MarketConfig c;
  if (j.contains("makers")) {
    const auto& jm = j.at("makers");
    if (jm.is_array()) {
      for (const auto& e : jm) {
        MarketMakerSpec mk;
        mk.theta = e.at("theta").get<double>();
        mk.sigma_q = e.value("sigma_q", 0.0);
        mk.qbar0 = e.value("qbar0", 0.0);
        mk.qbar1 = e.value("qbar1", 0.0);
        mk.weight = e.at("weight").get<double>();
        c.makers.push_back(mk);
      }
    } else {
      const int n = jm.at("n").get<int>();
      const std::string rule = jm.value("theta_rule", "linear");
      if (rule != "linear")
        throw std::runtime_error("unknown theta_rule: " + rule);
      const double shape = jm.value("weight_shape", 3.0);
      const double sigma_q = jm.value("sigma_q", 0.0);
      const std::string qbar_rule = jm.value("qbar_rule", "section4");
      bool feedback;
      if (qbar_rule == "section4")
        feedback = true;
      else if (qbar_rule == "zero_feedback")
        feedback = false;
      else
        throw std::runtime_error("unknown qbar_rule: " + qbar_rule);
      c.makers = generate_makers(n, shape, sigma_q, feedback);
    }
  }
  c.gamma = j.at("gamma").get<double>();
  c.eta = j.at("eta").get<double>();
  c.phi = j.value("phi", 0.0);
  c.mu = j.value("mu", 0.0);
  c.sigma_s = j.at("sigma_s").get<double>();
  c.s0 = j.at("s0").get<double>();
  c.x0 = j.at("x0").get<double>();
  c.m = j.value("m", 0.0);
  c.horizon = j.at("horizon").get<double>();
  c.beta = j.at("beta").get<double>();
  c.lambda = j.value("lambda", 0.0);
  return c;
}

inline MarketConfig load_market_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return market_config_from_json(j.contains("market") ? j.at("market") : j);
}

}  // namespace hybridexec
