#pragma once

// Test-only Monte-Carlo oracle: empirical outage frequencies computed from
// the SINR decoding events on sampled fading gains. Independent of the
// closed-form expressions in the library (it never calls them), so it can
// arbitrate their correctness.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/config.hpp"
#include "aoisched/rng.hpp"

namespace mc_oracle {

struct Estimates {
  double oma1 = 0, oma2 = 0;
  std::map<int, double> noma_near, noma_far;
};

inline Estimates estimate_outages(const aoisched::SystemConfig& cfg,
                                  const std::vector<int>& noma_actions, long long n_samples,
                                  std::uint64_t seed) {
  using namespace aoisched;
  Estimates est;
  const double thr = snr_threshold(cfg.rate);
  long long oma1_fail = 0, oma2_fail = 0;
  std::map<int, long long> near_fail, far_fail;

  Rng rng1(seed);
  for (long long i = 0; i < n_samples; ++i) {
    double h = sample_channel_power(cfg, 1, rng1);
    if (h * cfg.rho < thr) ++oma1_fail;
    for (int a : noma_actions) {
      double a2 = alpha_far(cfg, a), a1 = alpha_near(cfg, a);
      double gamma_far_msg = a2 * h / (a1 * h + 1.0 / cfg.rho);  // SIC stage 1
      double gamma_own = a1 * h * cfg.rho;                       // SIC stage 2
      if (gamma_far_msg < thr || gamma_own < thr) ++near_fail[a];
    }
  }
  Rng rng2(derive_seed(seed, 1));
  for (long long i = 0; i < n_samples; ++i) {
    double h = sample_channel_power(cfg, 2, rng2);
    if (h * cfg.rho < thr) ++oma2_fail;
    for (int a : noma_actions) {
      double a2 = alpha_far(cfg, a), a1 = alpha_near(cfg, a);
      double gamma = a2 * h / (a1 * h + 1.0 / cfg.rho);
      if (gamma < thr) ++far_fail[a];
    }
  }

  est.oma1 = static_cast<double>(oma1_fail) / n_samples;
  est.oma2 = static_cast<double>(oma2_fail) / n_samples;
  for (int a : noma_actions) {
    est.noma_near[a] = static_cast<double>(near_fail[a]) / n_samples;
    est.noma_far[a] = static_cast<double>(far_fail[a]) / n_samples;
  }
  return est;
}

inline double binomial_3sigma(double p, long long n) {
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace mc_oracle
