#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoisched/config.hpp"
#include "aoisched/rng.hpp"

namespace aoisched {

// 2^R - 1, the SNR/SINR threshold for decoding at target rate R.
inline double snr_threshold(double rate) { return std::exp2(rate) - 1.0; }

// Power split for action a: alpha2 = a/N to the far client, alpha1 = 1 - a/N
// to the near client. a = 0 and a = N are the two dedicated (OMA) slots.
inline double alpha_far(const SystemConfig& cfg, int a) {
  return static_cast<double>(a) / static_cast<double>(cfg.n_levels);
}
inline double alpha_near(const SystemConfig& cfg, int a) { return 1.0 - alpha_far(cfg, a); }

// alpha2 - alpha1 (2^R - 1). The far client's message is decodable under
// interference only when this margin is positive; the feasible action set is
// built so that every NOMA action satisfies it.
inline double sic_margin(const SystemConfig& cfg, int a) {
  double g = snr_threshold(cfg.rate);
  return alpha_far(cfg, a) - alpha_near(cfg, a) * g;
}

namespace detail {
inline void check_client(int client) {
  if (client != 1 && client != 2) throw std::invalid_argument("client must be 1 or 2");
}
inline void check_noma_margin(const SystemConfig& cfg, int a) {
  if (a < 1 || a > cfg.n_levels) throw std::invalid_argument("action outside 1..N");
  if (!(sic_margin(cfg, a) > 0.0))
    throw std::invalid_argument("infeasible power split: alpha2 - alpha1 (2^R - 1) <= 0 for a = " +
                                std::to_string(a));
}
}  // namespace detail

// Outage of a dedicated slot to one client: 1 - exp(-(2^R - 1) d^tau / rho).
inline double oma_outage(const SystemConfig& cfg, int client) {
  detail::check_client(client);
  double d = (client == 1) ? cfg.d1 : cfg.d2;
  return 1.0 - std::exp(-snr_threshold(cfg.rate) * std::pow(d, cfg.tau) / cfg.rho);
}

// Far-client outage under a NOMA split: the far client decodes its own
// message treating the near client's signal as interference,
//   1 - exp(-(2^R - 1) d2^tau / (rho (alpha2 - alpha1 (2^R - 1)))).
// a = N is accepted and reduces to the dedicated-slot expression.
inline double noma_outage_far(const SystemConfig& cfg, int a) {
  detail::check_noma_margin(cfg, a);
  double num = snr_threshold(cfg.rate) * std::pow(cfg.d2, cfg.tau);
  return 1.0 - std::exp(-num / (cfg.rho * sic_margin(cfg, a)));
}

// Near-client outage under a NOMA split. The near client first decodes the
// far client's message (same SINR event as above, with its own channel) and
// then its own interference-free message, so the outage exponent is the
// larger of the two rate requirements:
//   1 - exp(-max{ (2^R-1) d1^tau / (rho (alpha2 - alpha1 (2^R-1))),
//                 (2^R-1) d1^tau / (rho alpha1) }).
inline double noma_outage_near(const SystemConfig& cfg, int a) {
  detail::check_noma_margin(cfg, a);
  if (a == cfg.n_levels)
    throw std::invalid_argument("a = N allocates no power to the near client");
  double num = snr_threshold(cfg.rate) * std::pow(cfg.d1, cfg.tau);
  double e1 = num / (cfg.rho * sic_margin(cfg, a));
  double e2 = num / (cfg.rho * alpha_near(cfg, a));
  return 1.0 - std::exp(-std::max(e1, e2));
}

// Feasible action set, ascending. Always contains the two dedicated slots
// {0, N}; the NOMA range starts at the first split that gives the far client
// more than half the power and a positive decoding margin:
//   {0} u {max{ceil(N/2)+1, ceil((2^R-1) N / 2^R)}, ..., N}.
// With eliminate set, splits dominated by a = floor(2^R N / (2^R + 1)) are
// dropped (both outage probabilities are lower there), clamped so the
// reduced set never leaves the feasible one. May contain no NOMA action at
// all ({0, N}) when N is too small for any valid split at this rate.
inline std::vector<int> feasible_actions(const SystemConfig& cfg, bool eliminate = false) {
  cfg.validate();
  int n = cfg.n_levels;
  double g = std::exp2(cfg.rate);
  int lo_half = (n + 1) / 2 + 1;  // ceil(N/2) + 1
  // Smallest a with a/N strictly above (2^R - 1)/2^R; the strict inequality
  // is what keeps sic_margin positive, so an exact integer bound is bumped.
  int lo_rate = static_cast<int>(std::floor((g - 1.0) * n / g)) + 1;
  int lo = std::max(lo_half, lo_rate);
  while (lo < n && !(sic_margin(cfg, lo) > 0.0)) ++lo;
  if (eliminate) lo = std::max(lo, static_cast<int>(std::floor(g * n / (g + 1.0))));

  std::vector<int> actions{0};
  for (int a = lo; a <= n; ++a) actions.push_back(a);
  return actions;
}

// a = 0 serves only the near client, a = N only the far one.
inline bool serves_near(int a, int n_levels) { return a < n_levels; }
inline bool serves_far(int a, int /*n_levels*/) { return a > 0; }

// Failure probabilities of every action in a feasible (possibly restricted)
// set, precomputed once per configuration. Entries for a client that an
// action does not serve are NaN.
struct OutageTable {
  int n_levels = 0;
  std::vector<int> actions;  // ascending
  std::vector<double> fail1;
  std::vector<double> fail2;

  int index_of(int a) const {
    auto it = std::lower_bound(actions.begin(), actions.end(), a);
    if (it == actions.end() || *it != a)
      throw std::invalid_argument("action " + std::to_string(a) + " not in outage table");
    return static_cast<int>(it - actions.begin());
  }
  double fail_near(int a) const { return fail1[index_of(a)]; }
  double fail_far(int a) const { return fail2[index_of(a)]; }
};

inline OutageTable build_outage_table(const SystemConfig& cfg, const std::vector<int>& actions) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  OutageTable t;
  t.n_levels = cfg.n_levels;
  t.actions = actions;
  for (int a : actions) {
    if (a == 0) {
      t.fail1.push_back(oma_outage(cfg, 1));
      t.fail2.push_back(nan);
    } else if (a == cfg.n_levels) {
      t.fail1.push_back(nan);
      t.fail2.push_back(oma_outage(cfg, 2));
    } else {
      t.fail1.push_back(noma_outage_near(cfg, a));
      t.fail2.push_back(noma_outage_far(cfg, a));
    }
  }
  // The far client's NOMA outage must fall strictly as its power share
  // grows. Exact ties are possible only where the probability saturates at
  // a representable endpoint (underflow to 0, or certain outage at 1).
  double prev = 2.0;
  for (std::size_t i = 0; i < t.actions.size(); ++i) {
    int a = t.actions[i];
    if (a == 0 || a == cfg.n_levels) continue;
    bool saturated_tie = t.fail2[i] == prev && (prev == 0.0 || prev == 1.0);
    if (!(t.fail2[i] < prev || saturated_tie))
      throw std::logic_error("far-client outage not strictly decreasing in the power share");
    prev = t.fail2[i];
  }
  return t;
}

// One draw of the channel power |h_i|^2 = d^{-tau} |g|^2 with g ~ CN(0,1);
// the mean is d^{-tau}. Used by the Monte-Carlo validation of the closed
// forms, not by the system-level simulator.
inline double sample_channel_power(const SystemConfig& cfg, int client, Rng& rng) {
  detail::check_client(client);
  double d = (client == 1) ? cfg.d1 : cfg.d2;
  double re = rng.normal();
  double im = rng.normal();
  return std::pow(d, -cfg.tau) * 0.5 * (re * re + im * im);
}

}  // namespace aoisched
