#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/config.hpp"
#include "aoisched/mdp.hpp"

namespace aoisched {

enum class PolicyKind { OptimalAdaptive, Suboptimal, OmaOnlyOptimal, NomaOnlyOptimal, Custom };

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::OptimalAdaptive: return "optimal-adaptive";
    case PolicyKind::Suboptimal: return "suboptimal";
    case PolicyKind::OmaOnlyOptimal: return "oma-only-optimal";
    case PolicyKind::NomaOnlyOptimal: return "noma-only-optimal";
    case PolicyKind::Custom: return "custom";
  }
  return "custom";
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "optimal-adaptive") return PolicyKind::OptimalAdaptive;
  if (s == "suboptimal") return PolicyKind::Suboptimal;
  if (s == "oma-only-optimal") return PolicyKind::OmaOnlyOptimal;
  if (s == "noma-only-optimal") return PolicyKind::NomaOnlyOptimal;
  if (s == "custom") return PolicyKind::Custom;
  throw ConfigError("unknown policy kind: " + s);
}

// Deterministic stationary policy on the truncated m x m grid, stored
// row-major in delta1 then delta2.
struct PolicyTable {
  int m = 0;
  PolicyKind kind = PolicyKind::Custom;
  std::vector<int> action;

  int at(int delta1, int delta2) const { return action[state_index({delta1, delta2}, m)]; }
  int& at(int delta1, int delta2) { return action[state_index({delta1, delta2}, m)]; }

  // Lookup for states beyond the grid: saturate to the edge.
  int at_clamped(long long delta1, long long delta2) const {
    int a1 = delta1 > m ? m : static_cast<int>(delta1);
    int a2 = delta2 > m ? m : static_cast<int>(delta2);
    return at(a1, a2);
  }
};

// Expected weighted age one slot ahead of s under action a:
//   a = 0:     1 + w1 P1 delta1 + w2 delta2
//   a = N:     1 + w1 delta1 + w2 P2 delta2
//   otherwise: 1 + w1 P1(a) delta1 + w2 P2(a) delta2
// (a served client's expected next age is P_fail * delta + 1; an unserved
// client's age grows surely).
inline double expected_next_weighted_age(AoIState s, int a, const OutageTable& outage, double w1,
                                         double w2) {
  if (a == 0) return 1.0 + w1 * outage.fail_near(a) * s.delta1 + w2 * s.delta2;
  if (a == outage.n_levels) return 1.0 + w1 * s.delta1 + w2 * outage.fail_far(a) * s.delta2;
  return 1.0 + w1 * outage.fail_near(a) * s.delta1 + w2 * outage.fail_far(a) * s.delta2;
}

// One-step-lookahead rule: the action minimizing the expected weighted age
// of the next slot. Ties break toward the smallest action index.
inline int suboptimal_action(AoIState s, const OutageTable& outage, double w1, double w2) {
  int best = outage.actions.front();
  double best_val = std::numeric_limits<double>::infinity();
  for (int a : outage.actions) {
    double v = expected_next_weighted_age(s, a, outage, w1, w2);
    if (v < best_val) {
      best_val = v;
      best = a;
    }
  }
  return best;
}

inline PolicyTable build_suboptimal_policy(const SystemConfig& cfg, const OutageTable& outage) {
  PolicyTable p;
  p.m = cfg.m_trunc;
  p.kind = PolicyKind::Suboptimal;
  p.action.resize(static_cast<std::size_t>(p.m) * p.m);
  for (int si = 0; si < p.m * p.m; ++si)
    p.action[si] = suboptimal_action(state_at(si, p.m), outage, cfg.w1, cfg.w2);
  return p;
}

enum class ActionSubset { OmaOnly, NomaOnly };

// Restriction of the feasible set used by the baseline policies:
// OMA-only keeps the two dedicated slots {0, N}; NOMA-only keeps every
// proper split {lo, ..., N-1}.
inline std::vector<int> restrict_action_set(const SystemConfig& cfg, ActionSubset subset) {
  std::vector<int> full = feasible_actions(cfg, false);
  std::vector<int> out;
  for (int a : full) {
    bool oma = (a == 0 || a == cfg.n_levels);
    if ((subset == ActionSubset::OmaOnly) == oma) out.push_back(a);
  }
  if (out.empty()) throw ConfigError("restricted action set is empty (no NOMA split exists)");
  return out;
}

inline std::vector<int> restrict_action_set(const SystemConfig& cfg,
                                            const std::vector<int>& custom) {
  std::vector<int> full = feasible_actions(cfg, false);
  std::vector<int> out;
  for (int a : custom)
    if (std::binary_search(full.begin(), full.end(), a)) out.push_back(a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ConfigError("custom action set does not intersect the feasible set");
  return out;
}

// A violating adjacent pair of states (same action ordering expected along
// both axes).
struct SwitchingViolation {
  AoIState lo;
  AoIState hi;
  int action_lo = 0;
  int action_hi = 0;
};

struct SwitchingCheck {
  bool pass = true;
  std::vector<SwitchingViolation> violations;
};

// Switching-structure check: along each row (fixed delta1, growing delta2)
// actions must be nondecreasing, along each column (fixed delta2, growing
// delta1) nonincreasing. Only adjacent pairs are inspected; monotone unit
// steps imply the property for every larger step.
inline SwitchingCheck verify_switching(const PolicyTable& p) {
  SwitchingCheck out;
  for (int d1 = 1; d1 <= p.m; ++d1) {
    for (int d2 = 1; d2 < p.m; ++d2) {
      int a = p.at(d1, d2), b = p.at(d1, d2 + 1);
      if (b < a) out.violations.push_back({{d1, d2}, {d1, d2 + 1}, a, b});
    }
  }
  for (int d2 = 1; d2 <= p.m; ++d2) {
    for (int d1 = 1; d1 < p.m; ++d1) {
      int a = p.at(d1, d2), b = p.at(d1 + 1, d2);
      if (b > a) out.violations.push_back({{d1, d2}, {d1 + 1, d2}, a, b});
    }
  }
  out.pass = out.violations.empty();
  return out;
}

// Compressed form of a switching-type policy: per delta1 row, the action at
// delta2 = 1 and each (delta2, action) where the action steps up.
struct SwitchingBoundary {
  int m = 0;
  PolicyKind kind = PolicyKind::Custom;
  struct Row {
    int first_action = 0;
    std::vector<std::pair<int, int>> changes;  // (delta2 where it starts, action)
  };
  std::vector<Row> rows;
};

inline SwitchingBoundary extract_boundaries(const PolicyTable& p) {
  if (!verify_switching(p).pass)
    throw std::invalid_argument("policy is not switching-type; boundary form undefined");
  SwitchingBoundary b;
  b.m = p.m;
  b.kind = p.kind;
  b.rows.resize(p.m);
  for (int d1 = 1; d1 <= p.m; ++d1) {
    auto& row = b.rows[d1 - 1];
    row.first_action = p.at(d1, 1);
    int cur = row.first_action;
    for (int d2 = 2; d2 <= p.m; ++d2) {
      int a = p.at(d1, d2);
      if (a != cur) {
        row.changes.emplace_back(d2, a);
        cur = a;
      }
    }
  }
  return b;
}

inline PolicyTable reconstruct_policy(const SwitchingBoundary& b) {
  PolicyTable p;
  p.m = b.m;
  p.kind = b.kind;
  p.action.resize(static_cast<std::size_t>(b.m) * b.m);
  for (int d1 = 1; d1 <= b.m; ++d1) {
    const auto& row = b.rows[d1 - 1];
    int cur = row.first_action;
    std::size_t next_change = 0;
    for (int d2 = 1; d2 <= b.m; ++d2) {
      if (next_change < row.changes.size() && row.changes[next_change].first == d2)
        cur = row.changes[next_change++].second;
      p.at(d1, d2) = cur;
    }
  }
  return p;
}

struct SubadditivityViolation {
  char condition = '?';  // 'a', 'b' or 'd'
  int k = 0;
  AoIState s_plus;
  AoIState s_minus;
  int a_plus = 0;
  int a_minus = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct SubadditivityCheck {
  bool pass = true;
  std::vector<SubadditivityViolation> violations;
};

// Exhaustive check of the monotone-policy sufficient conditions on a small
// truncated kernel, with states ordered by delta2 at fixed delta1 and
// Q(k|s,a) = P(next delta2 >= k):
//   (a) the one-stage reward is nondecreasing in the ordering,
//   (b) Q(k|s,a) is nondecreasing in s for every k and a,
//   (d) Q(k|s+,a+) + Q(k|s-,a-) <= Q(k|s+,a-) + Q(k|s-,a+)
//       for s+ >= s- and a+ >= a-.
// Condition (c), subadditivity of the reward itself, holds identically
// because the reward does not depend on the action.
inline SubadditivityCheck verify_subadditivity(const TransitionKernel& k, double w1, double w2,
                                               int m_guard = 10) {
  if (k.m > m_guard)
    throw InstanceTooLarge("subadditivity check is exhaustive; m = " + std::to_string(k.m) +
                           " exceeds the guard " + std::to_string(m_guard));
  const int m = k.m;
  const int n = k.n_states();
  const int na = k.n_actions();
  const double tol = 1e-12;

  // tails[(ai * n + si) * m + (kk - 1)] = P(next delta2 >= kk | s, a)
  std::vector<double> tails(static_cast<std::size_t>(na) * n * m, 0.0);
  std::vector<double> mass(m);
  for (int ai = 0; ai < na; ++ai) {
    for (int si = 0; si < n; ++si) {
      std::fill(mass.begin(), mass.end(), 0.0);
      const SuccessorList& row = k.row(si, ai);
      for (int i = 0; i < row.count; ++i)
        mass[state_at(row.entry[i].next, m).delta2 - 1] += row.entry[i].prob;
      double acc = 0.0;
      double* t = &tails[(static_cast<std::size_t>(ai) * n + si) * m];
      for (int kk = m; kk >= 1; --kk) {
        acc += mass[kk - 1];
        t[kk - 1] = acc;
      }
    }
  }
  auto q = [&](int ai, int si, int kk) {
    return tails[(static_cast<std::size_t>(ai) * n + si) * m + (kk - 1)];
  };

  SubadditivityCheck out;
  for (int d1 = 1; d1 <= m; ++d1) {
    for (int d2m = 1; d2m <= m; ++d2m) {
      for (int d2p = d2m + 1; d2p <= m; ++d2p) {
        AoIState sp{d1, d2p}, sm{d1, d2m};
        int ip = state_index(sp, m), im = state_index(sm, m);
        if (reward(sp, w1, w2) < reward(sm, w1, w2) - tol)
          out.violations.push_back(
              {'a', 0, sp, sm, 0, 0, reward(sp, w1, w2), reward(sm, w1, w2)});
        for (int ai = 0; ai < na; ++ai)
          for (int kk = 1; kk <= m; ++kk)
            if (q(ai, ip, kk) < q(ai, im, kk) - tol)
              out.violations.push_back(
                  {'b', kk, sp, sm, k.actions[ai], k.actions[ai], q(ai, ip, kk), q(ai, im, kk)});
        for (int aj = 0; aj < na; ++aj) {    // a-
          for (int aiq = aj + 1; aiq < na; ++aiq) {  // a+
            for (int kk = 1; kk <= m; ++kk) {
              double lhs = q(aiq, ip, kk) + q(aj, im, kk);
              double rhs = q(aj, ip, kk) + q(aiq, im, kk);
              if (lhs > rhs + tol)
                out.violations.push_back(
                    {'d', kk, sp, sm, k.actions[aiq], k.actions[aj], lhs, rhs});
            }
          }
        }
      }
    }
  }
  out.pass = out.violations.empty();
  return out;
}

}  // namespace aoisched
