#pragma once

#include <array>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/config.hpp"

namespace aoisched {

// Pair of instantaneous ages, both at least 1 (an age resets to 1 on a
// successful delivery and increments otherwise).
struct AoIState {
  int delta1 = 1;
  int delta2 = 1;
  friend bool operator==(const AoIState&, const AoIState&) = default;
};

inline int state_index(AoIState s, int m) { return (s.delta1 - 1) * m + (s.delta2 - 1); }
inline AoIState state_at(int index, int m) { return {index / m + 1, index % m + 1}; }

// One-stage cost charged on the current state, before the transition.
inline double reward(AoIState s, double w1, double w2) {
  return w1 * s.delta1 + w2 * s.delta2;
}

struct Transition {
  int next = 0;  // state index
  double prob = 0.0;
};

// At most four successors per (state, action). Zero-mass outcomes are
// dropped and duplicates merged, so the stored masses always sum to one.
struct SuccessorList {
  std::array<Transition, 4> entry{};
  int count = 0;

  void add(int next, double prob) {
    if (prob == 0.0) return;
    for (int i = 0; i < count; ++i) {
      if (entry[i].next == next) {
        entry[i].prob += prob;
        return;
      }
    }
    entry[count++] = {next, prob};
  }
};

// Successor distribution of (s, a) on the truncated grid. A dedicated slot
// has two outcomes (served client succeeds or not; the other client's age
// always grows); a NOMA slot has four, from the two independent per-client
// success events. Ages that would pass m saturate at m.
inline SuccessorList successors(AoIState s, int a, const OutageTable& outage, int m) {
  int up1 = s.delta1 < m ? s.delta1 + 1 : m;
  int up2 = s.delta2 < m ? s.delta2 + 1 : m;
  SuccessorList out;
  if (a == 0) {
    double p = outage.fail_near(a);
    out.add(state_index({1, up2}, m), 1.0 - p);
    out.add(state_index({up1, up2}, m), p);
  } else if (a == outage.n_levels) {
    double p = outage.fail_far(a);
    out.add(state_index({up1, 1}, m), 1.0 - p);
    out.add(state_index({up1, up2}, m), p);
  } else {
    double p1 = outage.fail_near(a);
    double p2 = outage.fail_far(a);
    out.add(state_index({1, up2}, m), (1.0 - p1) * p2);
    out.add(state_index({up1, 1}, m), (1.0 - p2) * p1);
    out.add(state_index({1, 1}, m), (1.0 - p1) * (1.0 - p2));
    out.add(state_index({up1, up2}, m), p1 * p2);
  }
  return out;
}

// Full transition law on the m x m grid, one successor list per
// (state, action), stored action-major.
struct TransitionKernel {
  int m = 0;
  std::vector<int> actions;
  std::vector<SuccessorList> rows;

  int n_states() const { return m * m; }
  int n_actions() const { return static_cast<int>(actions.size()); }
  const SuccessorList& row(int s_idx, int a_idx) const {
    return rows[static_cast<std::size_t>(a_idx) * n_states() + s_idx];
  }
};

inline TransitionKernel build_truncated_kernel(const SystemConfig& cfg, const OutageTable& outage,
                                               std::size_t max_entries = 50'000'000) {
  int m = cfg.m_trunc;
  std::size_t total = static_cast<std::size_t>(m) * m * outage.actions.size();
  if (total > max_entries)
    throw InstanceTooLarge("kernel would hold " + std::to_string(total) +
                           " (state, action) rows; cap is " + std::to_string(max_entries));
  TransitionKernel k;
  k.m = m;
  k.actions = outage.actions;
  k.rows.resize(total);
  for (int ai = 0; ai < k.n_actions(); ++ai) {
    int a = k.actions[ai];
    for (int si = 0; si < k.n_states(); ++si)
      k.rows[static_cast<std::size_t>(ai) * k.n_states() + si] =
          successors(state_at(si, m), a, outage, m);
  }
  return k;
}

// Debug dump, one line per transition: delta1 delta2 action next1 next2 prob.
// Not a stability-guaranteed format.
inline void dump_kernel(const TransitionKernel& k, std::ostream& os) {
  char buf[64];
  for (int si = 0; si < k.n_states(); ++si) {
    AoIState s = state_at(si, k.m);
    for (int ai = 0; ai < k.n_actions(); ++ai) {
      const SuccessorList& row = k.row(si, ai);
      for (int i = 0; i < row.count; ++i) {
        AoIState ns = state_at(row.entry[i].next, k.m);
        std::snprintf(buf, sizeof buf, "%.12g", row.entry[i].prob);
        os << s.delta1 << ' ' << s.delta2 << ' ' << k.actions[ai] << ' ' << ns.delta1 << ' '
           << ns.delta2 << ' ' << buf << '\n';
      }
    }
  }
}

}  // namespace aoisched
