#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/config.hpp"
#include "aoisched/detail/linalg.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/policies.hpp"
#include "aoisched/rng.hpp"

namespace aoisched {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Markov chain induced by following one policy on the truncated grid.
// Transitions that would leave the grid carry their mass on the saturated
// successor, so every row stays stochastic.
struct PolicyChain {
  int m = 0;
  std::vector<SuccessorList> rows;
  int n_states() const { return m * m; }
};

inline PolicyChain policy_chain(const PolicyTable& p, const OutageTable& outage) {
  PolicyChain c;
  c.m = p.m;
  c.rows.resize(static_cast<std::size_t>(p.m) * p.m);
  for (int si = 0; si < c.n_states(); ++si)
    c.rows[si] = successors(state_at(si, p.m), p.action[si], outage, p.m);
  return c;
}

namespace detail {

// Number of terminal strongly connected components (= recurrent classes) of
// the transition graph. Iterative Tarjan; positive-probability edges only.
inline int count_recurrent_classes(const std::vector<SuccessorList>& rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<int> order(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::pair<int, int>> call;  // (node, next edge)
  int next_order = 0, n_comp = 0;

  for (int root = 0; root < n; ++root) {
    if (order[root] != -1) continue;
    order[root] = low[root] = next_order++;
    stack.push_back(root);
    on_stack[root] = 1;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      int v = call.back().first;
      int ei = call.back().second;
      if (ei < rows[v].count) {
        ++call.back().second;
        int w = rows[v].entry[ei].next;
        if (order[w] == -1) {
          order[w] = low[w] = next_order++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w] && order[w] < low[v]) {
          low[v] = order[w];
        }
      } else {
        if (low[v] == order[v]) {
          for (;;) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = n_comp;
            if (w == v) break;
          }
          ++n_comp;
        }
        call.pop_back();
        if (!call.empty()) {
          int parent = call.back().first;
          if (low[v] < low[parent]) low[parent] = low[v];
        }
      }
    }
  }

  std::vector<char> has_exit(n_comp, 0);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < rows[v].count; ++i)
      if (comp[rows[v].entry[i].next] != comp[v]) has_exit[comp[v]] = 1;
  int terminal = 0;
  for (char e : has_exit)
    if (!e) ++terminal;
  return terminal;
}

inline double stationary_residual(const std::vector<SuccessorList>& rows,
                                  const std::vector<double>& theta, std::vector<double>& scratch) {
  const int n = static_cast<int>(rows.size());
  scratch.assign(n, 0.0);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < rows[v].count; ++i)
      scratch[rows[v].entry[i].next] += theta[v] * rows[v].entry[i].prob;
  double r = 0.0;
  for (int v = 0; v < n; ++v) {
    double d = std::abs(scratch[v] - theta[v]);
    if (d > r) r = d;
  }
  return r;
}

}  // namespace detail

struct SteadyState {
  int m = 0;
  std::vector<double> theta;
  double residual = 0.0;
};

// Stationary distribution of a chain with one positive-probability vector
// per state. Small chains are solved directly; larger ones by power
// iteration on the half-lazy chain (P + I)/2, which has the same stationary
// distribution and converges regardless of periodicity. Chains with more
// than one recurrent class are rejected.
inline SteadyState stationary_distribution(const std::vector<SuccessorList>& rows) {
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw EvalError("empty chain");
  int classes = detail::count_recurrent_classes(rows);
  if (classes != 1)
    throw EvalError("chain has " + std::to_string(classes) +
                    " recurrent classes; stationary distribution is not unique");

  const double target = 1e-10;
  SteadyState out;
  std::vector<double> scratch;

  if (n <= 400) {
    std::vector<double> p(static_cast<std::size_t>(n) * n, 0.0);
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < rows[v].count; ++i)
        p[static_cast<std::size_t>(v) * n + rows[v].entry[i].next] += rows[v].entry[i].prob;
    std::vector<double> work_a, work_b;
    aoisched::detail::stationary_dense(p, n, out.theta, work_a, work_b);
    for (double& x : out.theta)
      if (x < 0.0) x = 0.0;  // transient states can come out at -1e-18
    double sum = 0.0;
    for (double x : out.theta) sum += x;
    for (double& x : out.theta) x /= sum;
    out.residual = detail::stationary_residual(rows, out.theta, scratch);
    if (out.residual < target) return out;
    // fall through to power iteration from the direct estimate
  } else {
    out.theta.assign(n, 1.0 / n);
  }

  std::vector<double> next(n);
  const long max_iter = 5'000'000;
  for (long iter = 0; iter < max_iter; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < rows[v].count; ++i)
        next[rows[v].entry[i].next] += out.theta[v] * rows[v].entry[i].prob;
    double resid = 0.0;
    for (int v = 0; v < n; ++v) {
      double d = std::abs(next[v] - out.theta[v]);
      if (d > resid) resid = d;
    }
    if (resid < target) {
      out.residual = resid;
      return out;
    }
    double sum = 0.0;
    for (int v = 0; v < n; ++v) {
      out.theta[v] = 0.5 * (out.theta[v] + next[v]);
      sum += out.theta[v];
    }
    for (double& x : out.theta) x /= sum;
  }
  throw EvalError("stationary distribution did not reach residual 1e-10");
}

inline SteadyState steady_state(const PolicyChain& chain) {
  SteadyState out = stationary_distribution(chain.rows);
  out.m = chain.m;
  return out;
}

// Long-run weighted age of the truncated chain: sum over states of
// theta(s) (w1 delta1 + w2 delta2).
inline double weighted_aoi_analytic(const SteadyState& ss, double w1, double w2) {
  double total = 0.0;
  for (int si = 0; si < ss.m * ss.m; ++si) total += ss.theta[si] * reward(state_at(si, ss.m), w1, w2);
  return total;
}

struct SimReport {
  long long horizon = 0;
  std::uint64_t seed = 0;
  double avg_weighted_aoi = 0.0;
  double avg_aoi_1 = 0.0;
  double avg_aoi_2 = 0.0;
  long long success_count_1 = 0;
  long long success_count_2 = 0;
  std::map<int, long long> action_histogram;
  long long escape_slots = 0;  // slots whose true age pair lay outside the grid
  double escape_freq = 0.0;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

// Slot-by-slot simulation of the age process under a policy. Ages are NOT
// truncated; lookups beyond the policy grid are the caller's concern (the
// PolicyTable overload saturates them) and such slots are tallied as
// escapes. Per-client success is an independent coin flip with the chosen
// action's outage probability, client 1 drawn first. Deterministic in
// (policy, cfg, outage, horizon, seed).
template <class PolicyFn>
SimReport simulate_with(PolicyFn&& policy, const SystemConfig& cfg, const OutageTable& outage,
                        long long horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const int n_levels = outage.n_levels;

  // Dense per-action lookups; -1 marks an action outside the table.
  std::vector<double> fail1(n_levels + 1, -1.0), fail2(n_levels + 1, -1.0);
  for (std::size_t i = 0; i < outage.actions.size(); ++i) {
    int a = outage.actions[i];
    fail1[a] = outage.fail1[i];
    fail2[a] = outage.fail2[i];
  }

  Rng rng(seed);
  long long d1 = 1, d2 = 1;
  long long sum1 = 0, sum2 = 0;
  SimReport rep;
  rep.horizon = horizon;
  rep.seed = seed;
  const int m = cfg.m_trunc;

  for (long long t = 0; t < horizon; ++t) {
    sum1 += d1;
    sum2 += d2;
    if (d1 > m || d2 > m) ++rep.escape_slots;
    int a = policy(d1, d2);
    if (a < 0 || a > n_levels || (serves_near(a, n_levels) && fail1[a] < 0.0) ||
        (serves_far(a, n_levels) && fail2[a] < 0.0))
      throw std::invalid_argument("policy chose action " + std::to_string(a) +
                                  " outside the outage table");
    ++rep.action_histogram[a];
    bool ok1 = false, ok2 = false;
    if (serves_near(a, n_levels)) ok1 = rng.uniform() >= fail1[a];
    if (serves_far(a, n_levels)) ok2 = rng.uniform() >= fail2[a];
    if (ok1) ++rep.success_count_1;
    if (ok2) ++rep.success_count_2;
    d1 = ok1 ? 1 : d1 + 1;
    d2 = ok2 ? 1 : d2 + 1;
  }

  rep.avg_aoi_1 = static_cast<double>(sum1) / static_cast<double>(horizon);
  rep.avg_aoi_2 = static_cast<double>(sum2) / static_cast<double>(horizon);
  rep.avg_weighted_aoi = cfg.w1 * rep.avg_aoi_1 + cfg.w2 * rep.avg_aoi_2;
  rep.escape_freq = static_cast<double>(rep.escape_slots) / static_cast<double>(horizon);
  return rep;
}

inline SimReport simulate(const PolicyTable& p, const SystemConfig& cfg, long long horizon,
                          std::uint64_t seed) {
  OutageTable outage = build_outage_table(cfg, feasible_actions(cfg, false));
  return simulate_with([&p](long long a1, long long a2) { return p.at_clamped(a1, a2); }, cfg,
                       outage, horizon, seed);
}

}  // namespace aoisched
