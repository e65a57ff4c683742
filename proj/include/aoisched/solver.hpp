#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoisched/detail/linalg.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/policies.hpp"

namespace aoisched {

// max(v) - min(v); the usual stopping quantity for relative value iteration.
inline double span(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("span of an empty vector");
  double lo = v.front(), hi = v.front();
  for (double x : v) {
    if (x < lo) lo = x;
    if (x > hi) hi = x;
  }
  return hi - lo;
}

struct RviOptions {
  double tol = 1e-9;        // span of successive differences
  long max_iter = 1'000'000;
  AoIState reference{1, 1};  // h(reference) = 0
  // Aperiodicity transformation: iterate on (1-damping) I + damping P.
  // Leaves the average cost, the greedy policy and the (rescaled)
  // differential values unchanged, but keeps convergence geometric even
  // when the optimal chain is nearly periodic (e.g. loss-free alternating
  // service). 1.0 recovers the plain operator.
  double damping = 0.5;
};

struct SolverResult {
  double j_star = 0.0;         // optimal average cost per slot
  std::vector<double> h;       // differential value function, h[reference] = 0
  PolicyTable policy;          // greedy policy extracted from h
  long iterations = 0;
  double final_span = 0.0;
  bool converged = false;
};

// Greedy policy for a value function: argmin over actions of the expected
// continuation, smallest action index on ties. Used both for the final
// extraction and to re-derive the policy from a stored h.
inline PolicyTable greedy_policy(const TransitionKernel& k, const std::vector<double>& h) {
  PolicyTable p;
  p.m = k.m;
  p.kind = PolicyKind::Custom;
  p.action.resize(k.n_states());
  for (int si = 0; si < k.n_states(); ++si) {
    double best = std::numeric_limits<double>::infinity();
    int best_a = k.actions.front();
    for (int ai = 0; ai < k.n_actions(); ++ai) {
      const SuccessorList& row = k.row(si, ai);
      double v = 0.0;
      for (int i = 0; i < row.count; ++i) v += row.entry[i].prob * h[row.entry[i].next];
      if (v < best) {
        best = v;
        best_a = k.actions[ai];
      }
    }
    p.action[si] = best_a;
  }
  return p;
}

/**
 * Relative value iteration for the average-cost optimality equation
 *   J* + h(s) = min_a { r(s) + sum_s' p(s'|s,a) h(s') }
 * on the truncated kernel. Updates are synchronous (Jacobi) with the
 * damped operator, and the reference state's value is subtracted each
 * sweep, so iterates stay bounded; iteration stops when the span of
 * successive differences falls below tol. The subtracted offset at the
 * final sweep is the reported J*, and the span bound makes it accurate to
 * within tol. The stored h is rescaled by the damping factor, which turns
 * the damped fixed point back into a solution of the equation above.
 *
 * A run that exhausts max_iter returns the partial result with converged
 * set to false and final_span reporting the last span seen.
 */
inline SolverResult rvi_solve(const TransitionKernel& k, double w1, double w2,
                              RviOptions opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("rvi tol must be positive");
  if (!(opt.damping > 0.0) || opt.damping > 1.0)
    throw std::invalid_argument("rvi damping must lie in (0, 1]");
  const int n = k.n_states();
  const int na = k.n_actions();
  if (n == 0 || na == 0) throw std::invalid_argument("empty kernel");
  const int ref = state_index(opt.reference, k.m);
  const double kappa = opt.damping;

  std::vector<double> r(n);
  for (int si = 0; si < n; ++si) r[si] = reward(state_at(si, k.m), w1, w2);

  std::vector<double> v(n, 0.0), tv(n, 0.0);
  SolverResult out;
  double offset = 0.0;
  for (long iter = 1; iter <= opt.max_iter; ++iter) {
    for (int si = 0; si < n; ++si) {
      double best = std::numeric_limits<double>::infinity();
      for (int ai = 0; ai < na; ++ai) {
        const SuccessorList& row = k.row(si, ai);
        double sum = 0.0;
        for (int i = 0; i < row.count; ++i) sum += row.entry[i].prob * v[row.entry[i].next];
        if (sum < best) best = sum;
      }
      tv[si] = r[si] + (1.0 - kappa) * v[si] + kappa * best;
    }
    offset = tv[ref];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int si = 0; si < n; ++si) {
      double d = tv[si] - v[si];
      if (d < lo) lo = d;
      if (d > hi) hi = d;
      v[si] = tv[si] - offset;
    }
    out.iterations = iter;
    out.final_span = hi - lo;
    if (out.final_span < opt.tol) {
      out.converged = true;
      break;
    }
  }
  out.j_star = offset;
  for (double& x : v) x *= kappa;  // damped fixed point -> undamped h
  out.h = std::move(v);
  out.policy = greedy_policy(k, out.h);
  return out;
}

struct OracleResult {
  double best_cost = 0.0;
  PolicyTable best_policy;
};

/**
 * Exhaustive baseline for rvi_solve on tiny instances: walks every
 * stationary deterministic policy, solves the induced chain's stationary
 * distribution directly and evaluates its exact average cost. Guarded to
 * m <= 3 and at most 6 actions (|A|^(m^2) policies).
 */
inline OracleResult enumerate_policies_oracle(const TransitionKernel& k, double w1, double w2) {
  const int n = k.n_states();
  const int na = k.n_actions();
  if (k.m > 3 || na > 6)
    throw InstanceTooLarge("policy enumeration needs m <= 3 and at most 6 actions, got m = " +
                           std::to_string(k.m) + ", |A| = " + std::to_string(na));

  std::vector<double> r(n);
  for (int si = 0; si < n; ++si) r[si] = reward(state_at(si, k.m), w1, w2);

  std::vector<int> choice(n, 0);  // action index per state
  std::vector<double> p(static_cast<std::size_t>(n) * n);
  std::vector<double> theta, work_a, work_b;
  OracleResult out;
  out.best_cost = std::numeric_limits<double>::infinity();

  for (;;) {
    std::fill(p.begin(), p.end(), 0.0);
    for (int si = 0; si < n; ++si) {
      const SuccessorList& row = k.row(si, choice[si]);
      for (int i = 0; i < row.count; ++i)
        p[static_cast<std::size_t>(si) * n + row.entry[i].next] += row.entry[i].prob;
    }
    detail::stationary_dense(p, n, theta, work_a, work_b);
    double cost = 0.0;
    for (int si = 0; si < n; ++si) cost += theta[si] * r[si];
    if (cost < out.best_cost) {
      out.best_cost = cost;
      out.best_policy.m = k.m;
      out.best_policy.kind = PolicyKind::Custom;
      out.best_policy.action.resize(n);
      for (int si = 0; si < n; ++si) out.best_policy.action[si] = k.actions[choice[si]];
    }
    int pos = 0;
    while (pos < n && ++choice[pos] == na) choice[pos++] = 0;
    if (pos == n) break;
  }
  return out;
}

}  // namespace aoisched
