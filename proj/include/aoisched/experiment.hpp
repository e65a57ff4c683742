#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/config.hpp"
#include "aoisched/eval.hpp"
#include "aoisched/io.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/policies.hpp"
#include "aoisched/solver.hpp"

namespace aoisched {

// One experiment: a base configuration, the SNR grid swept by `sweep`, the
// policy families to build, and the simulation budget.
struct ExperimentSpec {
  SystemConfig base;  // rho already converted from snr_db
  double snr_db = 18.0;
  std::vector<double> snr_grid_db;
  std::vector<PolicyKind> kinds;
  bool eliminate = false;
  long long sim_horizon = 1'000'000;
  std::uint64_t sim_seed = 12345;
  std::string out_dir = ".";

  void validate() const {
    base.validate();
    if (snr_grid_db.empty()) throw ConfigError("snr_grid_db must be nonempty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
      if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
        throw ConfigError("snr_grid_db must be strictly increasing");
    if (kinds.empty()) throw ConfigError("at least one policy kind must be selected");
    if (sim_horizon < 1) throw ConfigError("sim_horizon must be at least 1");
  }
};

namespace detail {
inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "snr_db", "d1",          "d2",       "tau",      "rate",    "n_levels",
      "w1",     "w2",          "m_trunc",  "eliminate", "snr_grid_db",
      "policies", "sim_horizon", "sim_seed", "out_dir"};
  return keys;
}
}  // namespace detail

// Builds a spec from parsed `key = value` pairs, filling documented
// defaults. Unknown keys are rejected so typos do not silently fall back to
// a default.
inline ExperimentSpec spec_from_config(const ConfigMap& kv) {
  for (const auto& [key, value] : kv)
    if (!detail::known_keys().count(key)) throw ConfigError("unknown config key: " + key);

  auto get = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  ExperimentSpec spec;
  if (auto v = get("snr_db")) spec.snr_db = detail::parse_double("snr_db", *v);
  spec.base.rho = linear_from_db(spec.snr_db);
  if (auto v = get("d1")) spec.base.d1 = detail::parse_double("d1", *v);
  if (auto v = get("d2")) spec.base.d2 = detail::parse_double("d2", *v);
  if (auto v = get("tau")) spec.base.tau = detail::parse_double("tau", *v);
  if (auto v = get("rate")) spec.base.rate = detail::parse_double("rate", *v);
  if (auto v = get("n_levels"))
    spec.base.n_levels = static_cast<int>(detail::parse_int("n_levels", *v));
  if (auto v = get("w1")) spec.base.w1 = detail::parse_double("w1", *v);
  if (auto v = get("w2")) spec.base.w2 = detail::parse_double("w2", *v);
  if (auto v = get("m_trunc")) spec.base.m_trunc = static_cast<int>(detail::parse_int("m_trunc", *v));
  if (auto v = get("eliminate")) spec.eliminate = detail::parse_bool("eliminate", *v);

  if (auto v = get("snr_grid_db")) {
    for (const std::string& part : split(*v, ','))
      spec.snr_grid_db.push_back(detail::parse_double("snr_grid_db", part));
  } else {
    for (int db = 8; db <= 30; ++db) spec.snr_grid_db.push_back(db);
  }

  if (auto v = get("policies")) {
    for (const std::string& part : split(*v, ','))
      spec.kinds.push_back(policy_kind_from_string(part));
  } else {
    spec.kinds = {PolicyKind::OptimalAdaptive, PolicyKind::Suboptimal, PolicyKind::OmaOnlyOptimal,
                  PolicyKind::NomaOnlyOptimal};
  }

  if (auto v = get("sim_horizon")) spec.sim_horizon = detail::parse_int("sim_horizon", *v);
  if (auto v = get("sim_seed"))
    spec.sim_seed = static_cast<std::uint64_t>(detail::parse_int("sim_seed", *v));
  if (auto v = get("out_dir")) spec.out_dir = *v;

  spec.validate();
  return spec;
}

// Effective configuration as `key = value` lines, fixed order; pasting the
// echo back through the parser reproduces the run exactly.
inline std::string echo_config(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "snr_db = " << format_num(spec.snr_db) << '\n';
  os << "d1 = " << format_num(spec.base.d1) << '\n';
  os << "d2 = " << format_num(spec.base.d2) << '\n';
  os << "tau = " << format_num(spec.base.tau) << '\n';
  os << "rate = " << format_num(spec.base.rate) << '\n';
  os << "n_levels = " << spec.base.n_levels << '\n';
  os << "w1 = " << format_num(spec.base.w1) << '\n';
  os << "w2 = " << format_num(spec.base.w2) << '\n';
  os << "m_trunc = " << spec.base.m_trunc << '\n';
  os << "eliminate = " << (spec.eliminate ? "true" : "false") << '\n';
  os << "snr_grid_db = ";
  for (std::size_t i = 0; i < spec.snr_grid_db.size(); ++i)
    os << (i ? "," : "") << format_num(spec.snr_grid_db[i]);
  os << '\n';
  std::vector<std::string> names;
  for (PolicyKind k : spec.kinds) names.push_back(to_string(k));
  os << "policies = ";
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << '\n';
  os << "sim_horizon = " << spec.sim_horizon << '\n';
  os << "sim_seed = " << spec.sim_seed << '\n';
  os << "out_dir = " << spec.out_dir << '\n';
  return os.str();
}

struct PolicySolution {
  PolicyTable policy;
  bool has_solver = false;
  SolverResult solver;
};

// Builds the requested policy family at one configuration. The three
// "-optimal" kinds run relative value iteration on the matching action set;
// the suboptimal kind is the one-step-lookahead table.
inline PolicySolution make_policy(const SystemConfig& cfg, PolicyKind kind, bool eliminate,
                                  RviOptions opt = {}) {
  cfg.validate();
  PolicySolution out;
  std::vector<int> actions;
  switch (kind) {
    case PolicyKind::OptimalAdaptive:
      actions = feasible_actions(cfg, eliminate);
      break;
    case PolicyKind::OmaOnlyOptimal:
      actions = restrict_action_set(cfg, ActionSubset::OmaOnly);
      break;
    case PolicyKind::NomaOnlyOptimal:
      actions = restrict_action_set(cfg, ActionSubset::NomaOnly);
      break;
    case PolicyKind::Suboptimal: {
      OutageTable outage = build_outage_table(cfg, feasible_actions(cfg, false));
      out.policy = build_suboptimal_policy(cfg, outage);
      return out;
    }
    case PolicyKind::Custom:
      throw ConfigError("custom policies cannot be constructed from a kind name");
  }
  OutageTable outage = build_outage_table(cfg, actions);
  TransitionKernel kernel = build_truncated_kernel(cfg, outage);
  out.solver = rvi_solve(kernel, cfg.w1, cfg.w2, opt);
  out.has_solver = true;
  out.policy = out.solver.policy;
  out.policy.kind = kind;
  return out;
}

// Stationary weighted age of a policy's truncated chain.
inline double analytic_weighted_aoi(const PolicyTable& p, const SystemConfig& cfg) {
  OutageTable outage = build_outage_table(cfg, feasible_actions(cfg, false));
  SteadyState ss = steady_state(policy_chain(p, outage));
  return weighted_aoi_analytic(ss, cfg.w1, cfg.w2);
}

// Policy map export: `delta1,delta2,action`, row-major in delta1 then
// delta2. This is the input format for policy-map rendering.
inline std::string export_policy_csv(const PolicyTable& p) {
  std::ostringstream os;
  os << "delta1,delta2,action\n";
  for (int d1 = 1; d1 <= p.m; ++d1)
    for (int d2 = 1; d2 <= p.m; ++d2) os << d1 << ',' << d2 << ',' << p.at(d1, d2) << '\n';
  return os.str();
}

inline std::string error_class_of(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config-invalid";
  if (dynamic_cast<const InstanceTooLarge*>(&e)) return "instance-too-large";
  if (dynamic_cast<const EvalError*>(&e)) return "eval-failed";
  if (dynamic_cast<const IoError*>(&e)) return "io-error";
  return "internal";
}

struct MapRunResult {
  std::vector<std::string> files;
  bool all_converged = true;
};

// Solves/builds every requested policy at the spec's single configuration
// and writes one CSV per policy plus a metadata sidecar. A solver that hits
// its iteration cap still writes its outputs, marked converged = false.
inline MapRunResult run_policy_map(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.out_dir);
  MapRunResult out;

  std::vector<PolicyKind> kinds = spec.kinds;
  std::sort(kinds.begin(), kinds.end(),
            [](PolicyKind a, PolicyKind b) { return std::string(to_string(a)) < to_string(b); });

  for (PolicyKind kind : kinds) {
    PolicySolution sol = make_policy(spec.base, kind, spec.eliminate);
    std::string stem = spec.out_dir + "/map_" + to_string(kind);
    write_text_file(stem + ".csv", export_policy_csv(sol.policy));

    std::ostringstream meta;
    meta << "kind = " << to_string(kind) << '\n';
    if (sol.has_solver) {
      meta << "j_star = " << format_num(sol.solver.j_star) << '\n';
      meta << "iterations = " << sol.solver.iterations << '\n';
      meta << "final_span = " << format_num(sol.solver.final_span) << '\n';
      meta << "converged = " << (sol.solver.converged ? "true" : "false") << '\n';
      if (!sol.solver.converged) out.all_converged = false;
    } else {
      meta << "j_star = na\n";
      meta << "iterations = na\n";
    }
    meta << echo_config(spec);
    write_text_file(stem + ".meta", meta.str());
    out.files.push_back(stem + ".csv");
    out.files.push_back(stem + ".meta");
  }
  return out;
}

struct SweepRow {
  double snr_db = 0.0;
  PolicyKind kind = PolicyKind::Custom;
  std::optional<double> j_star;
  std::optional<double> analytic;
  std::optional<double> simulated;
  std::optional<double> escape_freq;
  std::string error_class;  // nonempty marks a failed point
};

// One sweep point x policy kind: solve/build, evaluate the stationary chain
// and run a seeded simulation. Failures are caught and recorded in-row so
// the sweep continues.
inline std::vector<SweepRow> run_sweep_rows(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<PolicyKind> kinds = spec.kinds;
  std::sort(kinds.begin(), kinds.end(),
            [](PolicyKind a, PolicyKind b) { return std::string(to_string(a)) < to_string(b); });

  std::vector<SweepRow> rows;
  for (std::size_t pi = 0; pi < spec.snr_grid_db.size(); ++pi) {
    SystemConfig cfg = spec.base;
    cfg.rho = linear_from_db(spec.snr_grid_db[pi]);
    for (PolicyKind kind : kinds) {
      SweepRow row;
      row.snr_db = spec.snr_grid_db[pi];
      row.kind = kind;
      try {
        PolicySolution sol = make_policy(cfg, kind, spec.eliminate);
        if (sol.has_solver && !sol.solver.converged) {
          row.error_class = "solver-nonconverged";
        } else {
          if (sol.has_solver) row.j_star = sol.solver.j_star;
          row.analytic = analytic_weighted_aoi(sol.policy, cfg);
          std::uint64_t seed =
              derive_seed(spec.sim_seed, pi * 8 + static_cast<std::uint64_t>(kind));
          SimReport rep = simulate(sol.policy, cfg, spec.sim_horizon, seed);
          row.simulated = rep.avg_weighted_aoi;
          row.escape_freq = rep.escape_freq;
        }
      } catch (const std::exception& e) {
        row.error_class = error_class_of(e);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "snr_db,policy,j_star_or_na,analytic_aoi,simulated_aoi,escape_freq\n";
  for (const SweepRow& row : rows) {
    os << format_num(row.snr_db) << ',' << to_string(row.kind) << ',';
    if (!row.error_class.empty()) {
      std::string marker = "failed:" + row.error_class;
      os << marker << ',' << marker << ',' << marker << ',' << marker << '\n';
      continue;
    }
    os << (row.j_star ? format_num(*row.j_star) : std::string("na")) << ','
       << format_num(*row.analytic) << ',' << format_num(*row.simulated) << ','
       << format_num(*row.escape_freq) << '\n';
  }
  return os.str();
}

// Sanity flag: a policy family whose analytic value worsens as SNR grows is
// suspicious. Returns the offending (kind, lower snr index) pairs.
inline std::vector<std::pair<PolicyKind, std::size_t>> sweep_monotonicity_violations(
    const std::vector<SweepRow>& rows, const ExperimentSpec& spec) {
  std::vector<std::pair<PolicyKind, std::size_t>> out;
  for (PolicyKind kind : spec.kinds) {
    std::vector<std::pair<std::size_t, double>> vals;
    for (const SweepRow& row : rows)
      if (row.kind == kind && row.analytic) {
        std::size_t pi =
            std::find(spec.snr_grid_db.begin(), spec.snr_grid_db.end(), row.snr_db) -
            spec.snr_grid_db.begin();
        vals.emplace_back(pi, *row.analytic);
      }
    std::sort(vals.begin(), vals.end());
    for (std::size_t i = 1; i < vals.size(); ++i)
      if (vals[i].second > vals[i - 1].second + 1e-9) out.emplace_back(kind, vals[i - 1].first);
  }
  return out;
}

struct SweepRunResult {
  std::string csv_path;
  std::size_t monotonicity_violations = 0;
  std::size_t failed_rows = 0;
};

inline SweepRunResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.out_dir);
  std::vector<SweepRow> rows = run_sweep_rows(spec);

  SweepRunResult out;
  out.csv_path = spec.out_dir + "/sweep.csv";
  write_text_file(out.csv_path, sweep_csv(rows));

  auto violations = sweep_monotonicity_violations(rows, spec);
  out.monotonicity_violations = violations.size();
  for (const SweepRow& row : rows)
    if (!row.error_class.empty()) ++out.failed_rows;

  std::ostringstream meta;
  meta << echo_config(spec);
  meta << "rows = " << rows.size() << '\n';
  meta << "failed_rows = " << out.failed_rows << '\n';
  meta << "monotonicity_violations = " << out.monotonicity_violations << '\n';
  for (auto& [kind, pi] : violations)
    meta << "monotonicity_violation = " << to_string(kind) << " at snr_db "
         << format_num(spec.snr_grid_db[pi]) << '\n';
  write_text_file(spec.out_dir + "/sweep.meta", meta.str());
  return out;
}

}  // namespace aoisched
