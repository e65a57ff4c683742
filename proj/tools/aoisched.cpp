// Command-line front end: solve, map, sweep, simulate and verify experiments
// for the two-client adaptive NOMA/OMA age-minimizing scheduler.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aoisched/aoisched.hpp"

namespace {

using namespace aoisched;

// Every override is carried as a raw string and merged into the config map,
// so the file format and the flags share one parser and one validation path.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines, # comments)");
    auto opt = [this, cmd](const char* flag, const char* key, const char* help) {
      cmd->add_option_function<std::string>(
          flag, [this, key](const std::string& v) { values[key] = v; }, help);
    };
    opt("--snr-db", "snr_db", "transmission SNR in dB");
    opt("--d1", "d1", "normalized distance of client 1 (near)");
    opt("--d2", "d2", "normalized distance of client 2 (far)");
    opt("--tau", "tau", "path loss exponent");
    opt("--rate", "rate", "target rate R (bits/s/Hz)");
    opt("--n-levels", "n_levels", "power quantization count N");
    opt("--w1", "w1", "weight of client 1");
    opt("--w2", "w2", "weight of client 2");
    opt("--m-trunc", "m_trunc", "age truncation bound");
    opt("--eliminate", "eliminate", "use the reduced action set (true/false)");
    opt("--snr-grid", "snr_grid_db", "comma-separated SNR grid for sweeps (dB)");
    opt("--policies", "policies", "comma-separated policy kinds");
    opt("--horizon", "sim_horizon", "simulation horizon in slots");
    opt("--out-dir", "out_dir", "output directory");
  }

  ExperimentSpec spec() const {
    ConfigMap kv;
    if (!config_path.empty()) kv = parse_config_file(config_path);
    for (const auto& [k, v] : values) kv[k] = v;
    return spec_from_config(kv);
  }
};

void print_kv(const char* key, const std::string& value) {
  std::cout << key << " = " << value << '\n';
}

int cmd_solve(const ExperimentSpec& spec, const std::string& kind_name,
              const std::string& policy_out, const std::string& kernel_out) {
  PolicyKind kind = policy_kind_from_string(kind_name);
  PolicySolution sol = make_policy(spec.base, kind, spec.eliminate);

  print_kv("kind", to_string(kind));
  if (sol.has_solver) {
    print_kv("j_star", format_num(sol.solver.j_star));
    print_kv("iterations", std::to_string(sol.solver.iterations));
    print_kv("final_span", format_num(sol.solver.final_span));
    print_kv("converged", sol.solver.converged ? "true" : "false");
  } else {
    print_kv("j_star", "na");
  }
  print_kv("analytic_aoi", format_num(analytic_weighted_aoi(sol.policy, spec.base)));

  if (!policy_out.empty()) write_text_file(policy_out, export_policy_csv(sol.policy));
  if (!kernel_out.empty()) {
    std::vector<int> actions;
    switch (kind) {
      case PolicyKind::OmaOnlyOptimal:
        actions = restrict_action_set(spec.base, ActionSubset::OmaOnly);
        break;
      case PolicyKind::NomaOnlyOptimal:
        actions = restrict_action_set(spec.base, ActionSubset::NomaOnly);
        break;
      default:
        actions = feasible_actions(spec.base, spec.eliminate);
        break;
    }
    TransitionKernel k = build_truncated_kernel(spec.base, build_outage_table(spec.base, actions));
    std::ofstream out(kernel_out);
    if (!out) throw IoError("cannot open for writing: " + kernel_out);
    dump_kernel(k, out);
  }
  if (sol.has_solver && !sol.solver.converged) {
    std::cerr << "error: solver-nonconverged: span " << format_num(sol.solver.final_span)
              << " after " << sol.solver.iterations << " iterations\n";
    return 6;
  }
  return 0;
}

int cmd_map(const ExperimentSpec& spec) {
  MapRunResult res = run_policy_map(spec);
  for (const std::string& f : res.files) std::cout << "wrote " << f << '\n';
  if (!res.all_converged) {
    std::cerr << "error: solver-nonconverged: one or more policies did not converge "
                 "(outputs marked in .meta)\n";
    return 6;
  }
  return 0;
}

int cmd_sweep(const ExperimentSpec& spec) {
  SweepRunResult res = run_sweep(spec);
  std::cout << "wrote " << res.csv_path << '\n';
  print_kv("failed_rows", std::to_string(res.failed_rows));
  print_kv("monotonicity_violations", std::to_string(res.monotonicity_violations));
  return 0;
}

int cmd_simulate(const ExperimentSpec& spec, const std::string& kind_name, std::uint64_t seed) {
  PolicyKind kind = policy_kind_from_string(kind_name);
  PolicySolution sol = make_policy(spec.base, kind, spec.eliminate);
  SimReport rep = simulate(sol.policy, spec.base, spec.sim_horizon, seed);
  print_kv("kind", to_string(kind));
  print_kv("horizon", std::to_string(rep.horizon));
  print_kv("seed", std::to_string(rep.seed));
  print_kv("avg_weighted_aoi", format_num(rep.avg_weighted_aoi));
  print_kv("avg_aoi_1", format_num(rep.avg_aoi_1));
  print_kv("avg_aoi_2", format_num(rep.avg_aoi_2));
  print_kv("success_count_1", std::to_string(rep.success_count_1));
  print_kv("success_count_2", std::to_string(rep.success_count_2));
  print_kv("escape_freq", format_num(rep.escape_freq));
  for (const auto& [a, n] : rep.action_histogram)
    print_kv(("action_" + std::to_string(a)).c_str(), std::to_string(n));
  return 0;
}

int cmd_verify(const ExperimentSpec& spec, int m_subadd) {
  PolicySolution opt = make_policy(spec.base, PolicyKind::OptimalAdaptive, spec.eliminate);
  SwitchingCheck sw = verify_switching(opt.policy);
  print_kv("switching_pass", sw.pass ? "true" : "false");
  print_kv("switching_violations", std::to_string(sw.violations.size()));

  OutageTable outage = build_outage_table(spec.base, feasible_actions(spec.base, false));
  SwitchingCheck sub_sw = verify_switching(build_suboptimal_policy(spec.base, outage));
  print_kv("suboptimal_switching_pass", sub_sw.pass ? "true" : "false");  // informational

  SystemConfig small = spec.base;
  small.m_trunc = m_subadd;
  TransitionKernel k =
      build_truncated_kernel(small, build_outage_table(small, feasible_actions(small, true)));
  SubadditivityCheck sa = verify_subadditivity(k, small.w1, small.w2);
  print_kv("subadditivity_m", std::to_string(m_subadd));
  print_kv("subadditivity_pass", sa.pass ? "true" : "false");
  print_kv("subadditivity_violations", std::to_string(sa.violations.size()));
  for (std::size_t i = 0; i < sa.violations.size() && i < 5; ++i) {
    const auto& v = sa.violations[i];
    std::ostringstream os;
    os << "condition " << v.condition << " k=" << v.k << " s+=(" << v.s_plus.delta1 << ','
       << v.s_plus.delta2 << ") s-=(" << v.s_minus.delta1 << ',' << v.s_minus.delta2 << ") a+="
       << v.a_plus << " a-=" << v.a_minus;
    print_kv("subadditivity_violation", os.str());
  }
  if (!sw.pass || !sa.pass) {
    std::cerr << "error: verification-failed: switching or subadditivity check reported "
                 "violations\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-Information optimal NOMA/OMA downlink scheduling"};
  app.require_subcommand(1);

  Overrides common;
  std::string kind = "optimal-adaptive";
  std::string policy_out, kernel_out;
  std::uint64_t seed = 0;
  int m_subadd = 8;

  CLI::App* solve = app.add_subcommand("solve", "solve one policy and print its summary");
  common.add_flags(solve);
  solve->add_option("--kind", kind, "policy kind to solve/build");
  solve->add_option("--policy-out", policy_out, "write the policy map CSV here");
  solve->add_option("--dump-kernel", kernel_out, "write the sparse transition kernel here");

  CLI::App* map = app.add_subcommand("map", "write policy map CSVs for the selected kinds");
  common.add_flags(map);

  CLI::App* sweep = app.add_subcommand("sweep", "sweep the SNR grid and write sweep.csv");
  common.add_flags(sweep);

  CLI::App* simulate = app.add_subcommand("simulate", "run one seeded simulation");
  common.add_flags(simulate);
  simulate->add_option("--kind", kind, "policy kind to simulate");
  simulate->add_option("--seed", seed, "RNG seed (required)")->required();

  CLI::App* verify = app.add_subcommand("verify", "run the structural and subadditivity checkers");
  common.add_flags(verify);
  verify->add_option("--m-subadd", m_subadd, "truncation bound for the subadditivity check");

  CLI11_PARSE(app, argc, argv);

  try {
    aoisched::ExperimentSpec spec = common.spec();
    if (solve->parsed()) return cmd_solve(spec, kind, policy_out, kernel_out);
    if (map->parsed()) return cmd_map(spec);
    if (sweep->parsed()) return cmd_sweep(spec);
    if (simulate->parsed()) return cmd_simulate(spec, kind, seed);
    if (verify->parsed()) return cmd_verify(spec, m_subadd);
  } catch (const aoisched::ConfigError& e) {
    std::cerr << "error: config-invalid: " << e.what() << '\n';
    return 2;
  } catch (const aoisched::IoError& e) {
    std::cerr << "error: io-error: " << e.what() << '\n';
    return 3;
  } catch (const aoisched::InstanceTooLarge& e) {
    std::cerr << "error: instance-too-large: " << e.what() << '\n';
    return 4;
  } catch (const aoisched::EvalError& e) {
    std::cerr << "error: eval-failed: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 10;
  }
  return 0;
}
