#include "semoff/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semoff/config_io.hpp"
#include "semoff/engine.hpp"
#include "semoff/oracle.hpp"
#include "semoff/verify.hpp"

namespace semoff {

namespace {

namespace fs = std::filesystem;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> slots;
  std::optional<int> scenario;
  std::optional<std::string> policy;
  bool progress = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--slots", f.slots, "number of time slots");
  cmd->add_option("--scenario", f.scenario, "reference scenario preset")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--policy", f.policy, "drlh:N | drlh | exhaustive | random");
  cmd->add_flag("--progress", f.progress, "report progress on stderr");
}

// Flags override the file, the file overrides the defaults.
RunConfig resolve(const RunFlags& f) {
  RunConfig run = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.seed) run.scenario.seed = *f.seed;
  if (f.scenario) run.scenario.preset = *f.scenario;
  if (f.policy)
    run.scenario.policy = PolicySource::parse(*f.policy, run.system.training.num_candidates);
  if (f.slots) run.system.training.total_slots = static_cast<int>(*f.slots);
  require_valid(effective_system(run));
  return run;
}

std::function<void(std::uint64_t)> progress_fn(bool on, std::uint64_t total) {
  if (!on) return {};
  return [total](std::uint64_t done) {
    std::fprintf(stderr, "\r%llu / %llu slots", static_cast<unsigned long long>(done),
                 static_cast<unsigned long long>(total));
    if (done == total) std::fputc('\n', stderr);
  };
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

int cmd_simulate(const RunFlags& f, const std::string& out_dir, bool trace_channels,
                 bool save_actor) {
  const RunConfig run = resolve(f);
  const SystemConfig cfg = effective_system(run);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  save_run_config(run, (dir / "config.json").string());

  Simulator sim(cfg, run.scenario);
  std::ofstream trace;
  if (trace_channels) {
    trace = open_out(dir / "channels.csv");
    write_channel_trace_header(trace);
    sim.on_channels = [&trace](std::uint64_t t, const ChannelDraw& d) {
      append_channel_trace(trace, t, d);
    };
  }
  const auto total = static_cast<std::uint64_t>(cfg.training.total_slots);
  const auto progress = progress_fn(f.progress, total);
  for (std::uint64_t t = 0; t < total; ++t) {
    sim.run_slot();
    if (progress && (t + 1) % 1000 == 0) progress(t + 1);
  }
  if (save_actor && sim.actor()) sim.actor()->save((dir / "actor.txt").string());
  const MetricsLog log = sim.take_log();

  auto metrics = open_out(dir / "metrics.csv");
  write_metrics_csv(log, metrics);
  auto loss = open_out(dir / "loss.csv");
  write_loss_csv(log, loss);
  const RunSummary s = summarize(log);
  auto summary = open_out(dir / "summary.json");
  summary << summary_json(s, run) << '\n';

  std::printf("slots %llu  mean Q^L %.4f  mean Q^E %.4f  mean power %.6g W\n",
              static_cast<unsigned long long>(s.slots), s.mean_q_local_all, s.mean_q_edge_all,
              s.mean_power);
  if (s.bound_violations || s.service_violations) {
    std::fprintf(stderr, "invariant violations: bound %llu, service %llu\n",
                 static_cast<unsigned long long>(s.bound_violations),
                 static_cast<unsigned long long>(s.service_violations));
    return 3;
  }
  return 0;
}

int cmd_sweep(const RunFlags& f, const std::string& kind_name, const std::vector<double>& values,
              const std::string& out_path) {
  const RunConfig run = resolve(f);
  const SweepKind kind = parse_sweep_kind(kind_name);
  const auto slots = static_cast<std::uint64_t>(run.system.training.total_slots);
  const auto rows = sweep(kind, values, effective_system(run), run.scenario, slots);
  if (out_path.empty() || out_path == "-") {
    write_sweep_csv(kind, rows, std::cout);
  } else {
    const fs::path p(out_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    auto out = open_out(p);
    write_sweep_csv(kind, rows, out);
  }
  return 0;
}

int cmd_enumerate(int users, int chi_e, int chi_c, bool at_most, bool count_only) {
  const auto mode = at_most ? CardinalityMode::at_most : CardinalityMode::exact;
  if (count_only) {
    std::printf("%llu\n", static_cast<unsigned long long>(policy_count(users, chi_e, chi_c, mode)));
    return 0;
  }
  for_each_policy(users, chi_e, chi_c, mode,
                  [](const Policy& p) { std::printf("%s\n", p.to_string().c_str()); });
  return 0;
}

int cmd_verify(const RunFlags& f, const VerifyOptions& opt) {
  const RunConfig run = resolve(f);
  bool ok = true;
  run_verification(effective_system(run), opt, [&](const VerifyCheck& c) {
    std::printf("%s  %s: %s\n", c.passed ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
    std::fflush(stdout);
    ok = ok && c.passed;
  });
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Semantic-aware edge/cloud offloading simulator"};
  app.require_subcommand(1);

  RunFlags sim_flags;
  std::string sim_out = "run";
  bool trace_channels = false, save_actor = false;
  auto* sim = app.add_subcommand("simulate", "run one scenario and write its metrics");
  add_run_flags(sim, sim_flags);
  sim->add_option("--out", sim_out, "output directory");
  sim->add_flag("--trace-channels", trace_channels, "write channels.csv");
  sim->add_flag("--save-actor", save_actor, "write the trained actor to actor.txt");

  RunFlags sweep_flags;
  std::string sweep_kind, sweep_out;
  std::vector<double> sweep_values;
  auto* sw = app.add_subcommand("sweep", "rerun a scenario over a parameter grid");
  add_run_flags(sw, sweep_flags);
  sw->add_option("--kind", sweep_kind, "arrival | v | users")
      ->required()
      ->check(CLI::IsMember({"arrival", "v", "users"}));
  sw->add_option("--values", sweep_values, "parameter values")->required()->delimiter(',');
  sw->add_option("--out", sweep_out, "CSV path (default stdout)");

  int users = 8, chi_e = 4, chi_c = 2;
  bool count_only = false, at_most = false;
  auto* en = app.add_subcommand("enumerate", "list or count association policies");
  en->add_option("--users", users, "number of devices")->check(CLI::Range(1, 64));
  en->add_option("--chi-e", chi_e, "MEC association budget")->check(CLI::NonNegativeNumber);
  en->add_option("--chi-c", chi_c, "MCC association budget")->check(CLI::NonNegativeNumber);
  en->add_flag("--count-only", count_only, "print only the number of policies");
  en->add_flag("--at-most", at_most, "budgets are upper bounds instead of exact counts");

  RunFlags ver_flags;
  VerifyOptions ver_opt;
  auto* ver = app.add_subcommand("verify", "run the solver, gradient and drift-bound checks");
  add_run_flags(ver, ver_flags);
  ver->add_option("--cases", ver_opt.solver_cases, "random cases per subproblem");
  ver->add_option("--joint-cases", ver_opt.joint_cases, "4-D grid cases");
  ver->add_option("--bound-slots", ver_opt.bound_slots, "slots for the drift-bound run");

  auto* defaults = app.add_subcommand("defaults", "print the default configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) return cmd_simulate(sim_flags, sim_out, trace_channels, save_actor);
    if (*sw) return cmd_sweep(sweep_flags, sweep_kind, sweep_values, sweep_out);
    if (*en) return cmd_enumerate(users, chi_e, chi_c, at_most, count_only);
    if (*ver) {
      ver_opt.seed = ver_flags.seed.value_or(1);
      return cmd_verify(ver_flags, ver_opt);
    }
    if (*defaults) {
      std::cout << to_json(RunConfig{}).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace semoff
