#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fblpower/allocator.hpp"
#include "fblpower/gp.hpp"
#include "fblpower/mc.hpp"
#include "fblpower/scenario.hpp"
#include "json.hpp"

namespace {

using namespace fblpower;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

// data goes to stdout unless --out was given; logs always go to stderr
int emit(const std::string& data, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << data;
    return kExitOk;
  }
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "cannot write '" << out_path << "'\n";
    return kExitUsage;
  }
  f << data;
  return kExitOk;
}

Receiver parse_receiver(const std::string& s) {
  if (s == "mrc") return Receiver::mrc;
  if (s == "zf") return Receiver::zf;
  throw CLI::ValidationError("--receiver", "must be 'mrc' or 'zf'");
}

int cmd_validate(const std::string& scenario_path, const std::string& out_path) {
  const Scenario sc = load_scenario(scenario_path);
  return emit(scenario_to_json(sc), out_path);
}

int report_allocation(const AllocationResult& res, const std::string& out_path) {
  const int code = emit(allocation_to_json(res), out_path);
  if (code != kExitOk) return code;
  if (res.status == AllocStatus::infeasible) {
    std::fprintf(stderr, "infeasible: phi=%.2f < 1\n", res.phi);
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_allocate(const std::string& scenario_path, Receiver r, double xi,
                 const std::string& out_path) {
  const Scenario sc = load_scenario(scenario_path);
  AllocateOptions opts;
  opts.xi = xi;
  return report_allocation(optimize(sc, r, opts), out_path);
}

int cmd_compare(const std::string& scenario_path, Receiver r, double xi,
                const std::string& format, const std::string& out_path) {
  const Scenario sc = load_scenario(scenario_path);
  AllocateOptions opts;
  opts.xi = xi;

  struct Entry {
    const char* name;
    AllocationResult res;
  };
  std::vector<Entry> entries;
  entries.push_back({"proposed", optimize(sc, r, opts)});
  entries.push_back({"upper_bound", run_baseline(sc, r, Baseline::upper_bound, opts)});
  entries.push_back({"conventional", run_baseline(sc, r, Baseline::conventional, opts)});
  entries.push_back({"fixed_pilot", run_baseline(sc, r, Baseline::fixed_pilot, opts)});

  std::string payload;
  if (format == "json") {
    json j;
    j["receiver"] = to_string(r);
    for (const auto& e : entries) j["results"][e.name] = json::parse(allocation_to_json(e.res));
    payload = j.dump(2) + "\n";
  } else {
    payload = "algorithm,status,phi,weighted_sum,weighted_shannon\n";
    char buf[200];
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%.10g\n", e.name, to_string(e.res.status),
                    e.res.phi, e.res.weighted_sum, e.res.weighted_shannon);
      payload += buf;
    }
  }
  const int code = emit(payload, out_path);
  if (code != kExitOk) return code;
  if (entries[0].res.status == AllocStatus::infeasible) {
    std::fprintf(stderr, "infeasible: phi=%.2f < 1\n", entries[0].res.phi);
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_mc_verify(const std::string& scenario_path, Receiver r, int trials,
                  std::uint64_t seed, int threads, const std::string& allocation_path,
                  const std::string& format, const std::string& out_path) {
  const Scenario sc = load_scenario(scenario_path);
  PowerAllocation alloc;
  if (!allocation_path.empty()) {
    alloc = load_allocation(allocation_path);
    if (alloc.p_pilot.size() != sc.k())
      throw std::invalid_argument("allocation device count does not match the scenario");
  } else {
    // uniform split: every symbol carries the same power
    alloc.p_pilot = sc.energies() / sc.sys.blocklength;
    alloc.p_data = alloc.p_pilot;
  }

  mc::McConfig cfg;
  cfg.n_trials = trials;
  cfg.base_seed = seed;
  cfg.receiver = r;
  cfg.threads = threads;
  const mc::ErgodicRate er = mc::empirical_ergodic_rate(sc, alloc, cfg);

  std::string payload;
  if (format == "json") {
    json j;
    j["receiver"] = to_string(r);
    j["trials"] = trials;
    j["clamped"] = er.clamped;
    j["redrawn"] = er.redrawn;
    j["devices"] = json::array();
    for (int i = 0; i < er.mean.size(); ++i)
      j["devices"].push_back({{"device", i + 1},
                              {"rate_lb", er.lower_bound[i]},
                              {"empirical", er.mean[i]},
                              {"std_err", er.std_err[i]}});
    payload = j.dump(2) + "\n";
  } else {
    payload = "device,rate_lb,empirical,std_err,rel_gap\n";
    char buf[200];
    for (int i = 0; i < er.mean.size(); ++i) {
      const double gap = er.mean[i] > 0.0 ? (er.mean[i] - er.lower_bound[i]) / er.mean[i] : 0.0;
      std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.6g\n", i + 1, er.lower_bound[i],
                    er.mean[i], er.std_err[i], gap);
      payload += buf;
    }
  }
  std::fprintf(stderr, "trials=%d clamped=%d redrawn=%d\n", trials, er.clamped, er.redrawn);
  return emit(payload, out_path);
}

int cmd_sweep(const mc::SweepSpec& spec, const std::string& format, const std::string& out_path) {
  const std::vector<mc::Algorithm> algs = {mc::Algorithm::proposed, mc::Algorithm::upper_bound,
                                           mc::Algorithm::conventional,
                                           mc::Algorithm::fixed_pilot};
  const mc::SweepResult res = mc::run_sweep(spec, algs);
  return emit(format == "json" ? res.summary_json() : res.csv(), out_path);
}

int cmd_gp_solve(const std::string& problem_path, double tol, const std::string& out_path) {
  std::ifstream in(problem_path);
  if (!in) throw std::invalid_argument("cannot open '" + problem_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const gp::GpProblem p = gp::from_text(ss.str());

  gp::SolveOptions opts;
  opts.tol = tol;
  const gp::GpSolution sol = gp::solve(p, opts);

  char buf[200];
  std::string payload = std::string("status: ") + gp::to_string(sol.status) + "\n";
  std::snprintf(buf, sizeof buf, "log_objective: %.12g\n", sol.log_objective);
  payload += buf;
  for (int v = 0; v < p.n_vars(); ++v) {
    std::snprintf(buf, sizeof buf, "%s = %.12g\n", p.name(v).c_str(), sol.x[v]);
    payload += buf;
  }
  std::fprintf(stderr, "newton_steps=%d kkt=%.3g violation=%.3g\n", sol.newton_steps,
               sol.kkt_residual, sol.max_violation);
  const int code = emit(payload, out_path);
  if (code != kExitOk) return code;
  return sol.status == gp::SolveStatus::infeasible ? kExitInfeasible : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint pilot/payload power allocation for short-packet massive MIMO uplinks"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, format = "csv", allocation_path, problem_path;
  std::string receiver_name = "mrc";
  double xi = 1e-4, gp_tol = 1e-9;
  int trials = 2000, threads = 1;
  std::uint64_t seed = 1;
  bool paper_scale = false;
  mc::SweepSpec spec;

  auto add_common = [&](CLI::App* cmd, bool with_format) {
    cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    cmd->add_option("--receiver", receiver_name, "receiver type: mrc or zf")
        ->check(CLI::IsMember({"mrc", "zf"}));
    cmd->add_option("--out", out_path, "write data here instead of stdout");
    if (with_format)
      cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario file and echo it back");
  validate_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  validate_cmd->add_option("--out", out_path, "write data here instead of stdout");

  CLI::App* allocate_cmd = app.add_subcommand("allocate", "optimize powers for one scenario");
  add_common(allocate_cmd, false);
  allocate_cmd->add_option("--xi", xi, "outer-loop relative stopping tolerance");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run the proposed algorithm and all baselines");
  add_common(compare_cmd, true);
  compare_cmd->add_option("--xi", xi, "outer-loop relative stopping tolerance");

  CLI::App* mc_cmd =
      app.add_subcommand("mc-verify", "Monte Carlo check of the rate bound at fixed powers");
  add_common(mc_cmd, true);
  CLI::Option* trials_opt = mc_cmd->add_option("--trials", trials, "channel draws");
  mc_cmd->add_option("--seed", seed, "base random seed");
  mc_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--allocation", allocation_path,
                     "allocation JSON (as written by allocate); default is a uniform split");
  mc_cmd->add_flag("--paper-scale", paper_scale, "use 5000 trials");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "average algorithm scores over random drops");
  sweep_cmd->add_option("--receiver", receiver_name, "receiver type: mrc or zf")
      ->check(CLI::IsMember({"mrc", "zf"}));
  sweep_cmd->add_option("--out", out_path, "write data here instead of stdout");
  sweep_cmd->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  std::string axis_name = "energy";
  sweep_cmd->add_option("--axis", axis_name, "swept parameter")
      ->check(CLI::IsMember({"energy", "device_count", "blocklength"}))
      ->required();
  sweep_cmd->add_option("--values", spec.values, "axis values")->delimiter(',')->required();
  CLI::Option* snaps_opt =
      sweep_cmd->add_option("--snapshots", spec.snapshots, "random drops per axis value");
  sweep_cmd->add_option("--seed", seed, "base random seed");
  sweep_cmd->add_option("--threads", spec.threads, "worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--devices", spec.k_devices, "device count (off-axis)");
  sweep_cmd->add_option("--antennas", spec.m_antennas, "antenna count");
  sweep_cmd->add_option("--blocklength", spec.blocklength, "frame length (off-axis)");
  sweep_cmd->add_option("--energy", spec.energy, "per-device energy budget (off-axis)");
  sweep_cmd->add_option("--rate-req", spec.rate_req, "per-device rate target");
  sweep_cmd->add_option("--epsilon", spec.epsilon, "decoding error probability");
  sweep_cmd->add_option("--dist-min", spec.dist_min_m, "minimum device distance, meters");
  sweep_cmd->add_option("--dist-max", spec.dist_max_m, "maximum device distance, meters");
  sweep_cmd->add_option("--xi", spec.alloc_opts.xi, "outer-loop relative stopping tolerance");
  sweep_cmd->add_flag("--paper-scale", paper_scale, "use 100 snapshots");

  CLI::App* gp_cmd = app.add_subcommand("gp-solve", "solve a plain-text GP (debugging aid)");
  gp_cmd->add_option("problem", problem_path, "GP text file")->required();
  gp_cmd->add_option("--tol", gp_tol, "barrier duality-gap tolerance");
  gp_cmd->add_option("--out", out_path, "write data here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const Receiver r = parse_receiver(receiver_name);
    if (validate_cmd->parsed()) return cmd_validate(scenario_path, out_path);
    if (allocate_cmd->parsed()) return cmd_allocate(scenario_path, r, xi, out_path);
    if (compare_cmd->parsed()) return cmd_compare(scenario_path, r, xi, format, out_path);
    if (mc_cmd->parsed()) {
      if (paper_scale && trials_opt->count() == 0) trials = 5000;
      return cmd_mc_verify(scenario_path, r, trials, seed, threads, allocation_path, format,
                           out_path);
    }
    if (sweep_cmd->parsed()) {
      spec.axis = mc::axis_from_string(axis_name);
      spec.receiver = r;
      spec.base_seed = seed;
      if (paper_scale && snaps_opt->count() == 0) spec.snapshots = 100;
      return cmd_sweep(spec, format, out_path);
    }
    if (gp_cmd->parsed()) return cmd_gp_solve(problem_path, gp_tol, out_path);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
}
