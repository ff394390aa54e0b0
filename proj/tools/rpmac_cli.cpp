// rpmac: command-line front end for the networking simulator.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rpmac/calibration.hpp"
#include "rpmac/config.hpp"
#include "rpmac/error.hpp"
#include "rpmac/experiment.hpp"

using namespace rpmac;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(Errc::config_parse, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct Common {
  std::string config;
  std::string topology;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string out;
  std::string protocol;
  std::vector<std::string> sets;  // section.key=value overrides
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config file");
  cmd->add_option("--topology", c.topology, "Topology file (overrides the generator)");
  cmd->add_option("--seed", c.seed, "First seed");
  cmd->add_option("--trials", c.trials, "Number of seeds");
  cmd->add_option("--out", c.out, "Output CSV path (default stdout)");
  cmd->add_option("--protocol", c.protocol, "R-PMAC, P-MAC or CSMA");
  cmd->add_option("--set", c.sets, "Override a setting, e.g. --set mac.n_max=128")->take_all();
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  for (const auto& s : c.sets) {
    const auto dot = s.find('.');
    const auto eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || eq < dot) {
      throw Error(Errc::config_parse, "--set expects section.key=value, got '" + s + "'");
    }
    apply_setting(cfg, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  if (!c.topology.empty()) cfg.topology.file = c.topology;
  if (!c.protocol.empty()) apply_setting(cfg, "run", "protocol", c.protocol);
  if (c.seed) cfg.seed = c.seed;
  if (c.trials) cfg.trials = *c.trials;
  validate(cfg);
  if (!cfg.seed) throw Error(Errc::config_parse, "a seed is required (run.seed or --seed)");
  return cfg;
}

void warn_unreachable(const ExperimentConfig& cfg) {
  const auto topo = build_topology(cfg, *cfg.seed);
  const auto lost = topo.unreachable_nodes();
  if (lost.empty()) return;
  std::cerr << "warning: " << lost.size() << " node(s) have no path to the CCO:";
  for (auto n : lost) std::cerr << ' ' << n;
  std::cerr << '\n';
}

std::vector<Protocol> parse_protocols(const std::vector<std::string>& names) {
  std::vector<Protocol> out;
  for (const auto& n : names) out.push_back(parse_protocol(n));
  return out;
}

bool usage_error(const Error& e) {
  switch (e.code()) {
    case Errc::config_parse:
    case Errc::invalid_config:
    case Errc::invalid_probability:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for preamble-based PLC networking protocols"};
  app.require_subcommand(1);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Solve the delay profile from calibration time differences");
  Micros cco1 = 0, cco2 = 0, sta = 0;
  std::string cal_out;
  cal->add_option("--cco1", cco1, "First CCO time difference (us)")->required();
  cal->add_option("--cco2", cco2, "Second CCO time difference (us)")->required();
  cal->add_option("--sta", sta, "STA time difference (us)")->required();
  cal->add_option("--out", cal_out, "Output CSV path");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the networking simulation for a range of seeds");
  Common sim_c;
  add_common(sim, sim_c);
  std::string trace_path, hexdump_path, nc_path;
  sim->add_option("--trace", trace_path, "Event trace CSV of the first seed");
  sim->add_option("--hexdump", hexdump_path, "Frame hex dump of the first seed");
  sim->add_option("--nc-out", nc_path, "Per-NC report CSV");

  // compare
  auto* cmp = app.add_subcommand("compare", "Mean networking time per protocol and N, with the analytic value");
  Common cmp_c;
  add_common(cmp, cmp_c);
  std::vector<std::size_t> cmp_sizes{90, 140, 190, 240};
  std::vector<std::string> cmp_protocols{"R-PMAC", "P-MAC", "CSMA"};
  cmp->add_option("--sizes", cmp_sizes, "STA counts")->delimiter(',');
  cmp->add_option("--protocols", cmp_protocols, "Protocols")->delimiter(',');

  // sweep-pte
  auto* sweep = app.add_subcommand("sweep-pte", "Monte-Carlo PTE slot ratio over N and M/N");
  std::vector<std::uint64_t> sweep_sizes{20, 100, 200};
  std::vector<double> sweep_ratios{0.8, 1, 2, 3, 4};
  std::uint64_t sweep_trials = 1000;
  std::optional<std::uint64_t> sweep_seed;
  std::string sweep_out;
  sweep->add_option("--sizes", sweep_sizes, "Node counts")->delimiter(',');
  sweep->add_option("--ratios", sweep_ratios, "M/N ratios")->delimiter(',');
  sweep->add_option("--trials", sweep_trials, "Trials per cell");
  sweep->add_option("--seed", sweep_seed, "Seed")->required();
  sweep->add_option("--out", sweep_out, "Output CSV path");

  // analytic
  auto* ana = app.add_subcommand("analytic", "Expected networking time from the closed-form model");
  std::vector<std::uint64_t> ana_sizes{100};
  std::vector<std::string> ana_protocols{"IEEE1901.1", "P-MAC", "R-PMAC"};
  double ana_p = 0.25;
  TimingTable ana_timing;
  std::string ana_out;
  ana->add_option("--sizes", ana_sizes, "Node counts")->delimiter(',');
  ana->add_option("--protocols", ana_protocols, "Protocols")->delimiter(',');
  ana->add_option("--p", ana_p, "CSMA transmit probability");
  ana->add_option("--t-pte", ana_timing.pte_slot, "PTE slot (us)");
  ana->add_option("--t-csma", ana_timing.csma_slot, "CSMA slot (us)");
  ana->add_option("--t-data", ana_timing.data_slot, "Data slot (us)");
  ana->add_option("--out", ana_out, "Output CSV path");

  // robustness
  auto* rob = app.add_subcommand("robustness", "Lost-STA ratio with the robust mechanisms on and off");
  Common rob_c;
  add_common(rob, rob_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cal) {
      const auto profile = solve_calibration({cco1, cco2, sta});
      Output out(cal_out);
      write_calibration_csv(out.stream(), profile);
    } else if (*sim) {
      const auto cfg = load(sim_c);
      warn_unreachable(cfg);
      RunHooks hooks;
      hooks.trace = !trace_path.empty() || !hexdump_path.empty();
      auto runs = simulate(cfg, *cfg.seed, cfg.trials, hooks);
      Output out(sim_c.out);
      write_summary_csv(out.stream(), runs);
      if (!nc_path.empty()) {
        Output nc(nc_path);
        write_nc_csv(nc.stream(), runs);
      }
      if (!trace_path.empty()) {
        Output tr(trace_path);
        write_trace_csv(tr.stream(), runs.front().trace);
      }
      if (!hexdump_path.empty()) {
        Output hx(hexdump_path);
        write_hexdump(hx.stream(), runs.front().trace);
      }
    } else if (*cmp) {
      const auto cfg = load(cmp_c);
      const auto rows = compare(cfg, parse_protocols(cmp_protocols), cmp_sizes, *cfg.seed, cfg.trials);
      Output out(cmp_c.out);
      write_compare_csv(out.stream(), rows);
    } else if (*sweep) {
      const auto rows = sweep_pte(sweep_sizes, sweep_ratios, sweep_trials, *sweep_seed);
      Output out(sweep_out);
      write_sweep_csv(out.stream(), rows);
    } else if (*ana) {
      if (ana_timing.pte_slot <= 0 || ana_timing.csma_slot <= 0 || ana_timing.data_slot <= 0) {
        throw Error(Errc::invalid_config, "slot times must be positive");
      }
      const auto protocols = parse_protocols(ana_protocols);
      for (auto p : protocols) {
        if (p == Protocol::Csma) expected_csma_slots(1, ana_p);
      }
      Output out(ana_out);
      write_analytic_csv(out.stream(), protocols, ana_sizes, ana_p, ana_timing);
    } else if (*rob) {
      const auto cfg = load(rob_c);
      warn_unreachable(cfg);
      const auto rows = robustness(cfg, *cfg.seed, cfg.trials);
      Output out(rob_c.out);
      write_robustness_csv(out.stream(), rows);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error(e) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
