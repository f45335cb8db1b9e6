#include "tcode/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "tcode/analytics.hpp"
#include "tcode/config.hpp"
#include "tcode/errors.hpp"
#include "tcode/harness.hpp"
#include "tcode/report.hpp"

namespace tcode {

namespace {

namespace fs = std::filesystem;

struct SimulationArgs {
  std::string config_path;
  std::string out_dir = "tcode-out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct AnalyzeArgs {
  double rho = 0.0;
  int k = 0;
  int n_max = 0;
  double gamma = analytics::kDefaultGamma;
  std::string out_dir;
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

ExperimentConfig load(const SimulationArgs& args) {
  ExperimentConfig config = parse_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  return config;
}

fs::path prepare_out(const SimulationArgs& args) {
  fs::path dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const ExperimentConfig& config) {
  write_file(dir / "manifest.txt", [&](std::ostream& out) {
    out << "# tcode " << kToolVersion << " manifest\n"
        << "# command: " << command << "\n"
        << "# rerun: tcode " << command << " --config manifest.txt\n\n"
        << render_config(config);
  });
}

/// Collects per-message rows for messages.csv when the config asks for them.
struct MessageLog {
  std::ostringstream rows;
  RecordSink sink(const ExperimentConfig& config) {
    if (!config.record_messages) return {};
    return [this](int n, double rate, int replication, const std::vector<MessageRecord>& r) {
      report::write_message_rows(rows, rate, n, replication, r);
    };
  }
  void flush(const fs::path& dir, const ExperimentConfig& config) const {
    if (!config.record_messages) return;
    write_file(dir / "messages.csv", [&](std::ostream& out) {
      out << report::kMessagesHeader << '\n' << rows.str();
    });
  }
};

void summarize(std::ostream& out, const PairedResult& r) {
  out << "rate=" << report::fmt(r.rate) << " k=" << r.k << " n=" << r.n
      << " delay_gain=" << report::fmt(r.delay_gain)
      << " variance_ratio=" << report::fmt(r.variance_ratio)
      << " violation_ratio=" << report::fmt(r.violation_ratio)
      << " rho_est=" << report::fmt(r.uncoded.pooled.rho_est)
      << (r.saturated ? " [saturated]" : "") << '\n';
}

int cmd_simulate(const SimulationArgs& args, std::ostream& out) {
  ExperimentConfig config = load(args);
  if (config.rates.empty()) throw ConfigError("rate", "a message rate is required");
  const auto dir = prepare_out(args);
  const Topology topology = build_topology(config);
  std::vector<std::pair<int, double>> arms;
  for (double rate : config.rates) arms.emplace_back(config.n, rate);
  MessageLog log;
  const auto merged = run_arms(config, topology, arms, log.sink(config));
  write_file(dir / "pairs.csv", [&](std::ostream& csv) {
    csv << report::kPairsHeader << '\n';
    for (std::size_t i = 0; i < arms.size(); ++i) {
      report::write_pairs_row(csv, arms[i].second, config.k, config.n, merged[i]);
    }
  });
  log.flush(dir, config);
  write_manifest(dir, "simulate", config);
  if (!args.quiet) {
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const auto& p = merged[i].pooled;
      out << "rate=" << report::fmt(arms[i].second) << " delay_mean_s=" << report::fmt(p.delay_mean)
          << " +/- " << report::fmt(merged[i].delay_mean_half_width)
          << " violation_prob=" << report::fmt(p.violation_probability)
          << " throughput_info_bps=" << report::fmt(p.delivered_throughput) << '\n';
    }
  }
  return kExitOk;
}

int cmd_pair(const SimulationArgs& args, std::ostream& out) {
  ExperimentConfig config = load(args);
  const auto dir = prepare_out(args);
  MessageLog log;
  const std::vector<PairedResult> results{run_paired(config, log.sink(config))};
  write_file(dir / "pairs.csv", [&](std::ostream& csv) { report::write_pairs(csv, results); });
  write_file(dir / "ratios.csv", [&](std::ostream& csv) { report::write_ratios(csv, results); });
  log.flush(dir, config);
  write_manifest(dir, "pair", config);
  if (!args.quiet) summarize(out, results.front());
  return kExitOk;
}

int cmd_sweep_load(const SimulationArgs& args, std::ostream& out) {
  ExperimentConfig config = load(args);
  if (config.rates.empty()) config.rates = default_load_rates(config);
  const auto dir = prepare_out(args);
  MessageLog log;
  const auto results = load_sweep(config, config.rates, log.sink(config));
  write_file(dir / "pairs.csv", [&](std::ostream& csv) { report::write_pairs(csv, results); });
  write_file(dir / "ratios.csv", [&](std::ostream& csv) { report::write_ratios(csv, results); });
  log.flush(dir, config);
  write_manifest(dir, "sweep-load", config);
  if (!args.quiet) {
    for (const auto& r : results) summarize(out, r);
  }
  return kExitOk;
}

int cmd_sweep_rate(const SimulationArgs& args, std::ostream& out) {
  ExperimentConfig config = load(args);
  if (config.n_values.empty()) {
    for (int n = config.k; n <= (5 * config.k + 1) / 2; ++n) config.n_values.push_back(n);
  }
  const auto dir = prepare_out(args);
  MessageLog log;
  const RateSweep sweep = rate_sweep(config, config.n_values, log.sink(config));
  write_file(dir / "rate_sweep.csv",
             [&](std::ostream& csv) { report::write_rate_sweep(csv, sweep); });
  write_file(dir / "pairs.csv", [&](std::ostream& csv) {
    csv << report::kPairsHeader << '\n';
    report::write_pairs_row(csv, config.rate(), config.k, config.k, sweep.uncoded);
    for (const auto& row : sweep.rows) {
      if (row.n != config.k) report::write_pairs_row(csv, config.rate(), config.k, row.n, row.coded);
    }
  });
  log.flush(dir, config);
  write_manifest(dir, "sweep-rate", config);
  if (!args.quiet) {
    for (const auto& row : sweep.rows) {
      out << "n=" << row.n << " R=" << report::fmt(row.rate)
          << " f_empirical=" << report::fmt(row.empirical_f)
          << " f_analytic=" << report::fmt(row.analytical_f) << '\n';
    }
  }
  return kExitOk;
}

int cmd_validate(const SimulationArgs& args, std::ostream& out) {
  const ExperimentConfig config = load(args);
  const Topology topology = build_topology(config);
  const RoutingPolicy policy = routing_policy(config, topology);
  Router router(topology, policy);
  if (!args.quiet) {
    out << "# config OK: " << topology.node_count() << " nodes, "
        << topology.undirected_edge_count() << " links, diameter " << topology.diameter()
        << ", source-sink distance " << topology.hop_distance(topology.source(), topology.sink())
        << ", routing " << to_string(policy.kind) << " ttl " << policy.ttl << "\n"
        << render_config(config);
  }
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  if (args.k < 1) throw ParameterError("--k must be at least 1");
  if (args.n_max < args.k) throw ParameterError("--n-max must be >= --k");
  if (!(args.gamma > 0.0)) throw ParameterError("--gamma must be positive");
  if (!(args.rho >= 0.0) || args.rho >= 1.0 - analytics::kBoundaryMargin) {
    err << "error: rho=" << args.rho << " is infeasible (need 0 <= rho < 1)\n";
    return kExitInfeasible;
  }
  const auto rows = gain_curve(analytics::AnalyticalParams::at_load(args.rho, args.gamma), args.k,
                               args.n_max);
  const auto best = analytics::optimal_redundancy(args.rho, args.k, args.n_max);
  if (args.out_dir.empty()) {
    report::write_analysis(out, rows, best);
  } else {
    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "analysis.csv",
               [&](std::ostream& csv) { report::write_analysis(csv, rows, best); });
  }
  return kExitOk;
}

void add_simulation_options(CLI::App* cmd, SimulationArgs& args, bool needs_out) {
  cmd->add_option("--config", args.config_path, "Experiment config file")->required();
  if (needs_out) cmd->add_option("--out", args.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "Override the master seed");
  cmd->add_flag("--quiet", args.quiet, "Suppress the summary on stdout");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transport-coding simulator and analytical model"};
  app.footer(config_reference() +
             "\nExit codes: 0 success, 1 usage/config error, 2 infeasible model parameters, "
             "3 runtime failure.\nTCODE_THREADS caps worker threads (0 = auto).");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form gain curve over n in [k, n_max]");
  analyze_cmd->add_option("--rho", analyze.rho, "Channel load")->required();
  analyze_cmd->add_option("--k", analyze.k, "Information packets per message")->required();
  analyze_cmd->add_option("--n-max", analyze.n_max, "Largest code length")->required();
  analyze_cmd->add_option("--gamma", analyze.gamma, "Normalization factor (1/s)")
      ->capture_default_str();
  analyze_cmd->add_option("--out", analyze.out_dir, "Write analysis.csv here instead of stdout");

  SimulationArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Replicated runs of the configured (k, n)");
  auto* pair_cmd = app.add_subcommand("pair", "Paired uncoded/coded runs at one rate");
  auto* load_cmd = app.add_subcommand("sweep-load", "Paired runs over message rates");
  auto* rate_cmd = app.add_subcommand("sweep-rate", "Empirical and analytical gain over n");
  auto* validate_cmd = app.add_subcommand("validate-config", "Parse and check a config");
  for (auto* cmd : {simulate_cmd, pair_cmd, load_cmd, rate_cmd}) {
    add_simulation_options(cmd, sim, true);
  }
  add_simulation_options(validate_cmd, sim, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(analyze, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
    if (pair_cmd->parsed()) return cmd_pair(sim, out);
    if (load_cmd->parsed()) return cmd_sweep_load(sim, out);
    if (rate_cmd->parsed()) return cmd_sweep_rate(sim, out);
    if (validate_cmd->parsed()) return cmd_validate(sim, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TopologyError& e) {
    err << "topology error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SaturationError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace tcode
