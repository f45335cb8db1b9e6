#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tcode/metrics.hpp"
#include "tcode/network.hpp"
#include "tcode/transport.hpp"

namespace tcode {

struct TopologySpec {
  int rows = 4;
  int cols = 4;
  double removal_fraction = 0.2;
  /// When set, the topology is read from this file instead of generated.
  std::string file;
};

struct ExperimentConfig {
  TopologySpec topology;
  LinkParams link;
  double service_mean = 1e-4;
  double packet_size_bits = 1000.0;
  RoutingKind routing = RoutingKind::RandomWalkNoBacktrack;
  /// 0 selects 8 x diameter.
  int ttl = 0;
  int k = 8;
  int n = 12;
  /// Message generation rates (messages/s); the first one is used by single
  /// runs and pairs.
  std::vector<double> rates;
  /// Code lengths for the rate sweep.
  std::vector<int> n_values;
  double deadline = 0.3;
  double horizon = 200.0;
  double warmup_fraction = 0.1;
  int replications = 5;
  std::uint64_t seed = 1;
  /// Mean queue length above which a sweep point is flagged as saturated.
  double queue_threshold = 1000.0;
  bool record_messages = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  double rate() const { return rates.empty() ? 0.0 : rates.front(); }
  CodeConfig code() const { return {k, n}; }
};

/// Generated grid (perturbed with the "topology" substream of the master seed)
/// or the topology file. Link parameters from the config apply to generated grids.
Topology build_topology(const ExperimentConfig& config);
RoutingPolicy routing_policy(const ExperimentConfig& config, const Topology& topology);

/// Offered information rates 1..12 Mb/s expressed as message rates.
std::vector<double> default_load_rates(const ExperimentConfig& config);

/// One replication of one configuration: builds the network, runs the engine
/// to the horizon, and finalizes metrics.
class Simulation {
 public:
  Simulation(const ExperimentConfig& config, const Topology& topology, int replication);

  /// Verify packet conservation after every event (slow; for tests).
  void enable_audit() { audit_ = true; }
  /// Called for every packet reaching the sink, before it is released.
  void observe_deliveries(std::function<void(const Packet&, SimTime)> observer) {
    delivery_observer_ = std::move(observer);
  }

  RunMetrics run();

  const std::vector<MessageRecord>& records() const noexcept { return records_; }
  const std::vector<SimTime>& creation_times() const noexcept { return creation_times_; }
  std::uint64_t events_dispatched() const noexcept { return engine_.dispatched(); }

 private:
  void generate(SimTime now);
  void audit() const;

  ExperimentConfig config_;
  const Topology* topology_;
  int replication_;
  Engine engine_;
  PacketPool pool_;
  PacketNetwork network_;
  Receiver receiver_;
  MessageGenerator generator_;
  MetricsAccumulator accumulator_;
  std::vector<MessageRecord> records_;
  std::vector<SimTime> creation_times_;
  std::function<void(const Packet&, SimTime)> delivery_observer_;
  std::uint64_t packets_generated_ = 0;
  bool audit_ = false;
  bool ran_ = false;
};

/// FNV-1a over the bit patterns of the creation times.
std::uint64_t hash_times(const std::vector<SimTime>& times);

/// Receives each run's per-message records, in arm then replication order.
using RecordSink = std::function<void(int n, double rate, int replication,
                                      const std::vector<MessageRecord>& records)>;

/// Deterministic in (config, config.seed, replication).
RunMetrics run_single(const ExperimentConfig& config, int replication);

struct PairedResult {
  double rate = 0.0;
  int k = 0;
  int n = 0;
  AggregateMetrics uncoded;
  AggregateMetrics coded;
  /// Uncoded over coded; nullopt when the denominator is zero.
  std::optional<double> delay_gain;
  std::optional<double> variance_ratio;
  std::optional<double> violation_ratio;
  std::optional<double> throughput_ratio;
  std::optional<double> total_throughput_ratio;
  /// Mean queue length at some node exceeded the configured threshold.
  bool saturated = false;
};

/// Uncoded (n = k) and coded arms sharing the message-generation substream.
/// Throws ConfigError when n == k.
PairedResult run_paired(const ExperimentConfig& config, const RecordSink& sink = {});

std::vector<PairedResult> load_sweep(const ExperimentConfig& config,
                                     const std::vector<double>& rates,
                                     const RecordSink& sink = {});

struct RateSweepRow {
  int n = 0;
  double rate = 0.0;
  AggregateMetrics coded;
  std::optional<double> empirical_f;
  /// Gain formula at the measured bottleneck load of the uncoded arm; nullopt
  /// when that load is infeasible for this n.
  std::optional<double> analytical_f;
  double rho_est = 0.0;
};

struct RateSweep {
  AggregateMetrics uncoded;
  std::vector<RateSweepRow> rows;
};

RateSweep rate_sweep(const ExperimentConfig& config, const std::vector<int>& n_values,
                     const RecordSink& sink = {});

/// Worker count from TCODE_THREADS (0 or unset: hardware concurrency).
unsigned harness_threads();

/// Replications of each (n, rate) arm, run on the worker pool and merged in
/// replication order. Exposed for callers that assemble their own tables.
std::vector<AggregateMetrics> run_arms(const ExperimentConfig& config, const Topology& topology,
                                       const std::vector<std::pair<int, double>>& arms,
                                       const RecordSink& sink = {});

}  // namespace tcode
