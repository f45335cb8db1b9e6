#include "tcode/harness.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "tcode/analytics.hpp"
#include "tcode/errors.hpp"

namespace tcode {

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
  };
  if (topology.file.empty()) {
    require(topology.rows >= 2, "rows", "grid needs at least 2 rows");
    require(topology.cols >= 2, "cols", "grid needs at least 2 columns");
    require(topology.removal_fraction >= 0.0 && topology.removal_fraction < 1.0,
            "removal_fraction", "must lie in [0, 1)");
  }
  require(link.capacity_bps > 0.0, "capacity_bps", "must be positive");
  require(link.mean_delay_s > 0.0, "mean_delay_s", "must be positive");
  require(service_mean > 0.0, "service_mean_s", "must be positive");
  require(packet_size_bits > 0.0, "packet_size_bits", "must be positive");
  require(ttl >= 0, "ttl", "must be non-negative (0 selects 8 x diameter)");
  require(k >= 1, "k", "must be at least 1");
  require(n >= k, "n", "must be >= k (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  for (double r : rates) require(r > 0.0 && std::isfinite(r), "rates", "rates must be positive");
  for (int v : n_values) require(v >= k, "n_values", "every n must be >= k");
  require(deadline > 0.0, "deadline_s", "must be positive");
  require(horizon >= 0.0 && std::isfinite(horizon), "horizon_s", "must be non-negative");
  require(warmup_fraction >= 0.0 && warmup_fraction <= 0.5, "warmup_fraction",
          "must lie in [0, 0.5]");
  require(replications >= 1, "replications", "must be at least 1");
  require(queue_threshold > 0.0, "queue_threshold", "must be positive");
}

Topology build_topology(const ExperimentConfig& config) {
  if (!config.topology.file.empty()) return read_topology_file(config.topology.file);
  Topology grid = build_grid(config.topology.rows, config.topology.cols, config.link);
  if (config.topology.removal_fraction == 0.0) return grid;
  RngStream stream("topology", config.seed);
  return perturb(grid, config.topology.removal_fraction, stream);
}

RoutingPolicy routing_policy(const ExperimentConfig& config, const Topology& topology) {
  RoutingPolicy policy{config.routing, config.ttl};
  if (policy.ttl == 0) policy.ttl = RoutingPolicy::defaults(topology).ttl;
  return policy;
}

std::vector<double> default_load_rates(const ExperimentConfig& config) {
  std::vector<double> rates;
  for (int mbps = 1; mbps <= 12; ++mbps) {
    rates.push_back(mbps * 1e6 / (config.k * config.packet_size_bits));
  }
  return rates;
}

namespace {

const ExperimentConfig& validated(const ExperimentConfig& config) {
  config.validate();
  return config;
}

MessageGenerator make_generator(const ExperimentConfig& config, int replication) {
  if (config.rates.empty()) throw ConfigError("rate", "a message rate is required");
  return MessageGenerator(config.rate(), config.horizon,
                          RngStream("rep" + std::to_string(replication) + "/arrivals", config.seed));
}

MeasurementWindow window_for(const ExperimentConfig& config) {
  MeasurementWindow w;
  w.warmup_end = config.horizon * config.warmup_fraction;
  w.horizon = config.horizon;
  w.deadline = config.deadline;
  w.k = config.k;
  w.packet_size_bits = config.packet_size_bits;
  return w;
}

}  // namespace

Simulation::Simulation(const ExperimentConfig& config, const Topology& topology, int replication)
    : config_(validated(config)),
      topology_(&topology),
      replication_(replication),
      network_(topology, routing_policy(config, topology), config.service_mean,
               NetworkSeeds{config.seed, "rep" + std::to_string(replication) + "/"}, engine_, pool_),
      generator_(make_generator(config, replication)),
      accumulator_(window_for(config)) {}

void Simulation::generate(SimTime now) {
  const MessageId id = records_.size();
  const Message message{id, config_.code(), now, config_.deadline};
  receiver_.register_message(message);
  MessageRecord record;
  record.message_id = id;
  record.created_at = now;
  records_.push_back(record);
  creation_times_.push_back(now);

  for (int i = 0; i < config_.n; ++i) {
    Packet p;
    p.message_id = id;
    p.index = static_cast<std::uint32_t>(i);
    p.size_bits = config_.packet_size_bits;
    p.created_at = now;
    network_.inject(pool_.acquire(p), now);
  }
  packets_generated_ += static_cast<std::uint64_t>(config_.n);

  if (auto next = generator_.next()) engine_.schedule(*next, EventKind::MessageGeneration);
}

void Simulation::audit() const {
  const std::uint64_t located = network_.queued_packets() + network_.packets_on_links();
  if (packets_generated_ != network_.delivered() + network_.dropped() + located ||
      pool_.in_use() != located) {
    throw SimulationLogicError("packet conservation violated at t=" +
                               std::to_string(engine_.now()));
  }
  if (receiver_.completions() > receiver_.message_count()) {
    throw SimulationLogicError("more completions than messages");
  }
}

RunMetrics Simulation::run() {
  if (ran_) throw SimulationLogicError("a Simulation runs once");
  ran_ = true;

  engine_.set_handler([this](const Event& ev) {
    if (ev.kind == EventKind::MessageGeneration) {
      generate(ev.time);
    } else {
      network_.handle(ev);
    }
    if (audit_) audit();
  });
  network_.on_delivered([this](PacketId id, SimTime now) {
    const Packet& p = pool_[id];
    if (delivery_observer_) delivery_observer_(p, now);
    accumulator_.note_packet_delivered(now, p.size_bits);
    if (auto done = receiver_.on_packet_arrival(p, now)) {
      MessageRecord& r = records_[done->id];
      if (r.completed_at) throw SimulationLogicError("message completed twice");
      r.completed_at = done->completed_at;
      r.delay = done->delay;
      r.violated = done->violated;
      r.hops_of_kth = done->hops_of_kth;
    }
  });
  network_.on_dropped([this](PacketId id, SimTime) {
    const Packet& p = pool_[id];
    if (receiver_.on_packet_dropped(p)) records_[p.message_id].failed = true;
  });

  if (auto first = generator_.next()) engine_.schedule(*first, EventKind::MessageGeneration);

  const SimTime warmup_end = config_.horizon * config_.warmup_fraction;
  engine_.run(warmup_end);
  network_.reset_statistics(warmup_end);
  engine_.run(config_.horizon);

  const double judged_until = config_.horizon - config_.deadline;
  for (MessageRecord& r : records_) {
    if (!r.completed_at && r.created_at <= judged_until) r.violated = true;
    if (r.failed) r.violated = true;
    accumulator_.record(r);
  }
  audit();

  MetricsAccumulator::NetworkCounters counters;
  counters.packets_generated = packets_generated_;
  counters.packets_delivered = network_.delivered();
  counters.packets_dropped = network_.dropped();
  counters.surplus_packets = receiver_.surplus();
  counters.rho_est = network_.bottleneck_utilization(config_.horizon);
  counters.max_mean_queue = network_.max_mean_queue_length(config_.horizon);
  RunMetrics metrics = accumulator_.finalize(counters);
  metrics.replication = replication_;
  metrics.creation_hash = hash_times(creation_times_);
  if (metrics.messages_generated != metrics.messages_completed + metrics.messages_unfinished) {
    throw SimulationLogicError("message conservation violated");
  }
  return metrics;
}

std::uint64_t hash_times(const std::vector<SimTime>& times) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (SimTime t : times) {
    auto bits = std::bit_cast<std::uint64_t>(t);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits & 0xffu);
      h *= 0x100000001b3ULL;
      bits >>= 8;
    }
  }
  return h;
}

RunMetrics run_single(const ExperimentConfig& config, int replication) {
  config.validate();
  const Topology topology = build_topology(config);
  return Simulation(config, topology, replication).run();
}

unsigned harness_threads() {
  if (const char* env = std::getenv("TCODE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<AggregateMetrics> run_arms(const ExperimentConfig& config, const Topology& topology,
                                       const std::vector<std::pair<int, double>>& arms,
                                       const RecordSink& sink) {
  struct Job {
    std::size_t arm;
    int replication;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (int rep = 0; rep < config.replications; ++rep) jobs.push_back({a, rep});
  }

  std::vector<RunMetrics> results(jobs.size());
  std::vector<std::vector<MessageRecord>> records(sink ? jobs.size() : 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        ExperimentConfig arm = config;
        arm.n = arms[jobs[i].arm].first;
        arm.rates = {arms[jobs[i].arm].second};
        Simulation sim(arm, topology, jobs[i].replication);
        results[i] = sim.run();
        if (sink) records[i] = sim.records();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  const auto threads = std::min<std::size_t>(harness_threads(), jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  if (sink) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& [n, rate] = arms[jobs[i].arm];
      sink(n, rate, jobs[i].replication, records[i]);
    }
  }

  std::vector<AggregateMetrics> merged;
  const auto reps = static_cast<std::size_t>(config.replications);
  for (std::size_t a = 0; a < arms.size(); ++a) {
    merged.push_back(merge(std::span(results).subspan(a * reps, reps)));
  }
  return merged;
}

namespace {

std::optional<double> ratio(double numerator, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  return numerator / denominator;
}

PairedResult make_pair(const ExperimentConfig& config, double rate, int n,
                       const AggregateMetrics& uncoded, const AggregateMetrics& coded) {
  PairedResult r;
  r.rate = rate;
  r.k = config.k;
  r.n = n;
  r.uncoded = uncoded;
  r.coded = coded;
  const RunMetrics& u = uncoded.pooled;
  const RunMetrics& c = coded.pooled;
  r.delay_gain = ratio(u.delay_mean, c.delay_mean);
  r.variance_ratio = ratio(u.delay_variance, c.delay_variance);
  r.violation_ratio = ratio(u.violation_probability, c.violation_probability);
  r.throughput_ratio = ratio(u.delivered_throughput, c.delivered_throughput);
  r.total_throughput_ratio = ratio(u.total_throughput, c.total_throughput);
  r.saturated = u.max_mean_queue > config.queue_threshold ||
                c.max_mean_queue > config.queue_threshold;
  return r;
}

}  // namespace

PairedResult run_paired(const ExperimentConfig& config, const RecordSink& sink) {
  config.validate();
  if (config.n == config.k) throw ConfigError("n", "pairing requires redundancy (n > k)");
  if (config.rates.empty()) throw ConfigError("rate", "a message rate is required");
  const Topology topology = build_topology(config);
  const auto arms = run_arms(config, topology, {{config.k, config.rate()}, {config.n, config.rate()}}, sink);
  return make_pair(config, config.rate(), config.n, arms[0], arms[1]);
}

std::vector<PairedResult> load_sweep(const ExperimentConfig& config,
                                     const std::vector<double>& rates, const RecordSink& sink) {
  config.validate();
  if (config.n == config.k) throw ConfigError("n", "pairing requires redundancy (n > k)");
  if (rates.empty()) throw ConfigError("rates", "at least one rate is required");
  const Topology topology = build_topology(config);
  std::vector<std::pair<int, double>> arms;
  for (double rate : rates) {
    if (!(rate > 0.0)) throw ConfigError("rates", "rates must be positive");
    arms.emplace_back(config.k, rate);
    arms.emplace_back(config.n, rate);
  }
  const auto merged = run_arms(config, topology, arms, sink);
  std::vector<PairedResult> out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    out.push_back(make_pair(config, rates[i], config.n, merged[2 * i], merged[2 * i + 1]));
  }
  return out;
}

RateSweep rate_sweep(const ExperimentConfig& config, const std::vector<int>& n_values,
                     const RecordSink& sink) {
  config.validate();
  if (config.rates.empty()) throw ConfigError("rate", "a message rate is required");
  if (n_values.empty()) throw ConfigError("n_values", "at least one n is required");
  for (int n : n_values) {
    if (n < config.k) throw ConfigError("n_values", "every n must be >= k");
  }
  const Topology topology = build_topology(config);
  std::vector<std::pair<int, double>> arms{{config.k, config.rate()}};
  for (int n : n_values) {
    if (n != config.k) arms.emplace_back(n, config.rate());
  }
  const auto merged = run_arms(config, topology, arms, sink);

  RateSweep sweep;
  sweep.uncoded = merged.front();
  const double rho = sweep.uncoded.pooled.rho_est;
  std::size_t next_arm = 1;
  for (int n : n_values) {
    RateSweepRow row;
    row.n = n;
    row.rate = static_cast<double>(config.k) / static_cast<double>(n);
    row.coded = n == config.k ? sweep.uncoded : merged[next_arm++];
    row.empirical_f = ratio(sweep.uncoded.pooled.delay_mean, row.coded.pooled.delay_mean);
    row.rho_est = row.coded.pooled.rho_est;
    if (analytics::feasible(rho, config.k, n)) row.analytical_f = analytics::gain(rho, config.k, n);
    sweep.rows.push_back(row);
  }
  return sweep;
}

}  // namespace tcode
