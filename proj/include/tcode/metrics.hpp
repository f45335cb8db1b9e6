#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcode/engine.hpp"
#include "tcode/transport.hpp"

namespace tcode {

/// Final outcome of one message.
struct MessageRecord {
  MessageId message_id = 0;
  SimTime created_at = 0.0;
  std::optional<SimTime> completed_at;
  std::optional<double> delay;
  bool violated = false;
  /// Fewer than k packets could still arrive (ttl drops).
  bool failed = false;
  std::uint32_t hops_of_kth = 0;
};

/// Single-pass mean and sample variance (Welford), with pairwise merging.
class StreamingMoments {
 public:
  StreamingMoments() = default;
  static StreamingMoments from_summary(std::uint64_t count, double mean, double sample_variance);

  void add(double x);
  void merge(const StreamingMoments& other);

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  /// Bessel-corrected; 0 with fewer than two samples.
  double variance() const noexcept;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct RunMetrics {
  int replication = 0;

  std::uint64_t messages_generated = 0;
  std::uint64_t messages_completed = 0;
  /// Not completed by the horizon, failed ones included.
  std::uint64_t messages_unfinished = 0;
  std::uint64_t messages_failed = 0;
  std::uint64_t warmup_excluded = 0;

  std::uint64_t delay_samples = 0;
  double delay_mean = 0.0;
  double delay_variance = 0.0;

  std::uint64_t violation_samples = 0;
  std::uint64_t violations = 0;
  double violation_probability = 0.0;

  /// Information bits of completed messages per second.
  double delivered_throughput = 0.0;
  /// All delivered packet bits per second, redundancy included.
  double total_throughput = 0.0;
  double measured_interval = 0.0;

  std::uint64_t packets_generated = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_dropped = 0;
  std::uint64_t surplus_packets = 0;

  /// Busy fraction of the most loaded node.
  double rho_est = 0.0;
  /// Largest time-averaged queue length over nodes.
  double max_mean_queue = 0.0;
  /// Fingerprint of the message creation-time sequence.
  std::uint64_t creation_hash = 0;
};

/// completed x k x packet_size / interval; information bits only.
double delivered_throughput(std::uint64_t completed, int k, double packet_size_bits,
                            double measured_interval);

struct MeasurementWindow {
  SimTime warmup_end = 0.0;
  SimTime horizon = 0.0;
  double deadline = 0.3;
  int k = 1;
  double packet_size_bits = 1000.0;
};

/// Per-run accumulator. Messages created before warmup_end are excluded from
/// delay and violation statistics. Violation statistics additionally only
/// count messages created no later than horizon - deadline, since later ones
/// cannot be judged within the run; among those, failed and unfinished
/// messages count as violations.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(MeasurementWindow window);

  void record(const MessageRecord& record);
  void note_packet_delivered(SimTime now, double bits);

  struct NetworkCounters {
    std::uint64_t packets_generated = 0;
    std::uint64_t packets_delivered = 0;
    std::uint64_t packets_dropped = 0;
    std::uint64_t surplus_packets = 0;
    double rho_est = 0.0;
    double max_mean_queue = 0.0;
  };
  RunMetrics finalize(const NetworkCounters& counters) const;

  const StreamingMoments& delays() const noexcept { return delays_; }

 private:
  MeasurementWindow window_;
  StreamingMoments delays_;
  std::uint64_t generated_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t failed_ = 0;
  std::uint64_t warmup_excluded_ = 0;
  std::uint64_t completed_in_window_ = 0;
  std::uint64_t violation_samples_ = 0;
  std::uint64_t violations_ = 0;
  double delivered_bits_ = 0.0;
};

/// Replications pooled in ascending replication order.
struct AggregateMetrics {
  RunMetrics pooled;
  std::size_t replications = 0;
  /// Normal-approximation 95% half-width on the mean delay: from the spread of
  /// replication means when there are several, else from the within-run variance.
  double delay_mean_half_width = 0.0;
};

/// Throws ParameterError on an empty list.
AggregateMetrics merge(std::span<const RunMetrics> runs);

}  // namespace tcode
