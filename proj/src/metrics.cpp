#include "tcode/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tcode/errors.hpp"

namespace tcode {

StreamingMoments StreamingMoments::from_summary(std::uint64_t count, double mean,
                                                double sample_variance) {
  StreamingMoments m;
  m.count_ = count;
  m.mean_ = count > 0 ? mean : 0.0;
  m.m2_ = count > 1 ? sample_variance * static_cast<double>(count - 1) : 0.0;
  return m;
}

void StreamingMoments::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void StreamingMoments::merge(const StreamingMoments& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  count_ += other.count_;
}

double StreamingMoments::variance() const noexcept {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double delivered_throughput(std::uint64_t completed, int k, double packet_size_bits,
                            double measured_interval) {
  if (!(measured_interval > 0.0)) throw ParameterError("measured interval must be positive");
  return static_cast<double>(completed) * static_cast<double>(k) * packet_size_bits /
         measured_interval;
}

MetricsAccumulator::MetricsAccumulator(MeasurementWindow window) : window_(window) {}

void MetricsAccumulator::record(const MessageRecord& r) {
  ++generated_;
  if (r.completed_at) {
    ++completed_;
    if (*r.completed_at >= window_.warmup_end) ++completed_in_window_;
  }
  if (r.failed) ++failed_;

  if (r.created_at < window_.warmup_end) {
    ++warmup_excluded_;
    return;
  }
  if (r.delay) delays_.add(*r.delay);

  if (r.created_at <= window_.horizon - window_.deadline) {
    ++violation_samples_;
    const bool late = r.delay ? *r.delay > window_.deadline : true;
    if (late) ++violations_;
  }
}

void MetricsAccumulator::note_packet_delivered(SimTime now, double bits) {
  if (now >= window_.warmup_end) delivered_bits_ += bits;
}

RunMetrics MetricsAccumulator::finalize(const NetworkCounters& counters) const {
  RunMetrics m;
  m.messages_generated = generated_;
  m.messages_completed = completed_;
  m.messages_unfinished = generated_ - completed_;
  m.messages_failed = failed_;
  m.warmup_excluded = warmup_excluded_;
  m.delay_samples = delays_.count();
  m.delay_mean = delays_.mean();
  m.delay_variance = delays_.variance();
  m.violation_samples = violation_samples_;
  m.violations = violations_;
  m.violation_probability =
      violation_samples_ > 0
          ? static_cast<double>(violations_) / static_cast<double>(violation_samples_)
          : 0.0;
  m.measured_interval = window_.horizon - window_.warmup_end;
  if (m.measured_interval > 0.0) {
    m.delivered_throughput = delivered_throughput(completed_in_window_, window_.k,
                                                  window_.packet_size_bits, m.measured_interval);
    m.total_throughput = delivered_bits_ / m.measured_interval;
  }
  m.packets_generated = counters.packets_generated;
  m.packets_delivered = counters.packets_delivered;
  m.packets_dropped = counters.packets_dropped;
  m.surplus_packets = counters.surplus_packets;
  m.rho_est = counters.rho_est;
  m.max_mean_queue = counters.max_mean_queue;
  return m;
}

AggregateMetrics merge(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw ParameterError("merge needs at least one run");
  std::vector<const RunMetrics*> order;
  for (const auto& r : runs) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const RunMetrics* a, const RunMetrics* b) {
    return a->replication < b->replication;
  });

  AggregateMetrics agg;
  agg.replications = runs.size();
  RunMetrics& p = agg.pooled;
  p.replication = order.front()->replication;
  p.creation_hash = order.front()->creation_hash;

  StreamingMoments pooled;
  StreamingMoments replication_means;
  for (const RunMetrics* r : order) {
    p.messages_generated += r->messages_generated;
    p.messages_completed += r->messages_completed;
    p.messages_unfinished += r->messages_unfinished;
    p.messages_failed += r->messages_failed;
    p.warmup_excluded += r->warmup_excluded;
    p.violation_samples += r->violation_samples;
    p.violations += r->violations;
    p.packets_generated += r->packets_generated;
    p.packets_delivered += r->packets_delivered;
    p.packets_dropped += r->packets_dropped;
    p.surplus_packets += r->surplus_packets;
    p.delivered_throughput += r->delivered_throughput;
    p.total_throughput += r->total_throughput;
    p.measured_interval += r->measured_interval;
    p.rho_est += r->rho_est;
    p.max_mean_queue = std::max(p.max_mean_queue, r->max_mean_queue);
    pooled.merge(StreamingMoments::from_summary(r->delay_samples, r->delay_mean, r->delay_variance));
    if (r->delay_samples > 0) replication_means.add(r->delay_mean);
  }
  const double count = static_cast<double>(runs.size());
  p.delivered_throughput /= count;
  p.total_throughput /= count;
  p.measured_interval /= count;
  p.rho_est /= count;
  p.delay_samples = pooled.count();
  p.delay_mean = pooled.mean();
  p.delay_variance = pooled.variance();
  p.violation_probability =
      p.violation_samples > 0
          ? static_cast<double>(p.violations) / static_cast<double>(p.violation_samples)
          : 0.0;

  constexpr double z95 = 1.959963984540054;
  if (replication_means.count() >= 2) {
    agg.delay_mean_half_width =
        z95 * std::sqrt(replication_means.variance() /
                        static_cast<double>(replication_means.count()));
  } else if (p.delay_samples > 0) {
    agg.delay_mean_half_width =
        z95 * std::sqrt(p.delay_variance / static_cast<double>(p.delay_samples));
  }
  return agg;
}

}  // namespace tcode
