#include "tcode/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcode/errors.hpp"

namespace tcode {

void CodeConfig::validate() const {
  if (k < 1) throw ParameterError("code k must be at least 1, got " + std::to_string(k));
  if (n < k) {
    throw ParameterError("code n must be >= k (n=" + std::to_string(n) +
                         ", k=" + std::to_string(k) + ")");
  }
}

PacketId PacketPool::acquire(const Packet& packet) {
  if (!free_.empty()) {
    const PacketId id = free_.back();
    free_.pop_back();
    slots_[id] = packet;
    return id;
  }
  slots_.push_back(packet);
  return static_cast<PacketId>(slots_.size() - 1);
}

void PacketPool::release(PacketId id) { free_.push_back(id); }

MessageGenerator::MessageGenerator(double rate, SimTime horizon, RngStream stream)
    : mean_gap_(0.0), horizon_(horizon), stream_(std::move(stream)) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ParameterError("message rate must be positive");
  }
  mean_gap_ = 1.0 / rate;
}

std::optional<SimTime> MessageGenerator::next() {
  const SimTime t = last_ + stream_.exponential(mean_gap_);
  if (t >= horizon_) {
    last_ = horizon_;
    return std::nullopt;
  }
  last_ = t;
  return t;
}

std::vector<SimTime> generate_message_stream(double rate, SimTime horizon, RngStream stream) {
  MessageGenerator gen(rate, horizon, std::move(stream));
  std::vector<SimTime> times;
  while (auto t = gen.next()) times.push_back(*t);
  return times;
}

Receiver::Track& Receiver::track(MessageId id) {
  if (id >= tracks_.size()) {
    throw SimulationLogicError("packet for unknown message " + std::to_string(id));
  }
  return tracks_[id];
}

const Receiver::Track& Receiver::track(MessageId id) const {
  if (id >= tracks_.size()) {
    throw SimulationLogicError("unknown message " + std::to_string(id));
  }
  return tracks_[id];
}

void Receiver::register_message(const Message& message) {
  if (message.id != tracks_.size()) {
    throw SimulationLogicError("message ids must be registered densely in order");
  }
  Track t;
  t.message = message;
  t.seen.assign(static_cast<std::size_t>(message.code.n), false);
  tracks_.push_back(std::move(t));
}

std::optional<CompletedMessage> Receiver::on_packet_arrival(const Packet& packet, SimTime now) {
  Track& t = track(packet.message_id);
  if (packet.index >= static_cast<std::uint32_t>(t.message.code.n)) {
    throw SimulationLogicError("packet index out of range for message " +
                               std::to_string(packet.message_id));
  }
  if (t.completed || t.failed || t.seen[packet.index]) {
    ++surplus_;
    return std::nullopt;
  }
  t.seen[packet.index] = true;
  ++t.distinct;
  t.arrivals.push_back(now);
  if (t.distinct < static_cast<std::uint32_t>(t.message.code.k)) return std::nullopt;

  t.completed = true;
  ++completions_;
  t.arrivals.clear();
  t.arrivals.shrink_to_fit();
  t.seen.clear();
  t.seen.shrink_to_fit();

  CompletedMessage done;
  done.id = t.message.id;
  done.created_at = t.message.created_at;
  done.completed_at = now;
  done.delay = now - t.message.created_at;
  done.violated = done.delay > t.message.deadline;
  done.hops_of_kth = packet.hops;
  return done;
}

bool Receiver::on_packet_dropped(const Packet& packet) {
  Track& t = track(packet.message_id);
  ++t.dropped;
  if (t.completed || t.failed) return false;
  const auto deliverable = static_cast<std::uint32_t>(t.message.code.n) - t.dropped;
  if (deliverable >= static_cast<std::uint32_t>(t.message.code.k)) return false;
  t.failed = true;
  ++failures_;
  return true;
}

double monte_carlo_kth_order_statistic(int k, int n, double mean_delay, std::uint64_t trials,
                                       RngStream& stream) {
  CodeConfig{k, n}.validate();
  if (!(mean_delay > 0.0)) throw ParameterError("mean delay must be positive");
  if (trials == 0) throw ParameterError("need at least one trial");

  std::vector<double> draws(static_cast<std::size_t>(n));
  const auto kth = draws.begin() + (k - 1);
  double sum = 0.0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    for (double& d : draws) d = stream.exponential(mean_delay);
    std::nth_element(draws.begin(), kth, draws.end());
    sum += *kth;
  }
  return sum / static_cast<double>(trials);
}

}  // namespace tcode
