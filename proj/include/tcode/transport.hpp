#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tcode/engine.hpp"

namespace tcode {

using NodeId = std::uint32_t;
using MessageId = std::uint64_t;
using PacketId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// (n, k) transport code: any k of the n transmitted packets complete a message.
struct CodeConfig {
  int k = 1;
  int n = 1;

  double rate() const noexcept { return static_cast<double>(k) / static_cast<double>(n); }
  bool uncoded() const noexcept { return n == k; }
  /// Throws ParameterError unless 1 <= k <= n.
  void validate() const;
};

struct Message {
  MessageId id = 0;
  CodeConfig code;
  SimTime created_at = 0.0;
  double deadline = 0.3;
};

struct Packet {
  MessageId message_id = 0;
  std::uint32_t index = 0;
  double size_bits = 1000.0;
  SimTime created_at = 0.0;
  std::uint32_t hops = 0;
  NodeId previous_hop = kNoNode;
};

/// Slot storage for packets in flight. Released slots are reused.
class PacketPool {
 public:
  PacketId acquire(const Packet& packet);
  void release(PacketId id);

  Packet& operator[](PacketId id) { return slots_[id]; }
  const Packet& operator[](PacketId id) const { return slots_[id]; }

  std::size_t in_use() const noexcept { return slots_.size() - free_.size(); }

 private:
  std::vector<Packet> slots_;
  std::vector<PacketId> free_;
};

/// Poisson message arrivals: i.i.d. exponential gaps of mean 1/rate, strictly
/// before `horizon`.
class MessageGenerator {
 public:
  MessageGenerator(double rate, SimTime horizon, RngStream stream);

  /// Next creation time, or nullopt once the horizon is reached.
  std::optional<SimTime> next();

 private:
  double mean_gap_;
  SimTime horizon_;
  SimTime last_ = 0.0;
  RngStream stream_;
};

/// Eager form of MessageGenerator: all creation times in [0, horizon).
std::vector<SimTime> generate_message_stream(double rate, SimTime horizon, RngStream stream);

struct CompletedMessage {
  MessageId id = 0;
  SimTime created_at = 0.0;
  SimTime completed_at = 0.0;
  double delay = 0.0;
  bool violated = false;
  std::uint32_t hops_of_kth = 0;
};

/// Receiver-side reconstruction. A message completes on the arrival of its
/// k-th distinct packet index; later arrivals are surplus.
class Receiver {
 public:
  void register_message(const Message& message);

  std::optional<CompletedMessage> on_packet_arrival(const Packet& packet, SimTime now);
  /// Returns true when the drop leaves fewer than k deliverable packets for a
  /// message that had not completed, i.e. the message has just failed.
  bool on_packet_dropped(const Packet& packet);

  bool completed(MessageId id) const { return track(id).completed; }
  bool failed(MessageId id) const { return track(id).failed; }
  std::size_t distinct_arrivals(MessageId id) const { return track(id).distinct; }
  /// Arrival times of the distinct indices seen so far (at most k, cleared on completion).
  const std::vector<SimTime>& arrival_times(MessageId id) const { return track(id).arrivals; }
  const Message& message(MessageId id) const { return track(id).message; }

  std::size_t message_count() const noexcept { return tracks_.size(); }
  std::uint64_t completions() const noexcept { return completions_; }
  std::uint64_t surplus() const noexcept { return surplus_; }
  std::uint64_t failures() const noexcept { return failures_; }

 private:
  struct Track {
    Message message;
    std::vector<bool> seen;
    std::vector<SimTime> arrivals;
    std::uint32_t distinct = 0;
    std::uint32_t dropped = 0;
    bool completed = false;
    bool failed = false;
  };

  Track& track(MessageId id);
  const Track& track(MessageId id) const;

  std::vector<Track> tracks_;
  std::uint64_t completions_ = 0;
  std::uint64_t surplus_ = 0;
  std::uint64_t failures_ = 0;
};

/// Monte Carlo mean of the k-th smallest of n i.i.d. exponential delays of
/// mean `mean_delay`, i.e. the completion time of a k-of-n coded message whose
/// packets travel independent paths.
double monte_carlo_kth_order_statistic(int k, int n, double mean_delay, std::uint64_t trials,
                                       RngStream& stream);

}  // namespace tcode
