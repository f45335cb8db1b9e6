#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include <random>

namespace tcode {

/// Simulated time in seconds.
using SimTime = double;

enum class EventKind : std::uint8_t {
  MessageGeneration,
  ServiceCompletion,
  LinkDelivery,
  EndOfRun,
};

std::string_view to_string(EventKind kind);

/// A timestamped occurrence. `subject` and `aux` are interpreted by the
/// handler: node id for ServiceCompletion, packet slot and link id for
/// LinkDelivery.
struct Event {
  SimTime time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::EndOfRun;
  std::uint32_t subject = 0;
  std::uint32_t aux = 0;
};

using EventHandle = std::uint64_t;

/// Event calendar with a monotone clock. Events at equal times dispatch in
/// insertion order.
class Engine {
 public:
  using Handler = std::function<void(const Event&)>;

  Engine() = default;
  explicit Engine(Handler handler) : handler_(std::move(handler)) {}

  void set_handler(Handler handler) { handler_ = std::move(handler); }

  /// Assigns the next sequence number to `event` and inserts it. Throws
  /// SimulationLogicError when `event.time` precedes the clock.
  EventHandle schedule(Event event);
  EventHandle schedule(SimTime time, EventKind kind, std::uint32_t subject = 0,
                       std::uint32_t aux = 0) {
    return schedule(Event{time, 0, kind, subject, aux});
  }

  /// Dispatches every event with time <= until, then sets the clock to `until`.
  std::uint64_t run(SimTime until);

  SimTime now() const noexcept { return now_; }
  std::size_t pending() const noexcept { return calendar_.size(); }
  std::uint64_t dispatched() const noexcept { return dispatched_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  Handler handler_;
  std::priority_queue<Event, std::vector<Event>, Later> calendar_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
};

/// Mixes a master seed with a label into a 64-bit stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Named random substream. The generator state depends only on (label, seed),
/// so independent purposes can share one master seed without perturbing each
/// other.
class RngStream {
 public:
  RngStream(std::string label, std::uint64_t seed);

  const std::string& label() const noexcept { return label_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on the open interval (0, 1).
  double uniform01();
  /// Uniform over {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n);
  /// Exponential with the given mean; strictly positive.
  double exponential(double mean);

 private:
  std::string label_;
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

/// Throws ParameterError for non-positive or non-finite `mean`.
double sample_exponential(double mean, RngStream& stream);

}  // namespace tcode
