#include "tcode/engine.hpp"

#include <cmath>
#include <sstream>

#include "tcode/errors.hpp"

namespace tcode {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::MessageGeneration: return "MessageGeneration";
    case EventKind::ServiceCompletion: return "ServiceCompletion";
    case EventKind::LinkDelivery: return "LinkDelivery";
    case EventKind::EndOfRun: return "EndOfRun";
  }
  return "?";
}

EventHandle Engine::schedule(Event event) {
  if (!std::isfinite(event.time)) {
    throw SimulationLogicError("event time is not finite");
  }
  if (event.time < now_) {
    std::ostringstream msg;
    msg << "scheduling " << to_string(event.kind) << " at t=" << event.time
        << " before clock " << now_;
    throw SimulationLogicError(msg.str());
  }
  event.seq = next_seq_++;
  calendar_.push(event);
  return event.seq;
}

std::uint64_t Engine::run(SimTime until) {
  if (!(until >= now_)) {
    std::ostringstream msg;
    msg << "run(until=" << until << ") precedes clock " << now_;
    throw SimulationLogicError(msg.str());
  }
  std::uint64_t count = 0;
  while (!calendar_.empty() && calendar_.top().time <= until) {
    const Event event = calendar_.top();
    calendar_.pop();
    now_ = event.time;
    ++count;
    ++dispatched_;
    if (handler_) handler_(event);
  }
  now_ = until;
  return count;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(splitmix64(seed) ^ fnv1a(label));
}

RngStream::RngStream(std::string label, std::uint64_t seed)
    : label_(std::move(label)), seed_(seed), gen_(derive_seed(seed, label_)) {}

double RngStream::uniform01() {
  // 53 random bits, offset by half an ulp so neither endpoint is reachable.
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw ParameterError("uniform_index over an empty range");
  auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double RngStream::exponential(double mean) { return -mean * std::log(uniform01()); }

double sample_exponential(double mean, RngStream& stream) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw ParameterError("exponential mean must be positive and finite");
  }
  return stream.exponential(mean);
}

}  // namespace tcode
