#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcode/engine.hpp"
#include "tcode/metrics.hpp"
#include "tcode/transport.hpp"

namespace tcode {

using LinkId = std::uint32_t;

struct LinkParams {
  double capacity_bps = 10e6;
  double mean_delay_s = 0.002;
};

struct Link {
  NodeId from = 0;
  NodeId to = 0;
  LinkParams params;
};

/// Directed multi-hop graph with a designated source and sink. Every physical
/// link is stored as two directed entries. Immutable after construction.
class Topology {
 public:
  /// Throws TopologyError if the graph is disconnected, the endpoints coincide
  /// or are out of range, or a link is malformed.
  Topology(std::size_t node_count, std::vector<Link> links, NodeId source, NodeId sink);

  std::size_t node_count() const noexcept { return out_.size(); }
  const std::vector<Link>& links() const noexcept { return links_; }
  const Link& link(LinkId id) const { return links_[id]; }
  std::span<const LinkId> out_links(NodeId node) const { return out_[node]; }
  std::size_t degree(NodeId node) const { return out_[node].size(); }
  NodeId source() const noexcept { return source_; }
  NodeId sink() const noexcept { return sink_; }

  std::size_t undirected_edge_count() const noexcept { return links_.size() / 2; }
  std::optional<LinkId> find_link(NodeId from, NodeId to) const;

  /// Breadth-first hop distances from `origin`; -1 for unreachable nodes.
  std::vector<int> hop_distances(NodeId origin) const;
  int hop_distance(NodeId from, NodeId to) const { return hop_distances(from)[to]; }
  int diameter() const;

  /// Grid shape when built by build_grid, used only for labelling.
  int grid_rows = 0;
  int grid_cols = 0;

 private:
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  NodeId source_;
  NodeId sink_;
};

/// True when every node is reachable from node 0 over the given undirected
/// edge list.
bool is_connected(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges);

/// rows x cols lattice; source at corner (0,0), sink at (rows-1, cols-1).
/// Node (r, c) has id r*cols + c.
Topology build_grid(int rows, int cols, LinkParams params = {});

/// Removes up to floor(removal_fraction * edges) undirected edges in random
/// order, skipping any removal that would disconnect the graph or isolate an
/// endpoint.
Topology perturb(const Topology& topology, double removal_fraction, RngStream& stream);

/// Line-oriented topology text: `node <id>`, `link <from> <to> <capacity_bps>
/// <mean_delay_s>` (one bidirectional link), `source <id>`, `sink <id>`.
/// `#` starts a comment line.
Topology read_topology(std::istream& in);
Topology read_topology_file(const std::string& path);
void write_topology(std::ostream& out, const Topology& topology);

enum class RoutingKind { UniformRandom, RandomWalkNoBacktrack, RandomShortestPath };

std::string to_string(RoutingKind kind);
std::optional<RoutingKind> parse_routing_kind(const std::string& text);

struct RoutingPolicy {
  RoutingKind kind = RoutingKind::RandomWalkNoBacktrack;
  /// Hop budget for the random-walk variants; ignored by shortest-path.
  int ttl = 0;

  /// No-backtrack walk with ttl = 8 x diameter.
  static RoutingPolicy defaults(const Topology& topology);
  bool uses_ttl() const noexcept { return kind != RoutingKind::RandomShortestPath; }
};

/// Next-hop selection over a fixed topology.
class Router {
 public:
  /// Throws ParameterError when a ttl policy has ttl below the diameter.
  Router(const Topology& topology, RoutingPolicy policy);

  const RoutingPolicy& policy() const noexcept { return policy_; }
  int distance_to_sink(NodeId node) const { return to_sink_[node]; }

  /// Outgoing link chosen for a packet at `at` that arrived from `previous_hop`
  /// (kNoNode when injected locally).
  LinkId next_link(NodeId at, NodeId previous_hop, RngStream& stream) const;
  NodeId next_hop(NodeId at, NodeId previous_hop, RngStream& stream) const {
    return topology_->link(next_link(at, previous_hop, stream)).to;
  }

 private:
  const Topology* topology_;
  RoutingPolicy policy_;
  std::vector<int> to_sink_;
  std::vector<std::vector<LinkId>> descending_;
};

/// Single-server FIFO with exponential service. The packet at the head of
/// the queue is the one in service.
class NodeQueue {
 public:
  NodeQueue(double service_mean, RngStream stream);

  /// Appends the packet. If the server was idle, service starts and the
  /// completion time is returned.
  std::optional<SimTime> enqueue(PacketId packet, SimTime now);

  struct Departure {
    PacketId packet;
    std::optional<SimTime> next_completion;
  };
  /// Removes the head packet at the end of its service and starts the next.
  Departure complete(SimTime now);

  bool busy() const noexcept { return busy_; }
  std::size_t length() const noexcept { return fifo_.size(); }
  double service_mean() const noexcept { return service_mean_; }

  /// Statistics since the last reset: server busy time and the time-integral
  /// of the number of packets present.
  double busy_time(SimTime now) const;
  double busy_fraction(SimTime now) const;
  double mean_length(SimTime now) const;
  void reset_statistics(SimTime now);

 private:
  void advance(SimTime now);

  double service_mean_;
  RngStream stream_;
  std::deque<PacketId> fifo_;
  bool busy_ = false;
  SimTime stats_start_ = 0.0;
  SimTime last_change_ = 0.0;
  double busy_accum_ = 0.0;
  double length_area_ = 0.0;
};

/// Streams for the stochastic parts of the network, keyed so that a node's or
/// link's samples do not depend on any other element.
struct NetworkSeeds {
  std::uint64_t seed = 0;
  std::string prefix;
};

/// Packet forwarding dynamics: node FIFOs, exponential link delays, routing.
/// Packets reaching the sink are handed to the delivery callback without
/// further service.
class PacketNetwork {
 public:
  using PacketCallback = std::function<void(PacketId, SimTime)>;

  PacketNetwork(const Topology& topology, RoutingPolicy policy, double service_mean,
                const NetworkSeeds& seeds, Engine& engine, PacketPool& pool);

  void on_delivered(PacketCallback cb) { delivered_cb_ = std::move(cb); }
  void on_dropped(PacketCallback cb) { dropped_cb_ = std::move(cb); }

  /// Offers a packet to the source node's queue.
  void inject(PacketId packet, SimTime now);
  void handle(const Event& event);

  std::uint64_t delivered() const noexcept { return delivered_; }
  std::uint64_t dropped() const noexcept { return dropped_; }
  std::uint64_t injected() const noexcept { return injected_; }
  /// Packets queued or in service at nodes, plus packets on links.
  std::uint64_t in_flight() const noexcept { return injected_ - delivered_ - dropped_; }
  std::uint32_t max_hops_delivered() const noexcept { return max_hops_; }
  /// Packets counted where they are: waiting or in service at nodes, and on links.
  std::uint64_t queued_packets() const;
  std::uint64_t packets_on_links() const noexcept { return on_links_; }

  const NodeQueue& node(NodeId id) const { return nodes_[id]; }
  const Router& router() const noexcept { return router_; }
  void reset_statistics(SimTime now);

  /// Largest busy fraction over all nodes since the last reset.
  double bottleneck_utilization(SimTime now) const;
  /// Largest time-averaged queue length over all nodes since the last reset.
  double max_mean_queue_length(SimTime now) const;

 private:
  void arrive_at(NodeId node, PacketId packet, SimTime now);
  void service_done(NodeId node, SimTime now);

  const Topology* topology_;
  Router router_;
  Engine* engine_;
  PacketPool* pool_;
  std::vector<NodeQueue> nodes_;
  std::vector<RngStream> routing_streams_;
  std::vector<RngStream> link_streams_;
  PacketCallback delivered_cb_;
  PacketCallback dropped_cb_;
  std::uint64_t injected_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t on_links_ = 0;
  std::uint32_t max_hops_ = 0;
};

/// Isolated FIFO node fed by Poisson arrivals, starting empty. Sojourn is
/// wait plus service, over the first `packets` arrivals.
struct IsolatedNodeResult {
  StreamingMoments sojourn;
  std::uint64_t packets = 0;
  bool fifo_order_held = true;
};
IsolatedNodeResult simulate_isolated_node(double arrival_rate, double service_mean,
                                          std::uint64_t packets, std::uint64_t seed);

}  // namespace tcode
