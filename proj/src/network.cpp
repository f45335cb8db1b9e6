#include "tcode/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "tcode/errors.hpp"

namespace tcode {

Topology::Topology(std::size_t node_count, std::vector<Link> links, NodeId source, NodeId sink)
    : links_(std::move(links)), out_(node_count), source_(source), sink_(sink) {
  if (node_count < 2) throw TopologyError("topology needs at least two nodes");
  if (source >= node_count || sink >= node_count) {
    throw TopologyError("source or sink is not a node of the topology");
  }
  if (source == sink) throw TopologyError("source and sink must differ");
  for (LinkId id = 0; id < links_.size(); ++id) {
    const Link& l = links_[id];
    if (l.from >= node_count || l.to >= node_count || l.from == l.to) {
      throw TopologyError("malformed link " + std::to_string(l.from) + "->" +
                          std::to_string(l.to));
    }
    if (!(l.params.capacity_bps > 0.0) || !(l.params.mean_delay_s > 0.0)) {
      throw TopologyError("link capacity and mean delay must be positive");
    }
    out_[l.from].push_back(id);
  }
  for (const Link& l : links_) {
    if (!find_link(l.to, l.from)) {
      throw TopologyError("link " + std::to_string(l.from) + "->" + std::to_string(l.to) +
                          " has no reverse direction");
    }
  }
  const auto dist = hop_distances(0);
  if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; })) {
    throw TopologyError("topology is not connected");
  }
}

std::optional<LinkId> Topology::find_link(NodeId from, NodeId to) const {
  for (LinkId id : out_[from]) {
    if (links_[id].to == to) return id;
  }
  return std::nullopt;
}

std::vector<int> Topology::hop_distances(NodeId origin) const {
  std::vector<int> dist(node_count(), -1);
  std::queue<NodeId> frontier;
  dist[origin] = 0;
  frontier.push(origin);
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (LinkId id : out_[u]) {
      const NodeId v = links_[id].to;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

int Topology::diameter() const {
  int best = 0;
  for (NodeId u = 0; u < node_count(); ++u) {
    const auto d = hop_distances(u);
    best = std::max(best, *std::max_element(d.begin(), d.end()));
  }
  return best;
}

bool is_connected(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges) {
  if (node_count == 0) return true;
  // Union-find over the undirected edges.
  std::vector<NodeId> parent(node_count);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto root = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = node_count;
  for (const auto& [a, b] : edges) {
    const NodeId ra = root(a);
    const NodeId rb = root(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

namespace {

std::vector<Link> bidirectional(std::span<const std::pair<NodeId, NodeId>> edges,
                                const std::vector<LinkParams>& params) {
  std::vector<Link> links;
  links.reserve(edges.size() * 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    links.push_back({edges[i].first, edges[i].second, params[i]});
    links.push_back({edges[i].second, edges[i].first, params[i]});
  }
  return links;
}

}  // namespace

Topology build_grid(int rows, int cols, LinkParams params) {
  if (rows < 2 || cols < 2) {
    throw ParameterError("grid needs at least 2 rows and 2 columns, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  auto id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  Topology t(static_cast<std::size_t>(rows * cols),
             bidirectional(edges, std::vector<LinkParams>(edges.size(), params)), id(0, 0),
             id(rows - 1, cols - 1));
  t.grid_rows = rows;
  t.grid_cols = cols;
  return t;
}

Topology perturb(const Topology& topology, double removal_fraction, RngStream& stream) {
  if (!(removal_fraction >= 0.0 && removal_fraction < 1.0)) {
    throw ParameterError("removal fraction must lie in [0, 1)");
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<LinkParams> params;
  for (const Link& l : topology.links()) {
    if (l.from < l.to) {
      edges.emplace_back(l.from, l.to);
      params.push_back(l.params);
    }
  }
  const auto target = static_cast<std::size_t>(
      std::floor(removal_fraction * static_cast<double>(edges.size())));

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[stream.uniform_index(i)]);
  }

  std::vector<bool> removed(edges.size(), false);
  std::size_t removed_count = 0;
  auto kept = [&](std::size_t skip) {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!removed[i] && i != skip) out.push_back(edges[i]);
    }
    return out;
  };
  auto endpoint_degree = [&](NodeId node, std::size_t skip) {
    std::size_t deg = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (removed[i] || i == skip) continue;
      if (edges[i].first == node || edges[i].second == node) ++deg;
    }
    return deg;
  };

  for (std::size_t candidate : order) {
    if (removed_count >= target) break;
    if (endpoint_degree(topology.source(), candidate) == 0 ||
        endpoint_degree(topology.sink(), candidate) == 0) {
      continue;
    }
    const auto remaining = kept(candidate);
    if (!is_connected(topology.node_count(), remaining)) continue;
    removed[candidate] = true;
    ++removed_count;
  }

  std::vector<std::pair<NodeId, NodeId>> out_edges;
  std::vector<LinkParams> out_params;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (removed[i]) continue;
    out_edges.push_back(edges[i]);
    out_params.push_back(params[i]);
  }
  Topology t(topology.node_count(), bidirectional(out_edges, out_params), topology.source(),
             topology.sink());
  t.grid_rows = topology.grid_rows;
  t.grid_cols = topology.grid_cols;
  return t;
}

std::string to_string(RoutingKind kind) {
  switch (kind) {
    case RoutingKind::UniformRandom: return "uniform";
    case RoutingKind::RandomWalkNoBacktrack: return "no-backtrack";
    case RoutingKind::RandomShortestPath: return "shortest-path";
  }
  return "?";
}

std::optional<RoutingKind> parse_routing_kind(const std::string& text) {
  if (text == "uniform") return RoutingKind::UniformRandom;
  if (text == "no-backtrack") return RoutingKind::RandomWalkNoBacktrack;
  if (text == "shortest-path") return RoutingKind::RandomShortestPath;
  return std::nullopt;
}

RoutingPolicy RoutingPolicy::defaults(const Topology& topology) {
  return {RoutingKind::RandomWalkNoBacktrack, 8 * topology.diameter()};
}

Router::Router(const Topology& topology, RoutingPolicy policy)
    : topology_(&topology), policy_(policy), to_sink_(topology.hop_distances(topology.sink())) {
  if (policy_.uses_ttl() && policy_.ttl < topology.diameter()) {
    throw ParameterError("ttl " + std::to_string(policy_.ttl) + " is below the diameter " +
                         std::to_string(topology.diameter()));
  }
  descending_.resize(topology.node_count());
  for (NodeId u = 0; u < topology.node_count(); ++u) {
    for (LinkId id : topology.out_links(u)) {
      if (to_sink_[topology.link(id).to] == to_sink_[u] - 1) descending_[u].push_back(id);
    }
  }
}

LinkId Router::next_link(NodeId at, NodeId previous_hop, RngStream& stream) const {
  const auto out = topology_->out_links(at);
  if (out.empty()) throw TopologyError("node " + std::to_string(at) + " has no outgoing links");
  if (out.size() == 1) return out.front();

  switch (policy_.kind) {
    case RoutingKind::UniformRandom:
      return out[stream.uniform_index(out.size())];
    case RoutingKind::RandomWalkNoBacktrack: {
      if (previous_hop == kNoNode) return out[stream.uniform_index(out.size())];
      // Pick among the other links by skipping the backtracking one.
      std::size_t back = out.size();
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (topology_->link(out[i]).to == previous_hop) back = i;
      }
      if (back == out.size()) return out[stream.uniform_index(out.size())];
      std::size_t pick = stream.uniform_index(out.size() - 1);
      if (pick >= back) ++pick;
      return out[pick];
    }
    case RoutingKind::RandomShortestPath: {
      const auto& down = descending_[at];
      if (down.empty()) throw TopologyError("no shortest-path successor at the sink");
      return down[stream.uniform_index(down.size())];
    }
  }
  throw ParameterError("unknown routing policy");
}

NodeQueue::NodeQueue(double service_mean, RngStream stream)
    : service_mean_(service_mean), stream_(std::move(stream)) {
  if (!(service_mean > 0.0)) throw ParameterError("service mean must be positive");
}

void NodeQueue::advance(SimTime now) {
  const double dt = now - last_change_;
  if (busy_) busy_accum_ += dt;
  length_area_ += dt * static_cast<double>(fifo_.size());
  last_change_ = now;
}

std::optional<SimTime> NodeQueue::enqueue(PacketId packet, SimTime now) {
  advance(now);
  fifo_.push_back(packet);
  if (busy_) return std::nullopt;
  busy_ = true;
  return now + stream_.exponential(service_mean_);
}

NodeQueue::Departure NodeQueue::complete(SimTime now) {
  if (fifo_.empty()) throw SimulationLogicError("service completion at an empty node");
  advance(now);
  Departure d{fifo_.front(), std::nullopt};
  fifo_.pop_front();
  if (fifo_.empty()) {
    busy_ = false;
  } else {
    d.next_completion = now + stream_.exponential(service_mean_);
  }
  return d;
}

double NodeQueue::busy_time(SimTime now) const {
  return busy_accum_ + (busy_ ? now - last_change_ : 0.0);
}

double NodeQueue::mean_length(SimTime now) const {
  const double span = now - stats_start_;
  if (span <= 0.0) return static_cast<double>(fifo_.size());
  const double area = length_area_ + (now - last_change_) * static_cast<double>(fifo_.size());
  return area / span;
}

double NodeQueue::busy_fraction(SimTime now) const {
  const double span = now - stats_start_;
  return span > 0.0 ? busy_time(now) / span : 0.0;
}

void NodeQueue::reset_statistics(SimTime now) {
  advance(now);
  stats_start_ = now;
  busy_accum_ = 0.0;
  length_area_ = 0.0;
}

PacketNetwork::PacketNetwork(const Topology& topology, RoutingPolicy policy, double service_mean,
                             const NetworkSeeds& seeds, Engine& engine, PacketPool& pool)
    : topology_(&topology), router_(topology, policy), engine_(&engine), pool_(&pool) {
  const std::size_t n = topology.node_count();
  nodes_.reserve(n);
  routing_streams_.reserve(n);
  for (NodeId u = 0; u < n; ++u) {
    const std::string node = std::to_string(u);
    nodes_.emplace_back(service_mean, RngStream(seeds.prefix + "service/node" + node, seeds.seed));
    routing_streams_.emplace_back(seeds.prefix + "routing/node" + node, seeds.seed);
  }
  link_streams_.reserve(topology.links().size());
  for (const Link& l : topology.links()) {
    link_streams_.emplace_back(
        seeds.prefix + "link/" + std::to_string(l.from) + "->" + std::to_string(l.to), seeds.seed);
  }
}

void PacketNetwork::inject(PacketId packet, SimTime now) {
  ++injected_;
  arrive_at(topology_->source(), packet, now);
}

void PacketNetwork::handle(const Event& event) {
  switch (event.kind) {
    case EventKind::ServiceCompletion:
      service_done(event.subject, event.time);
      break;
    case EventKind::LinkDelivery:
      --on_links_;
      arrive_at(topology_->link(event.aux).to, event.subject, event.time);
      break;
    default:
      break;
  }
}

void PacketNetwork::arrive_at(NodeId node, PacketId packet, SimTime now) {
  if (node == topology_->sink()) {
    ++delivered_;
    max_hops_ = std::max(max_hops_, (*pool_)[packet].hops);
    if (delivered_cb_) delivered_cb_(packet, now);
    pool_->release(packet);
    return;
  }
  if (auto done = nodes_[node].enqueue(packet, now)) {
    engine_->schedule(*done, EventKind::ServiceCompletion, node);
  }
}

void PacketNetwork::service_done(NodeId node, SimTime now) {
  const auto departure = nodes_[node].complete(now);
  if (departure.next_completion) {
    engine_->schedule(*departure.next_completion, EventKind::ServiceCompletion, node);
  }
  Packet& p = (*pool_)[departure.packet];
  const RoutingPolicy& policy = router_.policy();
  if (policy.uses_ttl() && p.hops >= static_cast<std::uint32_t>(policy.ttl)) {
    ++dropped_;
    if (dropped_cb_) dropped_cb_(departure.packet, now);
    pool_->release(departure.packet);
    return;
  }
  const LinkId link = router_.next_link(node, p.previous_hop, routing_streams_[node]);
  p.previous_hop = node;
  ++p.hops;
  const double delay = link_streams_[link].exponential(topology_->link(link).params.mean_delay_s);
  engine_->schedule(now + delay, EventKind::LinkDelivery, departure.packet, link);
  ++on_links_;
}

std::uint64_t PacketNetwork::queued_packets() const {
  std::uint64_t total = 0;
  for (const auto& n : nodes_) total += n.length();
  return total;
}

void PacketNetwork::reset_statistics(SimTime now) {
  for (auto& n : nodes_) n.reset_statistics(now);
}

double PacketNetwork::bottleneck_utilization(SimTime now) const {
  double best = 0.0;
  for (const auto& n : nodes_) best = std::max(best, n.busy_fraction(now));
  return best;
}

double PacketNetwork::max_mean_queue_length(SimTime now) const {
  double best = 0.0;
  for (const auto& n : nodes_) best = std::max(best, n.mean_length(now));
  return best;
}

IsolatedNodeResult simulate_isolated_node(double arrival_rate, double service_mean,
                                          std::uint64_t packets, std::uint64_t seed) {
  if (!(arrival_rate > 0.0)) throw ParameterError("arrival rate must be positive");
  if (packets == 0) throw ParameterError("need at least one packet");

  Engine engine;
  NodeQueue node(service_mean, RngStream("isolated/service", seed));
  RngStream arrivals("isolated/arrivals", seed);
  std::vector<SimTime> arrived_at;
  arrived_at.reserve(packets);

  IsolatedNodeResult result;
  PacketId expected_next = 0;

  engine.set_handler([&](const Event& ev) {
    if (ev.kind == EventKind::MessageGeneration) {
      if (arrived_at.size() >= packets) return;
      const auto id = static_cast<PacketId>(arrived_at.size());
      arrived_at.push_back(ev.time);
      if (auto done = node.enqueue(id, ev.time)) {
        engine.schedule(*done, EventKind::ServiceCompletion);
      }
      engine.schedule(ev.time + arrivals.exponential(1.0 / arrival_rate),
                      EventKind::MessageGeneration);
    } else if (ev.kind == EventKind::ServiceCompletion) {
      const auto dep = node.complete(ev.time);
      if (dep.next_completion) engine.schedule(*dep.next_completion, EventKind::ServiceCompletion);
      if (dep.packet != expected_next) result.fifo_order_held = false;
      expected_next = dep.packet + 1;
      result.sojourn.add(ev.time - arrived_at[dep.packet]);
      ++result.packets;
    }
  });

  engine.schedule(arrivals.exponential(1.0 / arrival_rate), EventKind::MessageGeneration);
  const double step = 10.0 * static_cast<double>(packets) / arrival_rate;
  while (result.packets < packets) engine.run(engine.now() + step);
  return result;
}

}  // namespace tcode
