#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "tcode/errors.hpp"
#include "tcode/network.hpp"

namespace tcode {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw TopologyError("topology line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Topology read_topology(std::istream& in) {
  std::map<long long, NodeId> ids;
  std::vector<std::pair<NodeId, NodeId>> seen_edges;
  std::vector<Link> links;
  std::optional<NodeId> source;
  std::optional<NodeId> sink;

  auto lookup = [&](long long raw, int line_no) {
    const auto it = ids.find(raw);
    if (it == ids.end()) fail(line_no, "undeclared node " + std::to_string(raw));
    return it->second;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream words(line);
    std::string keyword;
    if (!(words >> keyword) || keyword.front() == '#') continue;

    if (keyword == "node") {
      long long raw = 0;
      if (!(words >> raw) || raw < 0) fail(line_no, "expected `node <id>`");
      if (!ids.emplace(raw, static_cast<NodeId>(ids.size())).second) {
        fail(line_no, "duplicate node " + std::to_string(raw));
      }
    } else if (keyword == "link") {
      long long a = 0;
      long long b = 0;
      LinkParams params;
      if (!(words >> a >> b >> params.capacity_bps >> params.mean_delay_s)) {
        fail(line_no, "expected `link <from> <to> <capacity_bps> <mean_delay_s>`");
      }
      const NodeId u = lookup(a, line_no);
      const NodeId v = lookup(b, line_no);
      for (const auto& [x, y] : seen_edges) {
        if ((x == u && y == v) || (x == v && y == u)) fail(line_no, "duplicate link");
      }
      seen_edges.emplace_back(u, v);
      links.push_back({u, v, params});
      links.push_back({v, u, params});
    } else if (keyword == "source" || keyword == "sink") {
      long long raw = 0;
      if (!(words >> raw)) fail(line_no, "expected `" + keyword + " <id>`");
      (keyword == "source" ? source : sink) = lookup(raw, line_no);
    } else {
      fail(line_no, "unknown keyword `" + keyword + "`");
    }
    std::string extra;
    if (words >> extra) fail(line_no, "trailing text `" + extra + "`");
  }
  if (!source || !sink) throw TopologyError("topology file must declare a source and a sink");
  return Topology(ids.size(), std::move(links), *source, *sink);
}

Topology read_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file " + path);
  return read_topology(in);
}

void write_topology(std::ostream& out, const Topology& topology) {
  out << "# " << topology.node_count() << " nodes, " << topology.undirected_edge_count()
      << " bidirectional links\n";
  for (NodeId u = 0; u < topology.node_count(); ++u) out << "node " << u << '\n';
  out << std::setprecision(17);
  for (const Link& l : topology.links()) {
    if (l.from < l.to) {
      out << "link " << l.from << ' ' << l.to << ' ' << l.params.capacity_bps << ' '
          << l.params.mean_delay_s << '\n';
    }
  }
  out << "source " << topology.source() << '\n' << "sink " << topology.sink() << '\n';
}

}  // namespace tcode
