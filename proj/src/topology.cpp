#include "lbsim/topology.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <stdexcept>

namespace lbsim {

void Topology::add_node(const std::string& id, NodeKind kind) {
  if (find_node(id) != nullptr) {
    throw std::invalid_argument("topology: duplicate node id '" + id + "'");
  }
  nodes_.push_back({id, kind});
}

void Topology::add_link(const std::string& id, const std::string& a,
                        const std::string& b, double capacity_Bps,
                        SimTime propagation) {
  if (find_link(id) != nullptr) {
    throw std::invalid_argument("topology: duplicate link id '" + id + "'");
  }
  if (find_node(a) == nullptr || find_node(b) == nullptr) {
    throw std::invalid_argument("topology: link '" + id +
                                "' references a missing node");
  }
  if (!(capacity_Bps > 0.0)) {
    throw std::invalid_argument("topology: link '" + id +
                                "' capacity must be > 0");
  }
  Link l;
  l.id = id;
  l.node_a = a;
  l.node_b = b;
  l.capacity_Bps = capacity_Bps;
  l.propagation = propagation;
  links_.push_back(std::move(l));
}

Node* Topology::find_node(const std::string& id) {
  for (auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Node* Topology::find_node(const std::string& id) const {
  return const_cast<Topology*>(this)->find_node(id);
}

Link* Topology::find_link(const std::string& id) {
  for (auto& l : links_) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

const Link* Topology::find_link(const std::string& id) const {
  return const_cast<Topology*>(this)->find_link(id);
}

std::vector<const Link*> Topology::incident(
    const std::string& node_id) const {
  std::vector<const Link*> out;
  for (const auto& l : links_) {
    if (l.node_a == node_id || l.node_b == node_id) out.push_back(&l);
  }
  return out;
}

const std::string& Topology::other_end(const Link& l,
                                       const std::string& node_id) const {
  return l.node_a == node_id ? l.node_b : l.node_a;
}

void Topology::roll_windows() {
  for (auto& l : links_) {
    l.last_window_bytes = l.window_bytes;
    l.window_bytes = 0;
  }
}

namespace {

struct PathLabel {
  double cost = 0.0;
  std::size_t hops = 0;
  std::vector<std::string> link_seq;
  std::string node;

  // Ordering implements the route preference: utilization sum, then hop
  // count, then lexicographic link-id sequence.
  bool operator>(const PathLabel& o) const {
    if (cost != o.cost) return cost > o.cost;
    if (hops != o.hops) return hops > o.hops;
    return link_seq > o.link_seq;
  }
};

}  // namespace

std::vector<std::string> least_utilized_path(const Topology& topo,
                                             const std::string& src,
                                             const std::string& dst,
                                             double window_seconds) {
  if (topo.find_node(src) == nullptr || topo.find_node(dst) == nullptr) {
    throw std::runtime_error("path: unknown endpoint '" + src + "' or '" +
                             dst + "'");
  }
  if (src == dst) return {};

  std::priority_queue<PathLabel, std::vector<PathLabel>,
                      std::greater<PathLabel>>
      frontier;
  std::map<std::string, PathLabel> settled;
  frontier.push({0.0, 0, {}, src});

  while (!frontier.empty()) {
    PathLabel cur = frontier.top();
    frontier.pop();
    if (settled.count(cur.node) != 0) continue;
    settled.emplace(cur.node, cur);
    if (cur.node == dst) return cur.link_seq;

    // Only switches relay traffic; hosts, servers, and the controller are
    // endpoints.
    if (cur.node != src &&
        topo.find_node(cur.node)->kind != NodeKind::kSwitch) {
      continue;
    }

    for (const Link* l : topo.incident(cur.node)) {
      if (!l->alive) continue;
      const std::string& next = topo.other_end(*l, cur.node);
      if (settled.count(next) != 0) continue;
      PathLabel lab;
      lab.cost = cur.cost + static_cast<double>(l->last_window_bytes) /
                                (l->capacity_Bps * window_seconds);
      lab.hops = cur.hops + 1;
      lab.link_seq = cur.link_seq;
      lab.link_seq.push_back(l->id);
      lab.node = next;
      frontier.push(std::move(lab));
    }
  }
  throw std::runtime_error("path: '" + src + "' and '" + dst +
                           "' are not connected");
}

}  // namespace lbsim
