#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lbsim/time.hpp"

namespace lbsim {

enum class NodeKind : std::uint8_t { kHost, kSwitch, kServer, kController };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::kHost;
};

struct Link {
  std::string id;
  std::string node_a;
  std::string node_b;
  double capacity_Bps = 0.0;  // bytes per second, > 0
  SimTime propagation = 0;    // fixed per-traversal delay
  bool alive = true;

  // Byte accounting: the open monitoring interval, the last completed one
  // (what path scoring reads), and the whole-run total.
  std::uint64_t window_bytes = 0;
  std::uint64_t last_window_bytes = 0;
  std::uint64_t total_bytes = 0;
};

// Node/link graph shared by the engine and the controller. Mutation
// happens only from the single-threaded event loop.
class Topology {
 public:
  void add_node(const std::string& id, NodeKind kind);
  void add_link(const std::string& id, const std::string& a,
                const std::string& b, double capacity_Bps,
                SimTime propagation);

  Node* find_node(const std::string& id);
  const Node* find_node(const std::string& id) const;
  Link* find_link(const std::string& id);
  const Link* find_link(const std::string& id) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<Link>& links() { return links_; }
  const std::vector<Link>& links() const { return links_; }

  // Links incident to a node, in insertion order (which also defines the
  // port numbering switches use).
  std::vector<const Link*> incident(const std::string& node_id) const;

  const std::string& other_end(const Link& l,
                               const std::string& node_id) const;

  // Closes the current monitoring interval on every link.
  void roll_windows();

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
};

inline void record_transit(Link& l, std::uint64_t bytes) {
  l.window_bytes += bytes;
  l.total_bytes += bytes;
}

// Minimum-utilization route from src to dst over alive links only:
// minimizes the sum over traversed links of
//   last_window_bytes / (capacity_Bps * window_seconds),
// with ties broken by fewest hops and then by lexicographically smallest
// link-id sequence. Intermediate nodes must be switches. Returns the link
// ids in traversal order; throws std::runtime_error when src and dst are
// not connected.
std::vector<std::string> least_utilized_path(const Topology& topo,
                                             const std::string& src,
                                             const std::string& dst,
                                             double window_seconds);

}  // namespace lbsim
