#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "lbsim/addr.hpp"
#include "lbsim/config.hpp"
#include "lbsim/flow_table.hpp"
#include "lbsim/topology.hpp"

namespace lbsim {

// Forwarding state of one switch: its match/action table, the port
// numbering (port index == position of the link in the topology's
// incident-link order), per-port byte counters, and the duplicate filter
// used when 1+1 protection delivers two copies of the same packet.
struct SwitchState {
  std::string id;
  FlowTable table;
  std::vector<std::string> port_links;      // port index -> link id
  std::map<std::string, int> link_port;     // link id -> port index
  std::vector<std::uint64_t> tx_bytes;      // per-port, toward the link
  std::vector<std::uint64_t> rx_bytes;      // per-port, from the link
  // Duplicate elimination: (flow_id, direction) -> next sequence number
  // that has not yet been delivered past this switch.
  std::unordered_map<std::uint64_t, std::uint64_t> dedup_next_seq;

  int port_of(const std::string& link_id) const {
    auto it = link_port.find(link_id);
    return it == link_port.end() ? -1 : it->second;
  }
};

// The data plane as one value: graph, per-switch forwarding state, and
// the address plan for hosts. Owned by the simulation; the controller
// holds a reference and programs the switch tables through it.
struct Fabric {
  Topology topo;
  std::vector<SwitchState> switches;
  std::unordered_map<std::string, Addr> host_addr;  // host node id -> address
  std::unordered_map<Addr, std::string> addr_host;  // inverse

  SwitchState* find_switch(const std::string& id);
  const SwitchState* find_switch(const std::string& id) const;
};

// Node / link / address naming used by the built-in topology.
std::string client_node_id(std::size_t idx);   // "c1", "c2", ...
std::string server_node_id(std::size_t idx);   // "s1", ...
std::string client_link_id(std::size_t idx);   // "cl1", ...
std::string server_link_id(std::size_t idx);   // "sl1", ...
Addr client_address(std::size_t idx);          // 10.0.1.<idx+1>
Addr server_address(std::size_t idx);          // 10.0.2.<idx+1>

// Edge switches of the built-in triangle: clients attach to kIngressSwitch,
// servers to kEgressSwitch, and kRelaySwitch only relays between them.
inline constexpr const char* kIngressSwitch = "sw1";
inline constexpr const char* kRelaySwitch = "sw2";
inline constexpr const char* kEgressSwitch = "sw3";

// Builds the triangle fabric: clients on sw1, servers on sw3, core links
// l1 (sw1-sw2), l2 (sw2-sw3), l3 (sw1-sw3), plus an out-of-band
// controller node. Port numbering follows link insertion order.
Fabric build_fabric(const TopologyConfig& cfg);

}  // namespace lbsim
