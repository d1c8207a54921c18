#include "lbsim/fabric.hpp"

#include <stdexcept>

namespace lbsim {

SwitchState* Fabric::find_switch(const std::string& id) {
  for (auto& sw : switches)
    if (sw.id == id) return &sw;
  return nullptr;
}

const SwitchState* Fabric::find_switch(const std::string& id) const {
  for (const auto& sw : switches)
    if (sw.id == id) return &sw;
  return nullptr;
}

std::string client_node_id(std::size_t idx) {
  return "c" + std::to_string(idx + 1);
}

std::string server_node_id(std::size_t idx) {
  return "s" + std::to_string(idx + 1);
}

std::string client_link_id(std::size_t idx) {
  return "cl" + std::to_string(idx + 1);
}

std::string server_link_id(std::size_t idx) {
  return "sl" + std::to_string(idx + 1);
}

Addr client_address(std::size_t idx) {
  return (10u << 24) | (0u << 16) | (1u << 8) | static_cast<Addr>(idx + 1);
}

Addr server_address(std::size_t idx) {
  return (10u << 24) | (0u << 16) | (2u << 8) | static_cast<Addr>(idx + 1);
}

Fabric build_fabric(const TopologyConfig& cfg) {
  if (cfg.clients == 0 || cfg.clients > 200)
    throw std::invalid_argument("fabric: client count out of range");
  if (cfg.servers == 0 || cfg.servers > 200)
    throw std::invalid_argument("fabric: server count out of range");

  Fabric f;
  const SimTime prop = millis_to_ns(cfg.propagation_ms);

  f.topo.add_node(kIngressSwitch, NodeKind::kSwitch);
  f.topo.add_node(kRelaySwitch, NodeKind::kSwitch);
  f.topo.add_node(kEgressSwitch, NodeKind::kSwitch);
  f.topo.add_node("ctl", NodeKind::kController);

  for (std::size_t i = 0; i < cfg.clients; ++i) {
    const std::string node = client_node_id(i);
    f.topo.add_node(node, NodeKind::kHost);
    f.topo.add_link(client_link_id(i), node, kIngressSwitch,
                    cfg.access_capacity_Bps, prop);
    f.host_addr[node] = client_address(i);
  }

  f.topo.add_link("l1", kIngressSwitch, kRelaySwitch, cfg.core_capacity_Bps,
                  prop);
  f.topo.add_link("l2", kRelaySwitch, kEgressSwitch, cfg.core_capacity_Bps,
                  prop);
  f.topo.add_link("l3", kIngressSwitch, kEgressSwitch, cfg.core_capacity_Bps,
                  prop);

  for (std::size_t i = 0; i < cfg.servers; ++i) {
    const std::string node = server_node_id(i);
    f.topo.add_node(node, NodeKind::kServer);
    f.topo.add_link(server_link_id(i), kEgressSwitch, node,
                    cfg.access_capacity_Bps, prop);
    f.host_addr[node] = server_address(i);
  }

  for (const auto& [node, addr] : f.host_addr) f.addr_host[addr] = node;

  for (const auto& node : f.topo.nodes()) {
    if (node.kind != NodeKind::kSwitch) continue;
    SwitchState sw;
    sw.id = node.id;
    for (const Link* l : f.topo.incident(node.id)) {
      sw.link_port[l->id] = static_cast<int>(sw.port_links.size());
      sw.port_links.push_back(l->id);
    }
    sw.tx_bytes.assign(sw.port_links.size(), 0);
    sw.rx_bytes.assign(sw.port_links.size(), 0);
    f.switches.push_back(std::move(sw));
  }
  return f;
}

}  // namespace lbsim
