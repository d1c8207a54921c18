#include "lbsim/flow_table.hpp"

#include <algorithm>

namespace lbsim {

namespace {

const char* action_kind_name(Action::Kind k) {
  switch (k) {
    case Action::Kind::kForward:
      return "forward";
    case Action::Kind::kRewriteDst:
      return "rewrite_dst";
    case Action::Kind::kRewriteSrc:
      return "rewrite_src";
    case Action::Kind::kDrop:
      return "drop";
    case Action::Kind::kToController:
      return "to_controller";
  }
  return "drop";
}

nlohmann::json match_to_json(const MatchKey& m) {
  nlohmann::json j;
  j["src_addr"] = m.src_addr ? format_addr(*m.src_addr) : "*";
  j["dst_addr"] = m.dst_addr ? format_addr(*m.dst_addr) : "*";
  j["src_port"] = m.src_port ? std::to_string(*m.src_port) : "*";
  j["dst_port"] = m.dst_port ? std::to_string(*m.dst_port) : "*";
  j["protocol"] = protocol_name(m.protocol);
  return j;
}

}  // namespace

FlowEntry* FlowTable::lookup(const Packet& pkt, SimTime now) {
  FlowEntry* best = nullptr;
  for (auto& e : entries_) {
    if (!e.match.matches(pkt)) continue;
    if (best == nullptr || e.priority > best->priority ||
        (e.priority == best->priority && e.install_seq > best->install_seq)) {
      best = &e;
    }
  }
  if (best != nullptr) {
    best->packets += 1;
    best->bytes += pkt.size;
    best->last_hit = now;
  }
  return best;
}

void FlowTable::install(FlowEntry entry, SimTime now) {
  entry.installed_at = now;
  entry.last_hit = now;
  entry.install_seq = ++install_counter_;
  for (auto& e : entries_) {
    if (e.match == entry.match && e.priority == entry.priority) {
      e = std::move(entry);
      return;
    }
  }
  entries_.push_back(std::move(entry));
}

bool FlowTable::remove(const MatchKey& match, int priority) {
  const auto before = entries_.size();
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                [&](const FlowEntry& e) {
                                  return e.priority == priority &&
                                         e.match == match;
                                }),
                 entries_.end());
  return entries_.size() != before;
}

std::vector<FlowEntry> FlowTable::expire_idle(SimTime now) {
  std::vector<FlowEntry> expired;
  std::vector<FlowEntry> kept;
  kept.reserve(entries_.size());
  for (auto& e : entries_) {
    if (e.idle_timeout > 0 && now - e.last_hit > e.idle_timeout) {
      expired.push_back(std::move(e));
    } else {
      kept.push_back(std::move(e));
    }
  }
  entries_ = std::move(kept);
  return expired;
}

nlohmann::json FlowTable::dump(const std::string& switch_id) const {
  nlohmann::json j;
  j["switch_id"] = switch_id;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json je;
    je["match"] = match_to_json(e.match);
    je["priority"] = e.priority;
    je["actions"] = nlohmann::json::array();
    for (const auto& a : e.actions) {
      nlohmann::json ja;
      ja["kind"] = action_kind_name(a.kind);
      if (a.kind == Action::Kind::kForward) ja["port"] = a.port;
      if (a.kind == Action::Kind::kRewriteDst ||
          a.kind == Action::Kind::kRewriteSrc) {
        ja["addr"] = format_addr(a.addr);
      }
      je["actions"].push_back(std::move(ja));
    }
    je["packets"] = e.packets;
    je["bytes"] = e.bytes;
    j["entries"].push_back(std::move(je));
  }
  return j;
}

}  // namespace lbsim
