#include "lbsim/controller.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

namespace lbsim {

namespace {

constexpr int kSessionRulePriority = 10;
constexpr int kDropRulePriority = 20;
constexpr double kDropRuleTimeoutS = 1.0;

nlohmann::ordered_json match_fields(const MatchKey& m) {
  nlohmann::ordered_json j;
  if (m.src_addr) j["src"] = format_addr(*m.src_addr);
  if (m.dst_addr) j["dst"] = format_addr(*m.dst_addr);
  if (m.src_port) j["sport"] = *m.src_port;
  if (m.dst_port) j["dport"] = *m.dst_port;
  j["proto"] = protocol_name(m.protocol);
  return j;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// One switch traversal along a host-to-host link path: which link the
// packet enters from and which it must leave by.
struct SwitchHop {
  std::string switch_id;
  std::string in_link;
  std::string out_link;
};

std::vector<SwitchHop> switch_hops(const Topology& topo,
                                   const std::string& first_node,
                                   const std::vector<std::string>& links) {
  std::vector<SwitchHop> hops;
  std::string node = first_node;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link* l = topo.find_link(links[i]);
    if (l == nullptr) throw std::logic_error("switch_hops: unknown link");
    node = topo.other_end(*l, node);
    if (i + 1 < links.size()) {
      hops.push_back({node, links[i], links[i + 1]});
    }
  }
  return hops;
}

std::vector<std::string> reversed(std::vector<std::string> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

Controller::Controller(Fabric& fabric, const VserverConfig& vcfg,
                       const RecoveryConfig& rcfg, std::uint64_t master_seed,
                       EventLog& log)
    : fabric_(fabric),
      vcfg_(vcfg),
      rcfg_(rcfg),
      log_(log),
      sched_rng_(master_seed, "scheduler") {
  auto vip = parse_addr(vcfg_.vip);
  if (!vip) throw std::invalid_argument("controller: malformed vip address");
  vip_ = *vip;

  for (const auto& node : fabric_.topo.nodes()) {
    if (node.kind != NodeKind::kServer) continue;
    sched::ServerState s;
    s.id = node.id;
    s.address = fabric_.host_addr.at(node.id);
    s.port = vcfg_.port;
    s.window_capacity = vcfg_.window_size;
    servers_.push_back(std::move(s));
  }
  if (servers_.empty())
    throw std::invalid_argument("controller: no backend servers in fabric");
  prev_port_total_.assign(servers_.size(), 0);
}

void Controller::log_record(SimTime now, std::uint64_t seq, const char* kind,
                            nlohmann::ordered_json fields) {
  if (!log_.active()) return;
  log_.append(now, seq, kind, std::move(fields));
}

std::size_t Controller::sum_active_sessions() const {
  std::size_t n = 0;
  for (const auto& s : servers_) n += s.active_sessions;
  return n;
}

// ---------------------------------------------------------------------------
// Protection planning
// ---------------------------------------------------------------------------

void Controller::provision_protection(SimTime now, std::uint64_t seq) {
  if (rcfg_.mode == RecoveryMode::kRestoration) return;  // paths per session

  PathPair pair;
  pair.working = least_utilized_path(fabric_.topo, kIngressSwitch,
                                     kEgressSwitch, vcfg_.monitor_interval_s);

  // Mask the working links and search again for a link-disjoint fallback.
  std::vector<std::pair<Link*, bool>> saved;
  for (const auto& id : pair.working) {
    Link* l = fabric_.topo.find_link(id);
    saved.emplace_back(l, l->alive);
    l->alive = false;
  }
  try {
    pair.recovery = least_utilized_path(
        fabric_.topo, kIngressSwitch, kEgressSwitch, vcfg_.monitor_interval_s);
  } catch (const std::runtime_error&) {
    for (auto& [l, alive] : saved) l->alive = alive;
    throw std::runtime_error(
        "protection: no link-disjoint recovery path between edge switches");
  }
  for (auto& [l, alive] : saved) l->alive = alive;

  protection_ = std::move(pair);
  protection_planned_ = true;
  log_record(now, seq, "protection_provisioned",
             {{"mode", recovery_mode_name(rcfg_.mode)},
              {"working", protection_.working},
              {"recovery", protection_.recovery}});
}

// ---------------------------------------------------------------------------
// Admission / scheduling
// ---------------------------------------------------------------------------

sched::ScheduleDecision Controller::pick_server(SimTime now,
                                                std::uint64_t seq) {
  sched::ScheduleDecision d;
  switch (vcfg_.scheduler) {
    case sched::SchedulerKind::kRoundRobin: {
      auto [dec, cursor] = sched::round_robin_next(servers_, rr_cursor_);
      rr_cursor_ = cursor;
      d = std::move(dec);
      break;
    }
    case sched::SchedulerKind::kGreedy:
      d = sched::greedy_next(servers_);
      break;
    case sched::SchedulerKind::kVariance: {
      static const stats::AnovaReport kColdReport{};
      static const std::vector<stats::PairComparison> kNoComparisons{};
      d = sched::variance_probability_next(
          servers_, stats_ready_ ? report_ : kColdReport,
          stats_ready_ ? comparisons_ : kNoComparisons, sched_rng_);
      break;
    }
  }
  nlohmann::ordered_json f{
      {"server", d.chosen},
      {"trigger",
       d.trigger == sched::Trigger::kRebalance ? "rebalance" : "default"}};
  if (!d.weights.empty() && log_.active()) {
    nlohmann::ordered_json w;
    for (const auto& e : d.weights) w[e.server_id] = e.probability;
    f["weights"] = std::move(w);
  }
  log_record(now, seq, "schedule_decision", std::move(f));
  return d;
}

std::vector<std::string> Controller::session_path_links(
    const std::string& client_node, const std::string& server_node) {
  if (rcfg_.mode == RecoveryMode::kRestoration) {
    auto full = least_utilized_path(fabric_.topo, client_node, server_node,
                                    vcfg_.monitor_interval_s);
    // Keep only the switch-to-switch segment; the access links are fixed.
    return {full.begin() + 1, full.end() - 1};
  }
  return protection_.working;
}

std::vector<std::pair<std::string, FlowEntry>> Controller::build_session_rules(
    const Session& s, const std::vector<std::string>& core_links,
    bool duplicate_on_recovery) {
  const std::string client_node = fabric_.addr_host.at(s.key.client_addr);
  const std::string& server_node = s.server_id;
  const std::string client_link =
      fabric_.topo.incident(client_node).front()->id;
  const std::string server_link =
      fabric_.topo.incident(server_node).front()->id;

  std::vector<std::vector<std::string>> paths;
  {
    std::vector<std::string> full;
    full.push_back(client_link);
    full.insert(full.end(), core_links.begin(), core_links.end());
    full.push_back(server_link);
    paths.push_back(std::move(full));
  }
  if (duplicate_on_recovery) {
    std::vector<std::string> alt;
    alt.push_back(client_link);
    alt.insert(alt.end(), protection_.recovery.begin(),
               protection_.recovery.end());
    alt.push_back(server_link);
    paths.push_back(std::move(alt));
  }

  // Merged per-switch entries; a switch shared by both paths gets one
  // entry whose action list fans out to both next hops.
  std::vector<std::pair<std::string, FlowEntry>> out;
  std::map<std::pair<std::string, bool>, std::size_t> index;

  auto add = [&](const std::string& sw_id, bool reverse, const MatchKey& m,
                 std::vector<Action> head, int out_port) {
    auto key = std::make_pair(sw_id, reverse);
    auto it = index.find(key);
    if (it == index.end()) {
      FlowEntry e;
      e.match = m;
      e.priority = kSessionRulePriority;
      e.actions = std::move(head);
      e.actions.push_back(Action::forward(out_port));
      e.idle_timeout = seconds_to_ns(vcfg_.session_timeout_s);
      index.emplace(key, out.size());
      out.emplace_back(sw_id, std::move(e));
    } else {
      auto& actions = out[it->second].second.actions;
      const bool already =
          std::any_of(actions.begin(), actions.end(), [&](const Action& a) {
            return a.kind == Action::Kind::kForward && a.port == out_port;
          });
      if (!already) actions.push_back(Action::forward(out_port));
    }
  };

  for (const auto& path : paths) {
    // Client-to-server direction: the first switch translates the virtual
    // address to the chosen backend; the rest forward on the real one.
    auto fwd = switch_hops(fabric_.topo, client_node, path);
    for (std::size_t h = 0; h < fwd.size(); ++h) {
      const SwitchState* sw = fabric_.find_switch(fwd[h].switch_id);
      MatchKey m;
      m.src_addr = s.key.client_addr;
      m.src_port = s.key.client_port;
      m.dst_port = s.key.vip_port;
      m.protocol = s.key.protocol;
      std::vector<Action> head;
      if (h == 0) {
        m.dst_addr = s.key.vip;
        head.push_back(Action::rewrite_dst(s.server_addr));
      } else {
        m.dst_addr = s.server_addr;
      }
      add(fwd[h].switch_id, false, m, std::move(head),
          sw->port_of(fwd[h].out_link));
    }

    // Server-to-client direction: the switch next to the backend restores
    // the virtual source address; the rest forward on it.
    auto rev = switch_hops(fabric_.topo, server_node, reversed(path));
    for (std::size_t h = 0; h < rev.size(); ++h) {
      const SwitchState* sw = fabric_.find_switch(rev[h].switch_id);
      MatchKey m;
      m.dst_addr = s.key.client_addr;
      m.dst_port = s.key.client_port;
      m.src_port = s.key.vip_port;
      m.protocol = s.key.protocol;
      std::vector<Action> head;
      if (h == 0) {
        m.src_addr = s.server_addr;
        head.push_back(Action::rewrite_src(s.key.vip));
      } else {
        m.src_addr = s.key.vip;
      }
      add(rev[h].switch_id, true, m, std::move(head),
          sw->port_of(rev[h].out_link));
    }
  }
  return out;
}

void Controller::install_now(
    const std::vector<std::pair<std::string, FlowEntry>>& rules, Session& s,
    SimTime now, std::uint64_t seq) {
  s.rules.clear();
  for (const auto& [sw_id, entry] : rules) {
    SwitchState* sw = fabric_.find_switch(sw_id);
    s.rules.push_back({sw_id, entry.match, entry.priority});
    sw->table.install(entry, now);
    if (log_.active()) {
      log_record(now, seq, "rule_install",
                 {{"switch", sw_id},
                  {"priority", entry.priority},
                  {"match", match_fields(entry.match)}});
    }
  }
}

PacketInResult Controller::handle_packet_in(const Packet& pkt,
                                            const std::string& switch_id,
                                            SimTime now, std::uint64_t seq) {
  ++packet_in_count_;
  log_record(now, seq, "packet_in",
             {{"switch", switch_id},
              {"src", format_addr(pkt.src_addr)},
              {"dst", format_addr(pkt.dst_addr)},
              {"sport", pkt.src_port},
              {"dport", pkt.dst_port}});

  // Only forward-direction traffic addressed to the virtual service is
  // admissible; anything else has no owner and is discarded.
  if (pkt.reverse || pkt.dst_addr != vip_ || pkt.dst_port != vcfg_.port ||
      fabric_.addr_host.find(pkt.src_addr) == fabric_.addr_host.end()) {
    log_record(now, seq, "packet_in_rejected", {{"reason", "not_admissible"}});
    return {false};
  }

  SessionKey key{pkt.src_addr, pkt.src_port, pkt.dst_addr, pkt.dst_port,
                 pkt.protocol};
  if (sessions_.find(key) != sessions_.end()) {
    // A live session missing its rules means recovery programming is in
    // flight; the packet is a casualty of the outage window.
    log_record(now, seq, "packet_in_rejected", {{"reason", "in_recovery"}});
    return {false};
  }

  sched::ScheduleDecision decision;
  try {
    decision = pick_server(now, seq);
  } catch (const std::runtime_error&) {
    // No backend alive: park a short-lived drop rule so the flow's
    // remaining packets do not storm the controller.
    FlowEntry e;
    e.match.src_addr = pkt.src_addr;
    e.match.src_port = pkt.src_port;
    e.match.dst_addr = pkt.dst_addr;
    e.match.dst_port = pkt.dst_port;
    e.match.protocol = pkt.protocol;
    e.priority = kDropRulePriority;
    e.actions = {Action::drop()};
    e.idle_timeout = seconds_to_ns(kDropRuleTimeoutS);
    fabric_.find_switch(switch_id)->table.install(e, now);
    log_record(now, seq, "rule_install",
               {{"switch", switch_id},
                {"priority", e.priority},
                {"match", match_fields(e.match)},
                {"action", "drop"}});
    return {true};
  }

  auto* member = &*std::find_if(
      servers_.begin(), servers_.end(),
      [&](const sched::ServerState& s) { return s.id == decision.chosen; });
  ++member->active_sessions;

  Session s;
  s.key = key;
  s.flow_id = pkt.flow_id;
  s.server_id = member->id;
  s.server_addr = member->address;
  s.server_port = member->port;
  s.created = now;
  s.last_active = now;

  const std::string client_node = fabric_.addr_host.at(pkt.src_addr);
  s.core_links = session_path_links(client_node, s.server_id);
  log_record(now, seq, "path_computed",
             {{"client", client_node},
              {"server", s.server_id},
              {"links", s.core_links}});

  auto rules = build_session_rules(s, s.core_links,
                                   rcfg_.mode == RecoveryMode::kDedicated);
  install_now(rules, s, now, seq);

  ++sessions_created_;
  log_record(now, seq, "session_create",
             {{"client", client_node},
              {"client_port", s.key.client_port},
              {"server", s.server_id},
              {"flow", s.flow_id}});
  sessions_.emplace(key, std::move(s));
  return {true};
}

// ---------------------------------------------------------------------------
// Failure handling
// ---------------------------------------------------------------------------

FailureResponse Controller::handle_link_failure(const std::string& link_id,
                                                SimTime t_fail,
                                                SimTime t_detect,
                                                std::uint64_t seq) {
  FailureResponse resp;
  const SimTime compute_ns = millis_to_ns(rcfg_.compute_delay_ms);
  log_record(t_detect, seq, "failure_detected",
             {{"link", link_id}, {"mode", recovery_mode_name(rcfg_.mode)}});

  switch (rcfg_.mode) {
    case RecoveryMode::kDedicated: {
      // Both copies are already flowing; losing either path changes
      // nothing for delivered traffic and needs no reprogramming.
      const bool on_working = contains(protection_.working, link_id);
      const bool on_recovery = contains(protection_.recovery, link_id);
      log_record(t_detect, seq, "failure_handled",
                 {{"action", "none"},
                  {"on_working", on_working},
                  {"on_recovery", on_recovery}});
      if (on_working) {
        resp.outage = OutageRecord{link_id, ns_to_seconds(t_fail), 0.0,
                                   recovery_mode_name(rcfg_.mode),
                                   protection_.recovery.size() + 1};
      }
      return resp;
    }

    case RecoveryMode::kOnTheFly: {
      if (!contains(protection_.working, link_id)) {
        log_record(t_detect, seq, "failure_handled", {{"action", "none"}});
        return resp;
      }
      // Pre-planned fallback: every session swings to the recovery path.
      bool fallback_ok = !protection_.recovery.empty();
      for (const auto& id : protection_.recovery) {
        const Link* l = fabric_.topo.find_link(id);
        if (l == nullptr || !l->alive) fallback_ok = false;
      }
      if (!fallback_ok) {
        std::vector<SessionKey> doomed;
        for (auto& [key, s] : sessions_) {
          if (contains(s.core_links, link_id)) doomed.push_back(key);
        }
        for (const auto& key : doomed) {
          auto it = sessions_.find(key);
          resp.lost_flows.push_back(it->second.flow_id);
          destroy_session(it->second, "unrecoverable", t_detect, seq);
          sessions_.erase(it);
        }
        log_record(t_detect, seq, "failure_handled",
                   {{"action", "sessions_lost"},
                    {"sessions", resp.lost_flows.size()}});
        return resp;
      }

      const std::vector<std::string> new_core = protection_.recovery;
      auto rr = reprogram_sessions(
          [&](const Session& s) { return contains(s.core_links, link_id); },
          [&](const Session&) { return new_core; }, t_detect, seq);
      resp.batches = std::move(rr.batches);
      if (rr.sessions > 0) {
        resp.outage = OutageRecord{link_id, ns_to_seconds(t_fail),
                                   ns_to_seconds(rr.last_install_t - t_fail),
                                   recovery_mode_name(rcfg_.mode),
                                   rr.install_switches};
      }
      protection_.working = new_core;
      protection_.recovery.clear();
      log_record(t_detect, seq, "failure_handled",
                 {{"action", "switched_to_recovery"},
                  {"sessions", rr.sessions},
                  {"path", protection_.working}});
      return resp;
    }

    case RecoveryMode::kRestoration: {
      // Recompute a fresh least-loaded path for every affected session.
      std::map<std::pair<std::string, std::string>,
               std::optional<std::vector<std::string>>>
          cache;
      auto replacement =
          [&](const Session& s) -> std::optional<std::vector<std::string>> {
        const std::string client_node =
            fabric_.addr_host.at(s.key.client_addr);
        auto ck = std::make_pair(client_node, s.server_id);
        auto it = cache.find(ck);
        if (it != cache.end()) return it->second;
        std::optional<std::vector<std::string>> core;
        try {
          auto full = least_utilized_path(fabric_.topo, client_node,
                                          s.server_id,
                                          vcfg_.monitor_interval_s);
          core = std::vector<std::string>{full.begin() + 1, full.end() - 1};
        } catch (const std::runtime_error&) {
          core = std::nullopt;
        }
        cache.emplace(ck, core);
        return core;
      };

      auto touches = [&](const Session& s) {
        const std::string client_link =
            fabric_.topo.incident(fabric_.addr_host.at(s.key.client_addr))
                .front()
                ->id;
        const std::string server_link =
            fabric_.topo.incident(s.server_id).front()->id;
        return contains(s.core_links, link_id) || client_link == link_id ||
               server_link == link_id;
      };

      // Sessions without a usable replacement are torn down as lost.
      std::vector<SessionKey> doomed;
      for (auto& [key, s] : sessions_) {
        if (touches(s) && !replacement(s).has_value()) doomed.push_back(key);
      }
      for (const auto& key : doomed) {
        auto it = sessions_.find(key);
        resp.lost_flows.push_back(it->second.flow_id);
        destroy_session(it->second, "unrecoverable", t_detect, seq);
        sessions_.erase(it);
      }

      auto rr = reprogram_sessions(
          touches, [&](const Session& s) { return *replacement(s); },
          t_detect + compute_ns, seq);
      resp.batches = std::move(rr.batches);
      if (rr.sessions > 0) {
        resp.outage = OutageRecord{link_id, ns_to_seconds(t_fail),
                                   ns_to_seconds(rr.last_install_t - t_fail),
                                   recovery_mode_name(rcfg_.mode),
                                   rr.install_switches};
      }
      log_record(t_detect, seq, "failure_handled",
                 {{"action", rr.sessions > 0 ? "rerouted" : "none"},
                  {"sessions", rr.sessions},
                  {"lost", resp.lost_flows.size()}});
      return resp;
    }
  }
  return resp;
}

Controller::ReprogramResult Controller::reprogram_sessions(
    const std::function<bool(const Session&)>& affected,
    const std::function<std::vector<std::string>(const Session&)>& new_core,
    SimTime t_base, std::uint64_t seq) {
  (void)seq;
  ReprogramResult result;
  const SimTime install_ns = millis_to_ns(rcfg_.install_latency_ms);

  // Per-switch mutation lists, and a deterministic switch ordering: the
  // first rebuilt path's switches from ingress to egress, then any other
  // touched switch by id. Batches land one install latency apart in that
  // order; switches that only shed stale rules share the final slot.
  std::map<std::string, std::vector<RuleOp>> removals;
  std::map<std::string, std::vector<RuleOp>> installs;
  std::vector<std::string> order;

  auto note_order = [&](const std::vector<std::string>& core) {
    if (!order.empty()) return;
    std::string node = kIngressSwitch;
    order.push_back(node);
    for (const auto& id : core) {
      node = fabric_.topo.other_end(*fabric_.topo.find_link(id), node);
      order.push_back(node);
    }
  };

  for (auto& [key, s] : sessions_) {
    if (!affected(s)) continue;
    ++result.sessions;

    const auto core = new_core(s);
    note_order(core);

    std::vector<std::string> old_switches;
    for (const auto& ref : s.rules) {
      if (!contains(old_switches, ref.switch_id))
        old_switches.push_back(ref.switch_id);
    }

    auto rules = build_session_rules(s, core, false);
    std::vector<RuleRef> new_refs;
    std::vector<std::string> new_switches;
    for (auto& [sw_id, entry] : rules) {
      new_refs.push_back({sw_id, entry.match, entry.priority});
      if (!contains(new_switches, sw_id)) new_switches.push_back(sw_id);
      RuleOp op;
      op.install = true;
      op.entry = std::move(entry);
      installs[sw_id].push_back(std::move(op));
    }
    // Installing over an identical match replaces in place, so explicit
    // removals are needed only on switches the session no longer uses.
    for (const auto& ref : s.rules) {
      if (contains(new_switches, ref.switch_id)) continue;
      RuleOp op;
      op.install = false;
      op.entry.match = ref.match;
      op.entry.priority = ref.priority;
      removals[ref.switch_id].push_back(std::move(op));
    }
    s.rules = std::move(new_refs);
    s.core_links = core;
  }

  for (const auto& [sw_id, ops] : installs) {
    (void)ops;
    if (!contains(order, sw_id)) order.push_back(sw_id);
  }
  for (const auto& [sw_id, ops] : removals) {
    (void)ops;
    if (!contains(order, sw_id) && installs.find(sw_id) == installs.end())
      order.push_back(sw_id);
  }

  // Assign batch times: k-th switch with installs lands at t_base + k
  // install latencies; removal-only switches ride with the last batch.
  SimTime t = t_base;
  for (const auto& sw_id : order) {
    auto ins = installs.find(sw_id);
    if (ins == installs.end()) continue;
    t += install_ns;
    ++result.install_switches;
    TimedOps batch;
    batch.t = t;
    batch.switch_id = sw_id;
    batch.reason = "recovery";
    auto rem = removals.find(sw_id);
    if (rem != removals.end()) {
      batch.ops = std::move(rem->second);
      removals.erase(rem);
    }
    for (auto& op : ins->second) batch.ops.push_back(std::move(op));
    result.batches.push_back(std::move(batch));
  }
  result.last_install_t = t;
  for (auto& [sw_id, ops] : removals) {
    TimedOps batch;
    batch.t = t;
    batch.switch_id = sw_id;
    batch.reason = "recovery_cleanup";
    batch.ops = std::move(ops);
    result.batches.push_back(std::move(batch));
  }
  return result;
}

void Controller::handle_link_repair(const std::string& link_id, SimTime now,
                                    std::uint64_t seq) {
  // Deliberately no re-optimization: traffic stays where recovery or the
  // original plan put it.
  log_record(now, seq, "repair_noted", {{"link", link_id}});
}

// ---------------------------------------------------------------------------
// Monitoring / reaping
// ---------------------------------------------------------------------------

stats::SampleGroups Controller::monitor_tick(SimTime now, std::uint64_t seq) {
  (void)now;
  (void)seq;
  SwitchState* egress = fabric_.find_switch(kEgressSwitch);
  for (std::size_t k = 0; k < servers_.size(); ++k) {
    const int p = egress->port_of(server_link_id(k));
    const std::uint64_t total = egress->tx_bytes[p] + egress->rx_bytes[p];
    const double delta = static_cast<double>(total - prev_port_total_[k]);
    prev_port_total_[k] = total;
    servers_[k].push_load_sample(delta);
  }
  fabric_.topo.roll_windows();

  stats::SampleGroups groups;
  groups.groups.reserve(servers_.size());
  for (const auto& s : servers_) {
    groups.groups.push_back(
        {s.id, std::vector<double>(s.load_window.begin(),
                                   s.load_window.end())});
  }
  if (sched::windows_ready(servers_)) {
    report_ = stats::f_test(groups, vcfg_.f_alpha);
    comparisons_ = stats::multiple_comparisons(groups, vcfg_.f_alpha);
    stats_ready_ = true;
  } else {
    stats_ready_ = false;
  }
  return groups;
}

std::vector<Session> Controller::reap_sessions(SimTime now,
                                               std::uint64_t seq) {
  // Refresh activity from the data plane before judging idleness: a rule
  // counter advancing is the session being used.
  for (auto& [key, s] : sessions_) {
    std::uint64_t bytes_now = 0;
    SimTime hit = s.last_active;
    for (const auto& ref : s.rules) {
      const SwitchState* sw = fabric_.find_switch(ref.switch_id);
      for (const auto& e : sw->table.entries()) {
        if (e.priority == ref.priority && e.match == ref.match) {
          hit = std::max(hit, e.last_hit);
          bytes_now += e.bytes;
        }
      }
    }
    s.last_active = hit;
    s.bytes_transferred = std::max(s.bytes_transferred, bytes_now);
  }

  for (auto& sw : fabric_.switches) {
    auto expired = sw.table.expire_idle(now);
    if (log_.active()) {
      for (const auto& e : expired) {
        log_record(now, seq, "rule_expire",
                   {{"switch", sw.id},
                    {"priority", e.priority},
                    {"match", match_fields(e.match)}});
      }
    }
  }

  const SimTime timeout_ns = seconds_to_ns(vcfg_.session_timeout_s);
  std::vector<Session> dead;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.last_active > timeout_ns) {
      destroy_session(it->second, "idle", now, seq);
      dead.push_back(std::move(it->second));
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  return dead;
}

void Controller::destroy_session(Session& s, const char* reason, SimTime now,
                                 std::uint64_t seq) {
  for (const auto& ref : s.rules) {
    SwitchState* sw = fabric_.find_switch(ref.switch_id);
    const bool removed = sw->table.remove(ref.match, ref.priority);
    if (log_.active() && removed) {
      log_record(now, seq, "rule_remove",
                 {{"switch", ref.switch_id},
                  {"priority", ref.priority},
                  {"match", match_fields(ref.match)}});
    }
  }
  auto member = std::find_if(
      servers_.begin(), servers_.end(),
      [&](const sched::ServerState& st) { return st.id == s.server_id; });
  if (member != servers_.end()) *member = sched::record_completion(*member);
  ++sessions_destroyed_;
  log_record(now, seq, "session_destroy",
             {{"client", format_addr(s.key.client_addr)},
              {"client_port", s.key.client_port},
              {"server", s.server_id},
              {"flow", s.flow_id},
              {"reason", reason}});
}

}  // namespace lbsim
