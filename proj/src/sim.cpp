#include "lbsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lbsim {

namespace {

// Flows that could have finished this long before the end of the run but
// did not are counted as lost; anything younger is still in flight.
constexpr SimTime kTailGrace = kNsPerSecond;

const char* direction_name(bool reverse) { return reverse ? "rsp" : "req"; }

}  // namespace

// ---------------------------------------------------------------------------
// Report accessors
// ---------------------------------------------------------------------------

double RunReport::mean_latency_s() const {
  if (latencies_s.empty()) return 0.0;
  double s = 0.0;
  for (double v : latencies_s) s += v;
  return s / static_cast<double>(latencies_s.size());
}

double RunReport::p99_latency_s() const {
  if (latencies_s.empty()) return 0.0;
  std::vector<double> sorted = latencies_s;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(n)));
  if (idx == 0) idx = 1;
  return sorted[idx - 1];
}

double RunReport::time_avg_f() const {
  if (f_series.empty()) return 0.0;
  double s = 0.0;
  for (double v : f_series) s += v;
  return s / static_cast<double>(f_series.size());
}

std::vector<double> RunReport::per_server_bytes() const {
  std::vector<std::string> order;
  std::vector<double> sums;
  for (const auto& row : series) {
    auto it = std::find(order.begin(), order.end(), row.server_id);
    std::size_t k;
    if (it == order.end()) {
      k = order.size();
      order.push_back(row.server_id);
      sums.push_back(0.0);
    } else {
      k = static_cast<std::size_t>(it - order.begin());
    }
    sums[k] += row.window_bytes;
  }
  return sums;
}

double RunReport::peak_trough_ratio() const {
  const auto sums = per_server_bytes();
  if (sums.empty()) return 1.0;
  const double peak = *std::max_element(sums.begin(), sums.end());
  const double trough = *std::min_element(sums.begin(), sums.end());
  if (trough <= 0.0) {
    return peak > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return peak / trough;
}

// ---------------------------------------------------------------------------
// Construction / run loop
// ---------------------------------------------------------------------------

Simulation::Simulation(const ScenarioConfig& cfg,
                       std::optional<sched::SchedulerKind> scheduler,
                       std::uint64_t seed, RunOptions opts)
    : cfg_(cfg),
      scheduler_(scheduler.value_or(cfg.vserver.scheduler)),
      seed_(seed),
      opts_(opts),
      fabric_(build_fabric(cfg.topology)),
      arrival_rng_(seed, "arrivals"),
      service_rng_(seed, "service") {
  {
    const auto errors = validate_config(cfg_);
    if (!errors.empty())
      throw std::invalid_argument("simulation: invalid config: " +
                                  errors.front());
  }
  if (opts_.hash_log) log_.enable_hash();
  if (opts_.keep_log) log_.enable_memory();
  if (!opts_.log_path.empty()) log_.enable_file(opts_.log_path);

  VserverConfig vcfg = cfg_.vserver;
  vcfg.scheduler = scheduler_;
  controller_ =
      std::make_unique<Controller>(fabric_, vcfg, cfg_.recovery, seed_, log_);

  duration_ns_ = seconds_to_ns(cfg_.duration_s);
  vip_ = *parse_addr(cfg_.vserver.vip);
  report_.scheduler = sched::scheduler_kind_name(scheduler_);
  report_.seed = seed_;
  report_.arrival_hash = kFnvOffset;
}

void Simulation::schedule(SimTime t, EventPayload payload) {
  queue_.push(Event{t, next_seq_++, std::move(payload)});
}

void Simulation::log_event(const Event& ev, const char* kind,
                           nlohmann::ordered_json fields) {
  if (!log_.active()) return;
  log_.append(ev.t, ev.seq, kind, std::move(fields));
}

RunReport Simulation::run() {
  controller_->provision_protection(0, next_seq_++);

  for (const auto& fe : cfg_.failures) {
    if (fe.fail)
      schedule(seconds_to_ns(fe.t_s), LinkFail{fe.link_id, false});
    else
      schedule(seconds_to_ns(fe.t_s), LinkRepair{fe.link_id});
  }

  // First arrival: the chain re-arms itself on every pop.
  {
    const double gap_s =
        cfg_.workload.arrival == ArrivalProcess::kPoisson
            ? arrival_rng_.exponential(1.0 / cfg_.workload.rate_per_s)
            : 1.0 / cfg_.workload.rate_per_s;
    const SimTime t0 = seconds_to_ns(gap_s);
    if (t0 <= duration_ns_)
      schedule(t0, RequestArrival{next_flow_id_++});
  }

  const SimTime tick = seconds_to_ns(cfg_.vserver.monitor_interval_s);
  if (tick > 0 && tick <= duration_ns_) schedule(tick, MonitorTick{});

  while (!queue_.empty()) {
    const Event& top = queue_.top();
    if (top.t > duration_ns_) break;
    Event ev = top;
    queue_.pop();
    current_seq_ = ev.seq;
    handle(ev);
  }

  finalize(report_);
  return report_;
}

void Simulation::handle(const Event& ev) {
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, RequestArrival>) {
          on_arrival(ev, payload);
        } else if constexpr (std::is_same_v<T, PacketHop>) {
          on_packet(ev, payload);
        } else if constexpr (std::is_same_v<T, ServiceComplete>) {
          on_service_complete(ev, payload);
        } else if constexpr (std::is_same_v<T, LinkFail>) {
          on_link_fail(ev, payload);
        } else if constexpr (std::is_same_v<T, LinkRepair>) {
          on_link_repair(ev, payload);
        } else if constexpr (std::is_same_v<T, MonitorTick>) {
          on_monitor(ev);
        } else if constexpr (std::is_same_v<T, ReapTick>) {
          on_reap(ev);
        } else if constexpr (std::is_same_v<T, ApplyOps>) {
          on_apply_ops(ev, payload);
        }
      },
      ev.payload);
}

SimTime Simulation::transit_time(const Link& l, std::uint64_t bytes) const {
  const double serialization_ns =
      static_cast<double>(bytes) * 1e9 / l.capacity_Bps;
  return static_cast<SimTime>(std::llround(serialization_ns)) + l.propagation;
}

// ---------------------------------------------------------------------------
// Workload
// ---------------------------------------------------------------------------

void Simulation::on_arrival(const Event& ev, const RequestArrival& a) {
  const auto& w = cfg_.workload;

  FlowRuntime fr;
  fr.id = a.flow_id;
  fr.client_idx = static_cast<std::size_t>(a.flow_id % cfg_.topology.clients);
  fr.client_addr = client_address(fr.client_idx);
  fr.client_port =
      static_cast<std::uint16_t>(40000 + (a.flow_id % 20000));
  fr.t_arrival = ev.t;

  double service_s = w.service_mean_s;
  if (w.service == ServiceProcess::kPareto) {
    const double scale = w.service_mean_s * (w.pareto_shape - 1.0) /
                         w.pareto_shape;
    service_s = service_rng_.pareto(w.pareto_shape, scale);
  }
  fr.service = seconds_to_ns(service_s);

  double size_d = w.size == SizePolicy::kServiceProportional
                      ? service_s * w.stream_rate_Bps
                      : w.fixed_size_B;
  fr.size_B = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(size_d)));

  const SimTime chunk_ns = millis_to_ns(w.chunk_interval_ms);
  std::uint64_t n = 1;
  if (chunk_ns > 0) {
    n = static_cast<std::uint64_t>((fr.service + chunk_ns - 1) / chunk_ns);
    if (n == 0) n = 1;
  }
  n = std::min<std::uint64_t>(n, fr.size_B);
  fr.n_chunks = n;
  fr.chunk_B = fr.size_B / n;
  fr.last_chunk_B = fr.size_B - fr.chunk_B * (n - 1);
  fr.last_emit = ev.t + static_cast<SimTime>(n - 1) * chunk_ns;

  ++report_.generated;

  // The workload fingerprint covers exactly the draws every scheduler
  // must see identically: arrival instant, placement, service, size.
  {
    char buf[160];
    const int len = std::snprintf(
        buf, sizeof buf, "a|%llu|%lld|%zu|%lld|%llu",
        static_cast<unsigned long long>(fr.id),
        static_cast<long long>(fr.t_arrival), fr.client_idx,
        static_cast<long long>(fr.service),
        static_cast<unsigned long long>(fr.size_B));
    report_.arrival_hash = fnv1a(
        std::string_view(buf, static_cast<std::size_t>(len)),
        report_.arrival_hash);
  }

  log_event(ev, "request_arrival",
            {{"flow", fr.id},
             {"client", client_node_id(fr.client_idx)},
             {"client_port", fr.client_port},
             {"service_ns", fr.service},
             {"size_B", fr.size_B},
             {"chunks", fr.n_chunks}});

  // Pre-schedule every request chunk's first hop; link accounting and
  // liveness checks happen when each hop pops.
  const std::string client_node = client_node_id(fr.client_idx);
  const Link* cl = fabric_.topo.find_link(client_link_id(fr.client_idx));
  const std::string& far = fabric_.topo.other_end(*cl, client_node);
  for (std::uint64_t i = 0; i < n; ++i) {
    Packet p;
    p.src_addr = fr.client_addr;
    p.dst_addr = vip_;
    p.src_port = fr.client_port;
    p.dst_port = cfg_.vserver.port;
    p.protocol = Protocol::kTcp;
    p.size = (i + 1 == n) ? fr.last_chunk_B : fr.chunk_B;
    p.flow_id = fr.id;
    p.seq_in_flow = i;
    p.reverse = false;
    const SimTime t_emit = ev.t + static_cast<SimTime>(i) * chunk_ns;
    p.timestamp = t_emit;
    schedule(t_emit + transit_time(*cl, p.size), PacketHop{p, far, cl->id});
  }

  flows_.emplace(fr.id, fr);

  // Re-arm the arrival chain.
  const double gap_s = w.arrival == ArrivalProcess::kPoisson
                           ? arrival_rng_.exponential(1.0 / w.rate_per_s)
                           : 1.0 / w.rate_per_s;
  const SimTime t_next = ev.t + seconds_to_ns(gap_s);
  if (t_next <= duration_ns_) schedule(t_next, RequestArrival{next_flow_id_++});
}

// ---------------------------------------------------------------------------
// Packet pipeline
// ---------------------------------------------------------------------------

void Simulation::on_packet(const Event& ev, const PacketHop& hop) {
  ++report_.packet_events;
  Link* l = fabric_.topo.find_link(hop.via_link);

  if (!l->alive) {
    // In-flight on a dead link: the packet never arrives.
    ++report_.dropped_packets;
    if (log_.active()) {
      log_event(ev, "packet_hop",
                {{"flow", hop.pkt.flow_id},
                 {"seq_in_flow", hop.pkt.seq_in_flow},
                 {"dir", direction_name(hop.pkt.reverse)},
                 {"at", hop.at_node},
                 {"via", hop.via_link},
                 {"size", hop.pkt.size},
                 {"dropped", true}});
    }
    return;
  }

  record_transit(*l, hop.pkt.size);

  // Port counters: the sending switch's tx at the near end, the receiving
  // switch's rx at the far end.
  const std::string& near = fabric_.topo.other_end(*l, hop.at_node);
  if (SwitchState* nsw = fabric_.find_switch(near)) {
    nsw->tx_bytes[static_cast<std::size_t>(nsw->port_of(l->id))] +=
        hop.pkt.size;
  }

  if (log_.active()) {
    log_event(ev, "packet_hop",
              {{"flow", hop.pkt.flow_id},
               {"seq_in_flow", hop.pkt.seq_in_flow},
               {"dir", direction_name(hop.pkt.reverse)},
               {"src", format_addr(hop.pkt.src_addr)},
               {"dst", format_addr(hop.pkt.dst_addr)},
               {"at", hop.at_node},
               {"via", hop.via_link},
               {"size", hop.pkt.size}});
  }

  if (SwitchState* sw = fabric_.find_switch(hop.at_node)) {
    sw->rx_bytes[static_cast<std::size_t>(sw->port_of(l->id))] +=
        hop.pkt.size;
    deliver_at_switch(ev, *sw, hop.pkt, hop.via_link);
  } else {
    deliver_at_host(ev, hop.at_node, hop.pkt);
  }
}

void Simulation::deliver_at_switch(const Event& ev, SwitchState& sw,
                                   Packet pkt, const std::string& via_link) {
  (void)via_link;
  // 1+1 protection delivers two copies; the first past each switch wins
  // and the trailing one is absorbed here.
  if (cfg_.recovery.mode == RecoveryMode::kDedicated) {
    const std::uint64_t key =
        (pkt.flow_id << 1) | (pkt.reverse ? 1u : 0u);
    auto& next = sw.dedup_next_seq[key];
    if (pkt.seq_in_flow < next) {
      ++report_.duplicate_packets;
      return;
    }
    next = pkt.seq_in_flow + 1;
  }

  FlowEntry* entry = sw.table.lookup(pkt, ev.t);
  if (entry == nullptr) {
    auto fit = flows_.find(pkt.flow_id);
    const bool flow_lost = fit != flows_.end() && fit->second.lost;
    if (pkt.reverse || flow_lost) {
      ++report_.dropped_packets;
      return;
    }
    const auto verdict =
        controller_->handle_packet_in(pkt, sw.id, ev.t, ev.seq);
    if (verdict.forward) entry = sw.table.lookup(pkt, ev.t);
    if (entry == nullptr) {
      ++report_.dropped_packets;
      return;
    }
  }

  Packet cur = pkt;
  bool dropped = false;
  for (const auto& action : entry->actions) {
    switch (action.kind) {
      case Action::Kind::kRewriteDst:
        cur.dst_addr = action.addr;
        break;
      case Action::Kind::kRewriteSrc:
        cur.src_addr = action.addr;
        break;
      case Action::Kind::kForward:
        forward_from_switch(sw, cur, action.port, ev.t);
        break;
      case Action::Kind::kDrop:
        dropped = true;
        break;
      case Action::Kind::kToController:
        controller_->handle_packet_in(cur, sw.id, ev.t, ev.seq);
        break;
    }
  }
  if (dropped) ++report_.dropped_packets;
}

void Simulation::forward_from_switch(const SwitchState& sw, const Packet& pkt,
                                     int out_port, SimTime now) {
  if (out_port < 0 ||
      static_cast<std::size_t>(out_port) >= sw.port_links.size()) {
    ++report_.dropped_packets;
    return;
  }
  const Link* l = fabric_.topo.find_link(sw.port_links
                                             [static_cast<std::size_t>(
                                                 out_port)]);
  const std::string& far = fabric_.topo.other_end(*l, sw.id);
  schedule(now + transit_time(*l, pkt.size), PacketHop{pkt, far, l->id});
}

void Simulation::emit_from_host(const std::string& host, const Packet& pkt,
                                SimTime now) {
  const Link* l = fabric_.topo.incident(host).front();
  const std::string& far = fabric_.topo.other_end(*l, host);
  schedule(now + transit_time(*l, pkt.size), PacketHop{pkt, far, l->id});
}

void Simulation::deliver_at_host(const Event& ev, const std::string& node,
                                 Packet pkt) {
  const Node* n = fabric_.topo.find_node(node);
  const Addr my_addr = fabric_.host_addr.at(node);

  if (n->kind == NodeKind::kServer) {
    ++report_.delivered_server_packets;
    if (pkt.dst_addr != my_addr || pkt.reverse) {
      ++report_.misdelivered;
      return;
    }
    auto fit = flows_.find(pkt.flow_id);
    if (fit == flows_.end()) return;
    FlowRuntime& fr = fit->second;

    if (!fr.service_scheduled) {
      fr.service_scheduled = true;
      schedule(ev.t + fr.service, ServiceComplete{fr.id});
    }

    // Echo an equal-size response chunk toward the client.
    Packet rsp;
    rsp.src_addr = my_addr;
    rsp.dst_addr = pkt.src_addr;
    rsp.src_port = pkt.dst_port;
    rsp.dst_port = pkt.src_port;
    rsp.protocol = pkt.protocol;
    rsp.size = pkt.size;
    rsp.flow_id = pkt.flow_id;
    rsp.seq_in_flow = pkt.seq_in_flow;
    rsp.reverse = true;
    rsp.timestamp = ev.t;
    emit_from_host(node, rsp, ev.t);
    return;
  }

  // Client side. The virtual address must be the only service identity
  // ever visible here.
  ++report_.delivered_client_packets;
  auto owner = fabric_.addr_host.find(pkt.src_addr);
  if (owner != fabric_.addr_host.end()) {
    const Node* src_node = fabric_.topo.find_node(owner->second);
    if (src_node != nullptr && src_node->kind == NodeKind::kServer)
      ++report_.nat_violations;
  }
  if (pkt.dst_addr != my_addr) {
    ++report_.misdelivered;
    return;
  }

  auto fit = flows_.find(pkt.flow_id);
  if (fit == flows_.end()) return;
  FlowRuntime& fr = fit->second;
  if (!fr.completed && !fr.lost && pkt.reverse &&
      pkt.seq_in_flow + 1 == fr.n_chunks) {
    fr.completed = true;
    fr.t_completed = ev.t;
    report_.latencies_s.push_back(ns_to_seconds(ev.t - fr.t_arrival));
  }
}

// ---------------------------------------------------------------------------
// Timers, failures, controller plumbing
// ---------------------------------------------------------------------------

void Simulation::on_service_complete(const Event& ev,
                                     const ServiceComplete& sc) {
  log_event(ev, "service_complete", {{"flow", sc.flow_id}});
}

void Simulation::on_link_fail(const Event& ev, const LinkFail& lf) {
  if (!lf.notify) {
    Link* l = fabric_.topo.find_link(lf.link_id);
    if (l == nullptr) return;
    l->alive = false;
    log_event(ev, "link_fail", {{"link", lf.link_id}});
    schedule(ev.t + millis_to_ns(cfg_.recovery.detection_delay_ms),
             LinkFail{lf.link_id, true});
    return;
  }

  const SimTime t_fail =
      ev.t - millis_to_ns(cfg_.recovery.detection_delay_ms);
  auto resp =
      controller_->handle_link_failure(lf.link_id, t_fail, ev.t, ev.seq);
  for (auto& batch : resp.batches) {
    schedule(batch.t,
             ApplyOps{batch.switch_id, batch.reason, std::move(batch.ops)});
  }
  for (std::uint64_t id : resp.lost_flows) {
    auto it = flows_.find(id);
    if (it != flows_.end()) it->second.lost = true;
  }
  if (resp.outage) report_.outages.push_back(*resp.outage);
}

void Simulation::on_link_repair(const Event& ev, const LinkRepair& lr) {
  Link* l = fabric_.topo.find_link(lr.link_id);
  if (l == nullptr) return;
  l->alive = true;
  log_event(ev, "link_repair", {{"link", lr.link_id}});
  controller_->handle_link_repair(lr.link_id, ev.t, ev.seq);
}

void Simulation::on_monitor(const Event& ev) {
  auto groups = controller_->monitor_tick(ev.t, ev.seq);
  const double f = controller_->last_f_value();
  log_event(ev, "monitor_tick",
            {{"f_value", f}, {"ready", controller_->stats_ready()}});

  const double t_s = ns_to_seconds(ev.t);
  const auto& servers = controller_->servers();
  for (std::size_t k = 0; k < servers.size(); ++k) {
    SeriesRow row;
    row.t_s = t_s;
    row.server_id = servers[k].id;
    row.active_sessions = servers[k].active_sessions;
    row.window_bytes =
        groups.groups[k].samples.empty() ? 0.0 : groups.groups[k].samples.back();
    row.f_value = f;
    report_.series.push_back(std::move(row));
  }
  report_.f_series.push_back(f);

  schedule(ev.t, ReapTick{});
  const SimTime next = ev.t + seconds_to_ns(cfg_.vserver.monitor_interval_s);
  if (next <= duration_ns_) schedule(next, MonitorTick{});
}

void Simulation::on_reap(const Event& ev) {
  const auto dead = controller_->reap_sessions(ev.t, ev.seq);
  log_event(ev, "reap_tick",
            {{"destroyed", dead.size()},
             {"live", controller_->live_sessions()}});
  report_.reap_checks.push_back({ns_to_seconds(ev.t),
                                 controller_->live_sessions(),
                                 controller_->sum_active_sessions()});
}

void Simulation::on_apply_ops(const Event& ev, const ApplyOps& ops) {
  SwitchState* sw = fabric_.find_switch(ops.switch_id);
  if (sw == nullptr) return;
  for (const auto& op : ops.ops) {
    if (op.install) {
      sw->table.install(op.entry, ev.t);
      log_event(ev, "rule_install",
                {{"switch", ops.switch_id},
                 {"priority", op.entry.priority},
                 {"reason", ops.reason}});
    } else {
      sw->table.remove(op.entry.match, op.entry.priority);
      log_event(ev, "rule_remove",
                {{"switch", ops.switch_id},
                 {"priority", op.entry.priority},
                 {"reason", ops.reason}});
    }
  }
}

// ---------------------------------------------------------------------------
// End-of-run classification
// ---------------------------------------------------------------------------

void Simulation::finalize(RunReport& report) {
  for (const auto& [id, fr] : flows_) {
    if (fr.completed) {
      ++report.served;
    } else if (fr.lost) {
      ++report.lost;
    } else if (fr.last_emit + kTailGrace < duration_ns_) {
      // Every chunk had ample time to make the round trip; the exchange
      // will never finish now.
      ++report.lost;
    } else {
      ++report.in_flight;
    }
  }
  report.log_hash = log_.hash();
}

RunReport run_scenario(const ScenarioConfig& cfg,
                       std::optional<sched::SchedulerKind> scheduler,
                       std::uint64_t seed, RunOptions opts) {
  Simulation sim(cfg, scheduler, seed, std::move(opts));
  return sim.run();
}

}  // namespace lbsim
