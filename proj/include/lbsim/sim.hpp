#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lbsim/config.hpp"
#include "lbsim/controller.hpp"
#include "lbsim/event_log.hpp"
#include "lbsim/fabric.hpp"
#include "lbsim/time.hpp"

namespace lbsim {

// ---------------------------------------------------------------------------
// Event queue item payloads. Ordering is (t, seq) with seq assigned at
// enqueue time, which makes the whole execution a deterministic function
// of the configuration and the seed.
// ---------------------------------------------------------------------------

struct RequestArrival {
  std::uint64_t flow_id = 0;
};

// A packet finishing its traversal of `via_link`, arriving at `at_node`.
// Byte accounting, liveness checks, and port counters for the traversed
// link all happen when this pops.
struct PacketHop {
  Packet pkt;
  std::string at_node;
  std::string via_link;
};

struct ServiceComplete {
  std::uint64_t flow_id = 0;
};

// Wire phase flips the link; notify phase (detection delay later) hands
// the failure to the controller. Only the wire phase is logged as an
// engine event.
struct LinkFail {
  std::string link_id;
  bool notify = false;
};

struct LinkRepair {
  std::string link_id;
};

struct MonitorTick {};
struct ReapTick {};

// Deferred controller table programming (models install latency). Not an
// engine event kind of its own; applying it produces rule records.
struct ApplyOps {
  std::string switch_id;
  std::string reason;
  std::vector<RuleOp> ops;
};

using EventPayload =
    std::variant<RequestArrival, PacketHop, ServiceComplete, LinkFail,
                 LinkRepair, MonitorTick, ReapTick, ApplyOps>;

struct Event {
  SimTime t = 0;
  std::uint64_t seq = 0;
  EventPayload payload;
};

// ---------------------------------------------------------------------------
// Run products
// ---------------------------------------------------------------------------

// One monitor-tick sample for one server.
struct SeriesRow {
  double t_s = 0.0;
  std::string server_id;
  std::size_t active_sessions = 0;
  double window_bytes = 0.0;
  double f_value = 0.0;
};

// Live-session / session-counter consistency snapshot taken at each reap.
struct ReapCheck {
  double t_s = 0.0;
  std::size_t live_sessions = 0;
  std::size_t sum_active_sessions = 0;
};

struct RunReport {
  std::string scheduler;
  std::uint64_t seed = 0;

  std::uint64_t generated = 0;
  std::uint64_t served = 0;
  std::uint64_t lost = 0;
  std::uint64_t in_flight = 0;

  std::vector<double> latencies_s;  // one per served request
  std::vector<SeriesRow> series;    // monitor ticks x servers
  std::vector<double> f_series;     // one per monitor tick
  std::vector<OutageRecord> outages;
  std::vector<ReapCheck> reap_checks;

  std::uint64_t nat_violations = 0;      // real backend address seen client-side
  std::uint64_t misdelivered = 0;        // wrong-address delivery at any host
  std::uint64_t dropped_packets = 0;     // dead link or no routable rule
  std::uint64_t duplicate_packets = 0;   // 1+1 copies removed at egress
  std::uint64_t delivered_client_packets = 0;
  std::uint64_t delivered_server_packets = 0;
  std::uint64_t packet_events = 0;

  std::uint64_t arrival_hash = 0;  // fingerprint of the workload sequence
  std::uint64_t log_hash = 0;      // fingerprint of the full event log

  double mean_latency_s() const;
  double p99_latency_s() const;
  double time_avg_f() const;

  // Per-server total sampled bytes (sum of that server's series column),
  // and the max/min ratio over servers (+inf when some server stayed at
  // zero while another served traffic).
  std::vector<double> per_server_bytes() const;
  double peak_trough_ratio() const;
};

struct RunOptions {
  bool hash_log = false;    // fingerprint every log line
  bool keep_log = false;    // retain lines in memory
  std::string log_path;     // stream lines to a file when non-empty
};

// ---------------------------------------------------------------------------
// The deterministic discrete-event engine
// ---------------------------------------------------------------------------
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg,
             std::optional<sched::SchedulerKind> scheduler, std::uint64_t seed,
             RunOptions opts = {});

  RunReport run();

  // Post-run inspection (tests).
  const Fabric& fabric() const { return fabric_; }
  Fabric& fabric() { return fabric_; }
  const Controller& controller() const { return *controller_; }
  const EventLog& event_log() const { return log_; }

 private:
  struct FlowRuntime {
    std::uint64_t id = 0;
    std::size_t client_idx = 0;
    Addr client_addr = 0;
    std::uint16_t client_port = 0;
    SimTime t_arrival = 0;
    SimTime service = 0;
    std::uint64_t size_B = 0;
    std::uint64_t n_chunks = 1;
    std::uint64_t chunk_B = 0;       // all chunks but the last
    std::uint64_t last_chunk_B = 0;  // remainder
    SimTime last_emit = 0;           // when the final request chunk enters
    bool service_scheduled = false;
    bool completed = false;
    bool lost = false;
    SimTime t_completed = 0;
  };

  void schedule(SimTime t, EventPayload payload);
  void handle(const Event& ev);
  void on_arrival(const Event& ev, const RequestArrival& a);
  void on_packet(const Event& ev, const PacketHop& hop);
  void on_service_complete(const Event& ev, const ServiceComplete& sc);
  void on_link_fail(const Event& ev, const LinkFail& lf);
  void on_link_repair(const Event& ev, const LinkRepair& lr);
  void on_monitor(const Event& ev);
  void on_reap(const Event& ev);
  void on_apply_ops(const Event& ev, const ApplyOps& ops);

  void deliver_at_switch(const Event& ev, SwitchState& sw, Packet pkt,
                         const std::string& via_link);
  void forward_from_switch(const SwitchState& sw, const Packet& pkt,
                           int out_port, SimTime now);
  void deliver_at_host(const Event& ev, const std::string& node, Packet pkt);
  void emit_from_host(const std::string& host, const Packet& pkt, SimTime now);

  SimTime transit_time(const Link& l, std::uint64_t bytes) const;
  void log_event(const Event& ev, const char* kind,
                 nlohmann::ordered_json fields);
  void finalize(RunReport& report);

  ScenarioConfig cfg_;
  sched::SchedulerKind scheduler_;
  std::uint64_t seed_;
  RunOptions opts_;

  Fabric fabric_;
  EventLog log_;
  std::unique_ptr<Controller> controller_;
  Rng arrival_rng_;
  Rng service_rng_;

  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t current_seq_ = 0;
  SimTime duration_ns_ = 0;
  Addr vip_ = 0;

  std::unordered_map<std::uint64_t, FlowRuntime> flows_;
  std::uint64_t next_flow_id_ = 0;
  RunReport report_;
};

// Convenience wrapper: build, run, return the report.
RunReport run_scenario(const ScenarioConfig& cfg,
                       std::optional<sched::SchedulerKind> scheduler,
                       std::uint64_t seed, RunOptions opts = {});

}  // namespace lbsim
