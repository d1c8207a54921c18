#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lbsim/config.hpp"
#include "lbsim/event_log.hpp"
#include "lbsim/fabric.hpp"
#include "lbsim/rng.hpp"
#include "lbsim/scheduling.hpp"
#include "lbsim/stats.hpp"
#include "lbsim/time.hpp"

namespace lbsim {

// Identity of one client connection to the virtual service.
struct SessionKey {
  Addr client_addr = 0;
  std::uint16_t client_port = 0;
  Addr vip = 0;
  std::uint16_t vip_port = 0;
  Protocol protocol = Protocol::kTcp;

  auto tie() const {
    return std::tie(client_addr, client_port, vip, vip_port, protocol);
  }
  bool operator==(const SessionKey& o) const { return tie() == o.tie(); }
  bool operator<(const SessionKey& o) const { return tie() < o.tie(); }
};

// Handle to one installed rule so a session can be torn down reliably.
struct RuleRef {
  std::string switch_id;
  MatchKey match;
  int priority = 0;
};

struct Session {
  SessionKey key;
  std::uint64_t flow_id = 0;
  std::string server_id;
  Addr server_addr = 0;
  std::uint16_t server_port = 0;
  SimTime created = 0;
  SimTime last_active = 0;
  std::uint64_t bytes_transferred = 0;
  std::vector<RuleRef> rules;
  std::vector<std::string> core_links;  // current switch-to-switch segment
};

// Working/recovery path pair provisioned between the edge switches.
struct PathPair {
  std::vector<std::string> working;
  std::vector<std::string> recovery;
};

// One table mutation the control plane wants applied.
struct RuleOp {
  bool install = true;
  FlowEntry entry;  // remove uses entry.match / entry.priority only
};

// A batch of mutations for one switch, to land at time t (models the
// per-switch programming latency; batches for successive switches are
// spaced one install latency apart).
struct TimedOps {
  SimTime t = 0;
  std::string switch_id;
  std::string reason;
  std::vector<RuleOp> ops;
};

// Measured service interruption caused by one link failure.
struct OutageRecord {
  std::string link_id;
  double t_fail_s = 0.0;
  double duration_s = 0.0;
  std::string mode;
  std::size_t recovery_switches = 0;  // switch count on the recovery route
};

// What the control plane decided about a failure: table reprogramming to
// apply (already timestamped), flows it had to abandon, and the outage
// bookkeeping for the report.
struct FailureResponse {
  std::vector<TimedOps> batches;
  std::vector<std::uint64_t> lost_flows;
  std::optional<OutageRecord> outage;
};

// Verdict for a punted packet: re-inject it through the (now updated)
// table, or discard it.
struct PacketInResult {
  bool forward = false;
};

// Control plane of the virtual service: session admission and NAT rule
// programming, per-port load monitoring feeding the F-test, idle-session
// reaping, and link-failure recovery in the configured mode.
class Controller {
 public:
  Controller(Fabric& fabric, const VserverConfig& vcfg,
             const RecoveryConfig& rcfg, std::uint64_t master_seed,
             EventLog& log);

  // Plans the working/recovery pair between the edge switches (protection
  // modes only). Throws std::runtime_error when no link-disjoint pair
  // exists.
  void provision_protection(SimTime now, std::uint64_t seq);

  // Handles a table miss punted by a switch. May admit a new session
  // (scheduling a backend and installing its NAT rules) or install a drop
  // rule when no backend is alive.
  PacketInResult handle_packet_in(const Packet& pkt,
                                  const std::string& switch_id, SimTime now,
                                  std::uint64_t seq);

  // Failure notification, delivered detection-delay after the wire event.
  FailureResponse handle_link_failure(const std::string& link_id,
                                      SimTime t_fail, SimTime t_detect,
                                      std::uint64_t seq);

  // Repairs never trigger re-optimization; this only records the event.
  void handle_link_repair(const std::string& link_id, SimTime now,
                          std::uint64_t seq);

  // Samples every server-facing port (tx+rx delta since the previous
  // tick), pushes the samples into the per-server windows, closes the
  // link monitoring interval, and refreshes the F-test and pairwise
  // comparisons. Returns the sample groups the test ran on.
  stats::SampleGroups monitor_tick(SimTime now, std::uint64_t seq);

  // Refreshes session activity from rule counters, expires idle rules,
  // and destroys sessions idle longer than the timeout (strict). Returns
  // the destroyed sessions.
  std::vector<Session> reap_sessions(SimTime now, std::uint64_t seq);

  const std::vector<sched::ServerState>& servers() const { return servers_; }
  const std::map<SessionKey, Session>& sessions() const { return sessions_; }
  std::size_t live_sessions() const { return sessions_.size(); }
  std::size_t sum_active_sessions() const;

  bool stats_ready() const { return stats_ready_; }
  const stats::AnovaReport& last_report() const { return report_; }
  double last_f_value() const { return stats_ready_ ? report_.f_value : 0.0; }
  const PathPair& protection() const { return protection_; }

  std::uint64_t packet_in_count() const { return packet_in_count_; }
  std::uint64_t sessions_created() const { return sessions_created_; }
  std::uint64_t sessions_destroyed() const { return sessions_destroyed_; }

 private:
  // Result of rebuilding rules for a set of sessions: the per-switch
  // batches (spaced by install latency), when the last install lands, and
  // how many switches received installs (the recovery route's length in
  // switches).
  struct ReprogramResult {
    std::vector<TimedOps> batches;
    SimTime last_install_t = 0;
    std::size_t install_switches = 0;
    std::size_t sessions = 0;
  };

  ReprogramResult reprogram_sessions(
      const std::function<bool(const Session&)>& affected,
      const std::function<std::vector<std::string>(const Session&)>& new_core,
      SimTime t_base, std::uint64_t seq);

  sched::ScheduleDecision pick_server(SimTime now, std::uint64_t seq);
  std::vector<std::string> session_path_links(const std::string& client_node,
                                              const std::string& server_node);
  std::vector<std::pair<std::string, FlowEntry>> build_session_rules(
      const Session& s, const std::vector<std::string>& core_links,
      bool duplicate_on_recovery);
  void install_now(const std::vector<std::pair<std::string, FlowEntry>>& rules,
                   Session& s, SimTime now, std::uint64_t seq);
  void destroy_session(Session& s, const char* reason, SimTime now,
                       std::uint64_t seq);
  void log_record(SimTime now, std::uint64_t seq, const char* kind,
                  nlohmann::ordered_json fields);

  Fabric& fabric_;
  VserverConfig vcfg_;
  RecoveryConfig rcfg_;
  Addr vip_ = 0;
  EventLog& log_;
  Rng sched_rng_;

  std::vector<sched::ServerState> servers_;
  std::size_t rr_cursor_ = 0;
  std::map<SessionKey, Session> sessions_;
  PathPair protection_;
  bool protection_planned_ = false;

  stats::AnovaReport report_;
  std::vector<stats::PairComparison> comparisons_;
  bool stats_ready_ = false;
  std::vector<std::uint64_t> prev_port_total_;  // per server, tx+rx

  std::uint64_t packet_in_count_ = 0;
  std::uint64_t sessions_created_ = 0;
  std::uint64_t sessions_destroyed_ = 0;
};

}  // namespace lbsim
