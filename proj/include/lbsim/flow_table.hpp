#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbsim/packet.hpp"
#include "lbsim/time.hpp"

namespace lbsim {

// Five-tuple match with per-field wildcards; an empty optional matches
// anything, and Protocol::kAny matches every protocol.
struct MatchKey {
  std::optional<Addr> src_addr;
  std::optional<Addr> dst_addr;
  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;
  Protocol protocol = Protocol::kAny;

  bool matches(const Packet& pkt) const {
    if (src_addr && *src_addr != pkt.src_addr) return false;
    if (dst_addr && *dst_addr != pkt.dst_addr) return false;
    if (src_port && *src_port != pkt.src_port) return false;
    if (dst_port && *dst_port != pkt.dst_port) return false;
    if (protocol != Protocol::kAny && protocol != pkt.protocol) return false;
    return true;
  }

  bool operator==(const MatchKey&) const = default;
};

// One forwarding-pipeline step. Forward names an output port by index on
// the owning switch; the rewrites edit the packet's addresses in place.
struct Action {
  enum class Kind : std::uint8_t {
    kForward,
    kRewriteDst,
    kRewriteSrc,
    kDrop,
    kToController
  };
  Kind kind = Kind::kDrop;
  int port = -1;   // kForward
  Addr addr = 0;   // kRewriteDst / kRewriteSrc

  static Action forward(int port) {
    Action a;
    a.kind = Kind::kForward;
    a.port = port;
    return a;
  }
  static Action rewrite_dst(Addr addr) {
    Action a;
    a.kind = Kind::kRewriteDst;
    a.addr = addr;
    return a;
  }
  static Action rewrite_src(Addr addr) {
    Action a;
    a.kind = Kind::kRewriteSrc;
    a.addr = addr;
    return a;
  }
  static Action drop() {
    Action a;
    a.kind = Kind::kDrop;
    return a;
  }
  static Action to_controller() {
    Action a;
    a.kind = Kind::kToController;
    return a;
  }
};

struct FlowEntry {
  MatchKey match;
  int priority = 0;
  std::vector<Action> actions;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  SimTime idle_timeout = 0;  // 0 means permanent
  SimTime last_hit = 0;
  SimTime installed_at = 0;
  std::uint64_t install_seq = 0;  // recency for equal-priority tie-breaks
};

// Per-switch match/action table. Capacity is unbounded; a miss is a value
// (the caller punts to the controller), never an error.
class FlowTable {
 public:
  // Returns the highest-priority matching entry (equal priorities resolved
  // in favor of the most recently installed) and updates its counters and
  // last_hit, or nullptr on miss. Drop entries count like any other match.
  FlowEntry* lookup(const Packet& pkt, SimTime now);

  // Adds an entry; an existing entry with identical match and priority is
  // replaced (counters reset with it).
  void install(FlowEntry entry, SimTime now);

  // Deletes all entries with the given match and priority. Returns false
  // when nothing matched (absent-remove is a no-op, not an error).
  bool remove(const MatchKey& match, int priority);

  // Removes and returns every entry whose idle time strictly exceeds its
  // non-zero idle_timeout.
  std::vector<FlowEntry> expire_idle(SimTime now);

  const std::vector<FlowEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  nlohmann::json dump(const std::string& switch_id) const;

 private:
  std::vector<FlowEntry> entries_;
  std::uint64_t install_counter_ = 0;
};

}  // namespace lbsim
