#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "lbsim/flow_table.hpp"
#include "lbsim/rng.hpp"

using namespace lbsim;

namespace {

Packet packet(Addr src, Addr dst, std::uint16_t sport, std::uint16_t dport,
              Protocol proto = Protocol::kTcp, std::uint64_t size = 100) {
  Packet p;
  p.src_addr = src;
  p.dst_addr = dst;
  p.src_port = sport;
  p.dst_port = dport;
  p.protocol = proto;
  p.size = size;
  return p;
}

MatchKey exact(Addr src, Addr dst, std::uint16_t sport, std::uint16_t dport,
               Protocol proto = Protocol::kTcp) {
  MatchKey m;
  m.src_addr = src;
  m.dst_addr = dst;
  m.src_port = sport;
  m.dst_port = dport;
  m.protocol = proto;
  return m;
}

FlowEntry entry(MatchKey m, int priority, std::vector<Action> actions,
                SimTime idle_timeout = 0) {
  FlowEntry e;
  e.match = std::move(m);
  e.priority = priority;
  e.actions = std::move(actions);
  e.idle_timeout = idle_timeout;
  return e;
}

// Independent matcher used by the brute-force miss oracle.
bool matches(const MatchKey& m, const Packet& p) {
  const bool src_ok = !m.src_addr.has_value() || *m.src_addr == p.src_addr;
  const bool dst_ok = !m.dst_addr.has_value() || *m.dst_addr == p.dst_addr;
  const bool sp_ok = !m.src_port.has_value() || *m.src_port == p.src_port;
  const bool dp_ok = !m.dst_port.has_value() || *m.dst_port == p.dst_port;
  const bool proto_ok =
      m.protocol == Protocol::kAny || m.protocol == p.protocol;
  return src_ok && dst_ok && sp_ok && dp_ok && proto_ok;
}

}  // namespace

TEST_CASE("empty table misses") {
  FlowTable t;
  CHECK(t.lookup(packet(1, 2, 3, 4), 0) == nullptr);
}

TEST_CASE("fully wildcarded entry matches everything and counts") {
  FlowTable t;
  t.install(entry(MatchKey{}, 1, {Action::forward(0)}), 0);
  const Packet p = packet(10, 20, 30, 40, Protocol::kUdp, 777);
  FlowEntry* hit = t.lookup(p, 5);
  REQUIRE(hit != nullptr);
  CHECK(hit->packets == 1);
  CHECK(hit->bytes == 777);
  CHECK(hit->last_hit == 5);
}

TEST_CASE("higher priority wins regardless of action") {
  FlowTable t;
  t.install(entry(MatchKey{}, 5, {Action::forward(0)}), 0);
  t.install(entry(MatchKey{}, 10, {Action::drop()}), 0);
  FlowEntry* hit = t.lookup(packet(1, 2, 3, 4), 1);
  REQUIRE(hit != nullptr);
  CHECK(hit->priority == 10);
  REQUIRE(hit->actions.size() == 1);
  CHECK(hit->actions[0].kind == Action::Kind::kDrop);
}

TEST_CASE("equal priority resolves to the most recently installed") {
  FlowTable t;
  MatchKey wide;
  t.install(entry(wide, 7, {Action::forward(1)}), 0);
  MatchKey narrower;
  narrower.protocol = Protocol::kTcp;
  t.install(entry(narrower, 7, {Action::forward(2)}), 1);
  FlowEntry* hit = t.lookup(packet(1, 2, 3, 4), 2);
  REQUIRE(hit != nullptr);
  CHECK(hit->actions[0].port == 2);
}

TEST_CASE("install with identical match and priority replaces") {
  FlowTable t;
  const MatchKey m = exact(1, 2, 3, 4);
  t.install(entry(m, 3, {Action::forward(1)}), 0);
  t.lookup(packet(1, 2, 3, 4), 1);
  t.install(entry(m, 3, {Action::forward(9)}), 2);
  CHECK(t.size() == 1);
  FlowEntry* hit = t.lookup(packet(1, 2, 3, 4), 3);
  REQUIRE(hit != nullptr);
  CHECK(hit->actions[0].port == 9);
  CHECK(hit->packets == 1);  // counters reset with the replacement
}

TEST_CASE("remove deletes matching entries and reports absence") {
  FlowTable t;
  const MatchKey m = exact(1, 2, 3, 4);
  t.install(entry(m, 3, {Action::forward(1)}), 0);
  CHECK(t.remove(m, 3));
  CHECK(t.size() == 0);
  CHECK_FALSE(t.remove(m, 3));  // absent: no-op indicator
  CHECK_FALSE(t.remove(m, 99));
}

TEST_CASE("idle expiry boundaries are strict") {
  FlowTable t;
  t.install(entry(exact(1, 2, 3, 4), 1, {Action::forward(0)},
                  60 * kNsPerSecond),
            0);
  SUBCASE("one past the timeout expires") {
    const auto gone = t.expire_idle(61 * kNsPerSecond);
    REQUIRE(gone.size() == 1);
    CHECK(t.size() == 0);
  }
  SUBCASE("exactly the timeout is retained") {
    const auto gone = t.expire_idle(60 * kNsPerSecond);
    CHECK(gone.empty());
    CHECK(t.size() == 1);
  }
  SUBCASE("activity refreshes the idle clock") {
    t.lookup(packet(1, 2, 3, 4), 30 * kNsPerSecond);
    CHECK(t.expire_idle(61 * kNsPerSecond).empty());
    CHECK(t.expire_idle(91 * kNsPerSecond).size() == 1);
  }
}

TEST_CASE("zero timeout entries are permanent") {
  FlowTable t;
  t.install(entry(exact(1, 2, 3, 4), 1, {Action::forward(0)}, 0), 0);
  CHECK(t.expire_idle(1'000'000 * kNsPerSecond).empty());
  CHECK(t.size() == 1);
}

TEST_CASE("counter totals equal the bytes of matched packets") {
  FlowTable t;
  t.install(entry(exact(1, 2, 3, 4), 2, {Action::forward(0)}), 0);
  t.install(entry(MatchKey{}, 1, {Action::drop()}), 0);

  Rng rng(59, "counters");
  std::uint64_t matched_bytes = 0;
  for (int i = 0; i < 2000; ++i) {
    Packet p = packet(1, 2, 3, 4);
    if (rng.uniform01() < 0.5) p.src_addr = 9;  // falls to the drop rule
    p.size = 1 + static_cast<std::uint64_t>(rng.uniform01() * 1000);
    if (t.lookup(p, i) != nullptr) matched_bytes += p.size;
  }
  std::uint64_t table_bytes = 0;
  for (const auto& e : t.entries()) table_bytes += e.bytes;
  // Every packet matched one of the two rules (the drop rule is a
  // catch-all), and drop matches count like any other.
  CHECK(table_bytes == matched_bytes);
}

TEST_CASE("repeated lookups return the same entry") {
  FlowTable t;
  Rng rng(61, "priority-determinism");
  for (int i = 0; i < 16; ++i) {
    MatchKey m;
    if (rng.uniform01() < 0.5) m.src_addr = static_cast<Addr>(i % 4);
    if (rng.uniform01() < 0.5) m.dst_port = static_cast<std::uint16_t>(i % 3);
    t.install(entry(m, i % 5, {Action::forward(i)}), i);
  }
  const Packet p = packet(2, 7, 1, 1);
  FlowEntry* first = t.lookup(p, 100);
  for (int i = 0; i < 10; ++i) {
    CHECK(t.lookup(p, 101 + i) == first);
  }
}

TEST_CASE("miss completeness against a brute-force scan") {
  Rng rng(67, "miss-oracle");
  for (int trial = 0; trial < 300; ++trial) {
    FlowTable t;
    std::vector<MatchKey> keys;
    const int n = static_cast<int>(rng.uniform01() * 33);
    for (int i = 0; i < n; ++i) {
      MatchKey m;
      if (rng.uniform01() < 0.6) m.src_addr = static_cast<Addr>(rng.raw() % 4);
      if (rng.uniform01() < 0.6) m.dst_addr = static_cast<Addr>(rng.raw() % 4);
      if (rng.uniform01() < 0.5) {
        m.src_port = static_cast<std::uint16_t>(rng.raw() % 3);
      }
      if (rng.uniform01() < 0.5) {
        m.dst_port = static_cast<std::uint16_t>(rng.raw() % 3);
      }
      if (rng.uniform01() < 0.5) {
        m.protocol = rng.uniform01() < 0.5 ? Protocol::kTcp : Protocol::kUdp;
      }
      keys.push_back(m);
      t.install(entry(m, static_cast<int>(rng.raw() % 4),
                      {Action::forward(i)}),
                i);
    }
    for (int probe = 0; probe < 20; ++probe) {
      const Packet p = packet(
          static_cast<Addr>(rng.raw() % 4), static_cast<Addr>(rng.raw() % 4),
          static_cast<std::uint16_t>(rng.raw() % 3),
          static_cast<std::uint16_t>(rng.raw() % 3),
          rng.uniform01() < 0.5 ? Protocol::kTcp : Protocol::kUdp);
      bool any = false;
      for (const auto& k : keys) any = any || matches(k, p);
      CHECK((t.lookup(p, probe) != nullptr) == any);
    }
  }
}

TEST_CASE("table dump carries matches, priorities, actions, counters") {
  FlowTable t;
  MatchKey m = exact(*parse_addr("10.0.1.1"), *parse_addr("10.0.0.100"),
                     40000, 80);
  t.install(entry(m, 10,
                  {Action::rewrite_dst(*parse_addr("10.0.2.1")),
                   Action::forward(2)}),
            0);
  t.lookup(packet(*parse_addr("10.0.1.1"), *parse_addr("10.0.0.100"), 40000,
                  80, Protocol::kTcp, 1500),
           1);

  const auto j = t.dump("sw1");
  CHECK(j["switch_id"] == "sw1");
  REQUIRE(j["entries"].size() == 1);
  const auto& je = j["entries"][0];
  CHECK(je["match"]["src_addr"] == "10.0.1.1");
  CHECK(je["match"]["dst_addr"] == "10.0.0.100");
  CHECK(je["match"]["protocol"] == "tcp");
  CHECK(je["priority"] == 10);
  CHECK(je["actions"][0]["kind"] == "rewrite_dst");
  CHECK(je["actions"][0]["addr"] == "10.0.2.1");
  CHECK(je["actions"][1]["kind"] == "forward");
  CHECK(je["packets"] == 1);
  CHECK(je["bytes"] == 1500);
}

TEST_CASE("address parsing round-trips") {
  CHECK(format_addr(*parse_addr("10.0.2.14")) == "10.0.2.14");
  CHECK(format_addr(*parse_addr("0.0.0.0")) == "0.0.0.0");
  CHECK(format_addr(*parse_addr("255.255.255.255")) == "255.255.255.255");
  CHECK_FALSE(parse_addr("10.0.2").has_value());
  CHECK_FALSE(parse_addr("10.0.2.256").has_value());
  CHECK_FALSE(parse_addr("10.0.2.x").has_value());
  CHECK_FALSE(parse_addr("").has_value());
}
