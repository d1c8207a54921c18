#pragma once

#include <cstdint>
#include <string>

#include "lbsim/addr.hpp"
#include "lbsim/time.hpp"

namespace lbsim {

enum class Protocol : std::uint8_t { kTcp, kUdp, kIcmp, kAny };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kTcp:
      return "tcp";
    case Protocol::kUdp:
      return "udp";
    case Protocol::kIcmp:
      return "icmp";
    case Protocol::kAny:
      return "any";
  }
  return "any";
}

// One simulated datagram. flow_id correlates every packet of a client
// request and seq_in_flow numbers packets within one flow direction, which
// is what egress deduplication keys on under 1+1 protection.
struct Packet {
  Addr src_addr = 0;
  Addr dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Protocol protocol = Protocol::kTcp;
  std::uint64_t size = 0;  // bytes
  std::uint64_t flow_id = 0;
  std::uint64_t seq_in_flow = 0;
  bool reverse = false;  // false: client->server direction, true: response
  SimTime timestamp = 0;
};

}  // namespace lbsim
