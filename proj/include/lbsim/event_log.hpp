#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbsim/rng.hpp"
#include "lbsim/time.hpp"

namespace lbsim {

// Append-only JSON-lines run log. Every record carries {t_ns, seq, kind}
// plus record-specific fields. The log can fingerprint itself (running
// FNV-1a over the serialized lines), retain lines in memory, and/or stream
// to a file; when none of those sinks is enabled, append() is never called
// because producers consult active() first, which keeps the hot path free
// of serialization work.
class EventLog {
 public:
  void enable_hash() { hash_enabled_ = true; }
  void enable_memory() { memory_enabled_ = true; }
  void enable_file(const std::string& path) {
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) {
      throw std::runtime_error("event log: cannot open '" + path + "'");
    }
  }

  bool active() const {
    return hash_enabled_ || memory_enabled_ || file_ != nullptr;
  }

  // Builds the canonical line for a record. Field order is insertion
  // order, so lines (and therefore hashes) are stable across runs.
  void append(SimTime t_ns, std::uint64_t seq, const char* kind,
              nlohmann::ordered_json fields) {
    nlohmann::ordered_json line;
    line["t_ns"] = t_ns;
    line["seq"] = seq;
    line["kind"] = kind;
    for (auto& [k, v] : fields.items()) line[k] = std::move(v);
    append_line(line.dump());
  }

  void append_line(const std::string& line) {
    if (hash_enabled_) {
      hash_ = fnv1a(line, hash_);
      hash_ = fnv1a("\n", hash_);
    }
    if (memory_enabled_) lines_.push_back(line);
    if (file_) (*file_) << line << '\n';
  }

  std::uint64_t hash() const { return hash_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool hash_enabled_ = false;
  bool memory_enabled_ = false;
  std::unique_ptr<std::ofstream> file_;
  std::uint64_t hash_ = kFnvOffset;
  std::vector<std::string> lines_;
};

}  // namespace lbsim
