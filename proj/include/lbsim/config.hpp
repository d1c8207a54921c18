#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lbsim/scheduling.hpp"

namespace lbsim {

// How request inter-arrival times are drawn.
enum class ArrivalProcess { kPoisson, kDeterministic };

// How per-request service (holding) times are drawn.
enum class ServiceProcess { kPareto, kConstant };

// How the total bytes exchanged by a request relate to its service time.
enum class SizePolicy { kServiceProportional, kFixed };

struct WorkloadConfig {
  ArrivalProcess arrival = ArrivalProcess::kPoisson;
  double rate_per_s = 3.0;  // Poisson rate, or 1/interval for deterministic.
  ServiceProcess service = ServiceProcess::kPareto;
  double service_mean_s = 5.0;
  double pareto_shape = 1.35;
  SizePolicy size = SizePolicy::kServiceProportional;
  double stream_rate_Bps = 100000.0;  // bytes/s for service-proportional sizing
  double fixed_size_B = 20000.0;      // request bytes when size = fixed
  double chunk_interval_ms = 250.0;   // client pacing between request chunks
};

struct VserverConfig {
  std::string vip = "10.0.0.100";
  std::uint16_t port = 80;
  sched::SchedulerKind scheduler = sched::SchedulerKind::kVariance;
  double session_timeout_s = 2.0;
  double monitor_interval_s = 1.0;
  std::size_t window_size = 60;
  double f_alpha = 0.05;
};

struct TopologyConfig {
  std::size_t clients = 8;
  std::size_t servers = 4;
  double core_capacity_Bps = 2143000.0;
  double access_capacity_Bps = 1500000.0;
  double propagation_ms = 1.0;
};

enum class RecoveryMode { kRestoration, kDedicated, kOnTheFly };

const char* recovery_mode_name(RecoveryMode mode);
std::optional<RecoveryMode> parse_recovery_mode(const std::string& text);

struct RecoveryConfig {
  RecoveryMode mode = RecoveryMode::kRestoration;
  double detection_delay_ms = 20.0;
  double install_latency_ms = 2.0;
  double compute_delay_ms = 5.0;  // path recomputation cost (restoration only)
};

// One scheduled link state change, relative to run start.
struct FailureEvent {
  double t_s = 0.0;
  std::string link_id;
  bool fail = true;  // false = repair
};

struct ScenarioConfig {
  std::string name = "default";
  std::vector<std::uint64_t> seeds = {1};
  double duration_s = 600.0;
  WorkloadConfig workload;
  VserverConfig vserver;
  TopologyConfig topology;
  RecoveryConfig recovery;
  std::vector<FailureEvent> failures;
};

// The built-in scenario every CLI command starts from.
ScenarioConfig default_scenario_config();

// Serializes a config to the INI dialect accepted by load_config().
std::string serialize_config(const ScenarioConfig& cfg);

// Result of parsing + validating a config file. On failure `errors`
// holds every problem found (one line each), not just the first.
struct ConfigResult {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return config.has_value(); }
};

ConfigResult load_config_text(const std::string& text);
ConfigResult load_config_file(const std::string& path);

// Validates value ranges and cross-field consistency; returns one
// message per violation, empty when the config is usable.
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

}  // namespace lbsim
