#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lbsim/addr.hpp"
#include "lbsim/rng.hpp"
#include "lbsim/stats.hpp"

namespace lbsim::sched {

// One backend as the schedulers see it: identity, live session count, and
// the ring of recent per-interval traffic samples feeding the F-test.
struct ServerState {
  std::string id;
  Addr address = 0;
  std::uint16_t port = 0;
  std::size_t active_sessions = 0;
  std::deque<double> load_window;
  std::size_t window_capacity = 30;
  bool alive = true;

  void push_load_sample(double bytes_per_interval) {
    load_window.push_back(bytes_per_interval);
    while (load_window.size() > window_capacity) load_window.pop_front();
  }

  double load_mean() const {
    if (load_window.empty()) return 0.0;
    double s = 0.0;
    for (double x : load_window) s += x;
    return s / static_cast<double>(load_window.size());
  }
};

struct WeightEntry {
  std::string server_id;
  double probability = 0.0;
};

// Whether the decision came from the steady-state path or from the
// rebalancing branch taken when the F-test flags significant imbalance.
enum class Trigger { kDefault, kRebalance };

struct ScheduleDecision {
  std::string chosen;
  std::vector<WeightEntry> weights;  // present for probability scheduling
  Trigger trigger = Trigger::kDefault;
};

// Cyclic selection starting at `cursor`, skipping dead servers; returns the
// decision and the advanced cursor. Throws std::runtime_error when no
// server is alive.
std::pair<ScheduleDecision, std::size_t> round_robin_next(
    const std::vector<ServerState>& servers, std::size_t cursor);

// Least-busy selection: the alive server with the fewest active sessions,
// ties broken by lowest server id. Stateless and deterministic.
ScheduleDecision greedy_next(const std::vector<ServerState>& servers);

// Probability selection driven by the analysis of variance. A
// non-significant report yields exactly uniform weights over alive
// servers; a significant one yields inverse-load weights
// w_i = (1/(L_i+1)) / sum_j(1/(L_j+1)) with L_i the window mean, after
// zeroing any server the pairwise comparisons place significantly above
// every other alive server. The choice is sampled from the weights using
// the injected random source.
ScheduleDecision variance_probability_next(
    const std::vector<ServerState>& servers, const stats::AnovaReport& report,
    const std::vector<stats::PairComparison>& comparisons, Rng& rng);

// Returns the server with one session drained; throws
// std::underflow_error when no session is active.
ServerState record_completion(ServerState server);

// True once every alive server's window holds at least two samples, the
// point at which the F-test becomes well-posed (df_w >= 1).
bool windows_ready(const std::vector<ServerState>& servers);

enum class SchedulerKind { kRoundRobin, kGreedy, kVariance };

std::optional<SchedulerKind> parse_scheduler_kind(const std::string& name);
const char* scheduler_kind_name(SchedulerKind kind);
std::vector<std::string> scheduler_kind_names();

}  // namespace lbsim::sched
