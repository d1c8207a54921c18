#include "lbsim/scheduling.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lbsim::sched {

namespace {

std::vector<std::size_t> alive_indices(const std::vector<ServerState>& ss) {
  std::vector<std::size_t> out;
  out.reserve(ss.size());
  for (std::size_t i = 0; i < ss.size(); ++i) {
    if (ss[i].alive) out.push_back(i);
  }
  if (out.empty()) {
    throw std::runtime_error("scheduler: no alive server available");
  }
  return out;
}

}  // namespace

std::pair<ScheduleDecision, std::size_t> round_robin_next(
    const std::vector<ServerState>& servers, std::size_t cursor) {
  alive_indices(servers);  // no-alive-server check
  const std::size_t n = servers.size();
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t idx = (cursor + step) % n;
    if (servers[idx].alive) {
      ScheduleDecision d;
      d.chosen = servers[idx].id;
      d.trigger = Trigger::kDefault;
      return {std::move(d), (idx + 1) % n};
    }
  }
  throw std::runtime_error("scheduler: no alive server available");
}

ScheduleDecision greedy_next(const std::vector<ServerState>& servers) {
  const auto alive = alive_indices(servers);
  std::size_t best = alive.front();
  for (std::size_t idx : alive) {
    const bool fewer = servers[idx].active_sessions <
                       servers[best].active_sessions;
    const bool tie_lower_id = servers[idx].active_sessions ==
                                  servers[best].active_sessions &&
                              servers[idx].id < servers[best].id;
    if (fewer || tie_lower_id) best = idx;
  }
  ScheduleDecision d;
  d.chosen = servers[best].id;
  d.trigger = Trigger::kDefault;
  return d;
}

ScheduleDecision variance_probability_next(
    const std::vector<ServerState>& servers, const stats::AnovaReport& report,
    const std::vector<stats::PairComparison>& comparisons, Rng& rng) {
  const auto alive = alive_indices(servers);
  const std::size_t m = alive.size();

  ScheduleDecision d;
  d.weights.reserve(m);
  std::vector<double> probs(m, 0.0);

  if (!report.significant) {
    d.trigger = Trigger::kDefault;
    for (std::size_t i = 0; i < m; ++i) probs[i] = 1.0 / static_cast<double>(m);
  } else {
    d.trigger = Trigger::kRebalance;

    // Pairwise verdicts keyed by unordered id pair.
    std::map<std::pair<std::string, std::string>, bool> verdict;
    for (const auto& pc : comparisons) {
      verdict[std::minmax(pc.first, pc.second)] = pc.significant;
    }
    auto significantly_differs = [&](const std::string& a,
                                     const std::string& b) {
      const auto it = verdict.find(std::minmax(a, b));
      return it != verdict.end() && it->second;
    };

    std::vector<double> means(m);
    for (std::size_t i = 0; i < m; ++i) {
      means[i] = servers[alive[i]].load_mean();
    }

    for (std::size_t i = 0; i < m; ++i) {
      // A server sits out this epoch when the comparisons place it
      // significantly above every other alive server.
      bool above_all = m > 1;
      for (std::size_t j = 0; j < m && above_all; ++j) {
        if (j == i) continue;
        if (!(means[i] > means[j] &&
              significantly_differs(servers[alive[i]].id,
                                    servers[alive[j]].id))) {
          above_all = false;
        }
      }
      probs[i] = above_all ? 0.0 : 1.0 / (means[i] + 1.0);
    }

    double total = 0.0;
    for (double p : probs) total += p;
    if (total <= 0.0) {
      // Exclusion can only remove one server, so this is unreachable with
      // two or more alive servers; fall back to uniform defensively.
      for (double& p : probs) p = 1.0 / static_cast<double>(m);
    } else {
      for (double& p : probs) p /= total;
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    d.weights.push_back({servers[alive[i]].id, probs[i]});
  }

  std::size_t pick = rng.weighted_index(probs);
  if (probs[pick] <= 0.0) {
    // Top-of-CDF rounding guard: never land on a zero-weight server.
    for (std::size_t i = m; i-- > 0;) {
      if (probs[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  d.chosen = servers[alive[pick]].id;
  return d;
}

ServerState record_completion(ServerState server) {
  if (server.active_sessions == 0) {
    throw std::underflow_error("record_completion: no active session on '" +
                               server.id + "'");
  }
  --server.active_sessions;
  return server;
}

bool windows_ready(const std::vector<ServerState>& servers) {
  for (const auto& s : servers) {
    if (s.alive && s.load_window.size() < 2) return false;
  }
  return true;
}

std::optional<SchedulerKind> parse_scheduler_kind(const std::string& name) {
  if (name == "round-robin") return SchedulerKind::kRoundRobin;
  if (name == "greedy") return SchedulerKind::kGreedy;
  if (name == "variance") return SchedulerKind::kVariance;
  return std::nullopt;
}

const char* scheduler_kind_name(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kRoundRobin:
      return "round-robin";
    case SchedulerKind::kGreedy:
      return "greedy";
    case SchedulerKind::kVariance:
      return "variance";
  }
  return "unknown";
}

std::vector<std::string> scheduler_kind_names() {
  return {"round-robin", "greedy", "variance"};
}

}  // namespace lbsim::sched
