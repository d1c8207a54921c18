#include "lbsim/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lbsim/addr.hpp"
#include "lbsim/fabric.hpp"

namespace lbsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

// Accepts "7", "1..20", or "1,2,5".
bool parse_seed_list(const std::string& s, std::vector<std::uint64_t>& out) {
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    std::uint64_t lo = 0, hi = 0;
    if (!parse_u64(trim(s.substr(0, dots)), lo) ||
        !parse_u64(trim(s.substr(dots + 2)), hi) || hi < lo)
      return false;
    if (hi - lo >= 100000) return false;  // refuse absurd ranges
    out.clear();
    for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    return true;
  }
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::uint64_t v = 0;
    if (!parse_u64(trim(item), v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

const char* recovery_mode_name(RecoveryMode mode) {
  switch (mode) {
    case RecoveryMode::kRestoration:
      return "restoration";
    case RecoveryMode::kDedicated:
      return "dedicated";
    case RecoveryMode::kOnTheFly:
      return "on-the-fly";
  }
  return "restoration";
}

std::optional<RecoveryMode> parse_recovery_mode(const std::string& text) {
  if (text == "restoration") return RecoveryMode::kRestoration;
  if (text == "dedicated") return RecoveryMode::kDedicated;
  if (text == "on-the-fly") return RecoveryMode::kOnTheFly;
  return std::nullopt;
}

ScenarioConfig default_scenario_config() {
  ScenarioConfig cfg;  // field initializers carry the built-in scenario
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };

  out << "[scenario]\n";
  out << "name = " << cfg.name << "\n";
  out << "seeds = ";
  bool contiguous = cfg.seeds.size() > 1;
  for (std::size_t i = 1; i < cfg.seeds.size(); ++i)
    if (cfg.seeds[i] != cfg.seeds[i - 1] + 1) contiguous = false;
  if (contiguous) {
    out << cfg.seeds.front() << ".." << cfg.seeds.back();
  } else {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      out << (i ? "," : "") << cfg.seeds[i];
  }
  out << "\n";
  out << "duration_s = " << num(cfg.duration_s) << "\n\n";

  const auto& w = cfg.workload;
  out << "[workload]\n";
  out << "arrival = "
      << (w.arrival == ArrivalProcess::kPoisson ? "poisson" : "deterministic")
      << "\n";
  out << "rate_per_s = " << num(w.rate_per_s) << "\n";
  out << "service = "
      << (w.service == ServiceProcess::kPareto ? "pareto" : "constant")
      << "\n";
  out << "service_mean_s = " << num(w.service_mean_s) << "\n";
  out << "pareto_shape = " << num(w.pareto_shape) << "\n";
  out << "size = "
      << (w.size == SizePolicy::kServiceProportional ? "service-proportional"
                                                     : "fixed")
      << "\n";
  out << "stream_rate_Bps = " << num(w.stream_rate_Bps) << "\n";
  out << "fixed_size_B = " << num(w.fixed_size_B) << "\n";
  out << "chunk_interval_ms = " << num(w.chunk_interval_ms) << "\n\n";

  const auto& v = cfg.vserver;
  out << "[vserver]\n";
  out << "vip = " << v.vip << "\n";
  out << "port = " << v.port << "\n";
  out << "scheduler = " << sched::scheduler_kind_name(v.scheduler) << "\n";
  out << "session_timeout_s = " << num(v.session_timeout_s) << "\n";
  out << "monitor_interval_s = " << num(v.monitor_interval_s) << "\n";
  out << "window_size = " << v.window_size << "\n";
  out << "f_alpha = " << num(v.f_alpha) << "\n\n";

  const auto& t = cfg.topology;
  out << "[topology]\n";
  out << "clients = " << t.clients << "\n";
  out << "servers = " << t.servers << "\n";
  out << "core_capacity_Bps = " << num(t.core_capacity_Bps) << "\n";
  out << "access_capacity_Bps = " << num(t.access_capacity_Bps) << "\n";
  out << "propagation_ms = " << num(t.propagation_ms) << "\n\n";

  const auto& r = cfg.recovery;
  out << "[recovery]\n";
  out << "mode = " << recovery_mode_name(r.mode) << "\n";
  out << "detection_delay_ms = " << num(r.detection_delay_ms) << "\n";
  out << "install_latency_ms = " << num(r.install_latency_ms) << "\n";
  out << "compute_delay_ms = " << num(r.compute_delay_ms) << "\n";

  if (!cfg.failures.empty()) {
    out << "\n[failures]\n";
    for (const auto& f : cfg.failures) {
      out << (f.fail ? "fail" : "repair") << " = " << f.link_id << " "
          << num(f.t_s) << "\n";
    }
  }
  return out.str();
}

std::vector<std::string> validate_config(const ScenarioConfig& cfg) {
  std::vector<std::string> errors;
  auto bad = [&](const std::string& msg) { errors.push_back(msg); };

  if (cfg.name.empty()) bad("scenario name must not be empty");
  if (cfg.seeds.empty()) bad("seeds must list at least one seed");
  if (!(cfg.duration_s > 0)) bad("duration_s must be positive");

  const auto& w = cfg.workload;
  if (!(w.rate_per_s > 0)) bad("rate_per_s must be positive");
  if (!(w.service_mean_s > 0)) bad("service_mean_s must be positive");
  if (w.service == ServiceProcess::kPareto && !(w.pareto_shape > 1))
    bad("pareto_shape must exceed 1 so the mean exists");
  if (w.size == SizePolicy::kServiceProportional && !(w.stream_rate_Bps > 0))
    bad("stream_rate_Bps must be positive for service-proportional sizing");
  if (w.size == SizePolicy::kFixed && !(w.fixed_size_B >= 1))
    bad("fixed_size_B must be at least 1 byte");
  if (!(w.chunk_interval_ms > 0)) bad("chunk_interval_ms must be positive");

  const auto& v = cfg.vserver;
  if (!parse_addr(v.vip)) bad("vip is not a valid dotted-quad address");
  if (v.port == 0) bad("port must be nonzero");
  if (!(v.session_timeout_s > 0)) bad("session_timeout_s must be positive");
  if (!(v.monitor_interval_s > 0)) bad("monitor_interval_s must be positive");
  if (v.window_size < 2)
    bad("window_size must be at least 2 samples per server");
  if (!(v.f_alpha > 0.0 && v.f_alpha < 1.0))
    bad("f_alpha must lie strictly between 0 and 1");

  const auto& t = cfg.topology;
  if (t.clients < 1 || t.clients > 200)
    bad("clients must be between 1 and 200");
  if (t.servers < 1 || t.servers > 200)
    bad("servers must be between 1 and 200");
  if (!(t.core_capacity_Bps > 0)) bad("core_capacity_Bps must be positive");
  if (!(t.access_capacity_Bps > 0))
    bad("access_capacity_Bps must be positive");
  if (t.propagation_ms < 0) bad("propagation_ms must not be negative");

  const auto& r = cfg.recovery;
  if (r.detection_delay_ms < 0)
    bad("detection_delay_ms must not be negative");
  if (r.install_latency_ms < 0)
    bad("install_latency_ms must not be negative");
  if (r.compute_delay_ms < 0) bad("compute_delay_ms must not be negative");

  std::set<std::string> known_links{"l1", "l2", "l3"};
  for (std::size_t i = 0; i < t.clients; ++i)
    known_links.insert(client_link_id(i));
  for (std::size_t i = 0; i < t.servers; ++i)
    known_links.insert(server_link_id(i));
  for (const auto& f : cfg.failures) {
    if (known_links.find(f.link_id) == known_links.end())
      bad("failures reference unknown link '" + f.link_id + "'");
    if (f.t_s < 0) bad("failure times must not be negative");
  }
  return errors;
}

ConfigResult load_config_text(const std::string& text) {
  ScenarioConfig cfg = default_scenario_config();
  cfg.failures.clear();
  std::vector<std::string> errors;

  static const std::set<std::string> kSections{
      "scenario", "workload", "vserver", "topology", "recovery", "failures"};

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;

  auto err = [&](const std::string& msg) {
    errors.push_back("line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        err("unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (kSections.find(section) == kSections.end())
        err("unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err("expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    auto want_double = [&](double& slot) {
      double v = 0;
      if (parse_double(value, v))
        slot = v;
      else
        err("'" + key + "' wants a number, got '" + value + "'");
    };
    auto want_count = [&](std::size_t& slot) {
      std::uint64_t v = 0;
      if (parse_u64(value, v))
        slot = static_cast<std::size_t>(v);
      else
        err("'" + key + "' wants a nonnegative integer, got '" + value + "'");
    };

    if (section == "scenario") {
      if (key == "name") {
        cfg.name = value;
      } else if (key == "seeds") {
        if (!parse_seed_list(value, cfg.seeds))
          err("seeds wants 'N', 'A..B', or 'a,b,c', got '" + value + "'");
      } else if (key == "duration_s") {
        want_double(cfg.duration_s);
      } else {
        err("unknown key '" + key + "' in [scenario]");
      }
    } else if (section == "workload") {
      auto& w = cfg.workload;
      if (key == "arrival") {
        if (value == "poisson")
          w.arrival = ArrivalProcess::kPoisson;
        else if (value == "deterministic")
          w.arrival = ArrivalProcess::kDeterministic;
        else
          err("arrival must be poisson or deterministic, got '" + value +
              "'");
      } else if (key == "rate_per_s") {
        want_double(w.rate_per_s);
      } else if (key == "service") {
        if (value == "pareto")
          w.service = ServiceProcess::kPareto;
        else if (value == "constant")
          w.service = ServiceProcess::kConstant;
        else
          err("service must be pareto or constant, got '" + value + "'");
      } else if (key == "service_mean_s") {
        want_double(w.service_mean_s);
      } else if (key == "pareto_shape") {
        want_double(w.pareto_shape);
      } else if (key == "size") {
        if (value == "service-proportional")
          w.size = SizePolicy::kServiceProportional;
        else if (value == "fixed")
          w.size = SizePolicy::kFixed;
        else
          err("size must be service-proportional or fixed, got '" + value +
              "'");
      } else if (key == "stream_rate_Bps") {
        want_double(w.stream_rate_Bps);
      } else if (key == "fixed_size_B") {
        want_double(w.fixed_size_B);
      } else if (key == "chunk_interval_ms") {
        want_double(w.chunk_interval_ms);
      } else {
        err("unknown key '" + key + "' in [workload]");
      }
    } else if (section == "vserver") {
      auto& v = cfg.vserver;
      if (key == "vip") {
        v.vip = value;
      } else if (key == "port") {
        std::uint64_t p = 0;
        if (parse_u64(value, p) && p >= 1 && p <= 65535)
          v.port = static_cast<std::uint16_t>(p);
        else
          err("port must be 1..65535, got '" + value + "'");
      } else if (key == "scheduler") {
        auto k = sched::parse_scheduler_kind(value);
        if (k)
          v.scheduler = *k;
        else
          err("scheduler must be one of " +
              join_names(sched::scheduler_kind_names()) + ", got '" + value +
              "'");
      } else if (key == "session_timeout_s") {
        want_double(v.session_timeout_s);
      } else if (key == "monitor_interval_s") {
        want_double(v.monitor_interval_s);
      } else if (key == "window_size") {
        want_count(v.window_size);
      } else if (key == "f_alpha") {
        want_double(v.f_alpha);
      } else {
        err("unknown key '" + key + "' in [vserver]");
      }
    } else if (section == "topology") {
      auto& t = cfg.topology;
      if (key == "clients") {
        want_count(t.clients);
      } else if (key == "servers") {
        want_count(t.servers);
      } else if (key == "core_capacity_Bps") {
        want_double(t.core_capacity_Bps);
      } else if (key == "access_capacity_Bps") {
        want_double(t.access_capacity_Bps);
      } else if (key == "propagation_ms") {
        want_double(t.propagation_ms);
      } else {
        err("unknown key '" + key + "' in [topology]");
      }
    } else if (section == "recovery") {
      auto& r = cfg.recovery;
      if (key == "mode") {
        auto m = parse_recovery_mode(value);
        if (m)
          r.mode = *m;
        else
          err("mode must be restoration, dedicated, or on-the-fly, got '" +
              value + "'");
      } else if (key == "detection_delay_ms") {
        want_double(r.detection_delay_ms);
      } else if (key == "install_latency_ms") {
        want_double(r.install_latency_ms);
      } else if (key == "compute_delay_ms") {
        want_double(r.compute_delay_ms);
      } else {
        err("unknown key '" + key + "' in [recovery]");
      }
    } else if (section == "failures") {
      if (key == "fail" || key == "repair") {
        std::istringstream fs(value);
        std::string link;
        std::string t_text;
        double t_s = 0;
        if (fs >> link >> t_text && parse_double(t_text, t_s)) {
          cfg.failures.push_back({t_s, link, key == "fail"});
        } else {
          err("'" + key + "' wants '<link-id> <time-s>', got '" + value +
              "'");
        }
      } else {
        err("unknown key '" + key + "' in [failures]; use fail or repair");
      }
    } else {
      err("key outside any section");
    }
  }

  for (const auto& msg : validate_config(cfg)) errors.push_back(msg);
  if (!errors.empty()) return {std::nullopt, errors};
  return {cfg, {}};
}

ConfigResult load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {std::nullopt, {"cannot open config file '" + path + "'"}};
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str());
}

}  // namespace lbsim
