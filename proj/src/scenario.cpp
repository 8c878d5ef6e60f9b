#include "semoff/scenario.hpp"

#include <stdexcept>

namespace semoff {

PolicySource PolicySource::parse(const std::string& text, int default_candidates) {
  PolicySource p;
  if (text == "exhaustive") {
    p.kind = Kind::exhaustive;
  } else if (text == "random") {
    p.kind = Kind::random;
  } else if (text == "drlh") {
    p.kind = Kind::drlh;
    p.num_candidates = default_candidates;
  } else if (text.rfind("drlh:", 0) == 0) {
    p.kind = Kind::drlh;
    std::size_t used = 0;
    const std::string n = text.substr(5);
    try {
      p.num_candidates = std::stoi(n, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != n.size() || p.num_candidates < 1)
      throw std::invalid_argument("bad candidate count in policy '" + text + "'");
  } else {
    throw std::invalid_argument("unknown policy '" + text +
                                "' (expected drlh:N, exhaustive or random)");
  }
  return p;
}

std::string PolicySource::to_string() const {
  switch (kind) {
    case Kind::exhaustive: return "exhaustive";
    case Kind::random: return "random";
    case Kind::drlh: break;
  }
  return "drlh:" + std::to_string(num_candidates);
}

SystemConfig apply_preset(SystemConfig c, int preset) {
  switch (preset) {
    case 0: break;
    case 1:
      c.arrival_rate_per_sec = 100.0;
      c.q_max_local = QueueLimit::of(5.0);
      c.q_max_edge = QueueLimit::of(1.0);
      break;
    case 2:
      c.arrival_rate_per_sec = 750.0;
      c.q_max_local = QueueLimit::unbounded();
      c.q_max_edge = QueueLimit::unbounded();
      break;
    default: throw std::invalid_argument("unknown scenario preset " + std::to_string(preset));
  }
  return c;
}

SystemConfig effective_system(const RunConfig& run) {
  return apply_preset(run.system, run.scenario.preset);
}

}  // namespace semoff
