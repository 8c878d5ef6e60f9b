#include "semoff/config_io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace semoff {

using nlohmann::json;

namespace {

// Walks one JSON object, dispatching each key to its reader and rejecting
// anything unexpected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  template <class T>
  Reader& num(const char* key, T& out) {
    handlers_[key] = [this, key, &out](const json& v) {
      if (!v.is_number()) fail(at(key), "expected a number");
      if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        out = v.get<T>();
      } else {
        out = v.get<T>();
      }
    };
    return *this;
  }
  Reader& boolean(const char* key, bool& out) {
    handlers_[key] = [this, key, &out](const json& v) {
      if (!v.is_boolean()) fail(at(key), "expected true or false");
      out = v.get<bool>();
    };
    return *this;
  }
  Reader& str(const char* key, std::string& out) {
    handlers_[key] = [this, key, &out](const json& v) {
      if (!v.is_string()) fail(at(key), "expected a string");
      out = v.get<std::string>();
    };
    return *this;
  }
  Reader& custom(const char* key, std::function<void(const json&, const std::string&)> fn) {
    handlers_[key] = [this, key, fn = std::move(fn)](const json& v) { fn(v, at(key)); };
    return *this;
  }

  void run() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      auto h = handlers_.find(it.key());
      if (h == handlers_.end()) fail(at(it.key()), "unknown key");
      h->second(it.value());
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
  }

 private:
  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::map<std::string, std::function<void(const json&)>> handlers_;
};

template <class E>
struct EnumNames;

template <>
struct EnumNames<WeightMode> {
  static constexpr std::pair<WeightMode, const char*> v[] = {
      {WeightMode::g_consistent, "g_consistent"}, {WeightMode::paper, "paper"}};
};
template <>
struct EnumNames<CriticMode> {
  static constexpr std::pair<CriticMode, const char*> v[] = {
      {CriticMode::coordinated, "coordinated"}, {CriticMode::sequential, "sequential"}};
};
template <>
struct EnumNames<CardinalityMode> {
  static constexpr std::pair<CardinalityMode, const char*> v[] = {
      {CardinalityMode::exact, "exact"}, {CardinalityMode::at_most, "at_most"}};
};
template <>
struct EnumNames<ShadowingMode> {
  static constexpr std::pair<ShadowingMode, const char*> v[] = {
      {ShadowingMode::per_slot, "per_slot"}, {ShadowingMode::static_per_run, "static_per_run"}};
};
template <>
struct EnumNames<AccuracyMode> {
  static constexpr std::pair<AccuracyMode, const char*> v[] = {
      {AccuracyMode::track_required, "track_required"}, {AccuracyMode::fixed_min, "fixed_min"}};
};

template <class E>
const char* name_of(E e) {
  for (const auto& [k, n] : EnumNames<E>::v)
    if (k == e) return n;
  return "?";
}

template <class E>
std::function<void(const json&, const std::string&)> enum_reader(E& out) {
  return [&out](const json& v, const std::string& path) {
    if (v.is_string()) {
      for (const auto& [k, n] : EnumNames<E>::v) {
        if (v.get<std::string>() == n) {
          out = k;
          return;
        }
      }
    }
    std::string allowed;
    for (const auto& [k, n] : EnumNames<E>::v) allowed += std::string(allowed.empty() ? "" : ", ") + n;
    Reader::fail(path, "expected one of " + allowed);
  };
}

std::function<void(const json&, const std::string&)> limit_reader(QueueLimit& out) {
  return [&out](const json& v, const std::string& path) {
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "unbounded")) {
      out = QueueLimit::unbounded();
    } else if (v.is_number()) {
      out = QueueLimit::of(v.get<double>());
    } else {
      Reader::fail(path, "expected a number or \"inf\"");
    }
  };
}

json limit_json(const QueueLimit& q) { return q.bounded() ? json(q.value()) : json("inf"); }

void read_curve(const json& v, const std::string& path, AccuracyModel& out) {
  if (!v.is_object()) Reader::fail(path, "expected an object");
  std::string type = "logistic";
  if (v.contains("type")) {
    if (!v["type"].is_string()) Reader::fail(path + ".type", "expected a string");
    type = v["type"].get<std::string>();
  }
  if (type == "logistic") {
    LogisticCurve c;
    Reader r(v, path);
    std::string ignored;
    r.str("type", ignored)
        .num("epsilon_max", c.epsilon_max)
        .num("slope_per_db", c.slope_per_db)
        .num("midpoint_db", c.midpoint_db)
        .run();
    if (!(c.epsilon_max > 0.0 && c.epsilon_max <= 1.0) || !(c.slope_per_db > 0.0))
      Reader::fail(path, "logistic curve needs epsilon_max in (0, 1] and positive slope");
    out = AccuracyModel(c);
  } else if (type == "table") {
    std::vector<AccuracyModel::Point> pts;
    std::string file, ignored;
    Reader r(v, path);
    r.str("type", ignored)
        .str("path", file)
        .custom("points",
                [&pts](const json& p, const std::string& where) {
                  if (!p.is_array()) Reader::fail(where, "expected an array of [gamma_db, epsilon]");
                  for (const auto& e : p) {
                    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                      Reader::fail(where, "expected an array of [gamma_db, epsilon]");
                    pts.emplace_back(e[0].get<double>(), e[1].get<double>());
                  }
                })
        .run();
    if (!file.empty() && !pts.empty()) Reader::fail(path, "give either path or points, not both");
    try {
      out = file.empty() ? AccuracyModel::from_table(pts) : AccuracyModel::load_csv(file);
    } catch (const std::exception& e) {
      Reader::fail(path, e.what());
    }
  } else {
    Reader::fail(path + ".type", "expected \"logistic\" or \"table\"");
  }
}

json curve_json(const AccuracyModel& m) {
  if (!m.is_table()) {
    const auto& c = m.logistic();
    return {{"type", "logistic"},
            {"epsilon_max", c.epsilon_max},
            {"slope_per_db", c.slope_per_db},
            {"midpoint_db", c.midpoint_db}};
  }
  json pts = json::array();
  for (const auto& [g, e] : m.table()) pts.push_back({g, e});
  return {{"type", "table"}, {"points", pts}};
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig run;
  auto& s = run.system;
  auto& t = s.training;
  auto& sc = run.scenario;

  Reader top(j, "$");
  top.custom("system", [&](const json& v, const std::string& p) {
    Reader(v, p)
        .num("num_devices", s.num_devices)
        .num("slot_length", s.slot_length)
        .num("lyapunov_v", s.lyapunov_v)
        .num("arrival_rate_per_sec", s.arrival_rate_per_sec)
        .custom("q_max_local", limit_reader(s.q_max_local))
        .custom("q_max_edge", limit_reader(s.q_max_edge))
        .num("chi_edge", s.chi_edge)
        .num("chi_cloud", s.chi_cloud)
        .num("f_local_max", s.f_local_max)
        .num("f_edge_max", s.f_edge_max)
        .num("flops_per_cycle_local", s.flops_per_cycle_local)
        .num("flops_per_cycle_edge", s.flops_per_cycle_edge)
        .num("alpha_local", s.alpha_local)
        .num("alpha_edge_weighted", s.alpha_edge_weighted)
        .num("task_flops_encode", s.task_flops_encode)
        .num("task_flops_decode", s.task_flops_decode)
        .num("task_flops_total", s.task_flops_total)
        .num("p_tx_max", s.p_tx_max)
        .num("arrival_quantile", s.arrival_quantile)
        .custom("p32_weight_mode", enum_reader(s.p32_weight_mode))
        .custom("critic_mode", enum_reader(s.critic_mode))
        .custom("cardinality", enum_reader(s.cardinality))
        .run();
  });
  top.custom("channel", [&](const json& v, const std::string& p) {
    Reader(v, p)
        .num("bw_edge_total", s.bw_edge_total)
        .num("bw_cloud_total", s.bw_cloud_total)
        .num("noise_psd", s.noise_psd)
        .boolean("shannon_minus_one", s.shannon_minus_one)
        .custom("geometry",
                [&](const json& g, const std::string& gp) {
                  Reader(g, gp)
                      .num("radius_min_m", s.geometry.radius_min_m)
                      .num("radius_max_m", s.geometry.radius_max_m)
                      .num("mcc_distance_m", s.geometry.mcc_distance_m)
                      .run();
                })
        .custom("fading",
                [&](const json& f, const std::string& fp) {
                  Reader(f, fp)
                      .num("rician_k_db", s.fading.rician_k_db)
                      .num("shadowing_std_db", s.fading.shadowing_std_db)
                      .custom("shadowing_mode", enum_reader(s.fading.shadowing_mode))
                      .num("pathloss_intercept_db", s.fading.pathloss_intercept_db)
                      .num("pathloss_slope_db", s.fading.pathloss_slope_db)
                      .run();
                })
        .run();
  });
  top.custom("semantic", [&](const json& v, const std::string& p) {
    Reader(v, p)
        .num("sentence_len", s.sentence_len)
        .num("symbols_per_word", s.symbols_per_word)
        .num("bits_per_word", s.bits_per_word)
        .num("epsilon_min", s.epsilon_min)
        .custom("accuracy_mode", enum_reader(s.accuracy_mode))
        .custom("accuracy_curve",
                [&](const json& c, const std::string& cp) { read_curve(c, cp, s.accuracy_curve); })
        .run();
  });
  top.custom("training", [&](const json& v, const std::string& p) {
    Reader(v, p)
        .num("learning_rate", t.learning_rate)
        .num("adam_beta1", t.adam_beta1)
        .num("adam_beta2", t.adam_beta2)
        .num("adam_epsilon", t.adam_epsilon)
        .num("memory_size", t.memory_size)
        .num("batch_size", t.batch_size)
        .num("training_interval", t.training_interval)
        .num("training_start", t.training_start)
        .num("num_candidates", t.num_candidates)
        .num("candidate_noise_std", t.candidate_noise_std)
        .custom("hidden_layers",
                [&](const json& h, const std::string& hp) {
                  if (!h.is_array()) Reader::fail(hp, "expected an array of integers");
                  t.hidden_layers.clear();
                  for (const auto& e : h) {
                    if (!e.is_number_integer()) Reader::fail(hp, "expected an array of integers");
                    t.hidden_layers.push_back(e.get<int>());
                  }
                })
        .num("total_slots", t.total_slots)
        .num("queue_ref", t.queue_ref)
        .num("edge_gain_ref_db", t.edge_gain_ref_db)
        .num("cloud_gain_ref_db", t.cloud_gain_ref_db)
        .num("gain_scale_db", t.gain_scale_db)
        .run();
  });
  top.custom("scenario", [&](const json& v, const std::string& p) {
    std::string policy;
    Reader(v, p)
        .str("name", sc.name)
        .num("preset", sc.preset)
        .str("policy", policy)
        .num("seed", sc.seed)
        .run();
    if (sc.preset < 0 || sc.preset > 2) Reader::fail(p + ".preset", "expected 0, 1 or 2");
    if (!policy.empty()) {
      try {
        sc.policy = PolicySource::parse(policy, t.num_candidates);
      } catch (const std::exception& e) {
        Reader::fail(p + ".policy", e.what());
      }
    }
  });
  top.run();
  return run;
}

json to_json(const RunConfig& run) {
  const auto& s = run.system;
  const auto& t = s.training;
  json j;
  j["system"] = {
      {"num_devices", s.num_devices},
      {"slot_length", s.slot_length},
      {"lyapunov_v", s.lyapunov_v},
      {"arrival_rate_per_sec", s.arrival_rate_per_sec},
      {"q_max_local", limit_json(s.q_max_local)},
      {"q_max_edge", limit_json(s.q_max_edge)},
      {"chi_edge", s.chi_edge},
      {"chi_cloud", s.chi_cloud},
      {"f_local_max", s.f_local_max},
      {"f_edge_max", s.f_edge_max},
      {"flops_per_cycle_local", s.flops_per_cycle_local},
      {"flops_per_cycle_edge", s.flops_per_cycle_edge},
      {"alpha_local", s.alpha_local},
      {"alpha_edge_weighted", s.alpha_edge_weighted},
      {"task_flops_encode", s.task_flops_encode},
      {"task_flops_decode", s.task_flops_decode},
      {"task_flops_total", s.task_flops_total},
      {"p_tx_max", s.p_tx_max},
      {"arrival_quantile", s.arrival_quantile},
      {"p32_weight_mode", name_of(s.p32_weight_mode)},
      {"critic_mode", name_of(s.critic_mode)},
      {"cardinality", name_of(s.cardinality)},
  };
  j["channel"] = {
      {"bw_edge_total", s.bw_edge_total},
      {"bw_cloud_total", s.bw_cloud_total},
      {"noise_psd", s.noise_psd},
      {"shannon_minus_one", s.shannon_minus_one},
      {"geometry",
       {{"radius_min_m", s.geometry.radius_min_m},
        {"radius_max_m", s.geometry.radius_max_m},
        {"mcc_distance_m", s.geometry.mcc_distance_m}}},
      {"fading",
       {{"rician_k_db", s.fading.rician_k_db},
        {"shadowing_std_db", s.fading.shadowing_std_db},
        {"shadowing_mode", name_of(s.fading.shadowing_mode)},
        {"pathloss_intercept_db", s.fading.pathloss_intercept_db},
        {"pathloss_slope_db", s.fading.pathloss_slope_db}}},
  };
  j["semantic"] = {
      {"sentence_len", s.sentence_len},
      {"symbols_per_word", s.symbols_per_word},
      {"bits_per_word", s.bits_per_word},
      {"epsilon_min", s.epsilon_min},
      {"accuracy_mode", name_of(s.accuracy_mode)},
      {"accuracy_curve", curve_json(s.accuracy_curve)},
  };
  j["training"] = {
      {"learning_rate", t.learning_rate},
      {"adam_beta1", t.adam_beta1},
      {"adam_beta2", t.adam_beta2},
      {"adam_epsilon", t.adam_epsilon},
      {"memory_size", t.memory_size},
      {"batch_size", t.batch_size},
      {"training_interval", t.training_interval},
      {"training_start", t.training_start},
      {"num_candidates", t.num_candidates},
      {"candidate_noise_std", t.candidate_noise_std},
      {"hidden_layers", t.hidden_layers},
      {"total_slots", t.total_slots},
      {"queue_ref", t.queue_ref},
      {"edge_gain_ref_db", t.edge_gain_ref_db},
      {"cloud_gain_ref_db", t.cloud_gain_ref_db},
      {"gain_scale_db", t.gain_scale_db},
  };
  j["scenario"] = {
      {"name", run.scenario.name},
      {"preset", run.scenario.preset},
      {"policy", run.scenario.policy.to_string()},
      {"seed", run.scenario.seed},
  };
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("cannot parse config file " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(run).dump(2) << '\n';
}

}  // namespace semoff
