#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "semoff/accuracy.hpp"
#include "semoff/config.hpp"
#include "semoff/config_io.hpp"
#include "semoff/scenario.hpp"
#include "semoff/types.hpp"

using namespace semoff;

namespace {

bool names(const std::vector<ConfigViolation>& v, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.field == field; });
}

}  // namespace

TEST_CASE("default configuration is valid") {
  const SystemConfig c;
  CHECK(validate_config(c).empty());
  CHECK_NOTHROW(require_valid(c));
  CHECK(c.slot_length == 0.01);
  CHECK(c.bandwidth_edge() == doctest::Approx(250e3));
  CHECK(c.bandwidth_cloud() == doctest::Approx(25e3));
  CHECK(c.mean_arrivals_per_slot() == doctest::Approx(1.0));
}

TEST_CASE("chi_edge above the device count is a violation") {
  SystemConfig c;
  c.chi_edge = 9;
  const auto v = validate_config(c);
  REQUIRE(names(v, "chi_edge"));
  CHECK(std::any_of(v.begin(), v.end(),
                    [](const auto& x) { return x.rule == "chi_edge exceeds device count"; }));
  CHECK_THROWS_AS(require_valid(c), std::invalid_argument);
}

TEST_CASE("task FLOP split must add up") {
  SystemConfig c;
  c.task_flops_total = 5e9;
  CHECK(names(validate_config(c), "task_flops_total"));
}

TEST_CASE("local threshold below the mean arrivals is rejected") {
  SystemConfig c;
  c.arrival_rate_per_sec = 750;
  c.q_max_local = QueueLimit::of(5);
  CHECK(names(validate_config(c), "q_max_local"));
  c.q_max_local = QueueLimit::unbounded();
  CHECK(validate_config(c).empty());
}

TEST_CASE("non-positive physical parameters are reported together") {
  SystemConfig c;
  c.slot_length = 0;
  c.lyapunov_v = -1;
  c.noise_psd = 0;
  const auto v = validate_config(c);
  CHECK(names(v, "slot_length"));
  CHECK(names(v, "lyapunov_v"));
  CHECK(names(v, "noise_psd"));
}

TEST_CASE("queue limits") {
  CHECK_FALSE(QueueLimit::unbounded().bounded());
  CHECK_THROWS_AS(QueueLimit::unbounded().value(), std::logic_error);
  CHECK(QueueLimit::of(5).value() == 5);
}

TEST_CASE("policy rendering and counts") {
  Policy p = Policy::none(4);
  p.rho_edge = {1, 0, 1, 0};
  p.rho_cloud = {0, 0, 0, 1};
  CHECK(p.to_string() == "1010/0001");
  CHECK(p.edge_count() == 2);
  CHECK(p.cloud_count() == 1);
}

TEST_CASE("slot state shape checks") {
  SlotState s = SlotState::zeros(3);
  CHECK(s.well_formed());
  s.q_local[1] = -1;
  CHECK_FALSE(s.well_formed());
  s.q_local[1] = 0;
  s.z_edge.pop_back();
  CHECK_FALSE(s.well_formed());
}

TEST_CASE("presets override the system block") {
  RunConfig run;
  run.system.arrival_rate_per_sec = 42;
  run.scenario.preset = 1;
  auto a = effective_system(run);
  CHECK(a.arrival_rate_per_sec == 100);
  CHECK(a.q_max_local == QueueLimit::of(5));
  CHECK(a.q_max_edge == QueueLimit::of(1));
  run.scenario.preset = 2;
  auto b = effective_system(run);
  CHECK(b.arrival_rate_per_sec == 750);
  CHECK_FALSE(b.q_max_local.bounded());
  CHECK_FALSE(b.q_max_edge.bounded());
  run.scenario.preset = 0;
  CHECK(effective_system(run).arrival_rate_per_sec == 42);
}

TEST_CASE("policy source parsing") {
  CHECK(PolicySource::parse("drlh:16").num_candidates == 16);
  CHECK(PolicySource::parse("drlh", 32).num_candidates == 32);
  CHECK(PolicySource::parse("exhaustive").kind == PolicySource::Kind::exhaustive);
  CHECK(PolicySource::parse("random").kind == PolicySource::Kind::random);
  CHECK(PolicySource::parse("drlh:8").to_string() == "drlh:8");
  CHECK_THROWS(PolicySource::parse("greedy"));
  CHECK_THROWS(PolicySource::parse("drlh:x"));
}

TEST_CASE("config json round trip") {
  RunConfig run;
  run.system.num_devices = 6;
  run.system.q_max_edge = QueueLimit::unbounded();
  run.system.critic_mode = CriticMode::sequential;
  run.system.accuracy_curve = AccuracyModel::from_table({{0, 0.5}, {10, 0.9}, {20, 0.98}});
  run.system.training.hidden_layers = {32, 16};
  run.scenario.policy = PolicySource::parse("drlh:8");
  run.scenario.seed = 77;
  const RunConfig back = run_config_from_json(to_json(run));
  CHECK(back == run);
}

TEST_CASE("config json rejects unknown keys with their path") {
  const auto j = nlohmann::json::parse(R"({"system": {"num_devices": 4, "foo": 1}})");
  try {
    run_config_from_json(j);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("$.system.foo") != std::string::npos);
  }
}

TEST_CASE("config json accepts unbounded thresholds") {
  const auto j = nlohmann::json::parse(
      R"({"system": {"q_max_local": "inf", "q_max_edge": "unbounded"}, "scenario": {"policy": "random"}})");
  const auto run = run_config_from_json(j);
  CHECK_FALSE(run.system.q_max_local.bounded());
  CHECK_FALSE(run.system.q_max_edge.bounded());
  CHECK(run.scenario.policy.kind == PolicySource::Kind::random);
}

TEST_CASE("missing config file names the path") {
  try {
    load_run_config("/nonexistent/dir/run.json");
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/run.json") != std::string::npos);
  }
}

TEST_CASE("config file save and load") {
  const auto path = std::filesystem::temp_directory_path() / "semoff_cfg_roundtrip.json";
  RunConfig run;
  run.scenario.preset = 2;
  run.system.lyapunov_v = 4;
  save_run_config(run, path.string());
  CHECK(load_run_config(path.string()) == run);
  std::filesystem::remove(path);
}

TEST_CASE("logistic accuracy curve and its inverse") {
  const AccuracyModel m;
  CHECK(m.ceiling() == doctest::Approx(0.985));
  CHECK(m.epsilon(4.0) == doctest::Approx(0.985 / 2));
  for (double eps : {0.3, 0.6, 0.9, 0.95}) {
    const auto g = m.gamma_db_for(eps);
    REQUIRE(g);
    CHECK(*g == doctest::Approx(4.0 - std::log(0.985 / eps - 1.0) / 0.5));
    CHECK(m.epsilon(*g) == doctest::Approx(eps));
  }
  CHECK_FALSE(m.gamma_db_for(0.985));
}

TEST_CASE("tabulated accuracy curve interpolates") {
  const auto m = AccuracyModel::from_table({{0, 0.5}, {10, 0.9}});
  CHECK(m.ceiling() == 0.9);
  CHECK(m.epsilon(5) == doctest::Approx(0.7));
  CHECK(*m.gamma_db_for(0.8) == doctest::Approx(7.5));
  CHECK_FALSE(m.gamma_db_for(0.95));
  CHECK_THROWS(AccuracyModel::from_table({{0, 0.5}, {0, 0.6}}));
}
