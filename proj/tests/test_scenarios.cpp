#include <doctest.h>

#include <filesystem>

#include "contact_hybrid/block_inverse.hpp"
#include "contact_hybrid/dynamics.hpp"
#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/executor.hpp"
#include "contact_hybrid/models.hpp"
#include "contact_hybrid/scenarios.hpp"

using namespace contact_hybrid;

TEST_CASE("rocking block defaults satisfy the liftoff inequality") {
  const BuiltScenario b = build_scenario(default_config("rocking_block"));
  RockingBlockParams p;
  CHECK(p.height == 0.10);
  CHECK(p.width == 0.05);
  CHECK(p.mass == 5.0);
  const double rhs = p.width * p.width + 4.0 * p.effective_inertia() / p.mass;
  CHECK(rhs == doctest::Approx(0.0066666666666667));
  CHECK(p.height * p.height > rhs);
  CHECK(b.system->num_constraints() == 4);
}

TEST_CASE("sliding point has two contacts with friction") {
  const BuiltScenario b = build_scenario(default_config("sliding_point"));
  const MechSystem& s = *b.system;
  CHECK(s.num_constraints() == 4);
  CHECK(s.all_normals() == ContactMode{0, 2});
  CHECK(s.constraint(1).parent == 0);
  CHECK(s.constraint(3).parent == 2);
  // Hill normal at 30 degrees.
  const Eigen::RowVectorXd hn = s.constraint_row(2, b.state.q);
  CHECK(std::atan2(-hn(0), hn(1)) == doctest::Approx(std::acos(-1.0) / 6.0));
}

TEST_CASE("curve scenarios use the four curve functions") {
  const Eigen::VectorXd q = Eigen::Vector2d(0.3, -0.2);
  const double expect[] = {0.09 - 0.8, -0.09 - 0.8, 0.027 - 1.6, -0.027 - 1.6};
  const char* names[] = {"ptex_a", "ptex_b", "ptex_c", "ptex_d"};
  for (int i = 0; i < 4; ++i) {
    const BuiltScenario b = build_scenario(default_config(names[i]));
    CHECK(b.system->constraint_value(0, q) == doctest::Approx(expect[i]));
    CHECK(b.mode == ContactMode{0});
  }
}

TEST_CASE("every catalog scenario starts in its domain") {
  for (const auto& spec : scenario_catalog()) {
    CAPTURE(spec.name);
    const BuiltScenario b = build_scenario(default_config(spec.name));
    CHECK(in_domain(*b.system, b.mode, b.state, b.options.tol));
  }
}

TEST_CASE("hexapod stance modes are invertible and airborne legs are free") {
  const BuiltScenario b = build_scenario(default_config("planar_hexapod"));
  const MechSystem& s = *b.system;
  CHECK(s.has_massless());
  int checked = 0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << s.num_constraints()); ++bits) {
    const ContactMode m(bits);
    if (!s.valid_mode(m)) continue;
    CAPTURE(s.mode_id(m));
    const auto cols = s.active_coordinates(m);
    const bool feet_only = m.subset_of(ContactMode{0, 1, 2, 3});
    if (feet_only || constraints_full_rank(constraint_matrix(s, m, b.state.q, cols)))
      CHECK_NOTHROW(mode_block_inverse(s, m, b.state.q));
    const auto active = s.active_coordinates(m);
    const auto free = s.free_coordinates(m);
    CHECK(active.size() + free.size() == static_cast<std::size_t>(s.dofs()));
    ++checked;
  }
  CHECK(checked > 10);
  CHECK(s.free_coordinates(ContactMode{}).size() == 2);
  CHECK(s.free_coordinates(ContactMode{0}).size() == 1);
}

TEST_CASE("scenario files parse and round-trip") {
  const std::string text =
      "scenario: rocking_block\n"
      "parameters:\n"
      "  height: 0.12\n"
      "initial:\n"
      "  impact_speed: 0.04\n"
      "  mode: [l_n, l_t]\n"
      "run:\n"
      "  delta_t: 0.01\n"
      "  t_end: 0.5\n"
      "  zeno_policy: abort\n"
      "tolerances:\n"
      "  domain: 1.0e-8\n";
  const ScenarioConfig c = parse_scenario(text, "inline.yaml");
  CHECK(c.parameters.at("height") == 0.12);
  CHECK(c.initial.at("impact_speed") == 0.04);
  CHECK(c.run.delta_t == 0.01);
  CHECK(c.t_end == 0.5);
  CHECK(c.run.zeno.policy == ZenoPolicy::Abort);
  CHECK(c.run.tol.domain == 1e-8);
  CHECK(c.run.zeno.min_events == 20);
  const BuiltScenario b = build_scenario(c);
  CHECK(b.mode == ContactMode{0, 1});

  const ScenarioConfig back = parse_scenario(dump_scenario(c), "dump.yaml");
  CHECK(back.parameters == c.parameters);
  CHECK(back.initial == c.initial);
  CHECK(back.run.delta_t == c.run.delta_t);
  CHECK(back.t_end == c.t_end);
  CHECK(back.run.tol.domain == c.run.tol.domain);
  CHECK(back.run.zeno.min_events == c.run.zeno.min_events);
}

TEST_CASE("validation errors name the field and line") {
  auto message = [](const std::string& text) {
    try {
      build_scenario(parse_scenario(text, "bad.yaml"));
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("scenario: ball_floor\nparameters:\n  mass: 1\n  colour: 2\n").find("bad.yaml:4") !=
        std::string::npos);
  CHECK(message("scenario: ball_floor\nparameters:\n  mass: -1\n").find("mass") != std::string::npos);
  CHECK(message("scenario: ball_floor\nrun:\n  delta_t: -0.1\n").find("delta_t") != std::string::npos);
  CHECK(message("scenario: nowhere\n").find("unknown scenario") != std::string::npos);
  CHECK(message("scenario: ball_floor\nextra: 1\n").find("extra") != std::string::npos);
  CHECK(message("scenario: ball_floor\ninitial:\n  mode: n1\n").find("domain") != std::string::npos);
  CHECK(message("scenario: ball_floor\nrun:\n  zeno_policy: maybe\n").find("zeno") != std::string::npos);
}

TEST_CASE("sweep keys") {
  ScenarioConfig c = default_config("rocking_block");
  set_sweep_value(c, "initial.impact_speed", 0.07);
  set_sweep_value(c, "run.delta_t", 0.01);
  set_sweep_value(c, "parameters.mass", 2.0);
  CHECK(c.initial.at("impact_speed") == 0.07);
  CHECK(c.run.delta_t == 0.01);
  CHECK(c.parameters.at("mass") == 2.0);
  CHECK_THROWS_AS(set_sweep_value(c, "parameters.colour", 1.0), ValidationError);
  const auto keys = sweepable_keys(c);
  CHECK(std::find(keys.begin(), keys.end(), "initial.impact_speed") != keys.end());
}

TEST_CASE("shipped scenario files load") {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(CONTACT_HYBRID_SOURCE_DIR "/scenarios")) {
    CAPTURE(e.path().string());
    CHECK_NOTHROW(build_scenario(load_scenario_file(e.path().string())));
    ++n;
  }
  CHECK(n >= 9);
}
