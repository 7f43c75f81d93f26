#include <cstdio>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "pro/generators.hpp"
#include "pro/json_io.hpp"
#include "pro/pri.hpp"
#include "pro/rng.hpp"

using namespace pro;
using nlohmann::json;

TEST_CASE("instances survive a serialization round trip") {
  Rng rng(404);
  for (int i = 0; i < 20; ++i) {
    RandomGproOptions opt;
    opt.pairs = (i % 3 == 0) ? 1 : 0;
    if (i % 4 == 0) opt.zapping = 0.15;
    if (opt.pairs) opt.p = 0.3;
    const int n = 4 + static_cast<int>(rng.below(5));
    const GproInstance inst = random_gpro(n, 4, rng.bits(), opt);
    const GproInstance back = instance_from_json(to_json(inst));
    CHECK(core_equal(inst, back));
    CHECK(validate(back).empty());
  }
}

TEST_CASE("optional instance fields take their documented defaults") {
  const json j = {
      {"nodes", {"s", "t"}},
      {"v_s", 0},
      {"v_t", 1},
      {"edges", {{{"from", 0}, {"to", 1}}, {{"from", 1}, {"to", 1}, {"cost", 0.0}}}},
  };
  const GproInstance inst = instance_from_json(j);
  CHECK(inst.edges[0].weight == 1.0);
  CHECK(inst.edges[0].cost == 1.0);
  CHECK_FALSE(inst.edges[0].free);
  CHECK(inst.exclusivity.empty());
  CHECK_FALSE(inst.zapping.has_value());
  CHECK(validate(inst).empty());
}

TEST_CASE("decimal strings are accepted for numeric fields") {
  const json j = {
      {"nodes", {"s", "t"}},
      {"v_s", 0},
      {"v_t", 1},
      {"edges",
       {{{"from", 0}, {"to", 1}, {"weight", "0.25"}, {"cost", "1.5"}},
        {{"from", 1}, {"to", 1}, {"cost", "0"}}}},
      {"zapping", "0.15"},
  };
  const GproInstance inst = instance_from_json(j);
  CHECK(inst.edges[0].weight == doctest::Approx(0.25));
  CHECK(inst.edges[0].cost == doctest::Approx(1.5));
  REQUIRE(inst.zapping.has_value());
  CHECK(*inst.zapping == doctest::Approx(0.15));

  const json s = {
      {"states", {"a", "t"}},
      {"target", 1},
      {"actions",
       {json::array({json::array({{{"to", 1}, {"p", "1.0"}, {"c", "2.5"}}})}),
        json::array({json::array({{{"to", 1}, {"p", 1.0}, {"c", 0.0}}})})}},
  };
  const SspInstance ssp = ssp_from_json(s);
  CHECK(ssp.actions[0][0].out[0].c == doctest::Approx(2.5));
}

TEST_CASE("policies are stored as edge id lists and mapped back to slots") {
  Rng rng(405);
  const GproInstance inst = random_gpro(6, 4, 405, {});
  Rng draw(406);
  const Policy pol = random_feasible_policy(inst, draw);
  const json j = to_json(inst, pol);
  REQUIRE(j.contains("active"));
  const Policy back = policy_from_json(inst, j);
  CHECK(back == pol);

  // A fixed edge id in the list is an error, not a silent skip.
  json bad = j;
  for (int e = 0; e < inst.num_edges(); ++e) {
    if (!inst.edges[e].free) {
      bad["active"].push_back(e);
      break;
    }
  }
  CHECK_THROWS_AS((void)policy_from_json(inst, bad), std::runtime_error);
}

TEST_CASE("ssp instances and policies round trip") {
  Rng rng(407);
  for (int i = 0; i < 10; ++i) {
    const SspInstance inst = random_ssp(5, 3, rng.bits(), {});
    const SspInstance back = ssp_from_json(to_json(inst));
    CHECK(back.names == inst.names);
    CHECK(back.target == inst.target);
    CHECK(back.actions == inst.actions);
  }
  const SspPolicy pol{{2, 0, 1}};
  CHECK(ssp_policy_from_json(to_json(pol)) == pol);
}

TEST_CASE("solver traces report switching passes and evaluation passes") {
  GproInstance inst;
  inst.names = {"s", "a", "t"};
  inst.v_s = 0;
  inst.v_t = 2;
  inst.edges.push_back({0, 2, 1.0, 1.0, false});
  inst.edges.push_back({0, 1, 1.0, 0.25, true});
  inst.edges.push_back({1, 2, 1.0, 1.0, false});
  inst.edges.push_back({2, 2, 1.0, 0.0, false});
  inst.finalize();
  REQUIRE(validate(inst).empty());

  const PriTrace t = solve(inst, all_active_policy(inst));
  const json j = to_json(inst, t);
  CHECK(j["iterations"].get<int>() == t.switch_count);
  CHECK(j["evaluations"].get<int>() == t.iteration_count);
  CHECK(j["iterations"].get<int>() + 1 == j["evaluations"].get<int>());
  REQUIRE(j.contains("iterates"));
  CHECK(j["iterates"].size() == static_cast<size_t>(t.iteration_count));
  // Active sets are edge ids, so the detour edge id 1 shows up verbatim.
  bool found = false;
  for (const auto& it : j["iterates"])
    for (const auto& e : it["policy"])
      if (e.get<int>() == 1) found = true;
  CHECK(found);
}

TEST_CASE("file helpers report the offending path") {
  const std::string missing = "/tmp/pro_io_does_not_exist.json";
  std::remove(missing.c_str());
  try {
    (void)load_json(missing);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(missing) != std::string::npos);
  }

  const std::string garbled = "/tmp/pro_io_garbled.json";
  {
    std::ofstream out(garbled);
    out << "{ nope";
  }
  CHECK_THROWS_AS((void)load_json(garbled), std::runtime_error);
  std::remove(garbled.c_str());

  const std::string ok = "/tmp/pro_io_ok.json";
  Rng rng(408);
  const GproInstance inst = random_gpro(5, 3, 408, {});
  save_json(ok, to_json(inst));
  CHECK(core_equal(load_instance(ok), inst));
  std::remove(ok.c_str());
}
