#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pavemind/bayesnet/bayesnet.hpp"
#include "test_util.hpp"

using namespace pavemind;
using namespace pavemind::bayesnet;

namespace {

Dag chain() {
  Dag d;
  d.add_node("A", {"a0", "a1"});
  d.add_node("B", {"b0", "b1", "b2"});
  d.add_node("C", {"c0", "c1"});
  d.add_edge("A", "B");
  d.add_edge("B", "C");
  return d;
}

}  // namespace

TEST_CASE("structure validation") {
  SUBCASE("cycle is reported with its path") {
    auto d = chain();
    d.add_edge("C", "A");
    try {
      validate_structure(d);
      FAIL("expected StructureError");
    } catch (const StructureError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("cycle") != std::string::npos);
      for (const char* n : {"A", "B", "C"}) CHECK(msg.find(n) != std::string::npos);
    }
  }
  SUBCASE("undeclared parent") {
    Dag d;
    d.add_node("A", {"x", "y"});
    d.parents["A"] = {"Z"};
    CHECK_THROWS_AS(validate_structure(d), StructureError);
  }
  SUBCASE("single-label domain") {
    Dag d;
    d.add_node("A", {"x"});
    CHECK_THROWS_AS(validate_structure(d), StructureError);
  }
  SUBCASE("topological order puts parents first") {
    const auto order = topological_order(chain());
    CHECK(order == std::vector<std::string>{"A", "B", "C"});
  }
}

TEST_CASE("uniform tables give uniform posteriors") {
  const auto d = chain();
  const auto cpts = uniform_cpts(d);
  for (const auto& p : query(d, cpts, {"B", {{"C", "c1"}}})) CHECK(p == doctest::Approx(1.0 / 3.0));
  for (const auto& p : query(d, cpts, {"A", {}})) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("learn_cpts applies Laplace smoothing") {
  Dag d;
  d.add_node("P", {"n", "y"});
  d.add_node("X", {"a", "b", "c"});
  d.add_edge("P", "X");
  const std::vector<Record> recs{{{"P", "y"}, {"X", "a"}}, {{"P", "y"}, {"X", "a"}}, {{"P", "y"}, {"X", "b"}},
                                 {{"P", "n"}, {"X", "c"}}};
  const auto c1 = learn_cpts(d, recs, 1.0);
  const std::vector<std::size_t> yes{1}, no{0};
  CHECK(c1.at("X").probability(0, yes) == doctest::Approx(3.0 / 6.0));
  CHECK(c1.at("X").probability(2, yes) == doctest::Approx(1.0 / 6.0));
  CHECK(c1.at("P").probability(1, {}) == doctest::Approx(4.0 / 6.0));
  const auto c0 = learn_cpts(d, recs, 0.0);
  CHECK(c0.at("X").probability(0, yes) == doctest::Approx(2.0 / 3.0));
  CHECK(c0.at("X").probability(1, no) == 0.0);

  SUBCASE("unobserved parent configuration with alpha 0") {
    const std::vector<Record> only_yes{{{"P", "y"}, {"X", "a"}}};
    const auto c = learn_cpts(d, only_yes, 0.0);
    for (std::size_t v = 0; v < 3; ++v) CHECK(c.at("X").probability(v, no) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("bad label") {
    CHECK_THROWS_AS(learn_cpts(d, {{{"P", "maybe"}}}, 1.0), std::invalid_argument);
  }
  SUBCASE("negative alpha") { CHECK_THROWS_AS(learn_cpts(d, recs, -1.0), std::invalid_argument); }
}

TEST_CASE("query errors") {
  const auto d = chain();
  const auto cpts = uniform_cpts(d);
  CHECK_THROWS_AS(query(d, cpts, {"B", {{"Q", "x"}}}), std::invalid_argument);
  CHECK_THROWS_AS(query(d, cpts, {"B", {{"A", "nope"}}}), std::invalid_argument);
  CHECK_THROWS(query(d, cpts, {"Nope", {}}));
}

TEST_CASE("three-node chain matches the joint table") {
  Rng rng(2);
  auto d = chain();
  std::uniform_real_distribution<double> u(0.05, 1.0);
  CptSet cpts = uniform_cpts(d);
  for (auto& [name, cpt] : cpts)
    for (std::size_t r = 0; r < cpt.row_count(); ++r) {
      auto row = cpt.mutable_row_at(r);
      double z = 0.0;
      for (double& c : row) z += (c = u(rng));
      for (double& c : row) c /= z;
    }
  for (const auto& [target, ev] : std::vector<std::pair<std::string, Evidence>>{
           {"A", {{"C", "c1"}}}, {"B", {{"A", "a0"}, {"C", "c0"}}}, {"C", {}}, {"A", {{"B", "b2"}}}}) {
    const auto got = query(d, cpts, {target, ev});
    const auto want = oracle::joint_posterior(d, cpts, target, ev);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
  }
}

TEST_CASE("random networks match full-joint enumeration") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto net = oracle::random_network(rng, 6, 3);
    const auto& target = net.dag.nodes[static_cast<std::size_t>(u(rng) * net.dag.nodes.size())].name;
    Evidence ev;
    for (const auto& n : net.dag.nodes)
      if (n.name != target && u(rng) < 0.4) ev[n.name] = n.domain[static_cast<std::size_t>(u(rng) * n.domain.size())];
    const auto got = query(net.dag, net.cpts, {target, ev});
    const auto want = oracle::joint_posterior(net.dag, net.cpts, target, ev);
    double sum = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i] - want[i]) < 1e-12);
      sum += got[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("structure text format") {
  const std::string text =
      "# rank network\n"
      "node MP : no|yes\n"
      "node SS : 0|1\n"
      "edge MP -> SS\n";
  const auto d = parse_structure(text);
  CHECK(d.nodes.size() == 2);
  CHECK(d.parents_of("SS") == std::vector<std::string>{"MP"});
  const auto again = parse_structure(format_structure(d));
  CHECK(again.nodes.size() == d.nodes.size());
  CHECK(again.parents == d.parents);
  CHECK_THROWS_AS(parse_structure("node A : x|y\nedge A -> B\n"), StructureError);
  CHECK_THROWS_AS(parse_structure("bogus line\n"), StructureError);

  testutil::TempDir dir("bn");
  testutil::write_file(dir / "s.txt", text);
  CHECK(load_structure(dir / "s.txt").nodes.size() == 2);
  CHECK_THROWS_AS(load_structure(dir / "missing.txt"), StructureError);
}
