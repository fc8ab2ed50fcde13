#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "fraglump/network.hpp"
#include "oracles.hpp"

using namespace fraglump;

namespace {

Model load_model(const std::string& name) {
  std::ifstream in(std::string(FRAGLUMP_MODELS_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  ParseResult res = parse_model(os.str());
  REQUIRE(res.ok());
  REQUIRE(validate_model(*res.model).empty());
  return *res.model;
}

int species_index(const ReactionNetwork& net, const std::string& name) {
  for (std::size_t i = 0; i < net.species.size(); ++i)
    if (net.species[i].name == name) return static_cast<int>(i);
  FAIL("no species named " + name);
  return -1;
}

// Consumption and change columns of the scaffold network, species rows
// (A, B, C, AB, BC, ABC), reaction columns grouped by rule then ordered by
// consumed species.
const int kP[6][8] = {
    {1, 1, 0, 0, 0, 0, 0, 0},
    {1, 0, 1, 0, 0, 0, 0, 0},
    {0, 0, 1, 1, 0, 0, 0, 0},
    {0, 0, 0, 1, 1, 0, 0, 0},
    {0, 1, 0, 0, 0, 0, 1, 0},
    {0, 0, 0, 0, 0, 1, 0, 1},
};
const int kC[6][8] = {
    {-1, -1, 0, 0, 1, 1, 0, 0},
    {-1, 0, -1, 0, 1, 0, 1, 0},
    {0, 0, -1, -1, 0, 0, 1, 1},
    {1, 0, 0, -1, -1, 0, 0, 1},
    {0, -1, 1, 0, 0, 1, -1, 0},
    {0, 1, 0, 1, 0, -1, 0, -1},
};

}  // namespace

TEST_CASE("scaffold model expands to six species and eight reactions") {
  ReactionNetwork net = expand(load_model("example1_core.ka"));
  REQUIRE(net.species.size() == 6);
  REQUIRE(net.reactions.size() == 8);
  CHECK(net.species[0].name == "A");
  CHECK(net.species[1].name == "B");
  CHECK(net.species[2].name == "C");
  CHECK(net.species[3].name == "AB");
  CHECK(net.species[4].name == "BC");
  CHECK(net.species[5].name == "ABC");
  CHECK(net.conservation_violations().empty());

  for (int j = 0; j < 8; ++j) {
    std::vector<long> a = net.consumption_vector(j);
    std::vector<long> nu = net.change_vector(j);
    for (int i = 0; i < 6; ++i) {
      INFO("entry (" << i << "," << j << ")");
      CHECK(a[i] == kP[i][j]);
      CHECK(nu[i] == kC[i][j]);
    }
  }
  // constants follow the rules: (k1, k1, k2, k2, k1-, k1-, k2-, k2-)
  const double want_k[8] = {1.0, 1.0, 0.2, 0.2, 2.0, 2.0, 0.3, 0.3};
  for (int j = 0; j < 8; ++j) {
    CHECK(net.reactions[j].k == Catch::Approx(want_k[j]));
    CHECK(net.reactions[j].c == Catch::Approx(want_k[j]));  // V = 1
  }
}

TEST_CASE("trimer-aware variant expands to the same eight reactions") {
  ReactionNetwork net = expand(load_model("example1_trimer.ka"));
  REQUIRE(net.species.size() == 6);
  REQUIRE(net.reactions.size() == 8);
  int abc = species_index(net, "ABC");
  int bc = species_index(net, "BC");
  for (const Reaction& r : net.reactions) {
    if (r.consumed(abc) == 1 && r.produced(bc) == 1)
      CHECK(r.k == Catch::Approx(2.0));  // trimer unbinding shares the rate
  }
}

TEST_CASE("model with no rules keeps only the initial species") {
  ParseResult res = parse_model(
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "%init: 2 A(), 1 B()\n");
  REQUIRE(res.ok());
  ReactionNetwork net = expand(*res.model);
  CHECK(net.species.size() == 2);
  CHECK(net.reactions.empty());
}

TEST_CASE("species cap aborts expansion loudly") {
  Model m = load_model("example1_core.ka");
  CHECK_THROWS_AS(expand(m, 3), CapExceeded);
}

TEST_CASE("deterministic rates follow mass action") {
  ReactionNetwork net = expand(load_model("example1_core.ka"));
  std::vector<double> z = {0.7, 1.3, 0.5, 0.2, 0.4, 0.1};
  const double k1 = 1.0, k2 = 0.2, k1r = 2.0, k2r = 0.3;
  std::vector<double> expected = {
      k1 * z[0] * z[1], k1 * z[0] * z[4], k2 * z[1] * z[2], k2 * z[3] * z[2],
      k1r * z[3],       k1r * z[5],       k2r * z[4],       k2r * z[5]};
  for (int j = 0; j < 8; ++j)
    CHECK(deterministic_rate(net, j, z) == Catch::Approx(expected[j]));

  std::vector<double> ones(6, 1.0);
  CHECK(deterministic_rate(net, 0, ones) == Catch::Approx(1.0));
  std::vector<double> zero_b = {1, 0, 1, 1, 1, 1};
  CHECK(deterministic_rate(net, 0, zero_b) == 0.0);
  CHECK_THROWS_AS(deterministic_rate(net, 99, z), std::out_of_range);
}

TEST_CASE("propensities use falling factorials") {
  ReactionNetwork net = expand(load_model("example1_core.ka"));
  // state {A, 3B, C}
  std::vector<long> x0 = {1, 3, 1, 0, 0, 0};
  CHECK(propensity(net, 0, x0) == Catch::Approx(3.0 * 1.0));  // 3 c1
  CHECK(propensity(net, 2, x0) == Catch::Approx(3.0 * 0.2));  // 3 c2
  // state {AB, 2B, C}
  std::vector<long> x1 = {0, 2, 1, 1, 0, 0};
  CHECK(propensity(net, 2, x1) == Catch::Approx(2.0 * 0.2));  // 2 c2
  CHECK(propensity(net, 3, x1) == Catch::Approx(0.2));
  // any missing reactant kills the propensity
  std::vector<long> empty(6, 0);
  for (int j = 0; j < 8; ++j) CHECK(propensity(net, j, empty) == 0.0);
}

TEST_CASE("rate conversion depends on volume and molecularity") {
  CHECK(convert_rate(1.0, 2, 20.0) == Catch::Approx(0.05));
  CHECK(convert_rate(2.0, 1, 20.0) == Catch::Approx(2.0));
  CHECK(convert_rate(2.0, 1, 7.0) == Catch::Approx(2.0));
  CHECK(convert_rate(1.5, 0, 4.0) == Catch::Approx(6.0));
  CHECK(convert_rate(0.0, 2, 3.0) == 0.0);
  CHECK_THROWS_AS(convert_rate(1.0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(convert_rate(1.0, 2, 0.0), std::invalid_argument);

  // f_j(x/V) = g_j(x)/V across a volume sweep for a bimolecular reaction
  for (double V : {1.0, 4.0, 20.0}) {
    double k = 1.0;
    double c = convert_rate(k, 2, V);
    for (long xa : {3L, 10L})
      for (long xb : {2L, 7L}) {
        double f = k * (xa / V) * (xb / V);
        double g = c * xa * xb;
        CHECK(f == Catch::Approx(g / V));
      }
  }
}

TEST_CASE("volume override rescales stochastic constants only") {
  Model m = load_model("example1_core.ka");
  ReactionNetwork net = expand(m, 10000, 20.0);
  CHECK(net.reactions[0].k == Catch::Approx(1.0));
  CHECK(net.reactions[0].c == Catch::Approx(0.05));  // bimolecular
  CHECK(net.reactions[4].c == Catch::Approx(2.0));   // unimolecular
}

TEST_CASE("expansion is a fixed point") {
  ReactionNetwork net = expand(load_model("example1_trimer.ka"));
  // applying every reaction to every species multiset stays inside the set
  for (const Reaction& r : net.reactions)
    for (const auto& [s, n] : r.produce) {
      CHECK(s >= 0);
      CHECK(s < static_cast<int>(net.species.size()));
    }
  // keys are unique
  std::set<std::string> keys;
  for (const auto& sp : net.species) keys.insert(sp.key);
  CHECK(keys.size() == net.species.size());
}

TEST_CASE("summed instance propensities match embedding counts") {
  // rule-level symmetry check on random small mixtures:
  //   sum_j g_j(x) over a rule's reactions == c * |Emb(lhs -> x)| / |Aut(lhs)|
  // With V = 1 the declared det constants equal the stochastic ones, and in
  // this model every reaction descends from exactly one rule.
  Model m = load_model("example1_trimer.ka");
  ReactionNetwork net = expand(m);
  for (const Reaction& r : net.reactions) REQUIRE(r.rules.size() == 1);
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<long> x(net.species.size());
    for (auto& v : x) v = std::uniform_int_distribution<long>(0, 3)(rng);
    SiteGraph mixture = state_to_graph(net, x);
    for (const Rule& rule : m.rules) {
      double total = 0;
      for (std::size_t j = 0; j < net.reactions.size(); ++j)
        if (net.reactions[j].rules.front() == rule.name)
          total += propensity(net, static_cast<int>(j), x);
      double emb = static_cast<double>(count_embeddings(rule.lhs, mixture));
      double aut = static_cast<double>(
          count_embeddings(rule.lhs, rule.lhs, MatchMode::Exact));
      CHECK(total ==
            Catch::Approx(rule.rate.value * emb / aut).margin(1e-12));
    }
  }
}

TEST_CASE("homodimer rules get the standard symmetry treatment") {
  ParseResult res = parse_model(
      "%agent: E(d!{E.d})\n"
      "'dim'  E(d!.), E(d!.) -> E(d!1), E(d!1) @ det 1.0\n"
      "'dim-' E(d!1), E(d!1) -> E(d!.), E(d!.) @ det 2.0\n"
      "%init: 5 E()\n");
  REQUIRE(res.ok());
  ReactionNetwork net = expand(*res.model, 100, 10.0);
  REQUIRE(net.species.size() == 2);
  REQUIRE(net.reactions.size() == 2);
  int e = species_index(net, "E");
  const Reaction& dim = net.reactions[0];
  REQUIRE(dim.consumed(e) == 2);
  CHECK(dim.k == Catch::Approx(1.0));
  // c = 2k/V so that c * C(x,2) ~ k (x/V)^2 * V for large x
  CHECK(dim.c == Catch::Approx(0.2));
  std::vector<long> x = {4, 0};
  CHECK(propensity(net, 0, x) == Catch::Approx(0.2 * 6));  // C(4,2) = 6
}

TEST_CASE("invalid application surfaces as an expansion error") {
  // rule binds A.b to C.b, which the contact map forbids; skipping
  // validation and expanding anyway must fail loudly
  ParseResult res = parse_model(
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "'x' A(b!.), C(b!.) -> A(b!1), C(b!1) @ det 1.0\n"
      "%init: 1 A(), 1 C()\n");
  REQUIRE(res.model);
  CHECK_THROWS_AS(expand(*res.model), ExpandError);
}
