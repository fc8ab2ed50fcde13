#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "fraglump/parser.hpp"

using namespace fraglump;

namespace {

const char* kCoreModel = R"(# scaffold binding, independent sides
%agent: A(b!{B.a})
%agent: B(a!{A.b}, c!{C.b})
%agent: C(b!{B.c})

%volume: 1

'R1'  A(b!.), B(a!.) -> A(b!1), B(a!1) @ det 1.0
'R2'  B(c!.), C(b!.) -> B(c!1), C(b!1) @ det 0.2
'R1-' A(b!1), B(a!1) -> A(b!.), B(a!.) @ det 2.0
'R2-' B(c!1), C(b!1) -> B(c!.), C(b!.) @ det 0.3

%initconc: 1 A(), 3 B(), 1 C()
)";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("the four-rule scaffold model parses cleanly") {
  ParseResult res = parse_model(kCoreModel);
  REQUIRE(res.ok());
  const Model& m = *res.model;
  CHECK(m.sig->size() == 3);
  REQUIRE(m.rules.size() == 4);
  CHECK(m.rules[0].name == "R1");
  CHECK(m.rules[1].name == "R2");
  CHECK(m.rules[2].name == "R1-");
  CHECK(m.rules[3].name == "R2-");
  CHECK(m.rules[0].rate.value == 1.0);
  CHECK(m.rules[0].rate.kind == RateKind::Deterministic);
  REQUIRE(m.init.size() == 3);
  CHECK(m.init[1].amount == 3.0);
  CHECK(m.init[1].is_concentration);
  // R1 leaves B's other site untested
  const Rule& r1 = m.rules[0];
  CHECK_FALSE(r1.lhs.agent(1).sites[1].documented);
  CHECK(r1.lhs.agent(1).sites[0].link == Link::Free);
  CHECK(r1.rhs.agent(1).sites[0].link == Link::Bound);
  CHECK(validate_model(m).empty());
}

TEST_CASE("empty input yields an empty model") {
  ParseResult res = parse_model("");
  REQUIRE(res.ok());
  CHECK(res.model->sig->size() == 0);
  CHECK(res.model->rules.empty());
  CHECK(res.model->init.empty());
}

TEST_CASE("a site documented on one side only is a parse error") {
  std::string text =
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "'bad' A(b!.), B(a!., c!.) -> A(b!1), B(a!1) @ det 1.0\n";
  ParseResult res = parse_model(text);
  CHECK_FALSE(res.ok());
  REQUIRE(res.model);
  CHECK(res.model->rules.empty());
  bool found = false;
  for (const auto& d : res.diagnostics)
    if (d.code == "E_DOC_PARITY") found = true;
  CHECK(found);
}

TEST_CASE("unknown names and asymmetric bonds are reported with locations") {
  std::string text =
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "'u1' D(x!.) -> D(x!.) @ det 1.0\n"
      "'u2' A(q!.) -> A(q!.) @ det 1.0\n"
      "'u3' A(b!1), B(a!2) -> A(b!1), B(a!2) @ det 1.0\n";
  ParseResult res = parse_model(text);
  CHECK_FALSE(res.ok());
  std::vector<std::string> codes;
  for (const auto& d : res.diagnostics) {
    codes.push_back(d.code);
    CHECK(d.line > 0);
  }
  CHECK(std::count(codes.begin(), codes.end(), "E_UNKNOWN_AGENT") >= 1);
  CHECK(std::count(codes.begin(), codes.end(), "E_UNKNOWN_SITE") >= 1);
  CHECK(std::count(codes.begin(), codes.end(), "E_BOND_ASYM") >= 1);
  CHECK(res.model->rules.empty());
}

TEST_CASE("internal states parse and unknown values are flagged") {
  std::string text =
      "%agent: P(s~{u,p})\n"
      "'flip' P(s~u) -> P(s~p) @ sto 1.0\n"
      "%init: 5 P()\n";
  ParseResult res = parse_model(text);
  REQUIRE(res.ok());
  const Model& m = *res.model;
  REQUIRE(m.rules.size() == 1);
  CHECK(m.rules[0].lhs.agent(0).sites[0].internal == 0);
  CHECK(m.rules[0].rhs.agent(0).sites[0].internal == 1);
  // default internal state in init is the first declared one
  CHECK(m.init[0].graph.agent(0).sites[0].internal == 0);
  CHECK(m.init[0].graph.fully_specified());

  ParseResult bad = parse_model(
      "%agent: P(s~{u,p})\n'flip' P(s~q) -> P(s~p) @ sto 1.0\n");
  CHECK_FALSE(bad.ok());
}

TEST_CASE("reversible arrows expand into a forward and a backward rule") {
  std::string text =
      "%agent: P(s~{u,p})\n"
      "'flip' P(s~u) <-> P(s~p) @ sto 1.0, 0.5\n";
  ParseResult res = parse_model(text);
  REQUIRE(res.ok());
  REQUIRE(res.model->rules.size() == 2);
  CHECK(res.model->rules[0].name == "flip");
  CHECK(res.model->rules[1].name == "flip-");
  CHECK(res.model->rules[1].rate.value == 0.5);
  CHECK(res.model->rules[1].lhs.agent(0).sites[0].internal == 1);

  ParseResult missing = parse_model(
      "%agent: P(s~{u,p})\n'flip' P(s~u) <-> P(s~p) @ sto 1.0\n");
  CHECK_FALSE(missing.ok());
}

TEST_CASE("validation flags forbidden bonds and negative rates") {
  std::string text =
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "'x' A(b!.), C(b!.) -> A(b!1), C(b!1) @ det 1.0\n";
  ParseResult res = parse_model(text);
  REQUIRE(res.model);
  auto diags = validate_model(*res.model);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "E_CONFORMANCE");

  ParseResult neg = parse_model(
      "%agent: P(s~{u,p})\n'flip' P(s~u) -> P(s~p) @ sto -1.0\n");
  REQUIRE(neg.model);
  auto neg_diags = validate_model(*neg.model);
  REQUIRE(neg_diags.size() == 1);
  CHECK(neg_diags[0].code == "E_RATE_NEGATIVE");

  ParseResult clean = parse_model(kCoreModel);
  REQUIRE(clean.ok());
  CHECK(validate_model(*clean.model).empty());
}

TEST_CASE("the bound wildcard is rejected in initial mixtures") {
  ParseResult res = parse_model(
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "%init: 1 B(a!_)\n");
  CHECK_FALSE(res.ok());
  bool found = false;
  for (const auto& d : res.diagnostics)
    if (d.code == "E_INIT_PARTIAL") found = true;
  CHECK(found);
}

TEST_CASE("pretty-printed text reparses to a structurally equal model") {
  for (const char* text : {kCoreModel}) {
    ParseResult first = parse_model(text);
    REQUIRE(first.ok());
    std::string printed = pretty_print(*first.model);
    ParseResult second = parse_model(printed);
    REQUIRE(second.ok());
    CHECK(*first.model == *second.model);
    CHECK(pretty_print(*second.model) == printed);
  }
}

TEST_CASE("shipped model files parse, validate and round-trip") {
  for (const char* name :
       {"example1_core.ka", "example1_trimer.ka", "example1_trimer_fast.ka",
        "isomerization.ka", "smoke8.ka"}) {
    INFO(name);
    std::string text = read_file(std::string(FRAGLUMP_MODELS_DIR) + "/" + name);
    ParseResult res = parse_model(text);
    REQUIRE(res.ok());
    CHECK(validate_model(*res.model).empty());
    ParseResult again = parse_model(pretty_print(*res.model));
    REQUIRE(again.ok());
    CHECK(*res.model == *again.model);
  }
}

TEST_CASE("bond creation on an untested link is rejected") {
  ParseResult res = parse_model(
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "'x' A(b), B(a) -> A(b!1), B(a!1) @ det 1.0\n");
  CHECK_FALSE(res.ok());
  bool found = false;
  for (const auto& d : res.diagnostics)
    if (d.code == "E_LINK_CHANGE") found = true;
  CHECK(found);
}

TEST_CASE("wildcard unbinding is outside the supported subset") {
  ParseResult res = parse_model(
      "%agent: A(b!{B.a})\n%agent: B(a!{A.b}, c!{C.b})\n%agent: C(b!{B.c})\n"
      "'x' A(b!_) -> A(b!.) @ det 1.0\n");
  CHECK_FALSE(res.ok());
}
