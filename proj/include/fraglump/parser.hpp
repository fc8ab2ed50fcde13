#pragma once

#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fraglump/model.hpp"

namespace fraglump {

// ---------------------------------------------------------------------------
// Model text format
//
//   %agent: B(a!{A.b}, c!{C.b})          agent type with binding partners
//   %agent: P(s~{u,p})                   site with an internal alphabet
//   %volume: 1.0
//   'R1' A(b!.), B(a!.) -> A(b!1), B(a!1) @ det 1.0
//   'R'  P(s~u) <-> P(s~p) @ sto 1.0, 0.5
//   %init: 3 B()                         counts (integers)
//   %initconc: 1 A()                     concentration; counts scale with V
//   %obs: 'freeA' A(b!.)
//
// Site syntax in patterns: name[~state][!n | !_ | !.]. A link left unwritten
// is untested in rules ("don't care, don't write"); in %init/%initconc lines
// unwritten sites are free and take the first declared internal state.
// ---------------------------------------------------------------------------

struct ParseResult {
  std::optional<Model> model;
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics)
      if (d.severity == Severity::Error) return false;
    return true;
  }
};

namespace detail {

enum class Tok {
  End, Ident, Number, String, Directive,
  LParen, RParen, LBrace, RBrace, Comma, Tilde, Bang, Dot, Underscore,
  Colon, At, Arrow, DArrow, Error
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  bool is_integer = false;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (c == '%') {
      std::size_t start = pos_;
      bump();
      while (pos_ < src_.size() && (std::isalnum(cur()) || cur() == '_')) bump();
      tok_.kind = Tok::Directive;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(cur()) || cur() == '_')) bump();
      tok_.kind = Tok::Ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (c == '\'') {
      bump();
      std::size_t start = pos_;
      while (pos_ < src_.size() && cur() != '\'' && cur() != '\n') bump();
      if (pos_ >= src_.size() || cur() != '\'') {
        tok_.kind = Tok::Error;
        tok_.text = "unterminated quoted name";
        return;
      }
      tok_.kind = Tok::String;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      bump();
      return;
    }
    if (c == '<' && src_.substr(pos_, 3) == "<->") {
      tok_.kind = Tok::DArrow;
      bump(); bump(); bump();
      return;
    }
    if (c == '-' && src_.substr(pos_, 2) == "->") {
      tok_.kind = Tok::Arrow;
      bump(); bump();
      return;
    }
    bump();
    switch (c) {
      case '(': tok_.kind = Tok::LParen; return;
      case ')': tok_.kind = Tok::RParen; return;
      case '{': tok_.kind = Tok::LBrace; return;
      case '}': tok_.kind = Tok::RBrace; return;
      case ',': tok_.kind = Tok::Comma; return;
      case '~': tok_.kind = Tok::Tilde; return;
      case '!': tok_.kind = Tok::Bang; return;
      case '.': tok_.kind = Tok::Dot; return;
      case '_': tok_.kind = Tok::Underscore; return;
      case ':': tok_.kind = Tok::Colon; return;
      case '@': tok_.kind = Tok::At; return;
      default:
        tok_.kind = Tok::Error;
        tok_.text = std::string("unexpected character '") + c + "'";
        return;
    }
  }

  void lex_number() {
    std::size_t start = pos_;
    bool integer = true;
    if (cur() == '-') bump();
    while (pos_ < src_.size() && std::isdigit(cur())) bump();
    if (pos_ < src_.size() && cur() == '.' && pos_ + 1 < src_.size() &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      integer = false;
      bump();
      while (pos_ < src_.size() && std::isdigit(cur())) bump();
    }
    if (pos_ < src_.size() && (cur() == 'e' || cur() == 'E')) {
      integer = false;
      bump();
      if (pos_ < src_.size() && (cur() == '+' || cur() == '-')) bump();
      while (pos_ < src_.size() && std::isdigit(cur())) bump();
    }
    tok_.kind = Tok::Number;
    tok_.text = std::string(src_.substr(start, pos_ - start));
    tok_.number = std::strtod(tok_.text.c_str(), nullptr);
    tok_.is_integer = integer;
  }

  unsigned char cur() const { return static_cast<unsigned char>(src_[pos_]); }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(cur())) bump();
      if (pos_ < src_.size() && cur() == '#') {
        while (pos_ < src_.size() && cur() != '\n') bump();
        continue;
      }
      break;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : lex_(text) {}

  ParseResult run() {
    Model m;
    // agent declarations accumulate in working_; the first pattern freezes
    // them into the shared set all graphs point at
    for (;;) {
      const Token& t = lex_.peek();
      if (t.kind == Tok::End) break;
      if (t.kind == Tok::Directive) {
        parse_directive(m);
      } else if (t.kind == Tok::String) {
        parse_rule(m);
      } else {
        error(t, "E_SYNTAX", "expected a %-directive or a quoted rule name");
        recover();
      }
    }
    m.sig = sig_ptr();
    ParseResult res;
    res.diagnostics = diags_;
    res.model = std::move(m);
    return res;
  }

  // Re-entrant pattern parsing for tests and annotation files.
  static SiteGraph parse_pattern_text(const SignaturePtr& sig,
                                      std::string_view text) {
    ModelParser p(text);
    p.shared_ = sig;
    SiteGraph g = p.parse_pattern(false);
    if (!p.diags_.empty())
      throw std::invalid_argument("pattern '" + std::string(text) +
                                  "': " + p.diags_.front().message);
    return g;
  }

 private:
  SignaturePtr sig_ptr() {
    if (!shared_) shared_ = std::make_shared<SignatureSet>(working_);
    return shared_;
  }

  void error(const Token& t, const std::string& code, const std::string& msg) {
    diags_.push_back({code, Severity::Error, t.line, t.col, msg});
  }

  void recover() {
    for (;;) {
      Tok k = lex_.peek().kind;
      if (k == Tok::End || k == Tok::Directive || k == Tok::String) return;
      lex_.take();
    }
  }

  bool expect(Tok k, const char* what) {
    if (lex_.peek().kind != k) {
      error(lex_.peek(), "E_SYNTAX", std::string("expected ") + what);
      return false;
    }
    lex_.take();
    return true;
  }

  void parse_directive(Model& m) {
    Token d = lex_.take();
    if (d.text == "%agent") {
      if (!expect(Tok::Colon, "':'")) return recover();
      parse_agent_decl();
    } else if (d.text == "%volume") {
      if (!expect(Tok::Colon, "':'")) return recover();
      if (lex_.peek().kind != Tok::Number) {
        error(lex_.peek(), "E_SYNTAX", "expected a number after %volume:");
        return recover();
      }
      m.volume = lex_.take().number;
    } else if (d.text == "%init" || d.text == "%initconc") {
      if (!expect(Tok::Colon, "':'")) return recover();
      parse_init(m, d.text == "%initconc");
    } else if (d.text == "%obs") {
      if (!expect(Tok::Colon, "':'")) return recover();
      if (lex_.peek().kind != Tok::String) {
        error(lex_.peek(), "E_SYNTAX", "expected a quoted observable name");
        return recover();
      }
      Observable obs;
      obs.name = lex_.take().text;
      std::size_t diags_before = diags_.size();
      obs.pattern = parse_pattern(false);
      if (diags_.size() == diags_before)
        m.observables.push_back(std::move(obs));
    } else {
      error(d, "E_SYNTAX", "unknown directive '" + d.text + "'");
      recover();
    }
  }

  void parse_agent_decl() {
    if (lex_.peek().kind != Tok::Ident) {
      error(lex_.peek(), "E_SYNTAX", "expected an agent name");
      return recover();
    }
    Token name = lex_.take();
    AgentSignature sig;
    sig.name = name.text;
    if (!expect(Tok::LParen, "'('")) return recover();
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        if (!parse_sig_site(sig)) return recover();
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
    }
    if (!expect(Tok::RParen, "')'")) return recover();
    if (shared_) {
      error(name, "E_SYNTAX", "agent declarations must precede their use");
      return;
    }
    working_.add(std::move(sig));
  }

  bool parse_sig_site(AgentSignature& sig) {
    if (lex_.peek().kind != Tok::Ident) {
      error(lex_.peek(), "E_SYNTAX", "expected a site name");
      return false;
    }
    SiteSpec site;
    site.name = lex_.take().text;
    if (lex_.peek().kind == Tok::Tilde) {
      lex_.take();
      if (!expect(Tok::LBrace, "'{'")) return false;
      for (;;) {
        if (lex_.peek().kind != Tok::Ident) {
          error(lex_.peek(), "E_SYNTAX", "expected an internal state name");
          return false;
        }
        site.internal_states.push_back(lex_.take().text);
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      if (!expect(Tok::RBrace, "'}'")) return false;
    }
    if (lex_.peek().kind == Tok::Bang) {
      lex_.take();
      if (!expect(Tok::LBrace, "'{'")) return false;
      for (;;) {
        if (lex_.peek().kind != Tok::Ident) {
          error(lex_.peek(), "E_SYNTAX", "expected a partner (Agent.site)");
          return false;
        }
        std::string agent = lex_.take().text;
        if (!expect(Tok::Dot, "'.'")) return false;
        if (lex_.peek().kind != Tok::Ident) {
          error(lex_.peek(), "E_SYNTAX", "expected a partner site name");
          return false;
        }
        site.partners.emplace_back(agent, lex_.take().text);
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      if (!expect(Tok::RBrace, "'}'")) return false;
    }
    sig.sites.push_back(std::move(site));
    return true;
  }

  // One pattern: comma-separated agents with shared bond labels. In init
  // context a ", <number>" sequence ends the pattern (next item follows).
  SiteGraph parse_pattern(bool init_context) {
    SiteGraph g(sig_ptr());
    std::map<long, std::vector<std::pair<int, SiteId>>> bonds;
    for (;;) {
      if (!parse_agent_occurrence(g, bonds, init_context)) break;
      if (lex_.peek().kind == Tok::Comma) {
        Lexer save = lex_;
        lex_.take();
        if (lex_.peek().kind != Tok::Ident) {
          lex_ = save;  // the comma belongs to the enclosing list
          break;
        }
        continue;
      }
      break;
    }
    for (const auto& [label, ends] : bonds) {
      if (ends.size() != 2) {
        Diagnostic d{"E_BOND_ASYM", Severity::Error, lex_.peek().line,
                     lex_.peek().col,
                     "bond label " + std::to_string(label) + " appears " +
                         std::to_string(ends.size()) + " times (needs 2)"};
        diags_.push_back(d);
        continue;
      }
      if (ends[0] == ends[1]) {
        diags_.push_back({"E_BOND_ASYM", Severity::Error, lex_.peek().line,
                          lex_.peek().col, "site bound to itself"});
        continue;
      }
      g.bind(ends[0].first, ends[0].second, ends[1].first, ends[1].second);
    }
    return g;
  }

  bool parse_agent_occurrence(SiteGraph& g,
                              std::map<long, std::vector<std::pair<int, SiteId>>>& bonds,
                              bool init_context) {
    if (lex_.peek().kind != Tok::Ident) {
      error(lex_.peek(), "E_SYNTAX", "expected an agent name");
      return false;
    }
    Token name = lex_.take();
    TypeId type = sig_lookup().type_id(name.text);
    if (type < 0) {
      error(name, "E_UNKNOWN_AGENT", "unknown agent type '" + name.text + "'");
      skip_parens();
      return false;
    }
    int idx = g.add_agent(type);
    if (!expect(Tok::LParen, "'('")) return false;
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        if (!parse_site_occurrence(g, idx, type, bonds)) return false;
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
    }
    if (!expect(Tok::RParen, "')'")) return false;
    if (init_context) concretize(g, idx, type);
    return true;
  }

  bool parse_site_occurrence(SiteGraph& g, int idx, TypeId type,
                             std::map<long, std::vector<std::pair<int, SiteId>>>& bonds) {
    if (lex_.peek().kind != Tok::Ident) {
      error(lex_.peek(), "E_SYNTAX", "expected a site name");
      return false;
    }
    Token name = lex_.take();
    SiteId sid = sig_lookup().agent(type).site_id(name.text);
    if (sid < 0) {
      error(name, "E_UNKNOWN_SITE",
            "agent '" + sig_lookup().agent(type).name + "' has no site '" +
                name.text + "'");
      return false;
    }
    Site& st = g.site(idx, sid);
    if (st.documented) {
      error(name, "E_DUP_SITE", "site '" + name.text + "' mentioned twice");
      return false;
    }
    st.documented = true;
    if (lex_.peek().kind == Tok::Tilde) {
      lex_.take();
      if (lex_.peek().kind != Tok::Ident) {
        error(lex_.peek(), "E_SYNTAX", "expected an internal state name");
        return false;
      }
      Token state = lex_.take();
      StateId v = sig_lookup().site(type, sid).state_id(state.text);
      if (v < 0) {
        error(state, "E_UNKNOWN_STATE",
              "site '" + name.text + "' has no internal state '" + state.text +
                  "'");
        return false;
      }
      st.internal = v;
    }
    if (lex_.peek().kind == Tok::Bang) {
      lex_.take();
      const Token& link = lex_.peek();
      if (link.kind == Tok::Number && link.is_integer) {
        bonds[static_cast<long>(lex_.take().number)].emplace_back(idx, sid);
        st.link = Link::Bound;  // endpoints resolved once the pattern closes
      } else if (link.kind == Tok::Underscore) {
        lex_.take();
        st.link = Link::BoundAny;
      } else if (link.kind == Tok::Dot) {
        lex_.take();
        st.link = Link::Free;
      } else {
        error(link, "E_SYNTAX", "expected a bond label, '_' or '.' after '!'");
        return false;
      }
    }
    return true;
  }

  // Init lines describe concrete species: unwritten sites become free with
  // the first declared internal state.
  void concretize(SiteGraph& g, int idx, TypeId type) {
    for (SiteId s = 0; s < sig_lookup().site_count(type); ++s) {
      Site& st = g.site(idx, s);
      if (!st.documented) {
        st.documented = true;
        st.link = Link::Free;
      }
      if (st.link == Link::Unspec) st.link = Link::Free;
      if (st.internal < 0 &&
          !sig_lookup().site(type, s).internal_states.empty())
        st.internal = 0;
    }
  }

  void skip_parens() {
    if (lex_.peek().kind != Tok::LParen) return;
    int depth = 0;
    do {
      Tok k = lex_.take().kind;
      if (k == Tok::LParen) ++depth;
      if (k == Tok::RParen) --depth;
      if (k == Tok::End) return;
    } while (depth > 0);
  }

  void parse_init(Model& m, bool conc) {
    for (;;) {
      if (lex_.peek().kind != Tok::Number) {
        error(lex_.peek(), "E_SYNTAX", "expected an amount");
        return recover();
      }
      Token amount = lex_.take();
      if (!conc && !amount.is_integer) {
        error(amount, "E_INIT_COUNT", "%init counts must be integers");
      }
      if (amount.number < 0) {
        error(amount, "E_INIT_COUNT", "initial amounts must be nonnegative");
      }
      InitEntry e;
      e.line = amount.line;
      e.amount = amount.number;
      e.is_concentration = conc;
      std::size_t diags_before = diags_.size();
      e.graph = parse_pattern(true);
      check_init_concrete(e);
      if (diags_.size() == diags_before) m.init.push_back(std::move(e));
      if (lex_.peek().kind == Tok::Comma) {
        lex_.take();
        continue;
      }
      break;
    }
  }

  void check_init_concrete(const InitEntry& e) {
    for (std::size_t i = 0; i < e.graph.size(); ++i)
      for (const Site& st : e.graph.agent(static_cast<int>(i)).sites)
        if (st.link == Link::BoundAny)
          diags_.push_back({"E_INIT_PARTIAL", Severity::Error, e.line, 0,
                            "initial mixtures must be concrete; the bound "
                            "wildcard is not allowed here"});
  }

  void parse_rule(Model& m) {
    Token name = lex_.take();
    std::size_t diags_before = diags_.size();
    SiteGraph lhs = parse_pattern(false);
    bool reversible = false;
    if (lex_.peek().kind == Tok::DArrow) {
      reversible = true;
      lex_.take();
    } else if (!expect(Tok::Arrow, "'->' or '<->'")) {
      return recover();
    }
    SiteGraph rhs = parse_pattern(false);
    if (!expect(Tok::At, "'@'")) return recover();
    if (lex_.peek().kind != Tok::Ident ||
        (lex_.peek().text != "det" && lex_.peek().text != "sto")) {
      error(lex_.peek(), "E_SYNTAX", "expected rate kind 'det' or 'sto'");
      return recover();
    }
    RateKind kind = lex_.take().text == "det" ? RateKind::Deterministic
                                              : RateKind::Stochastic;
    if (lex_.peek().kind != Tok::Number) {
      error(lex_.peek(), "E_SYNTAX", "expected a rate constant");
      return recover();
    }
    double fwd = lex_.take().number;
    std::optional<double> rev;
    if (lex_.peek().kind == Tok::Comma) {
      lex_.take();
      if (lex_.peek().kind != Tok::Number) {
        error(lex_.peek(), "E_SYNTAX", "expected a reverse rate constant");
        return recover();
      }
      rev = lex_.take().number;
    }
    if (reversible && !rev) {
      error(name, "E_RATE_MISSING",
            "reversible rule '" + name.text + "' needs two rate constants");
      return;
    }
    if (!reversible && rev) {
      error(name, "E_SYNTAX",
            "rule '" + name.text + "' is not reversible but lists two rates");
      return;
    }
    if (diags_.size() != diags_before) return;  // malformed patterns
    Rule fwd_rule{name.text, lhs, rhs, {fwd, kind}, name.line};
    auto fwd_diags = check_rule(fwd_rule);
    diags_.insert(diags_.end(), fwd_diags.begin(), fwd_diags.end());
    if (fwd_diags.empty()) m.rules.push_back(std::move(fwd_rule));
    if (reversible) {
      Rule rev_rule{name.text + "-", rhs, lhs, {*rev, kind}, name.line};
      auto rev_diags = check_rule(rev_rule);
      diags_.insert(diags_.end(), rev_diags.begin(), rev_diags.end());
      if (rev_diags.empty()) m.rules.push_back(std::move(rev_rule));
    }
  }

  const SignatureSet& sig_lookup() {
    return shared_ ? *shared_ : working_;
  }

  Lexer lex_;
  SignatureSet working_;
  SignaturePtr shared_;
  std::vector<Diagnostic> diags_;
};

}  // namespace detail

/// Parses the textual model format. Diagnostics carry line/column; malformed
/// declarations are reported and skipped, everything else is returned.
inline ParseResult parse_model(std::string_view text) {
  return detail::ModelParser(text).run();
}

/// Parses one pattern against an existing signature set (throws on error).
inline SiteGraph parse_pattern(const SignaturePtr& sig, std::string_view text) {
  return detail::ModelParser::parse_pattern_text(sig, text);
}

// ---------------------------------------------------------------------------
// Pretty printing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_number(double v) {
  for (int prec = 15; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    if (std::strtod(os.str().c_str(), nullptr) == v) return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Pattern text with canonical bond label numbering.
inline std::string pattern_text(const SiteGraph& g) {
  const SignatureSet& sig = *g.signatures();
  std::map<std::pair<int, SiteId>, int> labels;
  int next = 1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Agent& a = g.agent(static_cast<int>(i));
    for (SiteId s = 0; s < static_cast<SiteId>(a.sites.size()); ++s) {
      const Site& st = a.sites[s];
      if (st.link != Link::Bound) continue;
      auto key = std::minmax(std::make_pair(static_cast<int>(i), s),
                             std::make_pair(st.peer_agent, st.peer_site));
      std::pair<int, SiteId> id = key.first;
      if (!labels.count(id)) labels[id] = next++;
    }
  }
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ", ";
    const Agent& a = g.agent(static_cast<int>(i));
    out += sig.agent(a.type).name;
    out += '(';
    bool first = true;
    for (SiteId s = 0; s < static_cast<SiteId>(a.sites.size()); ++s) {
      const Site& st = a.sites[s];
      if (!st.documented) continue;
      if (!first) out += ", ";
      first = false;
      out += sig.site(a.type, s).name;
      if (st.internal >= 0)
        out += "~" + sig.site(a.type, s).internal_states[st.internal];
      switch (st.link) {
        case Link::Unspec:
          break;
        case Link::Free:
          out += "!.";
          break;
        case Link::BoundAny:
          out += "!_";
          break;
        case Link::Bound: {
          auto key = std::minmax(std::make_pair(static_cast<int>(i), s),
                                 std::make_pair(st.peer_agent, st.peer_site));
          out += "!" + std::to_string(labels[key.first]);
          break;
        }
      }
    }
    out += ')';
  }
  return out;
}

/// Canonical text of a model; parse(pretty_print(m)) is structurally m.
inline std::string pretty_print(const Model& m) {
  std::ostringstream os;
  if (m.sig) {
    for (const AgentSignature& a : m.sig->agents()) {
      os << "%agent: " << a.name << "(";
      for (std::size_t s = 0; s < a.sites.size(); ++s) {
        if (s) os << ", ";
        os << a.sites[s].name;
        if (!a.sites[s].internal_states.empty()) {
          os << "~{";
          for (std::size_t k = 0; k < a.sites[s].internal_states.size(); ++k)
            os << (k ? "," : "") << a.sites[s].internal_states[k];
          os << "}";
        }
        if (!a.sites[s].partners.empty()) {
          os << "!{";
          for (std::size_t k = 0; k < a.sites[s].partners.size(); ++k)
            os << (k ? "," : "") << a.sites[s].partners[k].first << "."
               << a.sites[s].partners[k].second;
          os << "}";
        }
      }
      os << ")\n";
    }
  }
  os << "%volume: " << detail::format_number(m.volume) << "\n";
  for (const Rule& r : m.rules) {
    os << "'" << r.name << "' " << pattern_text(r.lhs) << " -> "
       << pattern_text(r.rhs) << " @ "
       << (r.rate.kind == RateKind::Deterministic ? "det" : "sto") << " "
       << detail::format_number(r.rate.value) << "\n";
  }
  for (const InitEntry& e : m.init) {
    os << (e.is_concentration ? "%initconc: " : "%init: ")
       << detail::format_number(e.amount) << " " << pattern_text(e.graph)
       << "\n";
  }
  for (const Observable& obs : m.observables)
    os << "%obs: '" << obs.name << "' " << pattern_text(obs.pattern) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Semantic validation
// ---------------------------------------------------------------------------

/// Whole-model checks beyond grammar: signature consistency, conformance of
/// every pattern, contact-map legality of bonds, rate signs, concrete init.
inline std::vector<Diagnostic> validate_model(const Model& m) {
  std::vector<Diagnostic> out;
  if (!m.sig) {
    out.push_back({"E_SIG", Severity::Error, 0, 0, "model has no signatures"});
    return out;
  }
  for (const std::string& p : m.sig->problems())
    out.push_back({"E_SIG", Severity::Error, 0, 0, p});
  if (!(m.volume > 0))
    out.push_back({"E_VOLUME", Severity::Error, 0, 0, "volume must be > 0"});
  auto conformance = [&](const SiteGraph& g, int line, const std::string& what) {
    for (const std::string& v : g.violations())
      out.push_back({"E_CONFORMANCE", Severity::Error, line, 0, what + ": " + v});
  };
  for (const Rule& r : m.rules) {
    conformance(r.lhs, r.line, "rule '" + r.name + "' left side");
    conformance(r.rhs, r.line, "rule '" + r.name + "' right side");
    auto shape = check_rule(r);
    out.insert(out.end(), shape.begin(), shape.end());
    if (r.rate.value < 0)
      out.push_back({"E_RATE_NEGATIVE", Severity::Error, r.line, 0,
                     "rule '" + r.name + "': negative rate constant"});
  }
  for (const InitEntry& e : m.init) {
    conformance(e.graph, e.line, "initial mixture entry");
    if (!e.graph.fully_specified())
      out.push_back({"E_INIT_PARTIAL", Severity::Error, e.line, 0,
                     "initial mixture entry is not fully specified"});
    if (e.amount < 0)
      out.push_back({"E_INIT_COUNT", Severity::Error, e.line, 0,
                     "initial amount is negative"});
  }
  for (const Observable& obs : m.observables)
    conformance(obs.pattern, 0, "observable '" + obs.name + "'");
  return out;
}

}  // namespace fraglump
