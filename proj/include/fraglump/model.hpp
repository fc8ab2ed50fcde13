#pragma once

#include <string>
#include <vector>

#include "fraglump/sitegraph.hpp"

namespace fraglump {

enum class Severity { Error, Warning };

/// Machine-readable problem report with a source location.
struct Diagnostic {
  std::string code;
  Severity severity = Severity::Error;
  int line = 0;
  int col = 0;
  std::string message;
};

enum class RateKind { Deterministic, Stochastic };

struct RateSpec {
  double value = 0.0;
  RateKind kind = RateKind::Stochastic;
  bool operator==(const RateSpec&) const = default;
};

/// A rewrite over patterns. The supported subset modifies internal states
/// and bonds only: both sides carry the same agents in the same order, and
/// a site mentioned on one side must be mentioned on the other.
struct Rule {
  std::string name;
  SiteGraph lhs;
  SiteGraph rhs;
  RateSpec rate;
  int line = 0;

  bool operator==(const Rule& o) const {
    return name == o.name && lhs == o.lhs && rhs == o.rhs && rate == o.rate;
  }
};

struct InitEntry {
  SiteGraph graph;  // concrete (fully specified); may hold several complexes
  double amount = 0.0;
  bool is_concentration = false;  // counts scale with volume when true
  int line = 0;

  bool operator==(const InitEntry& o) const {
    return graph == o.graph && amount == o.amount &&
           is_concentration == o.is_concentration;
  }
};

struct Observable {
  std::string name;
  SiteGraph pattern;

  bool operator==(const Observable& o) const {
    return name == o.name && pattern == o.pattern;
  }
};

struct Model {
  SignaturePtr sig;
  std::vector<Rule> rules;
  std::vector<InitEntry> init;
  std::vector<Observable> observables;
  double volume = 1.0;

  bool operator==(const Model& o) const {
    if (!sig != !o.sig) return false;
    if (sig && !(*sig == *o.sig)) return false;
    return rules == o.rules && init == o.init &&
           observables == o.observables && volume == o.volume;
  }
};

enum class ActionKind { SetInternal, Bind, Unbind };

/// One site-level modification of a rule, anchored on lhs agent indices.
struct SiteAction {
  ActionKind kind;
  int agent;
  SiteId site;
  StateId new_state = -1;  // SetInternal
  int peer_agent = -1;     // Bind / Unbind
  SiteId peer_site = -1;
};

namespace detail {

inline bool earlier_endpoint(int i, SiteId s, int j, SiteId t) {
  return i < j || (i == j && s < t);
}

}  // namespace detail

/// Checks the rule-shape invariants (same agents, documentation parity,
/// supported transitions). Locations use the rule's source line.
inline std::vector<Diagnostic> check_rule(const Rule& r) {
  std::vector<Diagnostic> out;
  auto err = [&](const std::string& code, const std::string& msg) {
    out.push_back({code, Severity::Error, r.line, 0,
                   "rule '" + r.name + "': " + msg});
  };
  if (r.lhs.size() != r.rhs.size()) {
    err("E_RULE_AGENTS", "left and right sides list different agent counts");
    return out;
  }
  const SignatureSet& sig = *r.lhs.signatures();
  for (std::size_t i = 0; i < r.lhs.size(); ++i) {
    const Agent& la = r.lhs.agent(static_cast<int>(i));
    const Agent& ra = r.rhs.agent(static_cast<int>(i));
    if (la.type != ra.type) {
      err("E_RULE_AGENTS",
          "agent " + std::to_string(i + 1) + " changes type across the rule");
      return out;
    }
    for (SiteId s = 0; s < static_cast<SiteId>(la.sites.size()); ++s) {
      const Site& L = la.sites[s];
      const Site& R = ra.sites[s];
      std::string where =
          sig.agent(la.type).name + "." + sig.site(la.type, s).name;
      if (L.documented != R.documented) {
        err("E_DOC_PARITY",
            "site " + where + " is documented on one side only");
        continue;
      }
      if (!L.documented) continue;
      if ((L.internal >= 0) != (R.internal >= 0)) {
        err("E_DOC_PARITY",
            "internal state of " + where + " is documented on one side only");
      }
      bool l_doc = L.link != Link::Unspec;
      bool r_doc = R.link != Link::Unspec;
      if (l_doc != r_doc) {
        err("E_LINK_CHANGE",
            "link state of " + where + " is documented on one side only");
        continue;
      }
      if (!l_doc) continue;
      if (L.link == Link::Free && R.link == Link::Bound) {
        continue;  // bind; endpoint pairing checked below
      } else if (L.link == Link::Bound && R.link == Link::Free) {
        continue;  // unbind
      } else if (L.link == R.link) {
        if (L.link == Link::Bound &&
            (L.peer_agent != R.peer_agent || L.peer_site != R.peer_site))
          err("E_LINK_CHANGE", "bond at " + where +
                                   " is rewired across the rule; break and "
                                   "re-form it in two rules instead");
      } else {
        err("E_LINK_CHANGE",
            "unsupported link change at " + where +
                " (the bound wildcard cannot be created or consumed)");
      }
    }
  }
  return out;
}

/// Site-level actions of a valid rule; bonds reported once.
inline std::vector<SiteAction> rule_actions(const Rule& r) {
  std::vector<SiteAction> out;
  for (std::size_t i = 0; i < r.lhs.size(); ++i) {
    const Agent& la = r.lhs.agent(static_cast<int>(i));
    const Agent& ra = r.rhs.agent(static_cast<int>(i));
    for (SiteId s = 0; s < static_cast<SiteId>(la.sites.size()); ++s) {
      const Site& L = la.sites[s];
      const Site& R = ra.sites[s];
      if (R.internal >= 0 && R.internal != L.internal)
        out.push_back({ActionKind::SetInternal, static_cast<int>(i), s,
                       R.internal, -1, -1});
      if (L.link == Link::Free && R.link == Link::Bound &&
          detail::earlier_endpoint(static_cast<int>(i), s, R.peer_agent,
                                   R.peer_site))
        out.push_back({ActionKind::Bind, static_cast<int>(i), s, -1,
                       R.peer_agent, R.peer_site});
      if (L.link == Link::Bound && R.link == Link::Free &&
          detail::earlier_endpoint(static_cast<int>(i), s, L.peer_agent,
                                   L.peer_site))
        out.push_back({ActionKind::Unbind, static_cast<int>(i), s, -1,
                       L.peer_agent, L.peer_site});
    }
  }
  return out;
}

}  // namespace fraglump
