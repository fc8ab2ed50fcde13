#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraglump/canonical.hpp"
#include "fraglump/sitegraph.hpp"

namespace fraglump {

/// Total injective map from pattern agents to target agents.
struct Embedding {
  std::vector<int> map;
  bool operator==(const Embedding&) const = default;
};

enum class MatchMode {
  Constraint,  // pattern tests must hold in the target; no-test matches all
  Exact        // attribute-identical (pattern symmetry / isomorphism)
};

namespace detail {

inline bool site_matches(const Site& p, const Site& t, MatchMode mode) {
  if (mode == MatchMode::Exact) {
    if (p.documented != t.documented) return false;
    if (p.internal != t.internal) return false;
    if (p.link != t.link) return false;
    if (p.link == Link::Bound && p.peer_site != t.peer_site) return false;
    return true;
  }
  if (!p.documented) return true;
  if (p.internal >= 0 && t.internal != p.internal) return false;
  switch (p.link) {
    case Link::Unspec:
      return true;
    case Link::Free:
      return t.link == Link::Free;
    case Link::BoundAny:
      return t.link == Link::Bound || t.link == Link::BoundAny;
    case Link::Bound:
      // peer identity is checked once both endpoints are mapped
      return t.link == Link::Bound && t.peer_site == p.peer_site;
  }
  return false;
}

struct MatchPlan {
  // Per component: visit order; for each visited agent (after the root) the
  // (already-visited agent, site) bond it is reached through.
  struct Step {
    int pattern_agent;
    int from_agent = -1;  // -1 for the component root
    SiteId via_site = -1;
  };
  std::vector<std::vector<Step>> components;
};

inline MatchPlan plan_matching(const SiteGraph& pattern) {
  MatchPlan plan;
  for (const auto& comp : pattern.components()) {
    std::vector<MatchPlan::Step> steps;
    std::vector<bool> seen(pattern.size(), false);
    steps.push_back({comp[0], -1, -1});
    seen[comp[0]] = true;
    for (std::size_t head = 0; head < steps.size(); ++head) {
      int i = steps[head].pattern_agent;
      const Agent& a = pattern.agent(i);
      for (SiteId s = 0; s < static_cast<SiteId>(a.sites.size()); ++s) {
        const Site& st = a.sites[s];
        if (st.link == Link::Bound && !seen[st.peer_agent]) {
          seen[st.peer_agent] = true;
          steps.push_back({st.peer_agent, i, s});
        }
      }
    }
    plan.components.push_back(std::move(steps));
  }
  return plan;
}

class Matcher {
 public:
  Matcher(const SiteGraph& pattern, const SiteGraph& target, MatchMode mode)
      : p_(pattern), t_(target), mode_(mode), plan_(plan_matching(pattern)),
        map_(pattern.size(), -1), used_(target.size(), false) {}

  std::vector<Embedding> run() {
    results_.clear();
    descend_component(0);
    return std::move(results_);
  }

 private:
  bool agent_ok(int pi, int ti) const {
    const Agent& pa = p_.agent(pi);
    const Agent& ta = t_.agent(ti);
    if (pa.type != ta.type) return false;
    for (std::size_t s = 0; s < pa.sites.size(); ++s) {
      const Site& ps = pa.sites[s];
      const Site& ts = ta.sites[s];
      if (!site_matches(ps, ts, mode_)) return false;
      if (ps.link == Link::Bound && map_[ps.peer_agent] >= 0 &&
          ts.link == Link::Bound && ts.peer_agent != map_[ps.peer_agent])
        return false;
    }
    return true;
  }

  void descend_component(std::size_t ci) {
    if (ci == plan_.components.size()) {
      results_.push_back(Embedding{map_});
      return;
    }
    const auto& steps = plan_.components[ci];
    // candidates for the component root: every target agent
    for (int ti = 0; ti < static_cast<int>(t_.size()); ++ti)
      try_step(ci, 0, ti, steps);
  }

  void try_step(std::size_t ci, std::size_t si, int ti,
                const std::vector<MatchPlan::Step>& steps) {
    if (used_[ti]) return;
    int pi = steps[si].pattern_agent;
    map_[pi] = ti;
    if (agent_ok(pi, ti)) {
      used_[ti] = true;
      advance(ci, si + 1, steps);
      used_[ti] = false;
    }
    map_[pi] = -1;
  }

  void advance(std::size_t ci, std::size_t si,
               const std::vector<MatchPlan::Step>& steps) {
    if (si == steps.size()) {
      descend_component(ci + 1);
      return;
    }
    const MatchPlan::Step& step = steps[si];
    // forced candidate: follow the bond from the already-mapped agent
    const Site& from = p_.agent(step.from_agent).sites[step.via_site];
    const Site& tfrom = t_.agent(map_[step.from_agent]).sites[step.via_site];
    if (tfrom.link != Link::Bound) return;
    if (tfrom.peer_site != from.peer_site) return;
    try_step(ci, si, tfrom.peer_agent, steps);
  }

  const SiteGraph& p_;
  const SiteGraph& t_;
  MatchMode mode_;
  MatchPlan plan_;
  std::vector<int> map_;
  std::vector<bool> used_;
  std::vector<Embedding> results_;
};

}  // namespace detail

/// All injective structure-preserving maps from `pattern` into `target`.
/// Unspecified pattern attributes match anything; specified ones must hold
/// in the target.
inline std::vector<Embedding> find_embeddings(const SiteGraph& pattern,
                                              const SiteGraph& target,
                                              MatchMode mode = MatchMode::Constraint) {
  if (pattern.signatures() && target.signatures() &&
      !(*pattern.signatures() == *target.signatures()))
    throw std::invalid_argument(
        "find_embeddings: pattern and target use different signature sets");
  return detail::Matcher(pattern, target, mode).run();
}

inline std::uint64_t count_embeddings(const SiteGraph& pattern,
                                      const SiteGraph& target,
                                      MatchMode mode = MatchMode::Constraint) {
  return find_embeddings(pattern, target, mode).size();
}

/// |Aut(g)|: self-embeddings under attribute-identical matching. Injective
/// endomorphisms of a finite graph are bijective, so these are exactly the
/// automorphisms.
inline std::uint64_t count_automorphisms(const SiteGraph& g) {
  auto v = g.violations();
  if (!v.empty())
    throw std::invalid_argument("count_automorphisms: " + v.front());
  return count_embeddings(g, g, MatchMode::Exact);
}

/// |Aut| of a mixture given as (component graph, multiplicity) pairs:
/// product of per-component automorphisms times factorial of the
/// multiplicity of each isomorphism class.
inline std::uint64_t mixture_automorphisms(
    const std::vector<std::pair<const SiteGraph*, long>>& components) {
  std::map<std::string, std::pair<const SiteGraph*, long>> classes;
  for (const auto& [g, n] : components) {
    if (n < 0) throw std::invalid_argument("mixture_automorphisms: count < 0");
    if (n == 0) continue;
    auto& slot = classes[canonical_cert(*g)];
    slot.first = g;
    slot.second += n;
  }
  std::uint64_t total = 1;
  for (const auto& [key, slot] : classes) {
    std::uint64_t per = count_automorphisms(*slot.first);
    for (long i = 0; i < slot.second; ++i) total *= per;
    for (long f = 2; f <= slot.second; ++f) total *= static_cast<std::uint64_t>(f);
  }
  return total;
}

}  // namespace fraglump
