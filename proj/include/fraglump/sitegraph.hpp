#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraglump/signature.hpp"

namespace fraglump {

/// Link state of a site. In patterns, `Unspec` means "no test"; `BoundAny`
/// is the bound-wildcard; `Bound` carries the partner endpoint. Species only
/// ever use `Free` and `Bound`.
enum class Link : std::uint8_t { Unspec, Free, BoundAny, Bound };

struct Site {
  bool documented = false;  // mentioned at all (patterns may omit sites)
  StateId internal = -1;    // -1: not specified
  Link link = Link::Unspec;
  int peer_agent = -1;  // valid when link == Bound
  SiteId peer_site = -1;

  bool operator==(const Site&) const = default;
};

struct Agent {
  TypeId type = -1;
  std::vector<Site> sites;  // indexed by SiteId, sized per signature

  bool operator==(const Agent&) const = default;
};

/// A site graph: typed agents whose sites carry internal and link state.
/// The one structure used for patterns, species and whole mixtures.
class SiteGraph {
 public:
  SiteGraph() = default;
  explicit SiteGraph(SignaturePtr sig) : sig_(std::move(sig)) {}

  const SignaturePtr& signatures() const { return sig_; }
  const std::vector<Agent>& agents() const { return agents_; }
  std::vector<Agent>& agents() { return agents_; }
  std::size_t size() const { return agents_.size(); }
  bool empty() const { return agents_.empty(); }

  const Agent& agent(int i) const { return agents_.at(i); }
  Agent& agent(int i) { return agents_.at(i); }
  const Site& site(int agent_idx, SiteId s) const {
    return agents_.at(agent_idx).sites.at(s);
  }
  Site& site(int agent_idx, SiteId s) {
    return agents_.at(agent_idx).sites.at(s);
  }

  int add_agent(TypeId t) {
    if (!sig_ || t < 0 || t >= static_cast<TypeId>(sig_->size()))
      throw std::invalid_argument("add_agent: unknown agent type");
    Agent a;
    a.type = t;
    a.sites.resize(sig_->site_count(t));
    agents_.push_back(std::move(a));
    return static_cast<int>(agents_.size() - 1);
  }

  /// Install a mutual bond. Both sites become documented.
  void bind(int i, SiteId si, int j, SiteId sj) {
    if (i == j && si == sj)
      throw std::invalid_argument("bind: site bound to itself");
    Site& a = site(i, si);
    Site& b = site(j, sj);
    a.documented = b.documented = true;
    a.link = b.link = Link::Bound;
    a.peer_agent = j;
    a.peer_site = sj;
    b.peer_agent = i;
    b.peer_site = si;
  }

  void unbind(int i, SiteId si) {
    Site& a = site(i, si);
    if (a.link != Link::Bound) throw std::invalid_argument("unbind: not bound");
    Site& b = site(a.peer_agent, a.peer_site);
    a.link = Link::Free;
    a.peer_agent = -1;
    a.peer_site = -1;
    b.link = Link::Free;
    b.peer_agent = -1;
    b.peer_site = -1;
  }

  /// Conformance against the signature set: mutual bonds, no self-bonds,
  /// legal internal values, allowed partners. Empty result means conformant.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const Agent& a = agents_[i];
      if (a.type < 0 || a.type >= static_cast<TypeId>(sig_->size())) {
        out.push_back("agent " + std::to_string(i) + ": bad type");
        continue;
      }
      if (static_cast<int>(a.sites.size()) != sig_->site_count(a.type)) {
        out.push_back("agent " + std::to_string(i) + ": bad site count");
        continue;
      }
      for (std::size_t s = 0; s < a.sites.size(); ++s) {
        const Site& st = a.sites[s];
        const SiteSpec& spec = sig_->site(a.type, static_cast<SiteId>(s));
        std::string where = sig_->agent(a.type).name + "." + spec.name + "@" +
                            std::to_string(i);
        if (st.internal >= static_cast<StateId>(spec.internal_states.size()))
          out.push_back(where + ": internal state out of range");
        if (st.internal >= 0 && spec.internal_states.empty())
          out.push_back(where + ": site has no internal states");
        if (!st.documented &&
            (st.internal >= 0 || st.link != Link::Unspec))
          out.push_back(where + ": attributes on undocumented site");
        if (st.link == Link::Bound) {
          if (st.peer_agent < 0 ||
              st.peer_agent >= static_cast<int>(agents_.size())) {
            out.push_back(where + ": dangling bond");
            continue;
          }
          if (st.peer_agent == static_cast<int>(i) &&
              st.peer_site == static_cast<SiteId>(s)) {
            out.push_back(where + ": site bound to itself");
            continue;
          }
          const Agent& p = agents_[st.peer_agent];
          if (st.peer_site < 0 ||
              st.peer_site >= static_cast<SiteId>(p.sites.size())) {
            out.push_back(where + ": bond to missing site");
            continue;
          }
          const Site& back = p.sites[st.peer_site];
          if (back.link != Link::Bound ||
              back.peer_agent != static_cast<int>(i) ||
              back.peer_site != static_cast<SiteId>(s))
            out.push_back(where + ": bond not mutual");
          bool first_endpoint =
              st.peer_agent > static_cast<int>(i) ||
              (st.peer_agent == static_cast<int>(i) &&
               st.peer_site > static_cast<SiteId>(s));
          if (first_endpoint &&
              !sig_->partner_allowed(a.type, static_cast<SiteId>(s), p.type,
                                     st.peer_site))
            out.push_back(where + ": bond to " + sig_->agent(p.type).name +
                          "." + sig_->site(p.type, st.peer_site).name +
                          " not allowed by the contact map");
        }
      }
    }
    return out;
  }

  /// Every site documented, every internal state (when the site has an
  /// alphabet) chosen, every link Free or Bound. Species must satisfy this.
  bool fully_specified() const {
    for (const Agent& a : agents_)
      for (std::size_t s = 0; s < a.sites.size(); ++s) {
        const Site& st = a.sites[s];
        if (!st.documented) return false;
        if (st.link != Link::Free && st.link != Link::Bound) return false;
        if (st.internal < 0 &&
            !sig_->site(a.type, static_cast<SiteId>(s)).internal_states.empty())
          return false;
      }
    return true;
  }

  /// Connected components over bond edges; returns per-component agent
  /// indices, each sorted, components ordered by smallest member.
  std::vector<std::vector<int>> components() const {
    std::vector<int> comp(agents_.size(), -1);
    std::vector<std::vector<int>> out;
    for (std::size_t start = 0; start < agents_.size(); ++start) {
      if (comp[start] >= 0) continue;
      int id = static_cast<int>(out.size());
      out.emplace_back();
      std::vector<int> stack{static_cast<int>(start)};
      comp[start] = id;
      while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        out[id].push_back(i);
        for (const Site& st : agents_[i].sites)
          if (st.link == Link::Bound && comp[st.peer_agent] < 0) {
            comp[st.peer_agent] = id;
            stack.push_back(st.peer_agent);
          }
      }
    }
    for (auto& c : out) std::sort(c.begin(), c.end());
    return out;
  }

  bool connected() const { return agents_.empty() || components().size() == 1; }

  /// Subgraph induced by the given agent indices (bonds leaving the set are
  /// an error; callers pass bond-closed sets).
  SiteGraph subgraph(const std::vector<int>& keep) const {
    SiteGraph g(sig_);
    std::vector<int> remap(agents_.size(), -1);
    for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = static_cast<int>(k);
    for (int idx : keep) {
      g.agents_.push_back(agents_[idx]);
      for (Site& st : g.agents_.back().sites)
        if (st.link == Link::Bound) {
          if (remap[st.peer_agent] < 0)
            throw std::logic_error("subgraph: bond leaves the kept set");
          st.peer_agent = remap[st.peer_agent];
        }
    }
    return g;
  }

  /// Disjoint union; returns the index offset given to `other`'s agents.
  int append(const SiteGraph& other) {
    int off = static_cast<int>(agents_.size());
    for (Agent a : other.agents_) {
      for (Site& st : a.sites)
        if (st.link == Link::Bound) st.peer_agent += off;
      agents_.push_back(std::move(a));
    }
    return off;
  }

  /// Per-type agent counts (molecule balance bookkeeping).
  std::vector<long> composition() const {
    std::vector<long> out(sig_ ? sig_->size() : 0, 0);
    for (const Agent& a : agents_) ++out[a.type];
    return out;
  }

  bool operator==(const SiteGraph& other) const {
    return agents_ == other.agents_;
  }

 private:
  SignaturePtr sig_;
  std::vector<Agent> agents_;
};

}  // namespace fraglump
