#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fraglump {

// Interned identifiers into a SignatureSet. -1 means "not set".
using TypeId = int;
using SiteId = int;   // index into the owning agent type's site list
using StateId = int;  // index into the owning site's internal-state list

/// One named site of an agent type: its internal-state alphabet and the
/// (agent type, site) endpoints it may bind to.
struct SiteSpec {
  std::string name;
  std::vector<std::string> internal_states;
  std::vector<std::pair<std::string, std::string>> partners;  // (agent, site)

  StateId state_id(const std::string& s) const {
    for (std::size_t i = 0; i < internal_states.size(); ++i)
      if (internal_states[i] == s) return static_cast<StateId>(i);
    return -1;
  }
};

struct AgentSignature {
  std::string name;
  std::vector<SiteSpec> sites;

  SiteId site_id(const std::string& s) const {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i].name == s) return static_cast<SiteId>(i);
    return -1;
  }
};

/// The contact map: all agent types with their interfaces. Site graphs keep a
/// shared pointer to the set they were built against; two graphs can interact
/// only when they share the same vocabulary.
class SignatureSet {
 public:
  SignatureSet() = default;
  explicit SignatureSet(std::vector<AgentSignature> agents)
      : agents_(std::move(agents)) {}

  const std::vector<AgentSignature>& agents() const { return agents_; }
  std::size_t size() const { return agents_.size(); }

  TypeId type_id(const std::string& name) const {
    for (std::size_t i = 0; i < agents_.size(); ++i)
      if (agents_[i].name == name) return static_cast<TypeId>(i);
    return -1;
  }

  const AgentSignature& agent(TypeId t) const { return agents_.at(t); }
  const SiteSpec& site(TypeId t, SiteId s) const {
    return agents_.at(t).sites.at(s);
  }
  int site_count(TypeId t) const {
    return static_cast<int>(agents_.at(t).sites.size());
  }

  bool partner_allowed(TypeId t1, SiteId s1, TypeId t2, SiteId s2) const {
    const SiteSpec& sp = site(t1, s1);
    const std::string& an = agent(t2).name;
    const std::string& sn = site(t2, s2).name;
    for (const auto& p : sp.partners)
      if (p.first == an && p.second == sn) return true;
    return false;
  }

  TypeId add(AgentSignature sig) {
    agents_.push_back(std::move(sig));
    return static_cast<TypeId>(agents_.size() - 1);
  }

  /// Structural problems: duplicate names, dangling partner references,
  /// asymmetric partner declarations. Returns human-readable messages.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      for (std::size_t j = i + 1; j < agents_.size(); ++j)
        if (agents_[i].name == agents_[j].name)
          out.push_back("duplicate agent type '" + agents_[i].name + "'");
      const AgentSignature& a = agents_[i];
      for (std::size_t s = 0; s < a.sites.size(); ++s) {
        for (std::size_t t = s + 1; t < a.sites.size(); ++t)
          if (a.sites[s].name == a.sites[t].name)
            out.push_back("duplicate site '" + a.sites[s].name + "' on '" +
                          a.name + "'");
        const SiteSpec& sp = a.sites[s];
        for (std::size_t u = 0; u < sp.internal_states.size(); ++u)
          for (std::size_t v = u + 1; v < sp.internal_states.size(); ++v)
            if (sp.internal_states[u] == sp.internal_states[v])
              out.push_back("duplicate state '" + sp.internal_states[u] +
                            "' on " + a.name + "." + sp.name);
        for (const auto& p : sp.partners) {
          TypeId pt = type_id(p.first);
          if (pt < 0) {
            out.push_back("partner of " + a.name + "." + sp.name +
                          " names unknown agent '" + p.first + "'");
            continue;
          }
          SiteId ps = agents_[pt].site_id(p.second);
          if (ps < 0) {
            out.push_back("partner of " + a.name + "." + sp.name +
                          " names unknown site '" + p.first + "." + p.second +
                          "'");
            continue;
          }
          if (!partner_allowed(pt, ps, static_cast<TypeId>(i),
                               static_cast<SiteId>(s)))
            out.push_back("partner relation not symmetric: " + a.name + "." +
                          sp.name + " -> " + p.first + "." + p.second);
        }
      }
    }
    return out;
  }

  bool operator==(const SignatureSet& other) const {
    if (agents_.size() != other.agents_.size()) return false;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const AgentSignature& a = agents_[i];
      const AgentSignature& b = other.agents_[i];
      if (a.name != b.name || a.sites.size() != b.sites.size()) return false;
      for (std::size_t s = 0; s < a.sites.size(); ++s) {
        if (a.sites[s].name != b.sites[s].name ||
            a.sites[s].internal_states != b.sites[s].internal_states)
          return false;
        auto ps = a.sites[s].partners;
        auto qs = b.sites[s].partners;
        std::sort(ps.begin(), ps.end());
        std::sort(qs.begin(), qs.end());
        if (ps != qs) return false;
      }
    }
    return true;
  }

 private:
  std::vector<AgentSignature> agents_;
};

using SignaturePtr = std::shared_ptr<const SignatureSet>;

}  // namespace fraglump
