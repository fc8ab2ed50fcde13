#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "fraglump/model.hpp"

namespace fraglump {

/// Per agent type, a partition of its sites into classes that must be
/// tracked jointly. Classes are ordered by their smallest site, sites
/// ascending inside each class.
struct Annotation {
  std::vector<std::vector<std::vector<SiteId>>> classes;  // [type][class][site]

  int class_of(TypeId t, SiteId s) const {
    const auto& cs = classes.at(t);
    for (std::size_t c = 0; c < cs.size(); ++c)
      for (SiteId x : cs[c])
        if (x == s) return static_cast<int>(c);
    return -1;
  }

  bool operator==(const Annotation&) const = default;
};

namespace detail {

class SiteUnionFind {
 public:
  explicit SiteUnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void merge(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

inline std::vector<std::vector<std::vector<SiteId>>> classes_from_unions(
    const SignatureSet& sig, std::vector<SiteUnionFind>& uf) {
  std::vector<std::vector<std::vector<SiteId>>> out(sig.size());
  for (std::size_t t = 0; t < sig.size(); ++t) {
    int n = sig.site_count(static_cast<TypeId>(t));
    std::vector<std::vector<SiteId>> classes;
    std::vector<int> root_class(n, -1);
    for (SiteId s = 0; s < n; ++s) {
      int r = uf[t].find(s);
      if (root_class[r] < 0) {
        root_class[r] = static_cast<int>(classes.size());
        classes.emplace_back();
      }
      classes[root_class[r]].push_back(s);
    }
    out[t] = std::move(classes);
  }
  return out;
}

}  // namespace detail

/// The finest partition in which any two sites of an agent type documented
/// together in a rule side or observable — in one occurrence directly, or
/// indirectly through the bonds of one connected pattern component — share
/// a class.
inline Annotation annotate(const Model& m) {
  const SignatureSet& sig = *m.sig;
  std::vector<detail::SiteUnionFind> uf;
  for (std::size_t t = 0; t < sig.size(); ++t)
    uf.emplace_back(sig.site_count(static_cast<TypeId>(t)));

  auto absorb_pattern = [&](const SiteGraph& g) {
    for (const auto& comp : g.components()) {
      // per type, pool every documented site seen across the component
      std::vector<std::vector<SiteId>> pool(sig.size());
      for (int idx : comp) {
        const Agent& a = g.agent(idx);
        for (SiteId s = 0; s < static_cast<SiteId>(a.sites.size()); ++s)
          if (a.sites[s].documented) pool[a.type].push_back(s);
      }
      for (std::size_t t = 0; t < pool.size(); ++t)
        for (std::size_t i = 1; i < pool[t].size(); ++i)
          uf[t].merge(pool[t][0], pool[t][i]);
    }
  };

  for (const Rule& r : m.rules) {
    absorb_pattern(r.lhs);
    absorb_pattern(r.rhs);
  }
  for (const Observable& obs : m.observables) absorb_pattern(obs.pattern);

  Annotation ann;
  ann.classes = detail::classes_from_unions(sig, uf);
  return ann;
}

/// One class holding the whole interface of each type (identity reduction).
inline Annotation full_interface_annotation(const SignatureSet& sig) {
  Annotation ann;
  ann.classes.resize(sig.size());
  for (std::size_t t = 0; t < sig.size(); ++t) {
    int n = sig.site_count(static_cast<TypeId>(t));
    if (n == 0) continue;
    std::vector<SiteId> all(n);
    std::iota(all.begin(), all.end(), 0);
    ann.classes[t].push_back(std::move(all));
  }
  return ann;
}

/// Structural validity: every class nonempty, classes disjoint, classes
/// cover exactly the type's site set.
inline std::vector<std::string> annotation_violations(const SignatureSet& sig,
                                                      const Annotation& ann) {
  std::vector<std::string> out;
  if (ann.classes.size() != sig.size()) {
    out.push_back("annotation covers " + std::to_string(ann.classes.size()) +
                  " agent types, signature has " + std::to_string(sig.size()));
    return out;
  }
  for (std::size_t t = 0; t < sig.size(); ++t) {
    int n = sig.site_count(static_cast<TypeId>(t));
    std::vector<int> seen(n, 0);
    for (const auto& cls : ann.classes[t]) {
      if (cls.empty())
        out.push_back("empty class on " + sig.agent(static_cast<TypeId>(t)).name);
      for (SiteId s : cls) {
        if (s < 0 || s >= n) {
          out.push_back("site index out of range on " +
                        sig.agent(static_cast<TypeId>(t)).name);
          continue;
        }
        ++seen[s];
      }
    }
    for (int s = 0; s < n; ++s)
      if (seen[s] != 1)
        out.push_back("site " + sig.agent(static_cast<TypeId>(t)).name + "." +
                      sig.site(static_cast<TypeId>(t), s).name +
                      (seen[s] == 0 ? " not covered" : " covered twice"));
  }
  return out;
}

/// Pairs the model correlates that `ann` splits across classes. Empty means
/// `ann` is at least as coarse as the model's own annotation.
inline std::vector<std::string> annotation_coarseness_gaps(const Model& m,
                                                           const Annotation& ann) {
  Annotation needed = annotate(m);
  std::vector<std::string> out;
  const SignatureSet& sig = *m.sig;
  for (std::size_t t = 0; t < needed.classes.size(); ++t)
    for (const auto& cls : needed.classes[t])
      for (std::size_t i = 1; i < cls.size(); ++i)
        if (ann.class_of(static_cast<TypeId>(t), cls[0]) !=
            ann.class_of(static_cast<TypeId>(t), cls[i]))
          out.push_back("rule set correlates " +
                        sig.agent(static_cast<TypeId>(t)).name + "." +
                        sig.site(static_cast<TypeId>(t), cls[0]).name + " with " +
                        sig.agent(static_cast<TypeId>(t)).name + "." +
                        sig.site(static_cast<TypeId>(t), cls[i]).name +
                        " but the annotation separates them");
  return out;
}

}  // namespace fraglump
