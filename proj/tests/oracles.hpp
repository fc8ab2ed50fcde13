#pragma once

// Independent reference machinery for the test suite: a from-scratch
// structure-preservation predicate, exhaustive embedding enumeration,
// random graph/model generators and small numeric helpers. Nothing here
// calls back into the library's matching or canonicalization paths.

#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraglump/model.hpp"
#include "fraglump/parser.hpp"
#include "fraglump/sitegraph.hpp"

namespace oracles {

using fraglump::Agent;
using fraglump::Link;
using fraglump::Site;
using fraglump::SiteGraph;

// Structure preservation, written directly from the matching semantics:
// types preserved, specified internal states preserved, free/bound status
// preserved, bonds carried onto bonds, injective on agents.
inline bool embedding_ok(const SiteGraph& pattern, const SiteGraph& target,
                         const std::vector<int>& map) {
  if (map.size() != pattern.size()) return false;
  std::vector<bool> used(target.size(), false);
  for (int t : map) {
    if (t < 0 || t >= static_cast<int>(target.size()) || used[t]) return false;
    used[t] = true;
  }
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const Agent& pa = pattern.agent(static_cast<int>(i));
    const Agent& ta = target.agent(map[i]);
    if (pa.type != ta.type) return false;
    for (std::size_t s = 0; s < pa.sites.size(); ++s) {
      const Site& p = pa.sites[s];
      const Site& t = ta.sites[s];
      if (!p.documented) continue;
      if (p.internal >= 0 && t.internal != p.internal) return false;
      switch (p.link) {
        case Link::Unspec:
          break;
        case Link::Free:
          if (t.link != Link::Free) return false;
          break;
        case Link::BoundAny:
          if (t.link != Link::Bound && t.link != Link::BoundAny) return false;
          break;
        case Link::Bound:
          if (t.link != Link::Bound) return false;
          if (t.peer_agent != map[p.peer_agent]) return false;
          if (t.peer_site != p.peer_site) return false;
          break;
      }
    }
  }
  return true;
}

// Exact attribute equality along a bijection (automorphism predicate).
inline bool iso_ok(const SiteGraph& a, const SiteGraph& b,
                   const std::vector<int>& map) {
  if (a.size() != b.size() || map.size() != a.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Agent& pa = a.agent(static_cast<int>(i));
    const Agent& ta = b.agent(map[i]);
    if (pa.type != ta.type) return false;
    for (std::size_t s = 0; s < pa.sites.size(); ++s) {
      const Site& p = pa.sites[s];
      const Site& t = ta.sites[s];
      if (p.documented != t.documented || p.internal != t.internal ||
          p.link != t.link)
        return false;
      if (p.link == Link::Bound &&
          (t.peer_agent != map[p.peer_agent] || t.peer_site != p.peer_site))
        return false;
    }
  }
  return true;
}

// Exhaustive: try every injective type-respecting assignment, filter.
inline std::vector<std::vector<int>> naive_embeddings(const SiteGraph& pattern,
                                                      const SiteGraph& target) {
  std::vector<std::vector<int>> out;
  std::vector<int> map(pattern.size(), -1);
  std::vector<bool> used(target.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == pattern.size()) {
      if (embedding_ok(pattern, target, map)) out.push_back(map);
      return;
    }
    for (int t = 0; t < static_cast<int>(target.size()); ++t) {
      if (used[t] || target.agent(t).type != pattern.agent(static_cast<int>(i)).type)
        continue;
      used[t] = true;
      map[i] = t;
      rec(i + 1);
      used[t] = false;
      map[i] = -1;
    }
  };
  rec(0);
  return out;
}

// Backtracking count of attribute-identical bijections. Prunes on agent
// attributes and on bonds whose lower endpoint is already placed, then
// re-validates each leaf with iso_ok.
inline std::uint64_t naive_automorphisms(const SiteGraph& g) {
  std::uint64_t n = 0;
  std::vector<int> map(g.size(), -1);
  std::vector<bool> used(g.size(), false);
  auto compatible = [&](std::size_t i, int t) {
    const Agent& a = g.agent(static_cast<int>(i));
    const Agent& b = g.agent(t);
    if (a.type != b.type) return false;
    for (std::size_t s = 0; s < a.sites.size(); ++s) {
      const Site& p = a.sites[s];
      const Site& q = b.sites[s];
      if (p.documented != q.documented || p.internal != q.internal ||
          p.link != q.link)
        return false;
      if (p.link == Link::Bound) {
        if (p.peer_site != q.peer_site) return false;
        if (p.peer_agent < static_cast<int>(i) &&
            map[p.peer_agent] != q.peer_agent)
          return false;
      }
    }
    return true;
  };
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == g.size()) {
      if (iso_ok(g, g, map)) ++n;
      return;
    }
    for (int t = 0; t < static_cast<int>(g.size()); ++t) {
      if (used[t] || !compatible(i, t)) continue;
      used[t] = true;
      map[i] = t;
      rec(i + 1);
      used[t] = false;
      map[i] = -1;
    }
  };
  rec(0);
  return n;
}

inline SiteGraph permute_agents(const SiteGraph& g, const std::vector<int>& perm) {
  SiteGraph out(g.signatures());
  std::vector<Agent> agents(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Agent a = g.agent(static_cast<int>(i));
    for (Site& s : a.sites)
      if (s.link == Link::Bound) s.peer_agent = perm[s.peer_agent];
    agents[perm[i]] = std::move(a);
  }
  for (Agent& a : agents) {
    out.add_agent(a.type);
    out.agents().back() = std::move(a);
  }
  return out;
}

// A signature with internal states, competing partners and a same-type bond.
inline fraglump::SignaturePtr rich_signature() {
  static const char* text =
      "%agent: P(x!{Q.x,P.y}, y~{u,p}!{P.x})\n"
      "%agent: Q(x!{P.x,R.w}, z~{a,b})\n"
      "%agent: R(w~{u,p}!{Q.x})\n";
  auto res = fraglump::parse_model(text);
  if (!res.ok()) throw std::logic_error("rich_signature failed to parse");
  return res.model->sig;
}

// Random fully specified connected species over a signature, at most
// `max_agents` agents. Grows a bond tree, then randomizes internal states
// and occasionally closes extra cycles.
inline SiteGraph random_species(const fraglump::SignaturePtr& sig,
                                std::mt19937_64& rng, int max_agents = 8) {
  const fraglump::SignatureSet& S = *sig;
  SiteGraph g(sig);
  std::uniform_int_distribution<int> type_pick(0, static_cast<int>(S.size()) - 1);
  g.add_agent(type_pick(rng));
  int target_size = std::uniform_int_distribution<int>(1, max_agents)(rng);

  auto free_slots = [&]() {
    std::vector<std::pair<int, fraglump::SiteId>> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Agent& a = g.agent(static_cast<int>(i));
      for (fraglump::SiteId s = 0; s < static_cast<fraglump::SiteId>(a.sites.size()); ++s)
        if (a.sites[s].link != Link::Bound &&
            !S.site(a.type, s).partners.empty())
          out.emplace_back(static_cast<int>(i), s);
    }
    return out;
  };

  while (static_cast<int>(g.size()) < target_size) {
    auto slots = free_slots();
    if (slots.empty()) break;
    auto [i, s] = slots[std::uniform_int_distribution<std::size_t>(0, slots.size() - 1)(rng)];
    const auto& partners = S.site(g.agent(i).type, s).partners;
    auto [pname, psname] =
        partners[std::uniform_int_distribution<std::size_t>(0, partners.size() - 1)(rng)];
    fraglump::TypeId pt = S.type_id(pname);
    fraglump::SiteId ps = S.agent(pt).site_id(psname);
    int j = g.add_agent(pt);
    g.bind(i, s, j, ps);
  }
  // occasionally close a cycle between compatible free sites
  if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
    auto slots = free_slots();
    bool closed = false;
    for (std::size_t a = 0; a < slots.size() && !closed; ++a)
      for (std::size_t b = a + 1; b < slots.size() && !closed; ++b) {
        auto [i, s] = slots[a];
        auto [j, t] = slots[b];
        if (i == j && s == t) continue;
        if (S.partner_allowed(g.agent(i).type, s, g.agent(j).type, t) &&
            g.site(i, s).link != Link::Bound &&
            g.site(j, t).link != Link::Bound) {
          g.bind(i, s, j, t);
          closed = true;
        }
      }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    Agent& a = g.agent(static_cast<int>(i));
    for (fraglump::SiteId s = 0; s < static_cast<fraglump::SiteId>(a.sites.size()); ++s) {
      Site& st = a.sites[s];
      st.documented = true;
      if (st.link != Link::Bound) st.link = Link::Free;
      int n_states = static_cast<int>(S.site(a.type, s).internal_states.size());
      if (n_states > 0)
        st.internal = std::uniform_int_distribution<int>(0, n_states - 1)(rng);
    }
  }
  if (!g.connected()) throw std::logic_error("random_species: not connected");
  return g;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> A,
                                        std::vector<double> b) {
  const std::size_t n = A.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    if (std::abs(A[c][c]) < 1e-14) throw std::runtime_error("singular system");
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

// Newton iteration with a finite-difference Jacobian.
inline std::vector<double> newton_solve(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    std::vector<double> x, int iters = 60, double tol = 1e-13) {
  const std::size_t n = x.size();
  for (int it = 0; it < iters; ++it) {
    std::vector<double> fx = f(x);
    double norm = 0;
    for (double v : fx) norm = std::max(norm, std::abs(v));
    if (norm < tol) break;
    std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      std::vector<double> xp = x;
      xp[j] += h;
      std::vector<double> fp = f(xp);
      for (std::size_t i = 0; i < n; ++i) J[i][j] = (fp[i] - fx[i]) / h;
    }
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -fx[i];
    std::vector<double> dx = solve_linear(J, rhs);
    for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  }
  return x;
}

}  // namespace oracles
