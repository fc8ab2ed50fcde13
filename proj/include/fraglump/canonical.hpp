#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraglump/sitegraph.hpp"

namespace fraglump {
namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  static const char* hex = "0123456789abcdef";
  for (int shift = 28; shift >= 0; shift -= 4)
    out.push_back(hex[(v >> shift) & 0xF]);
}

// Refine agent ranks until stable: rank' is the lexicographic rank of
// (rank, per-site bond view). Initial ranks come from intrinsic attributes
// only, so the fixpoint is invariant under agent reindexing.
class Refiner {
 public:
  Refiner(const SiteGraph& g, const std::vector<int>& agents)
      : g_(g), agents_(agents), pos_(g.size(), -1) {
    for (std::size_t k = 0; k < agents_.size(); ++k) pos_[agents_[k]] = static_cast<int>(k);
    ranks_.resize(agents_.size());
    std::vector<std::vector<std::uint32_t>> sigs(agents_.size());
    for (std::size_t k = 0; k < agents_.size(); ++k) sigs[k] = intrinsic(agents_[k]);
    assign_ranks(sigs);
  }

  // Runs refinement to fixpoint, honoring any individualization already
  // applied through force_rank.
  void refine() {
    for (;;) {
      std::vector<std::vector<std::uint32_t>> sigs(agents_.size());
      for (std::size_t k = 0; k < agents_.size(); ++k) {
        const Agent& a = g_.agent(agents_[k]);
        std::vector<std::uint32_t>& s = sigs[k];
        s.push_back(static_cast<std::uint32_t>(ranks_[k]));
        for (const Site& st : a.sites) {
          if (st.link == Link::Bound && pos_[st.peer_agent] >= 0) {
            s.push_back(1u + static_cast<std::uint32_t>(ranks_[pos_[st.peer_agent]]));
            s.push_back(static_cast<std::uint32_t>(st.peer_site));
          } else {
            s.push_back(0u);
            s.push_back(0u);
          }
        }
      }
      int before = distinct_;
      assign_ranks(sigs);
      if (distinct_ == before) break;
    }
  }

  int distinct() const { return distinct_; }
  const std::vector<int>& ranks() const { return ranks_; }

  // Smallest rank value shared by more than one agent, or -1 if discrete.
  int first_tied_rank() const {
    std::vector<int> count(agents_.size(), 0);
    for (int r : ranks_) ++count[r];
    for (std::size_t r = 0; r < count.size(); ++r)
      if (count[r] > 1) return static_cast<int>(r);
    return -1;
  }

  // Individualize agent at position k: give it a fresh rank just below its
  // class, shifting later ranks up.
  void force_rank(std::size_t k) {
    int r = ranks_[k];
    for (std::size_t i = 0; i < ranks_.size(); ++i)
      if (ranks_[i] >= r) ++ranks_[i];
    ranks_[k] = r;
    ++distinct_;
  }

 private:
  std::vector<std::uint32_t> intrinsic(int agent_idx) const {
    const Agent& a = g_.agent(agent_idx);
    std::vector<std::uint32_t> s;
    s.push_back(static_cast<std::uint32_t>(a.type));
    for (const Site& st : a.sites) {
      s.push_back(st.documented ? 1u : 0u);
      s.push_back(static_cast<std::uint32_t>(st.internal + 1));
      s.push_back(static_cast<std::uint32_t>(st.link));
    }
    return s;
  }

  void assign_ranks(const std::vector<std::vector<std::uint32_t>>& sigs) {
    std::vector<int> order(sigs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return sigs[x] < sigs[y]; });
    int rank = -1;
    const std::vector<std::uint32_t>* prev = nullptr;
    for (int idx : order) {
      if (!prev || sigs[idx] != *prev) {
        ++rank;
        prev = &sigs[idx];
      }
      ranks_[idx] = rank;
    }
    distinct_ = rank + 1;
  }

  const SiteGraph& g_;
  std::vector<int> agents_;  // component members (graph indices)
  std::vector<int> pos_;     // graph index -> position in agents_, -1 outside
  std::vector<int> ranks_;
  int distinct_ = 0;
};

// Certificate of a component under a discrete ranking.
inline std::string emit_cert(const SiteGraph& g, const std::vector<int>& agents,
                             const std::vector<int>& ranks) {
  std::vector<int> by_rank(agents.size());
  for (std::size_t k = 0; k < agents.size(); ++k) by_rank[ranks[k]] = static_cast<int>(k);
  std::vector<int> canon_pos(g.size(), -1);
  for (std::size_t k = 0; k < agents.size(); ++k) canon_pos[agents[k]] = ranks[k];

  std::string cert;
  put_u32(cert, static_cast<std::uint32_t>(agents.size()));
  std::vector<std::uint32_t> types;
  for (int idx : agents) types.push_back(static_cast<std::uint32_t>(g.agent(idx).type));
  std::sort(types.begin(), types.end());
  for (std::uint32_t t : types) put_u32(cert, t);
  for (std::size_t r = 0; r < by_rank.size(); ++r) {
    const Agent& a = g.agent(agents[by_rank[r]]);
    put_u32(cert, static_cast<std::uint32_t>(a.type));
    for (const Site& st : a.sites) {
      put_u32(cert, st.documented ? 1u : 0u);
      put_u32(cert, static_cast<std::uint32_t>(st.internal + 1));
      put_u32(cert, static_cast<std::uint32_t>(st.link));
      if (st.link == Link::Bound) {
        put_u32(cert, static_cast<std::uint32_t>(canon_pos[st.peer_agent]));
        put_u32(cert, static_cast<std::uint32_t>(st.peer_site));
      }
    }
  }
  return cert;
}

inline std::string component_cert_search(const SiteGraph& g,
                                         const std::vector<int>& agents,
                                         const Refiner& base) {
  if (base.first_tied_rank() < 0) return emit_cert(g, agents, base.ranks());
  int tied = base.first_tied_rank();
  std::string best;
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (base.ranks()[k] != tied) continue;
    Refiner r = base;
    r.force_rank(k);
    r.refine();
    std::string cert = component_cert_search(g, agents, r);
    if (best.empty() || cert < best) best = cert;
  }
  return best;
}

inline std::string component_cert(const SiteGraph& g,
                                  const std::vector<int>& agents) {
  Refiner r(g, agents);
  r.refine();
  return component_cert_search(g, agents, r);
}

}  // namespace detail

/// Isomorphism-invariant certificate of an arbitrary site graph (patterns
/// included): sorted per-component certificates. Certificates order first by
/// agent count, then by type multiset, so sorting species keys groups small
/// complexes before large ones.
inline std::string canonical_cert(const SiteGraph& g) {
  std::vector<std::string> parts;
  for (const auto& comp : g.components())
    parts.push_back(detail::component_cert(g, comp));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back('|');
    out += parts[i];
  }
  return out;
}

/// Canonical key of a fully specified graph. Equal keys iff isomorphic.
inline std::string canonical_key(const SiteGraph& g) {
  if (!g.fully_specified())
    throw std::invalid_argument("canonical_key: graph is not fully specified");
  return canonical_cert(g);
}

}  // namespace fraglump
