#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fraglump/canonical.hpp"
#include "fraglump/embedding.hpp"
#include "fraglump/model.hpp"
#include "fraglump/parser.hpp"

namespace fraglump {

struct CapExceeded : std::runtime_error {
  std::size_t reached;
  explicit CapExceeded(const std::string& what, std::size_t n)
      : std::runtime_error(what + " (cap hit after " + std::to_string(n) +
                           " graphs)"),
        reached(n) {}
};

struct ExpandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpeciesEntry {
  SiteGraph graph;
  std::string key;   // canonical certificate
  std::string name;  // short display name, unique within the network
  std::vector<long> composition;
};

/// One concrete reaction: consumption/production multisets over species
/// indices, both rate constants and the rules it came from.
struct Reaction {
  std::vector<std::pair<int, int>> consume;  // (species, coeff), sorted
  std::vector<std::pair<int, int>> produce;
  double k = 0.0;  // deterministic constant
  double c = 0.0;  // stochastic constant
  std::vector<std::string> rules;
  int rule_index = std::numeric_limits<int>::max();

  int coeff(const std::vector<std::pair<int, int>>& v, int i) const {
    for (const auto& [s, n] : v)
      if (s == i) return n;
    return 0;
  }
  int consumed(int i) const { return coeff(consume, i); }
  int produced(int i) const { return coeff(produce, i); }
  int molecularity() const {
    int m = 0;
    for (const auto& [s, n] : consume) m += n;
    return m;
  }
};

struct ReactionNetwork {
  SignaturePtr sig;
  double volume = 1.0;
  std::vector<SpeciesEntry> species;
  std::vector<Reaction> reactions;

  int index_of(const std::string& key) const {
    for (std::size_t i = 0; i < species.size(); ++i)
      if (species[i].key == key) return static_cast<int>(i);
    return -1;
  }

  std::vector<long> consumption_vector(int j) const {
    std::vector<long> a(species.size(), 0);
    for (const auto& [s, n] : reactions.at(j).consume) a[s] = n;
    return a;
  }
  std::vector<long> production_vector(int j) const {
    std::vector<long> a(species.size(), 0);
    for (const auto& [s, n] : reactions.at(j).produce) a[s] = n;
    return a;
  }
  std::vector<long> change_vector(int j) const {
    std::vector<long> nu = production_vector(j);
    for (const auto& [s, n] : reactions.at(j).consume) nu[s] -= n;
    return nu;
  }

  /// Per-agent-type molecule balance of every reaction; empty if balanced.
  std::vector<std::string> conservation_violations() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < reactions.size(); ++j) {
      std::vector<long> nu = change_vector(static_cast<int>(j));
      std::vector<long> bal(sig->size(), 0);
      for (std::size_t i = 0; i < species.size(); ++i)
        for (std::size_t t = 0; t < bal.size(); ++t)
          bal[t] += nu[i] * species[i].composition[t];
      for (std::size_t t = 0; t < bal.size(); ++t)
        if (bal[t] != 0)
          out.push_back("reaction " + std::to_string(j) + " unbalanced for " +
                        sig->agent(static_cast<TypeId>(t)).name);
    }
    return out;
  }
};

/// Mass-action rate k_j * prod z_i^a_ij.
inline double deterministic_rate(const ReactionNetwork& net, int j,
                                 const std::vector<double>& z) {
  if (j < 0 || j >= static_cast<int>(net.reactions.size()))
    throw std::out_of_range("deterministic_rate: reaction index");
  double r = net.reactions[j].k;
  for (const auto& [s, n] : net.reactions[j].consume)
    for (int t = 0; t < n; ++t) r *= z.at(s);
  return r;
}

/// Stochastic rate c_j * prod C(x_i, a_ij).
inline double propensity(const ReactionNetwork& net, int j,
                         const std::vector<long>& x) {
  if (j < 0 || j >= static_cast<int>(net.reactions.size()))
    throw std::out_of_range("propensity: reaction index");
  double g = net.reactions[j].c;
  for (const auto& [s, n] : net.reactions[j].consume) {
    long xi = x.at(s);
    if (xi < n) return 0.0;
    for (int t = 0; t < n; ++t) g *= static_cast<double>(xi - t) / (t + 1);
  }
  return g;
}

namespace detail {

// General conversion between reaction-level constants. `repeat_factorial`
// is prod_i a_ij! and corrects for identical reactant copies.
inline double stochastic_from_deterministic(double k, int molecularity,
                                            double repeat_factorial,
                                            double volume) {
  return k * std::pow(volume, 1 - molecularity) * repeat_factorial;
}

}  // namespace detail

/// Deterministic -> stochastic constant for elementary reactions with
/// distinct reactants. Unimolecular constants are volume independent,
/// bimolecular ones scale with 1/V, zero-order ones with V.
inline double convert_rate(double k, int molecularity, double volume) {
  if (!(volume > 0)) throw std::invalid_argument("convert_rate: volume <= 0");
  if (molecularity < 0 || molecularity > 2)
    throw std::invalid_argument("convert_rate: molecularity must be 0, 1 or 2");
  return detail::stochastic_from_deterministic(k, molecularity, 1.0, volume);
}

namespace detail {

struct CompiledRule {
  const Rule* rule = nullptr;
  int index = 0;
  std::vector<SiteGraph> components;
  std::vector<std::vector<int>> component_agents;  // local -> lhs index
  std::vector<SiteAction> actions;
  double lhs_automorphisms = 1.0;
};

inline CompiledRule compile_rule(const Rule& r, int index) {
  CompiledRule c;
  c.rule = &r;
  c.index = index;
  for (const auto& comp : r.lhs.components()) {
    c.component_agents.push_back(comp);
    c.components.push_back(r.lhs.subgraph(comp));
  }
  c.actions = rule_actions(r);
  c.lhs_automorphisms =
      static_cast<double>(count_embeddings(r.lhs, r.lhs, MatchMode::Exact));
  return c;
}

// Shared rewrite engine: grows a universe of graphs (species or fragments)
// closed under rule application, and accumulates per-rule instance counts
// keyed by (consumed multiset, produced multiset).
class RewriteEngine {
 public:
  struct InstanceKey {
    int rule;
    std::vector<int> consumed;  // graph indices with repetition, sorted
    std::vector<int> produced;
    auto operator<=>(const InstanceKey&) const = default;
  };

  RewriteEngine(SignaturePtr sig, const std::vector<Rule>& rules,
                std::size_t cap, bool concrete)
      : sig_(std::move(sig)), cap_(cap), concrete_(concrete) {
    for (std::size_t i = 0; i < rules.size(); ++i)
      rules_.push_back(compile_rule(rules[i], static_cast<int>(i)));
    emb_cache_.resize(rules_.size());
    for (std::size_t r = 0; r < rules_.size(); ++r)
      emb_cache_[r].resize(rules_[r].components.size());
  }

  int add_seed(const SiteGraph& g) { return add_graph(g); }

  void run() {
    while (head_ < graphs_.size()) {
      int idx = static_cast<int>(head_++);
      for (CompiledRule& rule : rules_) process_new_graph(rule, idx);
    }
  }

  const std::vector<SiteGraph>& graphs() const { return graphs_; }
  const std::vector<std::string>& keys() const { return keys_; }
  const std::map<InstanceKey, double>& instances() const { return instances_; }
  const std::vector<CompiledRule>& rules() const { return rules_; }

 private:
  int add_graph(const SiteGraph& g) {
    std::string key = canonical_cert(g);
    auto it = registry_.find(key);
    if (it != registry_.end()) return it->second;
    if (graphs_.size() >= cap_)
      throw CapExceeded("graph universe exceeds the configured cap",
                        graphs_.size());
    if (concrete_ && !g.fully_specified())
      throw ExpandError("rule application produced a partial graph");
    int idx = static_cast<int>(graphs_.size());
    graphs_.push_back(g);
    keys_.push_back(key);
    registry_.emplace(std::move(key), idx);
    for (std::size_t r = 0; r < rules_.size(); ++r)
      for (std::size_t k = 0; k < rules_[r].components.size(); ++k)
        emb_cache_[r][k].push_back(
            find_embeddings(rules_[r].components[k], graphs_[idx]));
    return idx;
  }

  // All multisets over [0, new_idx] of size 1..m that include new_idx.
  void process_new_graph(CompiledRule& rule, int new_idx) {
    int m = static_cast<int>(rule.components.size());
    if (m == 0) return;
    std::vector<int> multiset;
    enumerate_multisets(rule, new_idx, m, 0, multiset);
  }

  // Sorted multisets over [0, new_idx] of size 1..max_size that contain
  // new_idx (so each multiset is handled once, when its newest member lands).
  void enumerate_multisets(CompiledRule& rule, int new_idx, int max_size,
                           int min_value, std::vector<int>& multiset) {
    if (!multiset.empty() && multiset.back() == new_idx)
      process_multiset(rule, multiset);
    if (static_cast<int>(multiset.size()) == max_size) return;
    for (int v = min_value; v <= new_idx; ++v) {
      multiset.push_back(v);
      enumerate_multisets(rule, new_idx, max_size, v, multiset);
      multiset.pop_back();
    }
  }

  void process_multiset(CompiledRule& rule, const std::vector<int>& copies) {
    int m = static_cast<int>(rule.components.size());
    int t = static_cast<int>(copies.size());
    if (t > m) return;
    std::size_t rid = &rule - rules_.data();
    // quick reject: every copy must admit at least one component
    for (int pos = 0; pos < t; ++pos) {
      bool any = false;
      for (int k = 0; k < m && !any; ++k)
        any = !emb_cache_[rid][k][copies[pos]].empty();
      if (!any) return;
    }
    // offsets of each copy inside the union graph
    std::vector<int> offsets(t, 0);
    SiteGraph unioned(sig_);
    for (int pos = 0; pos < t; ++pos)
      offsets[pos] = unioned.append(graphs_[copies[pos]]);

    std::vector<int> assign(m, 0);
    assign_components(rule, copies, offsets, unioned, assign, 0);
  }

  void assign_components(CompiledRule& rule, const std::vector<int>& copies,
                         const std::vector<int>& offsets,
                         const SiteGraph& unioned, std::vector<int>& assign,
                         int k) {
    int m = static_cast<int>(rule.components.size());
    int t = static_cast<int>(copies.size());
    if (k == m) {
      std::vector<bool> hit(t, false);
      for (int v : assign) hit[v] = true;
      for (bool h : hit)
        if (!h) return;  // not saturating: a copy is never consumed
      combine_embeddings(rule, copies, offsets, unioned, assign);
      return;
    }
    std::size_t rid = &rule - rules_.data();
    for (int pos = 0; pos < t; ++pos) {
      if (emb_cache_[rid][k][copies[pos]].empty()) continue;
      assign[k] = pos;
      assign_components(rule, copies, offsets, unioned, assign, k + 1);
    }
  }

  void combine_embeddings(CompiledRule& rule, const std::vector<int>& copies,
                          const std::vector<int>& offsets,
                          const SiteGraph& unioned,
                          const std::vector<int>& assign) {
    std::size_t rid = &rule - rules_.data();
    int m = static_cast<int>(rule.components.size());
    std::vector<std::size_t> pick(m, 0);
    std::vector<int> full_map(rule.rule->lhs.size(), -1);
    std::function<void(int)> rec = [&](int k) {
      if (k == m) {
        apply_instance(rule, copies, unioned, full_map);
        return;
      }
      const auto& embs = emb_cache_[rid][k][copies[assign[k]]];
      for (const Embedding& e : embs) {
        // disjointness against components already placed in the same copy
        bool clash = false;
        for (int prev = 0; prev < k && !clash; ++prev) {
          if (assign[prev] != assign[k]) continue;
          for (int la : rule.component_agents[prev]) {
            int img = full_map[la] - offsets[assign[prev]];
            for (std::size_t l = 0; l < e.map.size() && !clash; ++l)
              if (e.map[l] == img) clash = true;
            if (clash) break;
          }
        }
        if (clash) continue;
        for (std::size_t l = 0; l < e.map.size(); ++l)
          full_map[rule.component_agents[k][l]] = offsets[assign[k]] + e.map[l];
        rec(k + 1);
        for (int la : rule.component_agents[k]) full_map[la] = -1;
      }
    };
    rec(0);
  }

  void apply_instance(CompiledRule& rule, const std::vector<int>& copies,
                      const SiteGraph& unioned,
                      const std::vector<int>& full_map) {
    SiteGraph product = unioned;
    for (const SiteAction& act : rule.actions) {
      switch (act.kind) {
        case ActionKind::SetInternal:
          product.site(full_map[act.agent], act.site).internal = act.new_state;
          break;
        case ActionKind::Bind: {
          Site& a = product.site(full_map[act.agent], act.site);
          Site& b = product.site(full_map[act.peer_agent], act.peer_site);
          if (a.link == Link::Bound || b.link == Link::Bound)
            throw ExpandError("rule '" + rule.rule->name +
                              "' binds an occupied site");
          product.bind(full_map[act.agent], act.site,
                       full_map[act.peer_agent], act.peer_site);
          break;
        }
        case ActionKind::Unbind:
          product.unbind(full_map[act.agent], act.site);
          break;
      }
    }
    auto bad = product.violations();
    if (!bad.empty())
      throw ExpandError("rule '" + rule.rule->name +
                        "' produced a signature-violating graph: " +
                        bad.front());
    InstanceKey inst;
    inst.rule = rule.index;
    inst.consumed = copies;
    for (const auto& comp : product.components())
      inst.produced.push_back(add_graph(product.subgraph(comp)));
    std::sort(inst.produced.begin(), inst.produced.end());
    instances_[inst] += 1.0;
  }

  SignaturePtr sig_;
  std::size_t cap_;
  bool concrete_;
  std::vector<CompiledRule> rules_;
  std::vector<SiteGraph> graphs_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, int> registry_;
  // emb_cache_[rule][component][graph] -> embeddings of that lhs component
  std::vector<std::vector<std::vector<std::vector<Embedding>>>> emb_cache_;
  std::size_t head_ = 0;
  std::map<InstanceKey, double> instances_;
};

inline std::string composition_name(const SignatureSet& sig,
                                    const std::vector<long>& comp) {
  std::string out;
  for (std::size_t t = 0; t < comp.size(); ++t)
    for (long k = 0; k < comp[t]; ++k)
      out += sig.agent(static_cast<TypeId>(t)).name;
  return out;
}

}  // namespace detail

/// Materialized initial mixture: canonical species with integer counts.
/// Concentration entries scale with the volume (rounded to nearest count).
inline std::vector<std::pair<SiteGraph, long>> initial_species(
    const Model& m, double volume) {
  std::map<std::string, std::pair<SiteGraph, long>> acc;
  std::vector<std::string> order;
  for (const InitEntry& e : m.init) {
    double amount = e.is_concentration ? e.amount * volume : e.amount;
    long count = std::lround(amount);
    for (const auto& comp : e.graph.components()) {
      SiteGraph g = e.graph.subgraph(comp);
      std::string key = canonical_key(g);
      auto it = acc.find(key);
      if (it == acc.end()) {
        acc.emplace(key, std::make_pair(g, count));
        order.push_back(key);
      } else {
        it->second.second += count;
      }
    }
  }
  std::vector<std::pair<SiteGraph, long>> out;
  for (const std::string& key : order) out.push_back(acc.at(key));
  return out;
}

namespace detail {

/// Assembles the deterministic network view of a finished engine run.
/// Species are ordered by canonical key (size first), reactions by (first
/// contributing rule, consumption, production). Instances of one rule that
/// induce the same reaction fold into the constants.
inline ReactionNetwork network_from_engine(const RewriteEngine& engine,
                                           const SignaturePtr& sig,
                                           double volume) {
  ReactionNetwork net;
  net.sig = sig;
  net.volume = volume;

  const auto& graphs = engine.graphs();
  std::vector<int> order(graphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return engine.keys()[a] < engine.keys()[b];
  });
  std::vector<int> rank(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

  for (int idx : order) {
    SpeciesEntry e;
    e.graph = graphs[idx];
    e.key = engine.keys()[idx];
    e.composition = e.graph.composition();
    net.species.push_back(std::move(e));
  }
  // short names: agent content, disambiguated by structure when needed
  std::map<std::string, int> name_uses;
  for (auto& e : net.species)
    ++name_uses[detail::composition_name(*net.sig, e.composition)];
  for (auto& e : net.species) {
    std::string nm = detail::composition_name(*net.sig, e.composition);
    e.name = name_uses[nm] > 1 ? pattern_text(e.graph) : nm;
  }

  // fold instances into reactions
  std::map<std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>,
           Reaction>
      merged;
  for (const auto& [key, count] : engine.instances()) {
    const Rule& rule = *engine.rules()[key.rule].rule;
    double factor = count / engine.rules()[key.rule].lhs_automorphisms;
    auto to_pairs = [&](const std::vector<int>& graph_indices) {
      std::map<int, int> mult;
      for (int g : graph_indices) ++mult[rank[g]];
      return std::vector<std::pair<int, int>>(mult.begin(), mult.end());
    };
    std::vector<std::pair<int, int>> cons = to_pairs(key.consumed);
    std::vector<std::pair<int, int>> prod = to_pairs(key.produced);
    int molecularity = 0;
    double repeat_factorial = 1.0;
    for (const auto& [s, n] : cons) {
      molecularity += n;
      for (int f = 2; f <= n; ++f) repeat_factorial *= f;
    }
    double k_part, c_part;
    if (rule.rate.kind == RateKind::Deterministic) {
      k_part = rule.rate.value * factor;
      c_part = detail::stochastic_from_deterministic(k_part, molecularity,
                                                     repeat_factorial, volume);
    } else {
      c_part = rule.rate.value * factor;
      k_part = c_part * std::pow(volume, molecularity - 1) / repeat_factorial;
    }
    Reaction& r = merged[{cons, prod}];
    r.consume = cons;
    r.produce = prod;
    r.k += k_part;
    r.c += c_part;
    if (std::find(r.rules.begin(), r.rules.end(), rule.name) == r.rules.end())
      r.rules.push_back(rule.name);
    r.rule_index = std::min(r.rule_index, key.rule);
  }
  for (auto& [key, r] : merged) net.reactions.push_back(std::move(r));
  std::sort(net.reactions.begin(), net.reactions.end(),
            [](const Reaction& a, const Reaction& b) {
              if (a.rule_index != b.rule_index) return a.rule_index < b.rule_index;
              if (a.consume != b.consume) return a.consume < b.consume;
              return a.produce < b.produce;
            });
  return net;
}

}  // namespace detail

/// Expands a model into the reaction network reachable from its initial
/// mixture.
inline ReactionNetwork expand(const Model& m, std::size_t species_cap = 10000,
                              std::optional<double> volume_override = {}) {
  double volume = volume_override.value_or(m.volume);
  if (!(volume > 0)) throw std::invalid_argument("expand: volume must be > 0");
  detail::RewriteEngine engine(m.sig, m.rules, species_cap, true);
  for (const auto& entry : initial_species(m, volume))
    engine.add_seed(entry.first);
  engine.run();
  return detail::network_from_engine(engine, m.sig, volume);
}

/// Flat site graph of a count-vector state (one component per molecule).
inline SiteGraph state_to_graph(const ReactionNetwork& net,
                                const std::vector<long>& x) {
  SiteGraph g(net.sig);
  for (std::size_t i = 0; i < net.species.size(); ++i)
    for (long n = 0; n < x.at(i); ++n) g.append(net.species[i].graph);
  return g;
}

/// |Aut| of a state, computed per component class.
inline std::uint64_t state_automorphisms(const ReactionNetwork& net,
                                         const std::vector<long>& x) {
  std::vector<std::pair<const SiteGraph*, long>> comps;
  for (std::size_t i = 0; i < net.species.size(); ++i)
    if (x.at(i) > 0) comps.emplace_back(&net.species[i].graph, x[i]);
  return mixture_automorphisms(comps);
}

}  // namespace fraglump
