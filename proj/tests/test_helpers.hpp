#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "limo/molgraph.hpp"
#include "limo/tensor.hpp"

namespace limo_test {

// Random valid connected graph for fuzzing: tree growth plus a few extra
// order-1 edges (rings of any size). Not necessarily encodable in the
// SELFIES dialect; use limo::random_molecule for codec round trips.
inline limo::MolGraph random_graph(limo::Rng& rng, int min_atoms = 2,
                                   int max_atoms = 20) {
  using limo::Element;
  const Element pool[] = {Element::C,  Element::N, Element::O, Element::F,
                          Element::S,  Element::P, Element::Cl, Element::Br};
  const int target = min_atoms + rng.uniform_int(max_atoms - min_atoms + 1);
  limo::MolGraph g;
  std::vector<int> cap;
  {
    Element e = pool[rng.uniform_int(8)];
    g.add_atom(e);
    cap.push_back(limo::max_valence(e));
  }
  while (g.atom_count() < target) {
    std::vector<int> open;
    for (int i = 0; i < g.atom_count(); ++i)
      if (cap[i] >= 1) open.push_back(i);
    if (open.empty()) break;
    int parent = open[rng.uniform_int(static_cast<int>(open.size()))];
    Element e = pool[rng.uniform_int(8)];
    int order = 1 + rng.uniform_int(3);
    order = std::min({order, cap[parent], limo::max_valence(e)});
    int atom = g.add_atom(e);
    cap.push_back(limo::max_valence(e) - order);
    g.add_bond(parent, atom, order);
    cap[parent] -= order;
  }
  int extra = rng.uniform_int(3);
  for (int t = 0; t < extra; ++t) {
    std::vector<int> open;
    for (int i = 0; i < g.atom_count(); ++i)
      if (cap[i] >= 1) open.push_back(i);
    if (open.size() < 2) break;
    int a = open[rng.uniform_int(static_cast<int>(open.size()))];
    int b = open[rng.uniform_int(static_cast<int>(open.size()))];
    if (a == b) continue;
    bool bonded = false;
    for (const auto& bd : g.bonds)
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) bonded = true;
    if (bonded) continue;
    g.add_bond(a, b, 1);
    cap[a] -= 1;
    cap[b] -= 1;
  }
  return g;
}

inline limo::MolGraph permute_graph(const limo::MolGraph& g,
                                    const std::vector<int>& perm) {
  limo::MolGraph out;
  out.atoms.resize(g.atoms.size());
  for (int i = 0; i < g.atom_count(); ++i) out.atoms[perm[i]] = g.atoms[i];
  for (const auto& b : g.bonds)
    out.add_bond(perm[b.a], perm[b.b], b.order);
  return out;
}

inline std::vector<int> random_permutation(int n, limo::Rng& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n; i > 1; --i) {
    int j = rng.uniform_int(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

// Independent SSSR oracle: enumerate every simple cycle by path
// backtracking, then greedily take the smallest independent ones over
// GF(2), smallest sorted atom set first. Exponential; small graphs only.
inline std::vector<int> brute_force_sssr_sizes(const limo::MolGraph& g) {
  const int n = g.atom_count();
  const int ne = g.bond_count();
  const int target = ne - n + 1;
  if (target <= 0) return {};

  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int e = 0; e < ne; ++e) {
    adj[g.bonds[e].a].push_back({g.bonds[e].b, e});
    adj[g.bonds[e].b].push_back({g.bonds[e].a, e});
  }

  std::set<std::vector<int>> cycle_edge_sets;
  std::vector<int> path_atoms, path_edges;
  std::vector<char> on_path(n, 0);

  // Only cycles whose smallest atom is the DFS start are recorded.
  auto dfs = [&](auto&& self, int start, int u) -> void {
    for (auto [v, e] : adj[u]) {
      if (!path_edges.empty() && e == path_edges.back()) continue;
      if (v == start && path_edges.size() >= 2) {
        std::vector<int> edges = path_edges;
        edges.push_back(e);
        std::sort(edges.begin(), edges.end());
        cycle_edge_sets.insert(edges);
        continue;
      }
      if (v < start || on_path[v]) continue;
      on_path[v] = 1;
      path_atoms.push_back(v);
      path_edges.push_back(e);
      self(self, start, v);
      path_edges.pop_back();
      path_atoms.pop_back();
      on_path[v] = 0;
    }
  };
  for (int s = 0; s < n; ++s) {
    on_path[s] = 1;
    path_atoms = {s};
    dfs(dfs, s, s);
    on_path[s] = 0;
  }

  struct Cand {
    int size;
    std::vector<int> atoms;
    std::vector<int> edges;
  };
  std::vector<Cand> cands;
  for (const auto& edges : cycle_edge_sets) {
    Cand c;
    c.edges = edges;
    c.size = static_cast<int>(edges.size());
    std::set<int> atoms;
    for (int e : edges) {
      atoms.insert(g.bonds[e].a);
      atoms.insert(g.bonds[e].b);
    }
    c.atoms.assign(atoms.begin(), atoms.end());
    cands.push_back(std::move(c));
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.size != b.size) return a.size < b.size;
    return a.atoms < b.atoms;
  });

  std::vector<std::pair<int, std::set<int>>> basis;  // (pivot edge, vector)
  std::vector<int> sizes;
  for (const Cand& c : cands) {
    std::set<int> v(c.edges.begin(), c.edges.end());
    for (const auto& [pivot, bvec] : basis) {
      if (v.count(pivot)) {
        std::set<int> merged;
        std::set_symmetric_difference(v.begin(), v.end(), bvec.begin(),
                                      bvec.end(),
                                      std::inserter(merged, merged.begin()));
        v = std::move(merged);
      }
    }
    if (v.empty()) continue;
    basis.push_back({*v.begin(), v});
    sizes.push_back(c.size);
    if (static_cast<int>(sizes.size()) == target) break;
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace limo_test
