#include "limo/molgraph.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace limo {

namespace {

constexpr int kMaxValence[kElementCount] = {4, 3, 2, 1, 6, 5, 1, 1};
constexpr std::string_view kSymbols[kElementCount] = {"C", "N", "O", "F",
                                                      "S", "P", "Cl", "Br"};

std::vector<std::vector<std::pair<int, int>>> adjacency(const MolGraph& g) {
  std::vector<std::vector<std::pair<int, int>>> adj(g.atoms.size());
  for (int e = 0; e < g.bond_count(); ++e) {
    const Bond& bd = g.bonds[e];
    adj[bd.a].push_back({bd.b, e});
    adj[bd.b].push_back({bd.a, e});
  }
  return adj;
}

bool connected(const MolGraph& g) {
  if (g.atoms.empty()) return false;
  auto adj = adjacency(g);
  std::vector<bool> seen(g.atoms.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (auto [v, e] : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == g.atom_count();
}

}  // namespace

int max_valence(Element e) { return kMaxValence[static_cast<int>(e)]; }

std::string_view element_symbol(Element e) {
  return kSymbols[static_cast<int>(e)];
}

int MolGraph::add_atom(Element e) {
  atoms.push_back(e);
  return atom_count() - 1;
}

void MolGraph::add_bond(int a, int b, int order) {
  bonds.push_back({a, b, order});
}

int MolGraph::valence_used(int atom) const {
  int sum = 0;
  for (const Bond& b : bonds) {
    if (b.a == atom || b.b == atom) sum += b.order;
  }
  return sum;
}

int MolGraph::degree(int atom) const {
  int deg = 0;
  for (const Bond& b : bonds) {
    if (b.a == atom || b.b == atom) ++deg;
  }
  return deg;
}

bool validate(const MolGraph& g) {
  const int n = g.atom_count();
  if (n == 0) return false;
  std::vector<int> used(n, 0);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(g.bonds.size());
  for (const Bond& b : g.bonds) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n) return false;
    if (b.a == b.b) return false;
    if (b.order < 1 || b.order > 3) return false;
    used[b.a] += b.order;
    used[b.b] += b.order;
    pairs.push_back(std::minmax(b.a, b.b));
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
    return false;
  for (int i = 0; i < n; ++i) {
    if (used[i] > max_valence(g.atoms[i])) return false;
  }
  return connected(g);
}

// ---------------------------------------------------------------------------
// Ring perception: greedy minimum cycle basis (Horton candidates).
// ---------------------------------------------------------------------------

namespace {

using EdgeSet = std::vector<std::uint64_t>;

EdgeSet make_edge_set(int nedges) {
  return EdgeSet((nedges + 63) / 64, 0);
}

void set_edge(EdgeSet& s, int e) { s[e / 64] |= std::uint64_t{1} << (e % 64); }

bool is_zero(const EdgeSet& s) {
  for (auto w : s)
    if (w != 0) return false;
  return true;
}

void xor_into(EdgeSet& a, const EdgeSet& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

int lowest_edge(const EdgeSet& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 0) return static_cast<int>(i * 64 + std::countr_zero(s[i]));
  }
  return -1;
}

struct CandidateCycle {
  int size = 0;
  std::vector<int> atoms;  // sorted ascending, for tie-breaking
  EdgeSet edges;
};

// All candidate cycles through shortest-path trees: one BFS per root, one
// candidate per (root, edge) pair whose two path ends are equidistant or
// one step apart and whose paths share only the root.
std::vector<CandidateCycle> candidate_cycles(const MolGraph& g) {
  const int n = g.atom_count();
  const int ne = g.bond_count();
  auto adj = adjacency(g);
  std::vector<CandidateCycle> out;
  std::map<std::vector<int>, bool> seen;  // keyed by sorted edge id list

  std::vector<int> dist(n), parent(n), parent_edge(n);
  for (int root = 0; root < n; ++root) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<int> q;
    q.push(root);
    dist[root] = 0;
    parent[root] = -1;
    parent_edge[root] = -1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto [v, e] : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          parent[v] = u;
          parent_edge[v] = e;
          q.push(v);
        }
      }
    }
    for (int e = 0; e < ne; ++e) {
      int x = g.bonds[e].a;
      int y = g.bonds[e].b;
      if (dist[x] < 0 || dist[y] < 0) continue;
      if (parent_edge[x] == e || parent_edge[y] == e) continue;
      if (std::abs(dist[x] - dist[y]) > 1) continue;

      // Walk both paths up to the root; require disjointness except root.
      std::vector<int> path_atoms;
      std::vector<int> path_edges;
      bool ok = true;
      std::vector<char> mark(n, 0);
      for (int side = 0; side < 2 && ok; ++side) {
        int cur = side == 0 ? x : y;
        while (cur != root) {
          if (mark[cur]) {
            ok = false;
            break;
          }
          mark[cur] = 1;
          path_atoms.push_back(cur);
          path_edges.push_back(parent_edge[cur]);
          cur = parent[cur];
        }
      }
      if (!ok) continue;
      path_atoms.push_back(root);
      path_edges.push_back(e);

      std::vector<int> edge_key = path_edges;
      std::sort(edge_key.begin(), edge_key.end());
      if (seen.count(edge_key)) continue;
      seen[edge_key] = true;

      CandidateCycle c;
      c.size = static_cast<int>(path_edges.size());
      c.atoms = path_atoms;
      std::sort(c.atoms.begin(), c.atoms.end());
      c.edges = make_edge_set(ne);
      for (int pe : path_edges) set_edge(c.edges, pe);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

namespace {

// Fundamental cycles of a BFS spanning tree; guaranteed to complete the
// cycle-space basis when the shortest-path candidates fall short.
std::vector<CandidateCycle> fundamental_cycles(const MolGraph& g) {
  const int n = g.atom_count();
  auto adj = adjacency(g);
  std::vector<int> parent(n, -1), parent_edge(n, -1), depth(n, -1);
  std::queue<int> q;
  q.push(0);
  depth[0] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, e] : adj[u]) {
      if (depth[v] < 0) {
        depth[v] = depth[u] + 1;
        parent[v] = u;
        parent_edge[v] = e;
        q.push(v);
      }
    }
  }
  std::vector<char> in_tree(g.bond_count(), 0);
  for (int v = 0; v < n; ++v) {
    if (parent_edge[v] >= 0) in_tree[parent_edge[v]] = 1;
  }
  std::vector<CandidateCycle> out;
  for (int e = 0; e < g.bond_count(); ++e) {
    if (in_tree[e]) continue;
    int x = g.bonds[e].a;
    int y = g.bonds[e].b;
    CandidateCycle c;
    c.edges = make_edge_set(g.bond_count());
    set_edge(c.edges, e);
    c.size = 1;
    while (x != y) {
      if (depth[x] < depth[y]) std::swap(x, y);
      c.atoms.push_back(x);
      set_edge(c.edges, parent_edge[x]);
      ++c.size;
      x = parent[x];
    }
    c.atoms.push_back(x);
    std::sort(c.atoms.begin(), c.atoms.end());
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<int> ring_sizes(const MolGraph& g) {
  const int target = g.bond_count() - g.atom_count() + 1;
  if (target <= 0) return {};

  auto cands = candidate_cycles(g);
  std::sort(cands.begin(), cands.end(),
            [](const CandidateCycle& a, const CandidateCycle& b) {
              if (a.size != b.size) return a.size < b.size;
              return a.atoms < b.atoms;
            });
  auto fallback = fundamental_cycles(g);
  cands.insert(cands.end(), fallback.begin(), fallback.end());

  // Greedy GF(2) independence over the edge space.
  std::vector<std::pair<int, EdgeSet>> basis;  // (pivot edge, reduced vector)
  std::vector<int> sizes;
  for (const CandidateCycle& c : cands) {
    EdgeSet v = c.edges;
    for (const auto& [pivot, vec] : basis) {
      if (v[pivot / 64] >> (pivot % 64) & 1) xor_into(v, vec);
    }
    if (is_zero(v)) continue;
    basis.push_back({lowest_edge(v), v});
    sizes.push_back(c.size);
    if (static_cast<int>(sizes.size()) == target) break;
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

std::vector<bool> ring_atoms(const MolGraph& g) {
  // An atom is in a ring iff it touches a non-bridge edge.
  const int n = g.atom_count();
  std::vector<bool> out(n, false);
  if (g.bond_count() - n + 1 <= 0) return out;

  auto adj = adjacency(g);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  std::vector<char> bridge(g.bond_count(), 0);
  // Iterative Tarjan bridge finding.
  struct Frame {
    int u, parent_edge;
    std::size_t next;
  };
  for (int start = 0; start < n; ++start) {
    if (disc[start] >= 0) continue;
    std::vector<Frame> stack{{start, -1, 0}};
    disc[start] = low[start] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.u].size()) {
        auto [v, e] = adj[f.u][f.next++];
        if (e == f.parent_edge) continue;
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({v, e, 0});
        } else {
          low[f.u] = std::min(low[f.u], disc[v]);
        }
      } else {
        int u = f.u;
        int pe = f.parent_edge;
        stack.pop_back();
        if (!stack.empty()) {
          int p = stack.back().u;
          low[p] = std::min(low[p], low[u]);
          if (low[u] > disc[p]) bridge[pe] = 1;
        }
      }
    }
  }
  for (int e = 0; e < g.bond_count(); ++e) {
    if (!bridge[e]) {
      out[g.bonds[e].a] = true;
      out[g.bonds[e].b] = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonicalization: partition refinement + individualization backtracking.
// ---------------------------------------------------------------------------

namespace {

struct CanonContext {
  const MolGraph* g;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, order)
};

// Splits color classes until stable. Colors are re-indexed 0..k-1 by the
// sort order of their signatures, so isomorphic graphs refine identically.
void refine(const CanonContext& ctx, std::vector<int>& colors) {
  const int n = static_cast<int>(colors.size());
  int classes = 0;
  for (int c : colors) classes = std::max(classes, c + 1);
  while (true) {
    std::vector<std::pair<std::vector<int>, int>> sigs(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> sig;
      sig.push_back(colors[i]);
      std::vector<std::pair<int, int>> nb;
      for (auto [v, order] : ctx.adj[i]) nb.push_back({order, colors[v]});
      std::sort(nb.begin(), nb.end());
      for (auto [order, c] : nb) {
        sig.push_back(order);
        sig.push_back(c);
      }
      sigs[i] = {std::move(sig), i};
    }
    std::vector<std::pair<std::vector<int>, int>> sorted = sigs;
    std::sort(sorted.begin(), sorted.end());
    int next = -1;
    std::vector<int> fresh(n);
    for (int k = 0; k < n; ++k) {
      if (k == 0 || sorted[k].first != sorted[k - 1].first) ++next;
      fresh[sorted[k].second] = next;
    }
    int new_classes = next + 1;
    colors = std::move(fresh);
    if (new_classes == classes) break;
    classes = new_classes;
  }
}

bool discrete(const std::vector<int>& colors) {
  std::vector<char> seen(colors.size(), 0);
  for (int c : colors) {
    if (seen[c]) return false;
    seen[c] = 1;
  }
  return true;
}

// Flat integer code of the graph under a complete ranking; lexicographic
// comparison of codes picks the canonical labeling.
std::vector<int> build_code(const CanonContext& ctx,
                            const std::vector<int>& rank) {
  const MolGraph& g = *ctx.g;
  const int n = g.atom_count();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[rank[i]] = i;
  std::vector<int> code;
  code.reserve(n + g.bond_count() * 3 + 1);
  for (int r = 0; r < n; ++r)
    code.push_back(static_cast<int>(g.atoms[order[r]]));
  code.push_back(-1);
  std::vector<std::array<int, 3>> edges;
  for (const Bond& b : g.bonds) {
    int ra = rank[b.a];
    int rb = rank[b.b];
    if (ra > rb) std::swap(ra, rb);
    edges.push_back({ra, rb, b.order});
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    code.push_back(e[0]);
    code.push_back(e[1]);
    code.push_back(e[2]);
  }
  return code;
}

void search(const CanonContext& ctx, std::vector<int> colors,
            std::vector<int>& best_code, std::vector<int>& best_rank) {
  refine(ctx, colors);
  if (discrete(colors)) {
    std::vector<int> code = build_code(ctx, colors);
    if (best_code.empty() || code < best_code) {
      best_code = std::move(code);
      best_rank = std::move(colors);
    }
    return;
  }
  // Individualize each member of the smallest ambiguous class.
  const int n = static_cast<int>(colors.size());
  int target = -1;
  for (int c = 0; target < 0 && c < n; ++c) {
    int count = 0;
    for (int i = 0; i < n; ++i) count += colors[i] == c;
    if (count > 1) target = c;
  }
  for (int i = 0; i < n; ++i) {
    if (colors[i] != target) continue;
    std::vector<int> branch = colors;
    branch[i] = -1;  // sorts before every other class, then re-indexed
    search(ctx, std::move(branch), best_code, best_rank);
  }
}

std::vector<int> initial_colors(const CanonContext& ctx) {
  const MolGraph& g = *ctx.g;
  const int n = g.atom_count();
  std::vector<std::pair<std::vector<int>, int>> keys(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> key{static_cast<int>(g.atoms[i]),
                         static_cast<int>(ctx.adj[i].size())};
    std::vector<int> orders;
    for (auto [v, o] : ctx.adj[i]) orders.push_back(o);
    std::sort(orders.begin(), orders.end());
    key.insert(key.end(), orders.begin(), orders.end());
    keys[i] = {std::move(key), i};
  }
  std::sort(keys.begin(), keys.end());
  std::vector<int> colors(n);
  int next = -1;
  for (int k = 0; k < n; ++k) {
    if (k == 0 || keys[k].first != keys[k - 1].first) ++next;
    colors[keys[k].second] = next;
  }
  return colors;
}

}  // namespace

CanonicalOrder canonical_order(const MolGraph& g) {
  if (g.atoms.empty()) throw std::invalid_argument("empty graph");
  CanonContext ctx;
  ctx.g = &g;
  ctx.adj.resize(g.atoms.size());
  for (const Bond& b : g.bonds) {
    ctx.adj[b.a].push_back({b.b, b.order});
    ctx.adj[b.b].push_back({b.a, b.order});
  }
  std::vector<int> best_code, best_rank;
  search(ctx, initial_colors(ctx), best_code, best_rank);

  CanonicalOrder out;
  out.rank = std::move(best_rank);
  for (int i = 0; i < g.atom_count(); ++i) {
    if (out.rank[i] == 0) out.root = i;
  }
  return out;
}

std::string canonical_key(const MolGraph& g) {
  CanonicalOrder ord = canonical_order(g);
  const int n = g.atom_count();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[ord.rank[i]] = i;

  std::string key;
  for (int r = 0; r < n; ++r) {
    key += element_symbol(g.atoms[order[r]]);
  }
  std::vector<std::array<int, 3>> edges;
  for (const Bond& b : g.bonds) {
    int ra = ord.rank[b.a];
    int rb = ord.rank[b.b];
    if (ra > rb) std::swap(ra, rb);
    edges.push_back({ra, rb, b.order});
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    key += '|';
    key += std::to_string(e[0]);
    key += '-';
    key += std::to_string(e[1]);
    key += ':';
    key += std::to_string(e[2]);
  }
  return key;
}

// ---------------------------------------------------------------------------
// Circular fingerprints.
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t h) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = (value >> (8 * i)) & 0xff;
  return fnv1a(bytes, 8, h);
}

}  // namespace

int Fingerprint::popcount() const {
  int total = 0;
  for (auto w : words) total += std::popcount(w);
  return total;
}

Fingerprint fingerprint(const MolGraph& g, int radius, int nbits) {
  if (radius < 0) throw std::invalid_argument("fingerprint radius < 0");
  if (nbits <= 0 || (nbits & (nbits - 1)) != 0)
    throw std::invalid_argument("fingerprint width must be a power of two");

  Fingerprint fp;
  fp.nbits = nbits;
  fp.radius = radius;
  fp.words.assign((nbits + 63) / 64, 0);

  const int n = g.atom_count();
  auto adj = adjacency(g);
  auto in_ring = ring_atoms(g);

  auto set_bit = [&](std::uint64_t id) {
    std::uint64_t bit = id & static_cast<std::uint64_t>(nbits - 1);
    fp.words[bit / 64] |= std::uint64_t{1} << (bit % 64);
  };

  std::vector<std::uint64_t> inv(n);
  for (int i = 0; i < n; ++i) {
    std::uint64_t h = kFnvOffset;
    h = fnv1a_u64(static_cast<std::uint64_t>(g.atoms[i]), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(adj[i].size()), h);
    h = fnv1a_u64(in_ring[i] ? 1 : 0, h);
    inv[i] = h;
    set_bit(h);
  }
  for (int iter = 1; iter <= radius; ++iter) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> nb;
      for (auto [v, e] : adj[i]) nb.push_back({g.bonds[e].order, inv[v]});
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = kFnvOffset;
      h = fnv1a_u64(inv[i], h);
      for (auto [order, nbi] : nb) {
        h = fnv1a_u64(static_cast<std::uint64_t>(order), h);
        h = fnv1a_u64(nbi, h);
      }
      next[i] = h;
      set_bit(h);
    }
    inv = std::move(next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits != b.nbits)
    throw std::invalid_argument("fingerprint width mismatch");
  int inter = 0;
  int uni = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) {
    inter += std::popcount(a.words[i] & b.words[i]);
    uni += std::popcount(a.words[i] | b.words[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double diversity(const std::vector<MolGraph>& graphs) {
  if (graphs.size() < 2)
    throw std::invalid_argument("diversity needs at least 2 graphs");
  std::vector<Fingerprint> fps;
  fps.reserve(graphs.size());
  for (const MolGraph& g : graphs) fps.push_back(fingerprint(g));
  double total = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      total += tanimoto(fps[i], fps[j]);
      ++pairs;
    }
  }
  return 1.0 - total / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// SMILES-subset writer.
// ---------------------------------------------------------------------------

namespace {

struct SmilesEmitter {
  const MolGraph& g;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, edge id)
  std::vector<int> rank;
  std::vector<char> tree_edge;
  std::vector<int> preorder;                       // atom -> visit position
  std::vector<std::vector<int>> children;          // tree children, ordered
  std::vector<std::vector<std::pair<int, int>>> closures;  // atom -> (num, edge)
  std::string out;

  explicit SmilesEmitter(const MolGraph& graph) : g(graph) {
    adj.resize(g.atoms.size());
    for (int e = 0; e < g.bond_count(); ++e) {
      adj[g.bonds[e].a].push_back({g.bonds[e].b, e});
      adj[g.bonds[e].b].push_back({g.bonds[e].a, e});
    }
  }

  void build(int root) {
    const int n = g.atom_count();
    tree_edge.assign(g.bond_count(), 0);
    preorder.assign(n, -1);
    children.assign(n, {});
    closures.assign(n, {});
    for (auto& nbrs : adj) {
      std::sort(nbrs.begin(), nbrs.end(),
                [&](const auto& x, const auto& y) {
                  return rank[x.first] < rank[y.first];
                });
    }
    // Iterative DFS in canonical neighbor order.
    int counter = 0;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    preorder[root] = counter++;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next >= adj[u].size()) {
        stack.pop_back();
        continue;
      }
      auto [v, e] = adj[u][next++];
      if (preorder[v] < 0) {
        tree_edge[e] = 1;
        children[u].push_back(v);
        preorder[v] = counter++;
        stack.push_back({v, 0});
      }
    }
    // Ring closures numbered by (opening preorder, closing preorder).
    std::vector<std::tuple<int, int, int>> ring_bonds;
    for (int e = 0; e < g.bond_count(); ++e) {
      if (tree_edge[e]) continue;
      int a = g.bonds[e].a;
      int b = g.bonds[e].b;
      if (preorder[a] > preorder[b]) std::swap(a, b);
      ring_bonds.push_back({preorder[a], preorder[b], e});
    }
    std::sort(ring_bonds.begin(), ring_bonds.end());
    int num = 1;
    for (auto [pa, pb, e] : ring_bonds) {
      closures[g.bonds[e].a].push_back({num, e});
      closures[g.bonds[e].b].push_back({num, e});
      ++num;
    }
    for (auto& list : closures)
      std::sort(list.begin(), list.end());
  }

  void bond_prefix(int order) {
    if (order == 2) out += '=';
    if (order == 3) out += '#';
  }

  void ring_digit(int num) {
    if (num < 10) {
      out += static_cast<char>('0' + num);
    } else {
      out += '%';
      out += std::to_string(num);
    }
  }

  void emit(int u, int parent_edge) {
    if (parent_edge >= 0) bond_prefix(g.bonds[parent_edge].order);
    out += element_symbol(g.atoms[u]);
    for (auto [num, e] : closures[u]) {
      int other = g.bonds[e].a == u ? g.bonds[e].b : g.bonds[e].a;
      if (preorder[u] < preorder[other]) bond_prefix(g.bonds[e].order);
      ring_digit(num);
    }
    const auto& kids = children[u];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      int edge = -1;
      for (auto [v, e] : adj[u]) {
        if (v == kids[i] && tree_edge[e]) edge = e;
      }
      if (i + 1 < kids.size()) {
        out += '(';
        emit(kids[i], edge);
        out += ')';
      } else {
        emit(kids[i], edge);
      }
    }
  }
};

}  // namespace

std::string to_smiles(const MolGraph& g) {
  if (g.atoms.empty()) throw std::invalid_argument("empty graph");
  CanonicalOrder ord = canonical_order(g);
  SmilesEmitter em(g);
  em.rank = ord.rank;
  em.build(ord.root);
  em.emit(ord.root, -1);
  return em.out;
}

}  // namespace limo
