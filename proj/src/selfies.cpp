#include "limo/selfies.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace limo::selfies {

namespace {

constexpr std::string_view kNames[Alphabet::kSize] = {
    "[C]",  "[N]",  "[O]",  "[F]",  "[S]",       "[P]",       "[Cl]",
    "[Br]", "[=C]", "[#C]", "[=N]", "[#N]",      "[=O]",      "[=S]",
    "[Branch1]",    "[Branch2]",    "[Ring1]",   "[Ring2]",   "[nop]"};

struct AtomSymbol {
  Element element;
  int order;
};

constexpr AtomSymbol kAtomSymbols[] = {
    {Element::C, 1},  {Element::N, 1}, {Element::O, 1}, {Element::F, 1},
    {Element::S, 1},  {Element::P, 1}, {Element::Cl, 1}, {Element::Br, 1},
    {Element::C, 2},  {Element::C, 3}, {Element::N, 2}, {Element::N, 3},
    {Element::O, 2},  {Element::S, 2}};

constexpr int kAtomSymbolCount = 14;

}  // namespace

std::string_view Alphabet::name(int id) { return kNames[id]; }

int Alphabet::id_from_name(std::string_view name) {
  for (int i = 0; i < kSize; ++i) {
    if (kNames[i] == name) return i;
  }
  return -1;
}

bool Alphabet::is_atom(int id) { return id >= 0 && id < kAtomSymbolCount; }

Element Alphabet::atom_element(int id) { return kAtomSymbols[id].element; }

int Alphabet::atom_bond_order(int id) { return kAtomSymbols[id].order; }

int Alphabet::atom_symbol(Element e, int order) {
  for (int i = 0; i < kAtomSymbolCount; ++i) {
    if (kAtomSymbols[i].element == e && kAtomSymbols[i].order == order)
      return i;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Decoder.
// ---------------------------------------------------------------------------

namespace {

struct DerivationState {
  MolGraph graph;
  std::vector<int> capacity;    // remaining valence per atom
  std::vector<int> derived;     // atoms in derivation order
  std::vector<int> rank_of;     // atom -> index in `derived`

  int place_atom(Element e) {
    int idx = graph.add_atom(e);
    capacity.push_back(max_valence(e));
    rank_of.push_back(static_cast<int>(derived.size()));
    derived.push_back(idx);
    return idx;
  }

  bool bonded(int a, int b) const {
    for (const Bond& bd : graph.bonds) {
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) return true;
    }
    return false;
  }
};

// Derives symbols s[pos..end). `current` is the attachment atom (-1 before
// the first atom). Returns false when the termination rule fired: the
// enclosing derivation must stop consuming symbols as well.
bool derive(DerivationState& st, const SelfiesString& s, std::size_t pos,
            std::size_t end, int current) {
  auto read_digits = [&](std::size_t& p, int count, int& q) -> bool {
    q = 0;
    for (int i = 0; i < count; ++i) {
      if (p >= end) return false;  // truncated payload ends the derivation
      q = q * 16 + Alphabet::digit_value(s[p]);
      ++p;
    }
    return true;
  };

  while (pos < end) {
    int sym = s[pos];
    if (sym == Alphabet::kNop) {
      ++pos;
      continue;
    }
    if (Alphabet::is_atom(sym)) {
      Element e = Alphabet::atom_element(sym);
      int want = Alphabet::atom_bond_order(sym);
      if (st.graph.atom_count() == 0) {
        current = st.place_atom(e);
        ++pos;
        continue;
      }
      if (st.capacity[current] == 0) return false;  // termination rule
      int order = std::min({want, st.capacity[current], max_valence(e)});
      int atom = st.place_atom(e);
      st.graph.add_bond(current, atom, order);
      st.capacity[current] -= order;
      st.capacity[atom] -= order;
      current = atom;
      ++pos;
      continue;
    }
    if (sym == Alphabet::kBranch1 || sym == Alphabet::kBranch2) {
      ++pos;
      int q = 0;
      if (!read_digits(pos, sym == Alphabet::kBranch1 ? 1 : 2, q)) return true;
      std::size_t len = static_cast<std::size_t>(q) + 1;
      std::size_t body_end = std::min(end, pos + len);
      if (st.graph.atom_count() == 0 || st.capacity[current] <= 1) {
        pos = body_end;  // skipped branches still consume their body
        continue;
      }
      derive(st, s, pos, body_end, current);
      pos = body_end;
      continue;
    }
    if (sym == Alphabet::kRing1 || sym == Alphabet::kRing2) {
      ++pos;
      int q = 0;
      if (!read_digits(pos, sym == Alphabet::kRing1 ? 1 : 2, q)) return true;
      if (st.graph.atom_count() == 0) continue;
      int back = st.rank_of[current] - (q + 1);
      int target = st.derived[std::max(0, back)];
      if (target == current) continue;
      if (st.bonded(target, current)) continue;
      if (st.capacity[current] < 1 || st.capacity[target] < 1) continue;
      st.graph.add_bond(current, target, 1);
      st.capacity[current] -= 1;
      st.capacity[target] -= 1;
      continue;
    }
    ++pos;  // unreachable for well-formed ids
  }
  return true;
}

}  // namespace

MolGraph decode(const SelfiesString& s) {
  DerivationState st;
  derive(st, s, 0, s.size(), -1);
  if (st.graph.atom_count() == 0) {
    st.graph.add_atom(Element::C);
  }
  return st.graph;
}

// ---------------------------------------------------------------------------
// Encoder.
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

struct EncodeContext {
  const MolGraph& g;
  std::vector<int> rank;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, edge id)
  std::vector<char> tree_edge;
  std::vector<int> preorder;  // derivation rank per atom (DFS preorder)

  explicit EncodeContext(const MolGraph& graph) : g(graph) {
    adj.resize(g.atoms.size());
    for (int e = 0; e < g.bond_count(); ++e) {
      adj[g.bonds[e].a].push_back({g.bonds[e].b, e});
      adj[g.bonds[e].b].push_back({g.bonds[e].a, e});
    }
  }

  // Spanning tree that carries every multi-order bond, so that all ring
  // closures can use the dialect's order-1 ring symbols. Returns false when
  // the multi-order bonds themselves contain a cycle.
  bool build_tree() {
    tree_edge.assign(g.bond_count(), 0);
    std::vector<int> order(g.bond_count());
    std::iota(order.begin(), order.end(), 0);
    auto edge_key = [&](int e) {
      int ra = rank[g.bonds[e].a];
      int rb = rank[g.bonds[e].b];
      if (ra > rb) std::swap(ra, rb);
      return std::tuple(g.bonds[e].order < 2 ? 1 : 0, ra, rb);
    };
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return edge_key(x) < edge_key(y); });
    UnionFind uf(g.atom_count());
    int picked = 0;
    for (int e : order) {
      if (uf.unite(g.bonds[e].a, g.bonds[e].b)) {
        tree_edge[e] = 1;
        ++picked;
      } else if (g.bonds[e].order > 1) {
        return false;
      }
    }
    return picked == g.atom_count() - 1;
  }

  // Child expressibility: every tree edge of order >= 2 must have a child
  // symbol when traversed away from `root`.
  bool orientation_ok(int root) const {
    std::vector<int> parent(g.atoms.size(), -2);
    std::vector<int> stack{root};
    parent[root] = -1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, e] : adj[u]) {
        if (!tree_edge[e] || parent[v] != -2) continue;
        parent[v] = u;
        if (Alphabet::atom_symbol(g.atoms[v], g.bonds[e].order) < 0)
          return false;
        stack.push_back(v);
      }
    }
    return true;
  }

  // Emits the subtree rooted at `u`; `parent_order` is the bond order used
  // for u's own atom symbol (1 at the root).
  void emit(int u, int parent_order, std::vector<int>& out, int& counter) {
    preorder[u] = counter++;
    out.push_back(Alphabet::atom_symbol(g.atoms[u], parent_order));

    // Ring closures whose later endpoint is u, ordered by target rank.
    std::vector<std::pair<int, int>> rings;  // (offset, edge)
    for (auto [v, e] : adj[u]) {
      if (tree_edge[e]) continue;
      if (preorder[v] < 0) continue;  // will be closed from the other side
      rings.push_back({preorder[u] - preorder[v], e});
    }
    std::sort(rings.begin(), rings.end());
    for (auto [offset, e] : rings) {
      int q = offset - 1;
      if (q < 16) {
        out.push_back(Alphabet::kRing1);
        out.push_back(q);
      } else {
        out.push_back(Alphabet::kRing2);
        out.push_back(q / 16);
        out.push_back(q % 16);
      }
    }

    std::vector<std::pair<int, int>> kids;  // (child rank, edge)
    for (auto [v, e] : adj[u]) {
      if (tree_edge[e] && preorder[v] < 0) kids.push_back({rank[v], e});
    }
    std::sort(kids.begin(), kids.end());
    for (std::size_t i = 0; i < kids.size(); ++i) {
      int e = kids[i].second;
      int v = g.bonds[e].a == u ? g.bonds[e].b : g.bonds[e].a;
      if (i + 1 < kids.size()) {
        std::vector<int> body;
        emit(v, g.bonds[e].order, body, counter);
        int q = static_cast<int>(body.size()) - 1;
        if (q < 16) {
          out.push_back(Alphabet::kBranch1);
          out.push_back(q);
        } else if (q < 256) {
          out.push_back(Alphabet::kBranch2);
          out.push_back(q / 16);
          out.push_back(q % 16);
        } else {
          throw EncodeError("branch body too long for the dialect");
        }
        out.insert(out.end(), body.begin(), body.end());
      } else {
        emit(v, g.bonds[e].order, out, counter);
      }
    }
  }
};

}  // namespace

SelfiesString encode(const MolGraph& g, int n) {
  if (!validate(g)) throw EncodeError("graph fails validation");
  for (Element e : g.atoms) {
    if (static_cast<int>(e) >= kElementCount)
      throw EncodeError("unsupported element");
  }

  CanonicalOrder ord = canonical_order(g);
  EncodeContext ctx(g);
  ctx.rank = ord.rank;
  if (!ctx.build_tree())
    throw EncodeError("multi-order bonds form a cycle; not expressible");

  // The canonical root is preferred; fall back through canonical candidates
  // when a multi-order tree edge would need a child symbol the dialect
  // lacks (e.g. [=P]).
  std::vector<int> roots(g.atom_count());
  for (int i = 0; i < g.atom_count(); ++i) roots[ord.rank[i]] = i;
  int root = -1;
  for (int candidate : roots) {
    if (ctx.orientation_ok(candidate)) {
      root = candidate;
      break;
    }
  }
  if (root < 0) throw EncodeError("no root orients all bonds expressibly");

  ctx.preorder.assign(g.atom_count(), -1);
  std::vector<int> out;
  int counter = 0;
  ctx.emit(root, 1, out, counter);
  if (static_cast<int>(out.size()) > n)
    throw EncodeError("derivation longer than string length");
  out.resize(n, Alphabet::kNop);
  return out;
}

SelfiesString random_string(std::uint64_t seed, int n) {
  // splitmix64 stream; bias over 19 symbols is ~2^-60, far below any test.
  SelfiesString s(n);
  std::uint64_t x = seed;
  for (int i = 0; i < n; ++i) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    s[i] = static_cast<int>(z % Alphabet::kSize);
  }
  return s;
}

std::string to_text(const SelfiesString& s) {
  int last = static_cast<int>(s.size());
  while (last > 0 && s[last - 1] == Alphabet::kNop) --last;
  std::string out;
  for (int i = 0; i < last; ++i) out += Alphabet::name(s[i]);
  if (out.empty()) out = "[nop]";
  return out;
}

SelfiesString from_text(std::string_view line, int n) {
  SelfiesString s;
  std::size_t pos = 0;
  while (pos < line.size()) {
    if (line[pos] != '[')
      throw std::invalid_argument("expected '[' in symbol string");
    std::size_t close = line.find(']', pos);
    if (close == std::string_view::npos)
      throw std::invalid_argument("unterminated symbol");
    int id = Alphabet::id_from_name(line.substr(pos, close - pos + 1));
    if (id < 0)
      throw std::invalid_argument("unknown symbol: " +
                                  std::string(line.substr(pos, close - pos + 1)));
    s.push_back(id);
    pos = close + 1;
  }
  if (static_cast<int>(s.size()) > n)
    throw std::invalid_argument("symbol string longer than configured length");
  s.resize(n, Alphabet::kNop);
  return s;
}

}  // namespace limo::selfies
