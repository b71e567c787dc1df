#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace limo {

// Supported heavy-atom elements. Hydrogens are always implicit: every atom
// is assumed to carry enough hydrogens to fill its valence.
enum class Element : std::uint8_t { C, N, O, F, S, P, Cl, Br };

inline constexpr int kElementCount = 8;

int max_valence(Element e);
std::string_view element_symbol(Element e);

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;  // 1, 2 or 3
};

// Valence-checked molecular graph. Atom indices are dense 0..size-1,
// bonds are undirected and stored once.
struct MolGraph {
  std::vector<Element> atoms;
  std::vector<Bond> bonds;

  int atom_count() const { return static_cast<int>(atoms.size()); }
  int bond_count() const { return static_cast<int>(bonds.size()); }

  int add_atom(Element e);
  void add_bond(int a, int b, int order);

  // Sum of incident bond orders (implicit hydrogens not counted).
  int valence_used(int atom) const;
  int degree(int atom) const;
};

// True iff all structural invariants hold: supported valences, no
// self-loops or duplicate bonds, orders in 1..3, and the graph is connected.
// Total: never throws.
bool validate(const MolGraph& g);

// Sizes of the smallest set of smallest rings, sorted ascending. The ring
// count always equals bonds - atoms + 1 on a connected graph. SSSR ties are
// broken toward the lexicographically smallest atom-index set, so the result
// is deterministic.
std::vector<int> ring_sizes(const MolGraph& g);

// Per-atom flag: atom lies on at least one ring.
std::vector<bool> ring_atoms(const MolGraph& g);

// Canonical atom ordering produced by iterative partition refinement over
// (element, degree, sorted incident bond orders), individualizing tied
// classes and taking the lexicographically smallest outcome. rank[i] is the
// canonical position of atom i; root is the atom with rank 0.
struct CanonicalOrder {
  int root = 0;
  std::vector<int> rank;
};

CanonicalOrder canonical_order(const MolGraph& g);

// String key: equal for isomorphic graphs, distinct otherwise (within the
// supported element/bond set).
std::string canonical_key(const MolGraph& g);

// Circular (ECFP-style) fingerprint over 64-bit FNV-1a environment hashes.
struct Fingerprint {
  std::vector<std::uint64_t> words;
  int nbits = 0;
  int radius = 0;

  bool test(int bit) const {
    return (words[static_cast<std::size_t>(bit) / 64] >> (bit % 64)) & 1u;
  }
  int popcount() const;
};

Fingerprint fingerprint(const MolGraph& g, int radius = 2, int nbits = 2048);

// |A&B| / |A|B|; 1.0 when both fingerprints are empty.
// Throws std::invalid_argument on width mismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// 1 - mean pairwise Tanimoto over all unordered pairs.
// Throws std::invalid_argument for fewer than 2 graphs.
double diversity(const std::vector<MolGraph>& graphs);

// SMILES-subset writer used for external-oracle interop: element symbols,
// '='/'#' bond prefixes, parenthesized branches and numeric ring closures.
// Branches follow the child order of the canonical DFS, so output is
// bit-exact for a given graph. No aromatic lowercase, charges or stereo.
std::string to_smiles(const MolGraph& g);

}  // namespace limo
