#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "limo/molgraph.hpp"
#include "test_helpers.hpp"

using namespace limo;

namespace {

MolGraph cycle_of_carbons(int size) {
  MolGraph g;
  for (int i = 0; i < size; ++i) g.add_atom(Element::C);
  for (int i = 0; i < size; ++i) g.add_bond(i, (i + 1) % size, 1);
  return g;
}

MolGraph chain_of_carbons(int size) {
  MolGraph g;
  for (int i = 0; i < size; ++i) g.add_atom(Element::C);
  for (int i = 0; i + 1 < size; ++i) g.add_bond(i, i + 1, 1);
  return g;
}

}  // namespace

TEST_CASE("validate accepts and rejects the valence model") {
  MolGraph single;
  single.add_atom(Element::C);
  CHECK(validate(single));

  MolGraph over;  // O with two double bonds: sum 4 > 2
  over.add_atom(Element::O);
  over.add_atom(Element::C);
  over.add_atom(Element::C);
  over.add_bond(0, 1, 2);
  over.add_bond(0, 2, 2);
  CHECK_FALSE(validate(over));

  MolGraph cf4;  // exactly at the cap
  cf4.add_atom(Element::C);
  for (int i = 0; i < 4; ++i) {
    cf4.add_atom(Element::F);
    cf4.add_bond(0, i + 1, 1);
  }
  CHECK(validate(cf4));

  MolGraph self_loop;
  self_loop.add_atom(Element::C);
  self_loop.add_atom(Element::C);
  self_loop.add_bond(0, 0, 1);
  CHECK_FALSE(validate(self_loop));

  MolGraph duplicate;
  duplicate.add_atom(Element::C);
  duplicate.add_atom(Element::C);
  duplicate.add_bond(0, 1, 1);
  duplicate.add_bond(1, 0, 1);
  CHECK_FALSE(validate(duplicate));

  MolGraph disconnected;
  disconnected.add_atom(Element::C);
  disconnected.add_atom(Element::C);
  CHECK_FALSE(validate(disconnected));

  CHECK_FALSE(validate(MolGraph{}));
}

TEST_CASE("ring_sizes on acyclic, cyclic and fused graphs") {
  CHECK(ring_sizes(chain_of_carbons(5)).empty());
  CHECK(ring_sizes(cycle_of_carbons(6)) == std::vector<int>{6});

  // Two 6-rings sharing an edge: 10 atoms, 11 bonds. Expected sizes come
  // from the brute-force cycle enumeration oracle.
  MolGraph fused;
  for (int i = 0; i < 10; ++i) fused.add_atom(Element::C);
  // ring A: 0-1-2-3-4-5, ring B: 0-5-6-7-8-9
  fused.add_bond(0, 1, 1);
  fused.add_bond(1, 2, 1);
  fused.add_bond(2, 3, 1);
  fused.add_bond(3, 4, 1);
  fused.add_bond(4, 5, 1);
  fused.add_bond(5, 0, 1);
  fused.add_bond(5, 6, 1);
  fused.add_bond(6, 7, 1);
  fused.add_bond(7, 8, 1);
  fused.add_bond(8, 9, 1);
  fused.add_bond(9, 0, 1);
  REQUIRE(fused.bond_count() == 11);
  auto oracle = limo_test::brute_force_sssr_sizes(fused);
  CHECK(oracle == std::vector<int>{6, 6});
  CHECK(ring_sizes(fused) == oracle);
}

TEST_CASE("ring count equals bonds - atoms + 1 on random connected graphs") {
  Rng rng(42);
  for (int t = 0; t < 300; ++t) {
    MolGraph g = limo_test::random_graph(rng);
    REQUIRE(validate(g));
    auto sizes = ring_sizes(g);
    CHECK(static_cast<int>(sizes.size()) ==
          g.bond_count() - g.atom_count() + 1);
  }
}

TEST_CASE("ring_sizes matches the brute-force oracle on random graphs") {
  Rng rng(7);
  for (int t = 0; t < 120; ++t) {
    MolGraph g = limo_test::random_graph(rng, 4, 12);
    CHECK(ring_sizes(g) == limo_test::brute_force_sssr_sizes(g));
  }
}

TEST_CASE("ring_atoms marks exactly the cyclic atoms") {
  MolGraph g = cycle_of_carbons(5);
  int tail = g.add_atom(Element::C);
  g.add_bond(0, tail, 1);
  auto flags = ring_atoms(g);
  for (int i = 0; i < 5; ++i) CHECK(flags[i]);
  CHECK_FALSE(flags[tail]);
}

TEST_CASE("canonical_key is invariant under relabeling") {
  Rng rng(11);
  MolGraph g = limo_test::random_graph(rng, 20, 20);
  std::string key = canonical_key(g);
  std::set<std::string> keys{key};
  for (int t = 0; t < 1000; ++t) {
    auto perm = limo_test::random_permutation(g.atom_count(), rng);
    keys.insert(canonical_key(limo_test::permute_graph(g, perm)));
  }
  CHECK(keys.size() == 1);
}

TEST_CASE("canonical_key distinguishes bond orders and elements") {
  MolGraph single_bond;
  single_bond.add_atom(Element::C);
  single_bond.add_atom(Element::C);
  single_bond.add_bond(0, 1, 1);
  MolGraph double_bond;
  double_bond.add_atom(Element::C);
  double_bond.add_atom(Element::C);
  double_bond.add_bond(0, 1, 2);
  CHECK(canonical_key(single_bond) != canonical_key(double_bond));

  MolGraph co;
  co.add_atom(Element::C);
  co.add_atom(Element::O);
  co.add_bond(0, 1, 1);
  CHECK(canonical_key(single_bond) != canonical_key(co));

  // Same multiset of atoms and bonds, different topology.
  MolGraph star;
  star.add_atom(Element::C);
  for (int i = 0; i < 3; ++i) {
    star.add_atom(Element::C);
    star.add_bond(0, i + 1, 1);
  }
  MolGraph path = chain_of_carbons(4);
  CHECK(canonical_key(star) != canonical_key(path));
}

TEST_CASE("canonical_key invariance across many random graphs") {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    MolGraph g = limo_test::random_graph(rng);
    auto perm = limo_test::random_permutation(g.atom_count(), rng);
    CHECK(canonical_key(g) == canonical_key(limo_test::permute_graph(g, perm)));
  }
}

TEST_CASE("fingerprint basics") {
  MolGraph c;
  c.add_atom(Element::C);
  Fingerprint fp = fingerprint(c, 0, 2048);
  CHECK(fp.popcount() == 1);  // one atom, one identifier

  MolGraph o;
  o.add_atom(Element::O);
  Fingerprint fo = fingerprint(o, 0, 2048);
  CHECK(fo.popcount() == 1);
  CHECK(tanimoto(fp, fo) == 0.0);  // the hash separates C from O

  Rng rng(3);
  MolGraph g = limo_test::random_graph(rng);
  CHECK(fingerprint(g).words == fingerprint(g).words);

  auto perm = limo_test::random_permutation(g.atom_count(), rng);
  CHECK(fingerprint(g).words ==
        fingerprint(limo_test::permute_graph(g, perm)).words);

  CHECK_THROWS_AS(fingerprint(g, -1, 2048), std::invalid_argument);
  CHECK_THROWS_AS(fingerprint(g, 2, 1000), std::invalid_argument);
}

TEST_CASE("tanimoto formula and edge cases") {
  Fingerprint a, b;
  a.nbits = b.nbits = 128;
  a.words.assign(2, 0);
  b.words.assign(2, 0);

  CHECK(tanimoto(a, b) == 1.0);  // both empty

  auto set_bit = [](Fingerprint& f, int bit) {
    f.words[bit / 64] |= std::uint64_t{1} << (bit % 64);
  };
  set_bit(a, 1);
  set_bit(a, 2);
  set_bit(a, 3);
  set_bit(b, 2);
  set_bit(b, 3);
  set_bit(b, 4);
  CHECK(tanimoto(a, b) == doctest::Approx(0.5));  // 2 / 4
  CHECK(tanimoto(a, a) == 1.0);
  CHECK(tanimoto(a, b) == tanimoto(b, a));

  Fingerprint wide;
  wide.nbits = 256;
  wide.words.assign(4, 0);
  CHECK_THROWS_AS(tanimoto(a, wide), std::invalid_argument);
}

TEST_CASE("tanimoto bounds on random molecule pairs") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    Fingerprint fa = fingerprint(limo_test::random_graph(rng));
    Fingerprint fb = fingerprint(limo_test::random_graph(rng));
    double v = tanimoto(fa, fb);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("diversity") {
  MolGraph a = chain_of_carbons(4);
  std::vector<MolGraph> same{a, a, a};
  CHECK(diversity(same) == doctest::Approx(0.0));

  Rng rng(9);
  MolGraph b = limo_test::random_graph(rng);
  std::vector<MolGraph> pair{a, b};
  CHECK(diversity(pair) ==
        doctest::Approx(1.0 - tanimoto(fingerprint(a), fingerprint(b))));

  CHECK_THROWS_AS(diversity({a}), std::invalid_argument);

  std::vector<MolGraph> sample;
  for (int i = 0; i < 10; ++i) sample.push_back(limo_test::random_graph(rng));
  double v = diversity(sample);
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);
}

TEST_CASE("smiles writer emits the subset grammar") {
  MolGraph c;
  c.add_atom(Element::C);
  CHECK(to_smiles(c) == "C");

  MolGraph ethane = chain_of_carbons(2);
  CHECK(to_smiles(ethane) == "CC");

  MolGraph co;
  co.add_atom(Element::C);
  co.add_atom(Element::O);
  co.add_bond(0, 1, 2);
  CHECK(to_smiles(co) == "C=O");

  MolGraph ring = cycle_of_carbons(6);
  CHECK(to_smiles(ring) == "C1CCCCC1");

  MolGraph branched;  // C(F)(Cl)Br-like
  branched.add_atom(Element::C);
  branched.add_atom(Element::F);
  branched.add_atom(Element::Cl);
  branched.add_atom(Element::Br);
  branched.add_bond(0, 1, 1);
  branched.add_bond(0, 2, 1);
  branched.add_bond(0, 3, 1);
  std::string s = branched.atom_count() ? to_smiles(branched) : "";
  CHECK(s.find('(') != std::string::npos);
  CHECK(s.find("Cl") != std::string::npos);
  CHECK(s.find("Br") != std::string::npos);

  // Deterministic under relabeling.
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    MolGraph g = limo_test::random_graph(rng);
    auto perm = limo_test::random_permutation(g.atom_count(), rng);
    CHECK(to_smiles(g) == to_smiles(limo_test::permute_graph(g, perm)));
  }
}
