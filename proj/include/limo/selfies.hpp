#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "limo/molgraph.hpp"

namespace limo::selfies {

// Restricted SELFIES dialect. Symbol ids are fixed at build time; the first
// 16 symbols double as the base-16 digit table for branch/ring payloads.
struct Alphabet {
  enum : int {
    kC,
    kN,
    kO,
    kF,
    kS,
    kP,
    kCl,
    kBr,
    kDoubleC,
    kTripleC,
    kDoubleN,
    kTripleN,
    kDoubleO,
    kDoubleS,
    kBranch1,
    kBranch2,
    kRing1,
    kRing2,
    kNop,
  };

  static constexpr int kSize = 19;
  static constexpr int kIndexTableSize = 16;

  static std::string_view name(int id);
  // -1 for unknown symbol text.
  static int id_from_name(std::string_view name);

  // Atom symbols report their element and requested bond order.
  static bool is_atom(int id);
  static Element atom_element(int id);
  static int atom_bond_order(int id);
  // Atom symbol for (element, order); -1 when the dialect has none
  // (e.g. there is no [=P]).
  static int atom_symbol(Element e, int order);

  // Base-16 digit of a payload symbol; symbols outside the index table
  // read as 0.
  static int digit_value(int id) { return id < kIndexTableSize ? id : 0; }
};

// Fixed-length sequence of alphabet symbol ids, [nop]-padded.
using SelfiesString = std::vector<int>;

inline constexpr int kDefaultStringLength = 72;

// Total decoder: every symbol string derives a valid, connected molecule.
// An empty derivation yields a single carbon atom.
MolGraph decode(const SelfiesString& s);

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonical-DFS encoder, [nop]-padded to length n.
// decode(encode(g)) is isomorphic to g for every encodable graph.
// Throws EncodeError when the derivation needs more than n symbols or the
// graph uses a bond the dialect cannot express.
SelfiesString encode(const MolGraph& g, int n = kDefaultStringLength);

// Uniform i.i.d. symbols, deterministic per seed.
SelfiesString random_string(std::uint64_t seed, int n = kDefaultStringLength);

// Text form "[C][=O]..." used by line-delimited corpus files. Parsing
// rejects unknown symbols; trailing [nop] padding is implicit.
std::string to_text(const SelfiesString& s);
SelfiesString from_text(std::string_view line, int n = kDefaultStringLength);

}  // namespace limo::selfies
