#include "limo/refine.hpp"

#include <array>

namespace limo {

bool passes_filter(const MolGraph& g, const FilterPolicy& policy) {
  if (!(qed_surrogate(g) > policy.qed_min)) return false;
  if (!(sa_surrogate(g) < policy.sa_max)) return false;
  for (int size : ring_sizes(g)) {
    if (!policy.allowed_ring_sizes.count(size)) return false;
  }
  return true;
}

std::vector<MolGraph> filter(const std::vector<MolGraph>& mols,
                             const FilterPolicy& policy) {
  std::vector<MolGraph> kept;
  for (const MolGraph& g : mols) {
    if (passes_filter(g, policy)) kept.push_back(g);
  }
  return kept;
}

namespace {

constexpr std::array<Element, 4> kReplacements = {Element::N, Element::O,
                                                  Element::Cl, Element::F};

bool is_replacement_element(Element e) {
  for (Element r : kReplacements) {
    if (e == r) return true;
  }
  return false;
}

}  // namespace

MolGraph finetune(const MolGraph& g, PropertyOracle& oracle) {
  MolGraph current = g;
  double best_score = oracle.score(current);

  while (true) {
    // Adjacency to replacement elements is recomputed every sweep.
    std::vector<char> blocked(current.atom_count(), 0);
    for (const Bond& b : current.bonds) {
      if (is_replacement_element(current.atoms[b.b])) blocked[b.a] = 1;
      if (is_replacement_element(current.atoms[b.a])) blocked[b.b] = 1;
    }

    // All valence-feasible substitutions of this sweep score as one batch.
    std::vector<MolGraph> candidates;
    for (int atom = 0; atom < current.atom_count(); ++atom) {
      if (current.atoms[atom] != Element::C || blocked[atom]) continue;
      const int used = current.valence_used(atom);
      for (Element r : kReplacements) {
        if (used > max_valence(r)) continue;
        MolGraph candidate = current;
        candidate.atoms[atom] = r;
        candidates.push_back(std::move(candidate));
      }
    }
    if (candidates.empty()) break;
    auto scores = oracle.score_batch(candidates);

    // Single best improvement per sweep; candidate order already encodes
    // the (atom index, replacement) tie-break.
    int best_idx = -1;
    double sweep_score = best_score;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!scores[i].ok()) continue;
      if (oracle.better(*scores[i].value, sweep_score)) {
        sweep_score = *scores[i].value;
        best_idx = static_cast<int>(i);
      }
    }
    if (best_idx < 0) break;
    current = std::move(candidates[best_idx]);
    best_score = sweep_score;
  }
  return current;
}

}  // namespace limo
