#pragma once

#include <set>
#include <vector>

#include "limo/molgraph.hpp"
#include "limo/oracles.hpp"

namespace limo {

// Drug-likeness cutoffs applied after multi-objective optimization.
// Acyclic molecules always satisfy the ring clause.
struct FilterPolicy {
  double qed_min = 0.4;
  double sa_max = 5.5;
  std::set<int> allowed_ring_sizes{5, 6};
};

bool passes_filter(const MolGraph& g, const FilterPolicy& policy);

// Keeps g iff QED' > qed_min, SA' < sa_max and every SSSR ring size is
// allowed; input order preserved.
std::vector<MolGraph> filter(const std::vector<MolGraph>& mols,
                             const FilterPolicy& policy);

// Greedy local search: per sweep, try every N/O/Cl/F replacement of each
// carbon not adjacent to any of those elements, keep the single best valid
// improvement, stop when a sweep fails to improve. The result never scores
// worse than the input under the oracle's direction.
MolGraph finetune(const MolGraph& g, PropertyOracle& oracle);

}  // namespace limo
