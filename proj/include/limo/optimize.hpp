#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "limo/molgraph.hpp"
#include "limo/predictor.hpp"
#include "limo/vae.hpp"

namespace limo {

// One weighted objective term. Without a target the term contributes
// -w * g(z) (sign-flipped for minimized properties); with a target it
// contributes w * (g(z) - target)^2, which steers the property into a range.
struct ObjectiveTerm {
  const PropertyPredictor* predictor = nullptr;
  double weight = 1.0;
  Direction direction = Direction::Maximize;
  std::optional<double> target;
};

// Fixed symbol positions: full alphabet rows of the mask are set at each
// fixed position, and the anchor is the soft decoder snapshot the masked
// entries are pinned to.
struct SubstructureMask {
  int n = 0;
  int d = 0;
  std::vector<float> mask;    // n*d, entries 0 or 1
  std::vector<float> anchor;  // n*d decoder snapshot
  double lambda = 1000.0;
};

struct Objective {
  std::vector<ObjectiveTerm> terms;
  int steps = 1000;
  double step_size = 0.1;
  std::optional<SubstructureMask> mask;
};

struct TraceStep {
  LatentVector z;
  double loss = 0.0;
  selfies::SelfiesString symbols;  // argmax symbols at this step
  MolGraph molecule;
  std::vector<double> predicted;   // one value per objective term
};

// steps+1 entries (the initialization included). best_index minimizes the
// recorded loss; aborted is set when a NaN loss cut the run short.
struct OptimizationTrace {
  std::vector<TraceStep> steps;
  int best_index = 0;
  bool aborted = false;
};

// Adam descent on z against the weighted objective with f_dec and every
// predictor frozen. Deterministic given z0 and the objective.
OptimizationTrace reverse_optimize(const LatentVector& z0, const Objective& obj,
                                   const VaeModel& model);

// lambda * sum (M .* (f_dec(z) - anchor))^2 as a tensor term.
Tensor masked_loss_tensor(const Tensor& probs_flat, const SubstructureMask& mask);

double masked_loss(const LatentVector& z, const SubstructureMask& mask,
                   const VaeModel& model);

// Anchor = f_dec(f_enc(x_start)) through the mu path; rows of `mask` are
// all-ones at each fixed position. Throws when a position is out of range.
SubstructureMask build_mask(const selfies::SelfiesString& x_start,
                            const std::set<int>& fixed_positions,
                            const VaeModel& model, double lambda = 1000.0);

struct Candidate {
  MolGraph molecule;
  std::string key;
  std::vector<double> predicted;
  double objective_value = 0.0;  // recorded trace loss at the best step
  LatentVector z;
};

// One best-of-trace candidate per restart, in restart order; deterministic
// per seed regardless of thread count.
std::vector<Candidate> run_restarts(const Objective& obj, int restarts,
                                    std::uint64_t seed, const VaeModel& model,
                                    int threads = 1);

// Independent restarts from i.i.d. N(0, I) starts, deduplicated by
// canonical key and sorted by objective value then key; deterministic per
// seed regardless of thread count.
std::vector<Candidate> multi_start(const Objective& obj, int restarts,
                                   std::uint64_t seed, const VaeModel& model,
                                   int threads = 1);

}  // namespace limo
