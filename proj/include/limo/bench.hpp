#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "limo/molgraph.hpp"
#include "limo/optimize.hpp"
#include "limo/oracles.hpp"
#include "limo/predictor.hpp"
#include "limo/refine.hpp"
#include "limo/selfies.hpp"
#include "limo/vae.hpp"

namespace limo {

struct ReportMolecule {
  std::string key;
  std::string smiles;
  std::vector<std::pair<std::string, double>> scores;
};

// Machine-readable task result. Field order is preserved on serialization
// so a report is byte-identical across reruns of the same (checkpoint,
// seed, config); wall_seconds is only emitted when include_timing is set.
struct TaskReport {
  std::string task;
  std::string run_id;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<ReportMolecule> top;
  std::vector<std::pair<std::string, std::vector<double>>> distributions;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  bool include_timing = true;

  std::optional<double> metric(const std::string& name) const;

  std::string to_json() const;       // full document
  std::string to_plot_json() const;  // raw distribution series
  std::string to_csv() const;
  std::string to_text() const;

  // Writes base.json, base.csv, base.txt and base.plot.json (the latter
  // only when distributions exist).
  void write_files(const std::string& base_path) const;
};

// Random drug-like molecule for synthetic corpora: weighted-element tree
// growth, occasional multi-order bonds, 5/6-ring closures. Always
// encodable in the restricted dialect.
MolGraph random_molecule(Rng& rng, int min_atoms = 8, int max_atoms = 22);

// Line-delimited corpus stand-in for the usual public datasets.
std::vector<selfies::SelfiesString> synthetic_corpus(int count,
                                                     std::uint64_t seed,
                                                     int n);

std::vector<selfies::SelfiesString> load_corpus(const std::string& path,
                                                int n);
void save_corpus(const std::vector<selfies::SelfiesString>& corpus,
                 const std::string& path);

// ---------------------------------------------------------------------------
// Task runners.
// ---------------------------------------------------------------------------

// %valid, unique@1k (and @10k when k allows), diversity over a fixed
// subsample, %novel against the training keys.
TaskReport task_random_generation(const VaeModel& model, int k,
                                  std::uint64_t seed,
                                  const std::set<std::string>& training_keys);

struct MaximizeTaskConfig {
  int restarts = 200;
  int top_k = 3;
  int steps = 1000;
  double lr = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Reverse-optimization restarts rescored by the true oracle; top-k reported
// by oracle value.
TaskReport task_maximize(const VaeModel& model, const PropertyPredictor& pred,
                         PropertyOracle& oracle,
                         const MaximizeTaskConfig& config);

struct TargetRangeTaskConfig {
  double lo = -2.5;
  double hi = -2.0;
  int count = 100;
  int steps = 1000;
  double lr = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Objective (g - mid)^2; success% is the oracle-in-range rate over all
// optimized molecules, diversity is over the successes.
TaskReport task_target_range(const VaeModel& model,
                             const PropertyPredictor& pred,
                             PropertyOracle& oracle,
                             const TargetRangeTaskConfig& config);

struct SimilarityTaskConfig {
  std::vector<double> deltas{0.0, 0.2, 0.4, 0.6};
  int steps = 1000;
  double lr = 0.1;
  int threads = 1;
};

// One optimization trace per start molecule, evaluated at every delta:
// best oracle value among trace molecules with Tanimoto >= delta.
TaskReport task_similarity_constrained(
    const VaeModel& model, const PropertyPredictor& pred,
    PropertyOracle& oracle,
    const std::vector<selfies::SelfiesString>& starts,
    const SimilarityTaskConfig& config);

struct SubstructureTaskConfig {
  Direction direction = Direction::Maximize;
  int steps = 1000;
  double lr = 0.1;
  double lambda = 1000.0;
  std::uint64_t seed = 0;
  int runs = 1;  // run 0 starts at the reconstruction; later runs at random z
  int threads = 1;
};

// Masked optimization around fixed symbol positions; reports the property
// delta of the best retaining molecule and the retention rate.
TaskReport task_substructure(const VaeModel& model,
                             const PropertyPredictor& pred,
                             PropertyOracle& oracle,
                             const selfies::SelfiesString& start,
                             const std::set<int>& fixed_positions,
                             const SubstructureTaskConfig& config);

struct AffinityTaskConfig {
  std::string mode = "multi";  // single | multi
  double w_affinity = 1.0;
  double w_qed = 2.0;
  double w_sa = 0.5;
  int predictor_dataset = 2000;
  int predictor_epochs = 30;
  int restarts = 200;
  int steps = 300;
  double lr = 0.1;
  int top_k = 3;
  double temperature_k = 298.15;
  std::uint64_t seed = 0;
  int threads = 1;
  FilterPolicy filter;
  bool finetune_survivors = true;
};

// Binding-affinity pipeline against an external (or mock) oracle. Multi
// mode optimizes {affinity, QED', SA'} jointly, filters, then fine-tunes on
// affinity; reports top-k K_D and before/after property distributions.
TaskReport task_affinity(const VaeModel& model, PropertyOracle& affinity,
                         const AffinityTaskConfig& config);

}  // namespace limo
