#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "limo/molgraph.hpp"

namespace limo {

enum class Direction { Maximize, Minimize };

struct ScoreResult {
  std::optional<double> value;
  std::string error;  // set when value is absent

  bool ok() const { return value.has_value(); }
};

// Ground-truth property function. Internal surrogates are pure functions of
// the canonical graph; the external variant talks JSON-lines to a child
// process.
class PropertyOracle {
 public:
  virtual ~PropertyOracle() = default;
  virtual std::string name() const = 0;
  virtual Direction direction() const = 0;
  virtual std::vector<ScoreResult> score_batch(
      const std::vector<MolGraph>& mols) = 0;

  // Single-molecule convenience; throws on per-item error.
  double score(const MolGraph& g);

  // True when `a` is better than `b` under this oracle's direction.
  bool better(double a, double b) const {
    return direction() == Direction::Maximize ? a > b : a < b;
  }
};

// Surrogate property formulas. All constants are artifact-defined stand-ins
// for the usual cheminformatics implementations; the external oracle
// protocol admits the real ones.
double logp_surrogate(const MolGraph& g);
double sa_surrogate(const MolGraph& g);   // clamped to [1, 10]
double qed_surrogate(const MolGraph& g);  // in (0, 1]
double plogp(const MolGraph& g);          // logp' - sa' - rings larger than 6

// names: logp | sa | qed | plogp. Throws on unknown name.
std::unique_ptr<PropertyOracle> make_surrogate_oracle(const std::string& name);

struct ExternalOracleConfig {
  std::string command;       // run via /bin/sh -c
  std::string name = "external";
  Direction direction = Direction::Minimize;
  double timeout_seconds = 30.0;
  int max_in_flight = 8;
};

// Child-process oracle. Requests are one JSON object per line:
//   {"id": <int>, "smiles": "<string>"}
// and responses {"id": <int>, "score": <real>} may arrive in any order.
// Missing or malformed responses become per-item errors, never a batch
// failure; a failed spawn throws.
class ExternalOracle : public PropertyOracle {
 public:
  explicit ExternalOracle(ExternalOracleConfig config);
  std::string name() const override { return config_.name; }
  Direction direction() const override { return config_.direction; }
  std::vector<ScoreResult> score_batch(
      const std::vector<MolGraph>& mols) override;

 private:
  ExternalOracleConfig config_;
};

// K_D = exp(dG / RT) mol/L expressed in nanomolar, R in kcal/(mol K).
// Favorable (negative) dG gives K_D below 1 M.
double kd_from_dg(double dg_kcal_per_mol, double temperature_k = 298.15);

// dG_bind = -RT ln sum_i exp(-dG_i / RT), computed with max subtraction.
// Always <= min(dGs). Throws std::invalid_argument on an empty list.
double combine_poses(const std::vector<double>& dgs,
                     double temperature_k = 298.15);

inline constexpr double kGasConstantKcal = 0.0019872;

// Persistent (canonical_key, oracle name) -> score map. Records are
// appended as length-prefixed (key, name, float64) tuples; safe for
// concurrent use through an internal lock.
class OracleCache {
 public:
  explicit OracleCache(std::string path);
  std::optional<double> lookup(const std::string& key,
                               const std::string& oracle_name) const;
  void store(const std::string& key, const std::string& oracle_name,
             double score);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, double> map_;
};

// Memoizes an oracle through an OracleCache.
class CachedOracle : public PropertyOracle {
 public:
  CachedOracle(std::shared_ptr<PropertyOracle> inner,
               std::shared_ptr<OracleCache> cache);
  std::string name() const override { return inner_->name(); }
  Direction direction() const override { return inner_->direction(); }
  std::vector<ScoreResult> score_batch(
      const std::vector<MolGraph>& mols) override;

 private:
  std::shared_ptr<PropertyOracle> inner_;
  std::shared_ptr<OracleCache> cache_;
};

}  // namespace limo
