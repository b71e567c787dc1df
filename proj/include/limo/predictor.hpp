#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "limo/oracles.hpp"
#include "limo/tensor.hpp"
#include "limo/vae.hpp"

namespace limo {

enum class PredictorMode { Decoded, Latent };

// Scalar property regressor. Decoded mode consumes the soft decoder output
// (n*d probabilities) so gradients flow through the decoder; latent mode
// reads z directly and exists for the architecture ablation.
struct PropertyPredictor {
  PredictorMode mode = PredictorMode::Decoded;
  int input_dim = 0;
  int hidden = 128;
  std::string target_oracle;
  Linear l1, l2, l3, out;

  static PropertyPredictor init(PredictorMode mode, int input_dim, int hidden,
                                std::string target_oracle, std::uint64_t seed);
  std::vector<Tensor> parameters() const;
  Tensor forward(const Tensor& input) const;  // [batch, input_dim] -> [batch, 1]
};

// Latent draws paired with oracle values of their argmax-decoded molecules.
struct PropertyDataset {
  int m = 0;
  std::vector<LatentVector> zs;
  std::vector<double> values;

  std::size_t size() const { return zs.size(); }
};

// count i.i.d. standard-normal draws; the oracle is evaluated on the
// argmax-decoded molecule of each. Items whose oracle call fails are
// dropped (and counted in `dropped` when non-null).
PropertyDataset gen_training_set(const VaeModel& model, PropertyOracle& oracle,
                                 int count, std::uint64_t seed,
                                 int* dropped = nullptr);

struct PredictorTrainConfig {
  int epochs = 40;
  float lr = 1e-3f;
  int batch_size = 64;
  int hidden = 128;
  std::uint64_t seed = 0;
  bool warn_on_constant_targets = true;
  // Called after each epoch with (epoch, mean batch MSE).
  std::function<void(int, double)> epoch_log;
};

// MSE training with Adam; the VAE stays frozen (decoded-mode inputs are
// precomputed with it, its weights are never touched). Deterministic per
// seed. Throws std::invalid_argument for fewer than 2 examples.
PropertyPredictor train_predictor(const PropertyDataset& data,
                                  PredictorMode mode,
                                  const PredictorTrainConfig& config,
                                  const VaeModel& model);

// Differentiable prediction head over a [batch, m] latent tensor.
Tensor predict_tensor(const PropertyPredictor& p, const Tensor& z,
                      const VaeModel& model);

double predict(const PropertyPredictor& p, const LatentVector& z,
               const VaeModel& model);

// 1 - SS_res / SS_tot on held-out pairs.
// Throws std::invalid_argument on zero target variance or < 2 points.
double r_squared(const PropertyPredictor& p, const PropertyDataset& heldout,
                 const VaeModel& model);

void save_predictor(const PropertyPredictor& p, const std::string& path);
PropertyPredictor load_predictor(const std::string& path);

}  // namespace limo
