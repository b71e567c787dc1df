#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "limo/molgraph.hpp"
#include "limo/selfies.hpp"
#include "limo/tensor.hpp"

namespace limo {

using LatentVector = std::vector<float>;

// Per-position multinomial parameters over the alphabet; rows sum to 1.
struct SymbolDistribution {
  int n = 0;
  int d = 0;
  std::vector<float> probs;  // row-major n x d

  float at(int i, int j) const {
    return probs[static_cast<std::size_t>(i) * d + j];
  }
};

struct VaeDims {
  int n = selfies::kDefaultStringLength;
  int d = selfies::Alphabet::kSize;
  int m = 64;       // latent width
  int hidden = 256; // base MLP width; first layer is 2x
  int embed = 64;

  // Full-scale preset matching the published architecture.
  static VaeDims paper() { return {72, selfies::Alphabet::kSize, 1024, 1000, 64}; }
};

struct Linear {
  Tensor w;  // [in, out]
  Tensor b;  // [out]

  Linear() = default;
  Linear(int in, int out, Rng& rng);
  Tensor forward(const Tensor& x) const { return add(matmul(x, w), b); }
  std::vector<Tensor> parameters() const { return {w, b}; }
};

// Embedding -> 4-layer batchnormed MLP encoder with mu/logvar heads;
// mirrored decoder ending in a rowwise softmax over symbol positions.
struct VaeModel {
  VaeDims dims;
  Tensor embedding;  // [d, embed]
  std::vector<Linear> enc;
  std::vector<BatchNorm> enc_bn;
  Linear mu_head;
  Linear logvar_head;
  std::vector<Linear> dec;
  std::vector<BatchNorm> dec_bn;
  Linear dec_out;

  static VaeModel init(const VaeDims& dims, std::uint64_t seed);

  std::vector<Tensor> parameters() const;

  // (mu, logvar), each [batch, m]. Train mode uses batch statistics.
  std::pair<Tensor, Tensor> encode_tensor(
      const std::vector<selfies::SelfiesString>& batch, bool train) const;

  // Softmaxed symbol distributions, [batch*n, d].
  Tensor decode_tensor(const Tensor& z, bool train) const;
};

struct VaeTrainConfig {
  int epochs = 18;
  float lr = 1e-4f;
  float recon_weight = 0.9f;
  float kl_weight = 0.1f;
  int batch_size = 64;
  std::uint64_t seed = 0;
  // Called after each epoch with (epoch, mean batch loss).
  std::function<void(int, double)> epoch_log;
};

// Mean-over-batch ELBO: recon_weight * NLL + kl_weight * KL. Train mode:
// batchnorm batch statistics and a reparameterized latent draw.
Tensor elbo_loss(const VaeModel& model,
                 const std::vector<selfies::SelfiesString>& batch,
                 const VaeTrainConfig& config, Rng& rng);

// Adam over shuffled minibatches; deterministic per seed.
// Throws std::invalid_argument on an empty dataset.
VaeModel train_vae(const std::vector<selfies::SelfiesString>& dataset,
                   const VaeTrainConfig& config, const VaeDims& dims);

// Deterministic eval-mode heads for one string.
// Throws std::invalid_argument when the string length is not n.
std::pair<LatentVector, LatentVector> encode(const VaeModel& model,
                                             const selfies::SelfiesString& x);

// Eval-mode decoder; rows sum to 1. Throws on NaN input or wrong width.
SymbolDistribution decode(const VaeModel& model, const LatentVector& z);

// Highest-probability symbol per position; ties break to the lowest id.
selfies::SelfiesString argmax_symbols(const SymbolDistribution& y);

// z ~ N(0, I) -> decode -> argmax -> SELFIES decode. Every output passes
// validate by construction of the codec.
std::vector<MolGraph> sample_random(const VaeModel& model, int k,
                                    std::uint64_t seed);

// Fraction of symbol positions reproduced by argmax(decode(mu(x))).
double reconstruction_accuracy(const VaeModel& model,
                               const std::vector<selfies::SelfiesString>& xs);

void save_vae(const VaeModel& model, const std::string& path);
VaeModel load_vae(const std::string& path);

}  // namespace limo
