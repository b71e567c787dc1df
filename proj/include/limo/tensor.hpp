#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace limo {

// Deterministic random stream. Gaussian draws use Box-Muller on a
// splitmix64 stream, so sequences are identical across platforms (the
// standard library distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();            // [0, 1)
  double normal();             // standard normal
  int uniform_int(int n);      // [0, n)

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct TensorNode;

// Dense row-major float32 tensor with reverse-mode autodiff. Ops record
// adjoint closures onto the implicit tape formed by parent links; backward
// visits each node once in reverse topological order. A model instance and
// its tape are single-threaded; separate instances may run on separate
// threads, and frozen weights are safe to share read-only.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<float> data,
                          bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const;
  int dim(int i) const { return shape()[i]; }
  int size() const;

  std::span<const float> data() const;
  std::span<float> data();
  std::span<const float> grad() const;
  std::span<float> grad();

  bool requires_grad() const;
  float item() const;  // value of a 1-element tensor
  void zero_grad();

  std::shared_ptr<TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<TensorNode> node_;
};

// Op suite. Shape mismatches throw std::invalid_argument.
Tensor matmul(const Tensor& a, const Tensor& b);  // [r,k] x [k,c]
Tensor add(const Tensor& a, const Tensor& b);     // same shape, or b is a
                                                  // row vector broadcast
                                                  // over a's rows
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);     // elementwise
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);                      // non-positive input throws
Tensor scale(const Tensor& a, float c);
Tensor square(const Tensor& a);
Tensor sum(const Tensor& a);                      // scalar
Tensor mean(const Tensor& a);                     // scalar

// Rows of `table` ([d, e]) gathered by id; gradient scatters back.
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

// Softmax over the last dimension of a 2-D tensor.
Tensor rowwise_softmax(const Tensor& a);

// Reparameterized draw mu + sigma * eps with eps ~ N(0, I) recorded at
// forward time; gradients flow to mu and sigma.
Tensor gaussian_sample(const Tensor& mu, const Tensor& sigma, Rng& rng);

// -sum_i log probs[i, targets[i]] over all rows. Probabilities are clamped
// at 1e-30 before the log.
Tensor one_hot_nll(const Tensor& probs, const std::vector<int>& targets);

// KL(N(mu, diag sigma^2) || N(0, I)) summed over all entries, with
// sigma^2 = exp(logvar): -1/2 sum(1 + logvar - mu^2 - exp(logvar)).
Tensor kl_diag_gaussian(const Tensor& mu, const Tensor& logvar);

// Populates grad buffers of every tracked leaf reachable from `loss`.
// Throws std::invalid_argument when loss is not a tracked scalar.
void backward(const Tensor& loss);

struct BatchNorm {
  Tensor gamma;
  Tensor beta;
  // Mutable so eval-mode forward stays const; train-mode updates follow the
  // single-threaded-training contract.
  mutable std::vector<float> running_mean;
  mutable std::vector<float> running_var;
  float momentum = 0.1f;
  float eps = 1e-5f;

  BatchNorm() = default;
  explicit BatchNorm(int features);
  // Train mode normalizes with batch statistics (biased variance) and
  // updates the running averages; eval mode applies the running affine.
  Tensor forward(const Tensor& x, bool train) const;
  std::vector<Tensor> parameters() const;
};

// Value-preserving shape change (copy with identity gradient).
Tensor reshape(const Tensor& a, std::vector<int> shape);

// Bias-corrected Adam over a fixed parameter list; moments are keyed by
// position, so the list must not change between steps.
struct AdamState {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  int step_count = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  explicit AdamState(float learning_rate = 1e-3f) : lr(learning_rate) {}
};

// One in-place update; throws std::invalid_argument when a parameter has
// no populated gradient.
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace limo
