#include "limo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <Eigen/Core>

namespace limo {

// ---------------------------------------------------------------------------
// Rng.
// ---------------------------------------------------------------------------

std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.141592653589793 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int Rng::uniform_int(int n) {
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

// ---------------------------------------------------------------------------
// Tensor core.
// ---------------------------------------------------------------------------

struct TensorNode {
  std::vector<int> shape;
  std::vector<float> data;
  std::vector<float> grad;
  bool requires_grad = false;  // leaf flag
  bool needs_grad = false;     // on a path to a tracked leaf
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  int size() const { return static_cast<int>(data.size()); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0f);
  }
};

namespace {

int shape_size(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::shared_ptr<TensorNode> make_node(std::vector<int> shape) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data.assign(shape_size(n->shape), 0.0f);
  return n;
}

std::shared_ptr<TensorNode> make_op(std::vector<int> shape,
                                    std::vector<std::shared_ptr<TensorNode>>
                                        parents) {
  auto n = make_node(std::move(shape));
  for (const auto& p : parents) {
    if (p->needs_grad || p->requires_grad) n->needs_grad = true;
  }
  n->parents = std::move(parents);
  return n;
}

void require_same_shape(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("tensor shape mismatch");
}

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>;
using MapMat = Eigen::Map<EMat>;
using ConstMapMat = Eigen::Map<const EMat>;

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto n = make_node(std::move(shape));
  n->requires_grad = requires_grad;
  n->needs_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return Tensor(std::move(n));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<float> data,
                         bool requires_grad) {
  if (shape_size(shape) != static_cast<int>(data.size()))
    throw std::invalid_argument("data length does not match shape");
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  n->needs_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const { return node_->shape; }

int Tensor::size() const { return node_->size(); }

std::span<const float> Tensor::data() const { return node_->data; }
std::span<float> Tensor::data() { return node_->data; }

std::span<const float> Tensor::grad() const { return node_->grad; }
std::span<float> Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

float Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("item() on non-scalar tensor");
  return node_->data[0];
}

void Tensor::zero_grad() {
  node_->ensure_grad();
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
}

// ---------------------------------------------------------------------------
// Ops.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 ||
      a.dim(1) != b.dim(0))
    throw std::invalid_argument("matmul shape mismatch");
  const int r = a.dim(0), k = a.dim(1), c = b.dim(1);
  auto out = make_op({r, c}, {a.node(), b.node()});
  {
    ConstMapMat ma(a.data().data(), r, k);
    ConstMapMat mb(b.data().data(), k, c);
    MapMat mo(out->data.data(), r, c);
    mo.noalias() = ma * mb;
  }
  if (out->needs_grad) {
    auto pa = a.node();
    auto pb = b.node();
    out->backward_fn = [pa, pb, r, k, c](TensorNode& self) {
      ConstMapMat go(self.grad.data(), r, c);
      if (pa->needs_grad || pa->requires_grad) {
        pa->ensure_grad();
        MapMat ga(pa->grad.data(), r, k);
        ConstMapMat mb(pb->data.data(), k, c);
        ga.noalias() += go * mb.transpose();
      }
      if (pb->needs_grad || pb->requires_grad) {
        pb->ensure_grad();
        MapMat gb(pb->grad.data(), k, c);
        ConstMapMat ma(pa->data.data(), r, k);
        gb.noalias() += ma.transpose() * go;
      }
    };
  }
  return Tensor(out);
}

Tensor add(const Tensor& a, const Tensor& b) {
  const bool broadcast =
      a.shape().size() == 2 && b.shape().size() == 1 && a.dim(1) == b.dim(0);
  if (!broadcast) require_same_shape(a, b);
  auto out = make_op(a.shape(), {a.node(), b.node()});
  const int n = a.size();
  if (broadcast) {
    const int cols = b.dim(0);
    for (int i = 0; i < n; ++i)
      out->data[i] = a.data()[i] + b.data()[i % cols];
  } else {
    for (int i = 0; i < n; ++i) out->data[i] = a.data()[i] + b.data()[i];
  }
  if (out->needs_grad) {
    auto pa = a.node();
    auto pb = b.node();
    out->backward_fn = [pa, pb, broadcast, n](TensorNode& self) {
      if (pa->needs_grad || pa->requires_grad) {
        pa->ensure_grad();
        for (int i = 0; i < n; ++i) pa->grad[i] += self.grad[i];
      }
      if (pb->needs_grad || pb->requires_grad) {
        pb->ensure_grad();
        if (broadcast) {
          const int cols = static_cast<int>(pb->data.size());
          for (int i = 0; i < n; ++i) pb->grad[i % cols] += self.grad[i];
        } else {
          for (int i = 0; i < n; ++i) pb->grad[i] += self.grad[i];
        }
      }
    };
  }
  return Tensor(out);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  auto out = make_op(a.shape(), {a.node(), b.node()});
  const int n = a.size();
  for (int i = 0; i < n; ++i) out->data[i] = a.data()[i] - b.data()[i];
  if (out->needs_grad) {
    auto pa = a.node();
    auto pb = b.node();
    out->backward_fn = [pa, pb, n](TensorNode& self) {
      if (pa->needs_grad || pa->requires_grad) {
        pa->ensure_grad();
        for (int i = 0; i < n; ++i) pa->grad[i] += self.grad[i];
      }
      if (pb->needs_grad || pb->requires_grad) {
        pb->ensure_grad();
        for (int i = 0; i < n; ++i) pb->grad[i] -= self.grad[i];
      }
    };
  }
  return Tensor(out);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  auto out = make_op(a.shape(), {a.node(), b.node()});
  const int n = a.size();
  for (int i = 0; i < n; ++i) out->data[i] = a.data()[i] * b.data()[i];
  if (out->needs_grad) {
    auto pa = a.node();
    auto pb = b.node();
    out->backward_fn = [pa, pb, n](TensorNode& self) {
      if (pa->needs_grad || pa->requires_grad) {
        pa->ensure_grad();
        for (int i = 0; i < n; ++i)
          pa->grad[i] += self.grad[i] * pb->data[i];
      }
      if (pb->needs_grad || pb->requires_grad) {
        pb->ensure_grad();
        for (int i = 0; i < n; ++i)
          pb->grad[i] += self.grad[i] * pa->data[i];
      }
    };
  }
  return Tensor(out);
}

namespace {

Tensor unary_op(const Tensor& a, const std::function<float(float)>& f,
                const std::function<float(float, float)>& df_by_xy) {
  auto out = make_op(a.shape(), {a.node()});
  const int n = a.size();
  for (int i = 0; i < n; ++i) out->data[i] = f(a.data()[i]);
  if (out->needs_grad) {
    auto pa = a.node();
    out->backward_fn = [pa, df_by_xy, n](TensorNode& self) {
      if (!(pa->needs_grad || pa->requires_grad)) return;
      pa->ensure_grad();
      for (int i = 0; i < n; ++i)
        pa->grad[i] += self.grad[i] * df_by_xy(pa->data[i], self.data[i]);
    };
  }
  return Tensor(out);
}

}  // namespace

Tensor relu(const Tensor& a) {
  return unary_op(
      a, [](float x) { return x > 0.0f ? x : 0.0f; },
      [](float x, float) { return x > 0.0f ? 1.0f : 0.0f; });
}

Tensor exp(const Tensor& a) {
  return unary_op(a, [](float x) { return std::exp(x); },
                  [](float, float y) { return y; });
}

Tensor log(const Tensor& a) {
  for (float x : a.data()) {
    if (!(x > 0.0f))
      throw std::invalid_argument("log of non-positive value");
  }
  return unary_op(a, [](float x) { return std::log(x); },
                  [](float x, float) { return 1.0f / x; });
}

Tensor scale(const Tensor& a, float c) {
  return unary_op(a, [c](float x) { return c * x; },
                  [c](float, float) { return c; });
}

Tensor square(const Tensor& a) {
  return unary_op(a, [](float x) { return x * x; },
                  [](float x, float) { return 2.0f * x; });
}

Tensor sum(const Tensor& a) {
  auto out = make_op({1}, {a.node()});
  double acc = 0.0;
  for (float x : a.data()) acc += x;
  out->data[0] = static_cast<float>(acc);
  if (out->needs_grad) {
    auto pa = a.node();
    out->backward_fn = [pa](TensorNode& self) {
      if (!(pa->needs_grad || pa->requires_grad)) return;
      pa->ensure_grad();
      for (float& g : pa->grad) g += self.grad[0];
    };
  }
  return Tensor(out);
}

Tensor mean(const Tensor& a) {
  const int n = a.size();
  return scale(sum(a), 1.0f / static_cast<float>(n));
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  if (table.shape().size() != 2)
    throw std::invalid_argument("embedding table must be 2-D");
  const int rows = table.dim(0), width = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= rows)
      throw std::invalid_argument("embedding id out of range");
  }
  auto out = make_op({static_cast<int>(ids.size()), width}, {table.node()});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(table.data().data() + static_cast<std::size_t>(ids[i]) * width,
                width, out->data.data() + i * width);
  }
  if (out->needs_grad) {
    auto pt = table.node();
    auto ids_copy = ids;
    out->backward_fn = [pt, ids_copy, width](TensorNode& self) {
      if (!(pt->needs_grad || pt->requires_grad)) return;
      pt->ensure_grad();
      for (std::size_t i = 0; i < ids_copy.size(); ++i) {
        float* dst = pt->grad.data() +
                     static_cast<std::size_t>(ids_copy[i]) * width;
        const float* src = self.grad.data() + i * width;
        for (int j = 0; j < width; ++j) dst[j] += src[j];
      }
    };
  }
  return Tensor(out);
}

Tensor rowwise_softmax(const Tensor& a) {
  if (a.shape().size() != 2)
    throw std::invalid_argument("rowwise_softmax expects a 2-D tensor");
  const int rows = a.dim(0), cols = a.dim(1);
  auto out = make_op(a.shape(), {a.node()});
  for (int r = 0; r < rows; ++r) {
    const float* in = a.data().data() + static_cast<std::size_t>(r) * cols;
    float* o = out->data.data() + static_cast<std::size_t>(r) * cols;
    float mx = in[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
    double denom = 0.0;
    for (int c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      denom += o[c];
    }
    const float inv = static_cast<float>(1.0 / denom);
    for (int c = 0; c < cols; ++c) o[c] *= inv;
  }
  if (out->needs_grad) {
    auto pa = a.node();
    out->backward_fn = [pa, rows, cols](TensorNode& self) {
      if (!(pa->needs_grad || pa->requires_grad)) return;
      pa->ensure_grad();
      for (int r = 0; r < rows; ++r) {
        const float* y = self.data.data() + static_cast<std::size_t>(r) * cols;
        const float* gy = self.grad.data() + static_cast<std::size_t>(r) * cols;
        float* gx = pa->grad.data() + static_cast<std::size_t>(r) * cols;
        double dot = 0.0;
        for (int c = 0; c < cols; ++c) dot += static_cast<double>(gy[c]) * y[c];
        for (int c = 0; c < cols; ++c)
          gx[c] += y[c] * (gy[c] - static_cast<float>(dot));
      }
    };
  }
  return Tensor(out);
}

Tensor gaussian_sample(const Tensor& mu, const Tensor& sigma, Rng& rng) {
  require_same_shape(mu, sigma);
  auto out = make_op(mu.shape(), {mu.node(), sigma.node()});
  const int n = mu.size();
  auto eps = std::make_shared<std::vector<float>>(n);
  for (int i = 0; i < n; ++i) {
    (*eps)[i] = static_cast<float>(rng.normal());
    out->data[i] = mu.data()[i] + sigma.data()[i] * (*eps)[i];
  }
  if (out->needs_grad) {
    auto pm = mu.node();
    auto ps = sigma.node();
    out->backward_fn = [pm, ps, eps, n](TensorNode& self) {
      if (pm->needs_grad || pm->requires_grad) {
        pm->ensure_grad();
        for (int i = 0; i < n; ++i) pm->grad[i] += self.grad[i];
      }
      if (ps->needs_grad || ps->requires_grad) {
        ps->ensure_grad();
        for (int i = 0; i < n; ++i)
          ps->grad[i] += self.grad[i] * (*eps)[i];
      }
    };
  }
  return Tensor(out);
}

namespace {
constexpr float kProbFloor = 1e-30f;
}

Tensor one_hot_nll(const Tensor& probs, const std::vector<int>& targets) {
  if (probs.shape().size() != 2)
    throw std::invalid_argument("one_hot_nll expects a 2-D tensor");
  const int rows = probs.dim(0), cols = probs.dim(1);
  if (static_cast<int>(targets.size()) != rows)
    throw std::invalid_argument("one target per row required");
  auto out = make_op({1}, {probs.node()});
  double acc = 0.0;
  for (int r = 0; r < rows; ++r) {
    int t = targets[r];
    if (t < 0 || t >= cols)
      throw std::invalid_argument("target id out of range");
    float p = std::max(probs.data()[static_cast<std::size_t>(r) * cols + t],
                       kProbFloor);
    acc -= std::log(static_cast<double>(p));
  }
  out->data[0] = static_cast<float>(acc);
  if (out->needs_grad) {
    auto pp = probs.node();
    auto tgt = targets;
    out->backward_fn = [pp, tgt, cols](TensorNode& self) {
      if (!(pp->needs_grad || pp->requires_grad)) return;
      pp->ensure_grad();
      for (std::size_t r = 0; r < tgt.size(); ++r) {
        std::size_t idx = r * cols + tgt[r];
        float p = std::max(pp->data[idx], kProbFloor);
        pp->grad[idx] += self.grad[0] * (-1.0f / p);
      }
    };
  }
  return Tensor(out);
}

Tensor kl_diag_gaussian(const Tensor& mu, const Tensor& logvar) {
  require_same_shape(mu, logvar);
  auto out = make_op({1}, {mu.node(), logvar.node()});
  const int n = mu.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double m = mu.data()[i];
    double lv = logvar.data()[i];
    acc += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  out->data[0] = static_cast<float>(acc);
  if (out->needs_grad) {
    auto pm = mu.node();
    auto pl = logvar.node();
    out->backward_fn = [pm, pl, n](TensorNode& self) {
      const float g = self.grad[0];
      if (pm->needs_grad || pm->requires_grad) {
        pm->ensure_grad();
        for (int i = 0; i < n; ++i) pm->grad[i] += g * pm->data[i];
      }
      if (pl->needs_grad || pl->requires_grad) {
        pl->ensure_grad();
        for (int i = 0; i < n; ++i)
          pl->grad[i] += g * 0.5f * (std::exp(pl->data[i]) - 1.0f);
      }
    };
  }
  return Tensor(out);
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  if (shape_size(shape) != a.size())
    throw std::invalid_argument("reshape size mismatch");
  auto out = make_op(std::move(shape), {a.node()});
  std::copy(a.data().begin(), a.data().end(), out->data.begin());
  if (out->needs_grad) {
    auto pa = a.node();
    out->backward_fn = [pa](TensorNode& self) {
      if (!(pa->needs_grad || pa->requires_grad)) return;
      pa->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        pa->grad[i] += self.grad[i];
    };
  }
  return Tensor(out);
}

// ---------------------------------------------------------------------------
// Backward pass.
// ---------------------------------------------------------------------------

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw std::invalid_argument("backward requires a scalar loss");
  auto root = loss.node();
  if (!root->needs_grad && !root->requires_grad)
    throw std::invalid_argument("loss is not connected to tracked tensors");

  // Iterative post-order topological sort over the parent DAG.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, std::size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if ((p->needs_grad || p->requires_grad) && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  std::fill(root->grad.begin(), root->grad.end(), 0.0f);
  root->grad[0] = 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* node = *it;
    if (node->backward_fn) {
      node->ensure_grad();
      node->backward_fn(*node);
    }
  }
}

// ---------------------------------------------------------------------------
// BatchNorm.
// ---------------------------------------------------------------------------

BatchNorm::BatchNorm(int features) {
  gamma = Tensor::from_data({features}, std::vector<float>(features, 1.0f),
                            true);
  beta = Tensor::zeros({features}, true);
  running_mean.assign(features, 0.0f);
  running_var.assign(features, 1.0f);
}

std::vector<Tensor> BatchNorm::parameters() const { return {gamma, beta}; }

Tensor BatchNorm::forward(const Tensor& x, bool train) const {
  if (x.shape().size() != 2 || x.dim(1) != static_cast<int>(running_mean.size()))
    throw std::invalid_argument("batchnorm feature mismatch");
  const int rows = x.dim(0), cols = x.dim(1);

  auto out = make_op(x.shape(), {x.node(), gamma.node(), beta.node()});
  auto xhat = std::make_shared<std::vector<float>>(x.size());
  auto invstd = std::make_shared<std::vector<float>>(cols);

  if (train) {
    for (int c = 0; c < cols; ++c) {
      double m = 0.0;
      for (int r = 0; r < rows; ++r)
        m += x.data()[static_cast<std::size_t>(r) * cols + c];
      m /= rows;
      double v = 0.0;
      for (int r = 0; r < rows; ++r) {
        double d = x.data()[static_cast<std::size_t>(r) * cols + c] - m;
        v += d * d;
      }
      v /= rows;  // biased variance for normalization
      (*invstd)[c] = static_cast<float>(1.0 / std::sqrt(v + eps));
      for (int r = 0; r < rows; ++r) {
        std::size_t i = static_cast<std::size_t>(r) * cols + c;
        (*xhat)[i] = (x.data()[i] - static_cast<float>(m)) * (*invstd)[c];
      }
      double unbiased = rows > 1 ? v * rows / (rows - 1) : v;
      running_mean[c] = (1 - momentum) * running_mean[c] +
                        momentum * static_cast<float>(m);
      running_var[c] = (1 - momentum) * running_var[c] +
                       momentum * static_cast<float>(unbiased);
    }
  } else {
    for (int c = 0; c < cols; ++c)
      (*invstd)[c] = 1.0f / std::sqrt(running_var[c] + eps);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        std::size_t i = static_cast<std::size_t>(r) * cols + c;
        (*xhat)[i] = (x.data()[i] - running_mean[c]) * (*invstd)[c];
      }
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::size_t i = static_cast<std::size_t>(r) * cols + c;
      out->data[i] = gamma.data()[c] * (*xhat)[i] + beta.data()[c];
    }
  }

  if (out->needs_grad) {
    auto px = x.node();
    auto pg = gamma.node();
    auto pb = beta.node();
    out->backward_fn = [px, pg, pb, xhat, invstd, rows, cols,
                        train](TensorNode& self) {
      if (pg->needs_grad || pg->requires_grad) {
        pg->ensure_grad();
        for (int c = 0; c < cols; ++c) {
          double acc = 0.0;
          for (int r = 0; r < rows; ++r) {
            std::size_t i = static_cast<std::size_t>(r) * cols + c;
            acc += static_cast<double>(self.grad[i]) * (*xhat)[i];
          }
          pg->grad[c] += static_cast<float>(acc);
        }
      }
      if (pb->needs_grad || pb->requires_grad) {
        pb->ensure_grad();
        for (int c = 0; c < cols; ++c) {
          double acc = 0.0;
          for (int r = 0; r < rows; ++r)
            acc += self.grad[static_cast<std::size_t>(r) * cols + c];
          pb->grad[c] += static_cast<float>(acc);
        }
      }
      if (!(px->needs_grad || px->requires_grad)) return;
      px->ensure_grad();
      if (!train) {
        // Eval mode is a per-feature affine map.
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < cols; ++c) {
            std::size_t i = static_cast<std::size_t>(r) * cols + c;
            px->grad[i] += self.grad[i] * pg->data[c] * (*invstd)[c];
          }
        }
        return;
      }
      for (int c = 0; c < cols; ++c) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (int r = 0; r < rows; ++r) {
          std::size_t i = static_cast<std::size_t>(r) * cols + c;
          double gyh = static_cast<double>(self.grad[i]) * pg->data[c];
          sum_gy += gyh;
          sum_gy_xhat += gyh * (*xhat)[i];
        }
        for (int r = 0; r < rows; ++r) {
          std::size_t i = static_cast<std::size_t>(r) * cols + c;
          double gyh = static_cast<double>(self.grad[i]) * pg->data[c];
          double dx = (gyh - sum_gy / rows -
                       (*xhat)[i] * sum_gy_xhat / rows) *
                      (*invstd)[c];
          px->grad[i] += static_cast<float>(dx);
        }
      }
    };
  }
  return Tensor(out);
}

// ---------------------------------------------------------------------------
// Adam.
// ---------------------------------------------------------------------------

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0f);
      state.v[i].assign(params[i].size(), 0.0f);
    }
  }
  for (const Tensor& p : params) {
    if (p.grad().empty())
      throw std::invalid_argument("adam_step: parameter has no gradient");
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto data = params[i].data();
    auto grad = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0f - state.beta1) * grad[j];
      v[j] = state.beta2 * v[j] + (1.0f - state.beta2) * grad[j] * grad[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      data[j] -= static_cast<float>(state.lr * mhat /
                                    (std::sqrt(vhat) + state.eps));
    }
  }
}

}  // namespace limo
