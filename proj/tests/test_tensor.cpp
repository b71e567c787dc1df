#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "limo/tensor.hpp"

using namespace limo;

namespace {

// Central finite differences (h = 1e-3) against analytic gradients.
// Relative error with an absolute floor of 1, so O(1)-scale gradients are
// held to 1e-3 relative and near-zero components to 1e-3 absolute.
constexpr double kH = 1e-3;
constexpr double kTol = 1e-3;

bool close(double analytic, double numeric) {
  double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) <= kTol * denom;
}

// fn maps freshly-built leaf tensors (from the given data) to a scalar
// loss. Checks every input gradient entry.
void check_gradients(
    const std::vector<std::vector<int>>& shapes,
    std::vector<std::vector<float>> data,
    const std::function<Tensor(std::vector<Tensor>&)>& fn) {
  auto build = [&](const std::vector<std::vector<float>>& values) {
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < shapes.size(); ++i)
      inputs.push_back(Tensor::from_data(shapes[i], values[i], true));
    return inputs;
  };

  auto inputs = build(data);
  Tensor loss = fn(inputs);
  REQUIRE(loss.size() == 1);
  backward(loss);

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < data[i].size(); ++j) {
      auto plus = data;
      auto minus = data;
      plus[i][j] += static_cast<float>(kH);
      minus[i][j] -= static_cast<float>(kH);
      auto in_plus = build(plus);
      auto in_minus = build(minus);
      double fd = (fn(in_plus).item() - fn(in_minus).item()) / (2 * kH);
      double analytic = inputs[i].grad()[j];
      if (!close(analytic, fd)) {
        CAPTURE(i);
        CAPTURE(j);
        CAPTURE(analytic);
        CAPTURE(fd);
        REQUIRE(close(analytic, fd));
      }
    }
  }
}

std::vector<float> random_values(int count, Rng& rng, double scale = 1.0) {
  std::vector<float> v(count);
  for (auto& x : v) x = static_cast<float>(rng.normal() * scale);
  return v;
}

}  // namespace

TEST_CASE("rng is deterministic and roughly normal") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("gradient check: matmul") {
  Rng rng(1);
  check_gradients({{4, 5}, {5, 3}},
                  {random_values(20, rng), random_values(15, rng)},
                  [](std::vector<Tensor>& in) {
                    return sum(matmul(in[0], in[1]));
                  });
}

TEST_CASE("gradient check: add / sub / mul with weighting") {
  Rng rng(2);
  auto w = random_values(20, rng);
  auto weighted = [w](const Tensor& t) {
    return sum(mul(t, Tensor::from_data(t.shape(), w)));
  };
  check_gradients({{4, 5}, {4, 5}},
                  {random_values(20, rng), random_values(20, rng)},
                  [&](std::vector<Tensor>& in) {
                    return weighted(add(in[0], in[1]));
                  });
  check_gradients({{4, 5}, {4, 5}},
                  {random_values(20, rng), random_values(20, rng)},
                  [&](std::vector<Tensor>& in) {
                    return weighted(sub(in[0], in[1]));
                  });
  check_gradients({{4, 5}, {4, 5}},
                  {random_values(20, rng), random_values(20, rng)},
                  [&](std::vector<Tensor>& in) {
                    return weighted(mul(in[0], in[1]));
                  });
}

TEST_CASE("gradient check: bias broadcast add") {
  Rng rng(3);
  check_gradients({{4, 5}, {5}},
                  {random_values(20, rng), random_values(5, rng)},
                  [](std::vector<Tensor>& in) {
                    return sum(square(add(in[0], in[1])));
                  });
}

TEST_CASE("gradient check: unary ops") {
  Rng rng(4);
  // ReLU probed away from the kink.
  std::vector<float> relu_in = random_values(20, rng);
  for (auto& v : relu_in)
    if (std::abs(v) < 0.05f) v = 0.2f;
  check_gradients({{4, 5}}, {relu_in}, [](std::vector<Tensor>& in) {
    return sum(relu(in[0]));
  });

  check_gradients({{4, 5}}, {random_values(20, rng, 0.5)},
                  [](std::vector<Tensor>& in) { return sum(exp(in[0])); });

  std::vector<float> log_in(20);
  for (auto& v : log_in) v = 0.5f + static_cast<float>(rng.uniform()) * 2.0f;
  check_gradients({{4, 5}}, {log_in}, [](std::vector<Tensor>& in) {
    return sum(log(in[0]));
  });

  check_gradients({{4, 5}}, {random_values(20, rng)},
                  [](std::vector<Tensor>& in) {
                    return scale(sum(square(in[0])), 0.5f);
                  });
  check_gradients({{4, 5}}, {random_values(20, rng)},
                  [](std::vector<Tensor>& in) { return mean(in[0]); });
  check_gradients({{4, 5}}, {random_values(20, rng)},
                  [](std::vector<Tensor>& in) {
                    return sum(square(reshape(in[0], {20})));
                  });
}

TEST_CASE("relu gradient is zero on the negative side") {
  Tensor x = Tensor::from_data({1}, {-1.0f}, true);
  Tensor y = sum(relu(x));
  backward(y);
  CHECK(x.grad()[0] == 0.0f);
}

TEST_CASE("log rejects non-positive input") {
  Tensor x = Tensor::from_data({2}, {1.0f, 0.0f});
  CHECK_THROWS_AS(log(x), std::invalid_argument);
}

TEST_CASE("gradient check: embedding lookup") {
  Rng rng(5);
  std::vector<int> ids{0, 2, 1, 2};
  check_gradients({{3, 4}}, {random_values(12, rng)},
                  [ids](std::vector<Tensor>& in) {
                    return sum(square(embedding_lookup(in[0], ids)));
                  });
}

TEST_CASE("gradient check: rowwise softmax") {
  Rng rng(6);
  auto w = random_values(20, rng);
  check_gradients({{4, 5}}, {random_values(20, rng)},
                  [w](std::vector<Tensor>& in) {
                    Tensor y = rowwise_softmax(in[0]);
                    return sum(mul(y, Tensor::from_data(y.shape(), w)));
                  });
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(7);
  Tensor x = Tensor::from_data({6, 9}, random_values(54, rng, 3.0));
  Tensor y = rowwise_softmax(x);
  for (int r = 0; r < 6; ++r) {
    double s = 0;
    for (int c = 0; c < 9; ++c) s += y.data()[r * 9 + c];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("gradient check: gaussian sample (fixed eps per seed)") {
  Rng rng(8);
  std::vector<float> sigma_in(10);
  for (auto& v : sigma_in) v = 0.5f + static_cast<float>(rng.uniform());
  check_gradients({{2, 5}, {2, 5}}, {random_values(10, rng), sigma_in},
                  [](std::vector<Tensor>& in) {
                    Rng eps_rng(42);  // same draw across FD evaluations
                    return sum(square(gaussian_sample(in[0], in[1], eps_rng)));
                  });
}

TEST_CASE("gradient check: one-hot NLL") {
  Rng rng(9);
  std::vector<int> targets{1, 0, 3, 2};
  check_gradients({{4, 4}}, {random_values(16, rng)},
                  [targets](std::vector<Tensor>& in) {
                    return one_hot_nll(rowwise_softmax(in[0]), targets);
                  });
}

TEST_CASE("one-hot NLL of a perfect one-hot distribution is zero") {
  Tensor probs = Tensor::from_data({2, 3},
                                   {1.0f, 0.0f, 0.0f, 0.0f, 0.0f, 1.0f});
  CHECK(one_hot_nll(probs, {0, 2}).item() == 0.0f);
}

TEST_CASE("gradient check and zero point: diagonal gaussian KL") {
  Rng rng(10);
  check_gradients({{2, 5}, {2, 5}},
                  {random_values(10, rng), random_values(10, rng, 0.5)},
                  [](std::vector<Tensor>& in) {
                    return kl_diag_gaussian(in[0], in[1]);
                  });
  Tensor mu = Tensor::zeros({3});
  Tensor logvar = Tensor::zeros({3});
  CHECK(kl_diag_gaussian(mu, logvar).item() == 0.0f);  // matched Gaussians
}

TEST_CASE("gradient check: batchnorm train and eval") {
  Rng rng(11);
  for (bool train : {true, false}) {
    auto w = random_values(24, rng);
    check_gradients({{8, 3}}, {random_values(24, rng)},
                    [train, w](std::vector<Tensor>& in) {
                      BatchNorm bn(3);
                      Tensor y = bn.forward(in[0], train);
                      return sum(mul(y, Tensor::from_data(y.shape(), w)));
                    });
  }
}

TEST_CASE("batchnorm train output is standardized") {
  Rng rng(12);
  Tensor x = Tensor::from_data({64, 5}, random_values(320, rng, 2.0));
  BatchNorm bn(5);
  Tensor y = bn.forward(x, true);
  for (int c = 0; c < 5; ++c) {
    double m = 0, v = 0;
    for (int r = 0; r < 64; ++r) m += y.data()[r * 5 + c];
    m /= 64;
    for (int r = 0; r < 64; ++r) {
      double d = y.data()[r * 5 + c] - m;
      v += d * d;
    }
    v /= 64;
    CHECK(std::abs(m) < 1e-4);
    CHECK(std::abs(v - 1.0) < 1e-4);
  }
}

TEST_CASE("gradient check: two-layer MLP composite") {
  Rng rng(13);
  check_gradients(
      {{3, 4}, {4, 6}, {6}, {6, 2}, {2}},
      {random_values(12, rng), random_values(24, rng, 0.5),
       random_values(6, rng, 0.1), random_values(12, rng, 0.5),
       random_values(2, rng, 0.1)},
      [](std::vector<Tensor>& in) {
        Tensor h = relu(add(matmul(in[0], in[1]), in[2]));
        Tensor out = add(matmul(h, in[3]), in[4]);
        return sum(square(out));
      });
}

TEST_CASE("backward basics") {
  Tensor x = Tensor::from_data({4}, {1, 2, 3, 4}, true);
  backward(sum(x));
  for (float g : x.grad()) CHECK(g == 1.0f);

  x.zero_grad();
  backward(scale(sum(square(x)), 0.5f));
  for (int i = 0; i < 4; ++i)
    CHECK(x.grad()[i] == doctest::Approx(x.data()[i]));

  Tensor nonscalar = Tensor::from_data({2}, {1, 2}, true);
  CHECK_THROWS_AS(backward(add(nonscalar, nonscalar)),
                  std::invalid_argument);
}

TEST_CASE("gradient accumulates across shared subexpressions") {
  Tensor x = Tensor::from_data({1}, {3.0f}, true);
  Tensor y = add(mul(x, x), x);  // x^2 + x, d/dx = 2x + 1 = 7
  backward(sum(y));
  CHECK(x.grad()[0] == doctest::Approx(7.0f));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Tensor p = Tensor::from_data({3}, {1, 2, 3}, true);
  p.zero_grad();
  std::vector<Tensor> params{p};
  AdamState st(0.1f);
  for (int i = 0; i < 10; ++i) adam_step(params, st);
  CHECK(p.data()[0] == 1.0f);
  CHECK(p.data()[1] == 2.0f);
  CHECK(p.data()[2] == 3.0f);
}

TEST_CASE("adam: constant gradient converges to lr-sized steps") {
  Tensor p = Tensor::from_data({1}, {0.0f}, true);
  std::vector<Tensor> params{p};
  AdamState st(0.01f);
  float prev = 0.0f;
  float delta = 0.0f;
  for (int i = 0; i < 1000; ++i) {
    p.zero_grad();
    p.grad()[0] = 0.37f;  // arbitrary constant
    adam_step(params, st);
    delta = std::abs(p.data()[0] - prev);
    prev = p.data()[0];
  }
  CHECK(delta >= 0.01f * 0.99f);
  CHECK(delta <= 0.01f * 1.01f);
}

TEST_CASE("adam: minimizes a 1-D quadratic") {
  Tensor p = Tensor::from_data({1}, {-4.0f}, true);
  std::vector<Tensor> params{p};
  AdamState st(0.1f);
  for (int i = 0; i < 500; ++i) {
    p.zero_grad();
    Tensor target = Tensor::from_data({1}, {3.0f});
    Tensor loss = sum(square(sub(p, target)));
    backward(loss);
    adam_step(params, st);
  }
  CHECK(std::abs(p.data()[0] - 3.0f) < 0.05f);
}

TEST_CASE("adam requires populated gradients") {
  Tensor p = Tensor::from_data({2}, {1, 2}, true);
  Tensor fresh(Tensor::zeros({2}, true).node());
  std::vector<Tensor> params{p};
  AdamState st;
  p.zero_grad();
  adam_step(params, st);  // fine: zero grads exist
  std::vector<Tensor> unpopulated{Tensor::from_data({2}, {1, 2})};
  AdamState st2;
  CHECK_THROWS_AS(adam_step(unpopulated, st2), std::invalid_argument);
}

TEST_CASE("shape mismatches throw") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({3, 3});
  CHECK_THROWS_AS(add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(mul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(matmul(a, Tensor::zeros({2, 2})), std::invalid_argument);
  CHECK_THROWS_AS(reshape(a, {7}), std::invalid_argument);
  CHECK_THROWS_AS(one_hot_nll(Tensor::zeros({2, 3}), {0}),
                  std::invalid_argument);
}
