#include "limo/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace limo {

namespace {

struct StepEval {
  double loss = 0.0;
  std::vector<double> predicted;
  bool nan = false;
};

// One forward/backward pass; gradient lands in z's grad buffer.
StepEval eval_objective(Tensor& z, const Objective& obj, const VaeModel& model,
                        bool want_grad) {
  StepEval ev;
  Tensor probs;       // [n, d] for batch 1
  Tensor flat;        // [1, n*d]
  const bool needs_decode =
      obj.mask.has_value() ||
      std::any_of(obj.terms.begin(), obj.terms.end(), [](const ObjectiveTerm& t) {
        return t.predictor->mode == PredictorMode::Decoded;
      });
  if (needs_decode) {
    probs = model.decode_tensor(z, false);
    flat = reshape(probs, {1, model.dims.n * model.dims.d});
  }

  Tensor loss = Tensor::scalar(0.0f);
  for (const ObjectiveTerm& term : obj.terms) {
    Tensor g = term.predictor->mode == PredictorMode::Decoded
                   ? term.predictor->forward(flat)
                   : term.predictor->forward(z);
    ev.predicted.push_back(g.item());
    Tensor contrib;
    if (term.target.has_value()) {
      Tensor delta = sub(g, Tensor::from_data({1, 1}, {static_cast<float>(
                                                  *term.target)}));
      contrib = scale(sum(square(delta)), static_cast<float>(term.weight));
    } else {
      double sign = term.direction == Direction::Maximize ? 1.0 : -1.0;
      contrib = scale(sum(g), static_cast<float>(-term.weight * sign));
    }
    loss = add(loss, contrib);
  }
  if (obj.mask.has_value()) {
    loss = add(loss, masked_loss_tensor(flat, *obj.mask));
  }
  ev.loss = loss.item();
  if (std::isnan(ev.loss)) {
    ev.nan = true;
    return ev;
  }
  if (want_grad) backward(loss);
  return ev;
}

selfies::SelfiesString decode_symbols(const Tensor& z, const VaeModel& model) {
  Tensor probs = model.decode_tensor(z, false);
  SymbolDistribution y;
  y.n = model.dims.n;
  y.d = model.dims.d;
  y.probs.assign(probs.data().begin(), probs.data().end());
  return argmax_symbols(y);
}

}  // namespace

Tensor masked_loss_tensor(const Tensor& probs_flat,
                          const SubstructureMask& mask) {
  const int nd = mask.n * mask.d;
  if (probs_flat.size() != nd)
    throw std::invalid_argument("mask shape mismatch");
  Tensor anchor = Tensor::from_data(probs_flat.shape(), mask.anchor);
  Tensor m = Tensor::from_data(probs_flat.shape(), mask.mask);
  Tensor diff = mul(m, sub(probs_flat, anchor));
  return scale(sum(square(diff)), static_cast<float>(mask.lambda));
}

double masked_loss(const LatentVector& z, const SubstructureMask& mask,
                   const VaeModel& model) {
  Tensor zt = Tensor::from_data({1, static_cast<int>(z.size())},
                                std::vector<float>(z.begin(), z.end()));
  Tensor probs = model.decode_tensor(zt, false);
  Tensor flat = reshape(probs, {1, model.dims.n * model.dims.d});
  return masked_loss_tensor(flat, mask).item();
}

SubstructureMask build_mask(const selfies::SelfiesString& x_start,
                            const std::set<int>& fixed_positions,
                            const VaeModel& model, double lambda) {
  const int n = model.dims.n;
  const int d = model.dims.d;
  for (int pos : fixed_positions) {
    if (pos < 0 || pos >= n)
      throw std::invalid_argument("fixed position out of range");
  }
  SubstructureMask mask;
  mask.n = n;
  mask.d = d;
  mask.lambda = lambda;
  mask.mask.assign(static_cast<std::size_t>(n) * d, 0.0f);
  for (int pos : fixed_positions) {
    for (int j = 0; j < d; ++j)
      mask.mask[static_cast<std::size_t>(pos) * d + j] = 1.0f;
  }
  auto [mu, logvar] = encode(model, x_start);
  SymbolDistribution anchor = decode(model, mu);
  mask.anchor = anchor.probs;
  return mask;
}

OptimizationTrace reverse_optimize(const LatentVector& z0, const Objective& obj,
                                   const VaeModel& model) {
  if (obj.terms.empty())
    throw std::invalid_argument("objective needs at least one term");
  for (const ObjectiveTerm& t : obj.terms) {
    if (t.predictor == nullptr)
      throw std::invalid_argument("objective term without predictor");
  }

  Tensor z = Tensor::from_data({1, static_cast<int>(z0.size())},
                               std::vector<float>(z0.begin(), z0.end()), true);
  std::vector<Tensor> params{z};
  AdamState adam(static_cast<float>(obj.step_size));

  OptimizationTrace trace;
  auto record = [&](const StepEval& ev) {
    TraceStep step;
    step.z.assign(z.data().begin(), z.data().end());
    step.loss = ev.loss;
    step.predicted = ev.predicted;
    step.symbols = decode_symbols(z, model);
    step.molecule = selfies::decode(step.symbols);
    trace.steps.push_back(std::move(step));
  };

  for (int s = 0; s <= obj.steps; ++s) {
    bool z_finite = std::all_of(z.data().begin(), z.data().end(),
                                [](float v) { return std::isfinite(v); });
    if (!z_finite) {
      trace.aborted = true;
      break;
    }
    z.zero_grad();
    StepEval ev = eval_objective(z, obj, model, s < obj.steps);
    if (ev.nan) {
      trace.aborted = true;
      break;
    }
    record(ev);
    if (s < obj.steps) adam_step(params, adam);
  }
  if (trace.steps.empty()) {
    // Keep the initialization so callers always have one entry.
    TraceStep step;
    step.z = z0;
    step.loss = std::numeric_limits<double>::quiet_NaN();
    step.symbols.assign(model.dims.n, selfies::Alphabet::kNop);
    step.molecule = selfies::decode(step.symbols);
    trace.steps.push_back(std::move(step));
  }

  trace.best_index = 0;
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    if (trace.steps[i].loss < trace.steps[trace.best_index].loss)
      trace.best_index = static_cast<int>(i);
  }
  return trace;
}

std::vector<Candidate> run_restarts(const Objective& obj, int restarts,
                                    std::uint64_t seed, const VaeModel& model,
                                    int threads) {
  std::vector<Candidate> results(std::max(0, restarts));
  if (restarts <= 0) return results;
  threads = std::max(1, threads);

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= restarts) break;
      Rng rng(seed + 0x9e37ull * static_cast<std::uint64_t>(i));
      LatentVector z0(model.dims.m);
      for (auto& v : z0) v = static_cast<float>(rng.normal());
      OptimizationTrace trace = reverse_optimize(z0, obj, model);
      const TraceStep& best = trace.steps[trace.best_index];
      Candidate c;
      c.molecule = best.molecule;
      c.key = canonical_key(best.molecule);
      c.predicted = best.predicted;
      c.objective_value = best.loss;
      c.z = best.z;
      results[i] = std::move(c);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<Candidate> multi_start(const Objective& obj, int restarts,
                                   std::uint64_t seed, const VaeModel& model,
                                   int threads) {
  std::vector<Candidate> results =
      run_restarts(obj, restarts, seed, model, threads);

  // Deterministic aggregation: sort, then dedupe by canonical key.
  std::sort(results.begin(), results.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.objective_value != b.objective_value)
                return a.objective_value < b.objective_value;
              return a.key < b.key;
            });
  std::vector<Candidate> unique;
  std::set<std::string> seen;
  for (auto& c : results) {
    if (seen.insert(c.key).second) unique.push_back(std::move(c));
  }
  return unique;
}

}  // namespace limo
