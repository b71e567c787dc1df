#include "limo/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "limo/checkpoint.hpp"

namespace limo {

PropertyPredictor PropertyPredictor::init(PredictorMode mode, int input_dim,
                                          int hidden,
                                          std::string target_oracle,
                                          std::uint64_t seed) {
  Rng rng(seed);
  PropertyPredictor p;
  p.mode = mode;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.target_oracle = std::move(target_oracle);
  p.l1 = Linear(input_dim, hidden, rng);
  p.l2 = Linear(hidden, hidden, rng);
  p.l3 = Linear(hidden, hidden, rng);
  p.out = Linear(hidden, 1, rng);
  return p;
}

std::vector<Tensor> PropertyPredictor::parameters() const {
  std::vector<Tensor> ps;
  for (const Linear* l : {&l1, &l2, &l3, &out}) {
    ps.push_back(l->w);
    ps.push_back(l->b);
  }
  return ps;
}

Tensor PropertyPredictor::forward(const Tensor& input) const {
  if (input.shape().size() != 2 || input.dim(1) != input_dim)
    throw std::invalid_argument("predictor input width mismatch");
  Tensor h = relu(l1.forward(input));
  h = relu(l2.forward(h));
  h = relu(l3.forward(h));
  return out.forward(h);
}

PropertyDataset gen_training_set(const VaeModel& model, PropertyOracle& oracle,
                                 int count, std::uint64_t seed, int* dropped) {
  PropertyDataset ds;
  ds.m = model.dims.m;
  if (dropped) *dropped = 0;
  if (count <= 0) return ds;

  Rng rng(seed);
  const int chunk = 256;
  for (int done = 0; done < count; done += chunk) {
    const int b = std::min(chunk, count - done);
    std::vector<float> zdata(static_cast<std::size_t>(b) * model.dims.m);
    for (auto& v : zdata) v = static_cast<float>(rng.normal());
    Tensor z = Tensor::from_data({b, model.dims.m}, zdata);
    Tensor probs = model.decode_tensor(z, false);

    std::vector<MolGraph> mols;
    mols.reserve(b);
    for (int r = 0; r < b; ++r) {
      SymbolDistribution y;
      y.n = model.dims.n;
      y.d = model.dims.d;
      auto begin = probs.data().begin() +
                   static_cast<std::ptrdiff_t>(r) * model.dims.n * model.dims.d;
      y.probs.assign(begin, begin + model.dims.n * model.dims.d);
      mols.push_back(selfies::decode(argmax_symbols(y)));
    }
    auto scores = oracle.score_batch(mols);
    for (int r = 0; r < b; ++r) {
      if (!scores[r].ok()) {
        if (dropped) ++*dropped;
        std::fprintf(stderr, "gen_training_set: dropped item (%s)\n",
                     scores[r].error.c_str());
        continue;
      }
      LatentVector zi(zdata.begin() + static_cast<std::ptrdiff_t>(r) * model.dims.m,
                      zdata.begin() +
                          static_cast<std::ptrdiff_t>(r + 1) * model.dims.m);
      ds.zs.push_back(std::move(zi));
      ds.values.push_back(*scores[r].value);
    }
  }
  return ds;
}

namespace {

// Decoded-mode inputs depend only on the frozen VAE, so they are computed
// once up front rather than per epoch.
std::vector<std::vector<float>> predictor_inputs(const PropertyDataset& data,
                                                 PredictorMode mode,
                                                 const VaeModel& model) {
  std::vector<std::vector<float>> inputs;
  inputs.reserve(data.size());
  if (mode == PredictorMode::Latent) {
    for (const auto& z : data.zs) inputs.push_back(z);
    return inputs;
  }
  const int chunk = 256;
  const int nd = model.dims.n * model.dims.d;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const int b =
        static_cast<int>(std::min<std::size_t>(chunk, data.size() - start));
    std::vector<float> zdata;
    zdata.reserve(static_cast<std::size_t>(b) * model.dims.m);
    for (int r = 0; r < b; ++r)
      zdata.insert(zdata.end(), data.zs[start + r].begin(),
                   data.zs[start + r].end());
    Tensor z = Tensor::from_data({b, model.dims.m}, std::move(zdata));
    Tensor probs = model.decode_tensor(z, false);
    for (int r = 0; r < b; ++r) {
      auto begin = probs.data().begin() + static_cast<std::ptrdiff_t>(r) * nd;
      inputs.emplace_back(begin, begin + nd);
    }
  }
  return inputs;
}

}  // namespace

PropertyPredictor train_predictor(const PropertyDataset& data,
                                  PredictorMode mode,
                                  const PredictorTrainConfig& config,
                                  const VaeModel& model) {
  if (data.size() < 2)
    throw std::invalid_argument("predictor training needs >= 2 examples");

  const double first = data.values[0];
  bool constant = std::all_of(data.values.begin(), data.values.end(),
                              [&](double v) { return v == first; });
  if (constant && config.warn_on_constant_targets)
    std::fprintf(stderr, "train_predictor: constant-target dataset\n");

  const int input_dim = mode == PredictorMode::Decoded
                            ? model.dims.n * model.dims.d
                            : model.dims.m;
  PropertyPredictor p = PropertyPredictor::init(
      mode, input_dim, config.hidden, "", config.seed);
  auto params = p.parameters();
  AdamState adam(config.lr);

  auto inputs = predictor_inputs(data, mode, model);

  std::vector<std::size_t> index(data.size());
  std::iota(index.begin(), index.end(), 0);
  const int bs =
      std::min<int>(config.batch_size, static_cast<int>(data.size()));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(config.seed + 104729ull * static_cast<std::uint64_t>(epoch + 1));
    for (std::size_t i = index.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(static_cast<int>(i)));
      std::swap(index[i - 1], index[j]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start + bs <= data.size(); start += bs) {
      std::vector<float> xb;
      xb.reserve(static_cast<std::size_t>(bs) * input_dim);
      std::vector<float> yb(bs);
      for (int k = 0; k < bs; ++k) {
        const auto& row = inputs[index[start + k]];
        xb.insert(xb.end(), row.begin(), row.end());
        yb[k] = static_cast<float>(data.values[index[start + k]]);
      }
      Tensor x = Tensor::from_data({bs, input_dim}, std::move(xb));
      Tensor target = Tensor::from_data({bs, 1}, std::move(yb));
      for (Tensor& t : params) t.zero_grad();
      Tensor loss = mean(square(sub(p.forward(x), target)));
      backward(loss);
      adam_step(params, adam);
      epoch_loss += loss.item();
      ++batches;
    }
    if (config.epoch_log && batches > 0)
      config.epoch_log(epoch, epoch_loss / batches);
  }
  return p;
}

Tensor predict_tensor(const PropertyPredictor& p, const Tensor& z,
                      const VaeModel& model) {
  if (p.mode == PredictorMode::Latent) {
    if (z.dim(1) != p.input_dim)
      throw std::invalid_argument("latent predictor width mismatch");
    return p.forward(z);
  }
  Tensor probs = model.decode_tensor(z, false);  // [batch*n, d]
  Tensor flat = reshape(probs, {z.dim(0), model.dims.n * model.dims.d});
  return p.forward(flat);
}

double predict(const PropertyPredictor& p, const LatentVector& z,
               const VaeModel& model) {
  Tensor zt = Tensor::from_data({1, static_cast<int>(z.size())},
                                std::vector<float>(z.begin(), z.end()));
  return predict_tensor(p, zt, model).item();
}

double r_squared(const PropertyPredictor& p, const PropertyDataset& heldout,
                 const VaeModel& model) {
  if (heldout.size() < 2)
    throw std::invalid_argument("r_squared needs >= 2 held-out points");
  double mean_y = std::accumulate(heldout.values.begin(), heldout.values.end(),
                                  0.0) /
                  static_cast<double>(heldout.size());
  double ss_tot = 0.0;
  for (double v : heldout.values) ss_tot += (v - mean_y) * (v - mean_y);
  if (ss_tot == 0.0)
    throw std::invalid_argument("r_squared: zero target variance");

  auto inputs = predictor_inputs(heldout, p.mode, model);
  double ss_res = 0.0;
  const int chunk = 256;
  for (std::size_t start = 0; start < heldout.size(); start += chunk) {
    const int b = static_cast<int>(
        std::min<std::size_t>(chunk, heldout.size() - start));
    std::vector<float> xb;
    xb.reserve(static_cast<std::size_t>(b) * p.input_dim);
    for (int k = 0; k < b; ++k)
      xb.insert(xb.end(), inputs[start + k].begin(), inputs[start + k].end());
    Tensor x = Tensor::from_data({b, p.input_dim}, std::move(xb));
    Tensor pred = p.forward(x);
    for (int k = 0; k < b; ++k) {
      double d = pred.data()[k] - heldout.values[start + k];
      ss_res += d * d;
    }
  }
  return 1.0 - ss_res / ss_tot;
}

void save_predictor(const PropertyPredictor& p, const std::string& path) {
  Checkpoint ck;
  ck.header = {1 /* kind: predictor */,
               p.mode == PredictorMode::Decoded ? 0 : 1, p.input_dim,
               p.hidden};
  ck.blocks.push_back({"target", {}});
  ck.blocks.back().second.reserve(p.target_oracle.size());
  for (char c : p.target_oracle)
    ck.blocks.back().second.push_back(static_cast<float>(c));
  int i = 0;
  for (const Linear* l : {&p.l1, &p.l2, &p.l3, &p.out}) {
    std::string prefix = "l" + std::to_string(i++);
    ck.blocks.push_back({prefix + ".w", {l->w.data().begin(), l->w.data().end()}});
    ck.blocks.push_back({prefix + ".b", {l->b.data().begin(), l->b.data().end()}});
  }
  save_checkpoint(path, ck);
}

PropertyPredictor load_predictor(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.header.size() != 4 || ck.header[0] != 1)
    throw std::runtime_error("not a predictor checkpoint: " + path);
  PredictorMode mode =
      ck.header[1] == 0 ? PredictorMode::Decoded : PredictorMode::Latent;
  std::string target;
  for (float c : ck.block("target")) target += static_cast<char>(c);
  PropertyPredictor p =
      PropertyPredictor::init(mode, ck.header[2], ck.header[3], target, 0);
  int i = 0;
  for (Linear* l : {&p.l1, &p.l2, &p.l3, &p.out}) {
    std::string prefix = "l" + std::to_string(i++);
    const auto& w = ck.block(prefix + ".w");
    const auto& b = ck.block(prefix + ".b");
    if (static_cast<int>(w.size()) != l->w.size() ||
        static_cast<int>(b.size()) != l->b.size())
      throw std::runtime_error("checkpoint shape mismatch in " + prefix);
    std::copy(w.begin(), w.end(), l->w.data().begin());
    std::copy(b.begin(), b.end(), l->b.data().begin());
  }
  return p;
}

}  // namespace limo
