#include "limo/vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "limo/checkpoint.hpp"

namespace limo {

Linear::Linear(int in, int out, Rng& rng) {
  std::vector<float> weights(static_cast<std::size_t>(in) * out);
  const float limit = std::sqrt(6.0f / static_cast<float>(in));
  for (auto& w : weights)
    w = static_cast<float>((rng.uniform() * 2.0 - 1.0) * limit);
  w = Tensor::from_data({in, out}, std::move(weights), true);
  b = Tensor::zeros({out}, true);
}

namespace {

std::vector<int> layer_widths(const VaeDims& d) {
  return {2 * d.hidden, d.hidden, d.hidden, d.hidden};
}

}  // namespace

VaeModel VaeModel::init(const VaeDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  VaeModel m;
  m.dims = dims;
  std::vector<float> emb(static_cast<std::size_t>(dims.d) * dims.embed);
  for (auto& e : emb)
    e = static_cast<float>((rng.uniform() * 2.0 - 1.0) * 0.1);
  m.embedding = Tensor::from_data({dims.d, dims.embed}, std::move(emb), true);

  auto widths = layer_widths(dims);
  int in = dims.n * dims.embed;
  for (int w : widths) {
    m.enc.emplace_back(in, w, rng);
    m.enc_bn.emplace_back(w);
    in = w;
  }
  m.mu_head = Linear(in, dims.m, rng);
  m.logvar_head = Linear(in, dims.m, rng);

  in = dims.m;
  for (int w : widths) {
    m.dec.emplace_back(in, w, rng);
    m.dec_bn.emplace_back(w);
    in = w;
  }
  m.dec_out = Linear(in, dims.n * dims.d, rng);
  return m;
}

std::vector<Tensor> VaeModel::parameters() const {
  std::vector<Tensor> out{embedding};
  auto push = [&](const std::vector<Tensor>& ps) {
    out.insert(out.end(), ps.begin(), ps.end());
  };
  for (std::size_t i = 0; i < enc.size(); ++i) {
    push(enc[i].parameters());
    push(enc_bn[i].parameters());
  }
  push(mu_head.parameters());
  push(logvar_head.parameters());
  for (std::size_t i = 0; i < dec.size(); ++i) {
    push(dec[i].parameters());
    push(dec_bn[i].parameters());
  }
  push(dec_out.parameters());
  return out;
}

std::pair<Tensor, Tensor> VaeModel::encode_tensor(
    const std::vector<selfies::SelfiesString>& batch, bool train) const {
  const int b = static_cast<int>(batch.size());
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(b) * dims.n);
  for (const auto& x : batch) {
    if (static_cast<int>(x.size()) != dims.n)
      throw std::invalid_argument("string length does not match model n");
    ids.insert(ids.end(), x.begin(), x.end());
  }
  Tensor h = embedding_lookup(embedding, ids);        // [b*n, embed]
  h = reshape(h, {b, dims.n * dims.embed});
  for (std::size_t i = 0; i < enc.size(); ++i) {
    h = relu(enc_bn[i].forward(enc[i].forward(h), train));
  }
  return {mu_head.forward(h), logvar_head.forward(h)};
}

Tensor VaeModel::decode_tensor(const Tensor& z, bool train) const {
  if (z.shape().size() != 2 || z.dim(1) != dims.m)
    throw std::invalid_argument("latent width does not match model m");
  for (float v : z.data()) {
    if (std::isnan(v)) throw std::invalid_argument("NaN latent input");
  }
  Tensor h = z;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    h = relu(dec_bn[i].forward(dec[i].forward(h), train));
  }
  h = dec_out.forward(h);                              // [b, n*d]
  h = reshape(h, {z.dim(0) * dims.n, dims.d});
  return rowwise_softmax(h);
}

Tensor elbo_loss(const VaeModel& model,
                 const std::vector<selfies::SelfiesString>& batch,
                 const VaeTrainConfig& config, Rng& rng) {
  const int b = static_cast<int>(batch.size());
  auto [mu, logvar] = model.encode_tensor(batch, true);
  Tensor sigma = exp(scale(logvar, 0.5f));
  Tensor z = gaussian_sample(mu, sigma, rng);
  Tensor probs = model.decode_tensor(z, true);

  std::vector<int> targets;
  targets.reserve(static_cast<std::size_t>(b) * model.dims.n);
  for (const auto& x : batch) targets.insert(targets.end(), x.begin(), x.end());

  Tensor nll = one_hot_nll(probs, targets);
  Tensor kl = kl_diag_gaussian(mu, logvar);
  const float inv_b = 1.0f / static_cast<float>(b);
  return add(scale(nll, config.recon_weight * inv_b),
             scale(kl, config.kl_weight * inv_b));
}

VaeModel train_vae(const std::vector<selfies::SelfiesString>& dataset,
                   const VaeTrainConfig& config, const VaeDims& dims) {
  if (dataset.empty()) throw std::invalid_argument("empty training dataset");
  VaeModel model = VaeModel::init(dims, config.seed);
  auto params = model.parameters();
  AdamState adam(config.lr);
  Rng sample_rng(config.seed ^ 0x5eed5eedull);

  std::vector<std::size_t> index(dataset.size());
  std::iota(index.begin(), index.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(config.seed + 7919ull * static_cast<std::uint64_t>(epoch + 1));
    for (std::size_t i = index.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(static_cast<int>(i)));
      std::swap(index[i - 1], index[j]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    const int bs = std::min<int>(config.batch_size,
                                 static_cast<int>(dataset.size()));
    for (std::size_t start = 0; start + bs <= dataset.size(); start += bs) {
      std::vector<selfies::SelfiesString> batch;
      batch.reserve(bs);
      for (int k = 0; k < bs; ++k) batch.push_back(dataset[index[start + k]]);
      for (Tensor& p : params) p.zero_grad();
      Tensor loss = elbo_loss(model, batch, config, sample_rng);
      backward(loss);
      adam_step(params, adam);
      epoch_loss += loss.item();
      ++batches;
    }
    if (config.epoch_log) config.epoch_log(epoch, epoch_loss / batches);
  }
  return model;
}

std::pair<LatentVector, LatentVector> encode(const VaeModel& model,
                                             const selfies::SelfiesString& x) {
  auto [mu, logvar] = model.encode_tensor({x}, false);
  LatentVector m(mu.data().begin(), mu.data().end());
  LatentVector lv(logvar.data().begin(), logvar.data().end());
  return {std::move(m), std::move(lv)};
}

SymbolDistribution decode(const VaeModel& model, const LatentVector& z) {
  if (static_cast<int>(z.size()) != model.dims.m)
    throw std::invalid_argument("latent width does not match model m");
  Tensor zt = Tensor::from_data({1, model.dims.m},
                                std::vector<float>(z.begin(), z.end()));
  Tensor probs = model.decode_tensor(zt, false);
  SymbolDistribution y;
  y.n = model.dims.n;
  y.d = model.dims.d;
  y.probs.assign(probs.data().begin(), probs.data().end());
  return y;
}

selfies::SelfiesString argmax_symbols(const SymbolDistribution& y) {
  selfies::SelfiesString s(y.n);
  for (int i = 0; i < y.n; ++i) {
    int best = 0;
    float best_p = y.at(i, 0);
    for (int j = 1; j < y.d; ++j) {
      if (y.at(i, j) > best_p) {
        best_p = y.at(i, j);
        best = j;
      }
    }
    s[i] = best;
  }
  return s;
}

std::vector<MolGraph> sample_random(const VaeModel& model, int k,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MolGraph> out;
  out.reserve(k);
  const int chunk = 256;
  for (int done = 0; done < k; done += chunk) {
    const int b = std::min(chunk, k - done);
    std::vector<float> zs(static_cast<std::size_t>(b) * model.dims.m);
    for (auto& v : zs) v = static_cast<float>(rng.normal());
    Tensor z = Tensor::from_data({b, model.dims.m}, std::move(zs));
    Tensor probs = model.decode_tensor(z, false);
    for (int r = 0; r < b; ++r) {
      SymbolDistribution y;
      y.n = model.dims.n;
      y.d = model.dims.d;
      auto begin = probs.data().begin() +
                   static_cast<std::ptrdiff_t>(r) * model.dims.n * model.dims.d;
      y.probs.assign(begin, begin + model.dims.n * model.dims.d);
      out.push_back(selfies::decode(argmax_symbols(y)));
    }
  }
  return out;
}

double reconstruction_accuracy(const VaeModel& model,
                               const std::vector<selfies::SelfiesString>& xs) {
  if (xs.empty()) return 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  const int chunk = 256;
  for (std::size_t start = 0; start < xs.size(); start += chunk) {
    std::vector<selfies::SelfiesString> batch(
        xs.begin() + start,
        xs.begin() + std::min(xs.size(), start + chunk));
    auto [mu, logvar] = model.encode_tensor(batch, false);
    Tensor probs = model.decode_tensor(mu, false);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      for (int i = 0; i < model.dims.n; ++i) {
        const float* row = probs.data().data() +
                           (r * model.dims.n + i) * model.dims.d;
        int best = 0;
        for (int j = 1; j < model.dims.d; ++j) {
          if (row[j] > row[best]) best = j;
        }
        correct += best == batch[r][i];
        ++total;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Checkpoints.
// ---------------------------------------------------------------------------

namespace {

void push_block(Checkpoint& ck, const std::string& name, const Tensor& t) {
  ck.blocks.push_back({name, {t.data().begin(), t.data().end()}});
}

void push_vec(Checkpoint& ck, const std::string& name,
              const std::vector<float>& v) {
  ck.blocks.push_back({name, v});
}

void load_into(const Checkpoint& ck, const std::string& name, Tensor& t) {
  const auto& v = ck.block(name);
  if (static_cast<int>(v.size()) != t.size())
    throw std::runtime_error("checkpoint shape mismatch for " + name);
  std::copy(v.begin(), v.end(), t.data().begin());
}

void load_vec(const Checkpoint& ck, const std::string& name,
              std::vector<float>& v) {
  const auto& src = ck.block(name);
  if (src.size() != v.size())
    throw std::runtime_error("checkpoint shape mismatch for " + name);
  v = src;
}

}  // namespace

void save_vae(const VaeModel& model, const std::string& path) {
  Checkpoint ck;
  const VaeDims& d = model.dims;
  ck.header = {0 /* kind: vae */, d.n, d.d, d.m, d.hidden, d.embed};
  push_block(ck, "embedding", model.embedding);
  for (std::size_t i = 0; i < model.enc.size(); ++i) {
    std::string p = "enc" + std::to_string(i);
    push_block(ck, p + ".w", model.enc[i].w);
    push_block(ck, p + ".b", model.enc[i].b);
    push_block(ck, p + ".bn.gamma", model.enc_bn[i].gamma);
    push_block(ck, p + ".bn.beta", model.enc_bn[i].beta);
    push_vec(ck, p + ".bn.rmean", model.enc_bn[i].running_mean);
    push_vec(ck, p + ".bn.rvar", model.enc_bn[i].running_var);
  }
  push_block(ck, "mu.w", model.mu_head.w);
  push_block(ck, "mu.b", model.mu_head.b);
  push_block(ck, "logvar.w", model.logvar_head.w);
  push_block(ck, "logvar.b", model.logvar_head.b);
  for (std::size_t i = 0; i < model.dec.size(); ++i) {
    std::string p = "dec" + std::to_string(i);
    push_block(ck, p + ".w", model.dec[i].w);
    push_block(ck, p + ".b", model.dec[i].b);
    push_block(ck, p + ".bn.gamma", model.dec_bn[i].gamma);
    push_block(ck, p + ".bn.beta", model.dec_bn[i].beta);
    push_vec(ck, p + ".bn.rmean", model.dec_bn[i].running_mean);
    push_vec(ck, p + ".bn.rvar", model.dec_bn[i].running_var);
  }
  push_block(ck, "out.w", model.dec_out.w);
  push_block(ck, "out.b", model.dec_out.b);
  save_checkpoint(path, ck);
}

VaeModel load_vae(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.header.size() != 6 || ck.header[0] != 0)
    throw std::runtime_error("not a model checkpoint: " + path);
  VaeDims d;
  d.n = ck.header[1];
  d.d = ck.header[2];
  d.m = ck.header[3];
  d.hidden = ck.header[4];
  d.embed = ck.header[5];
  if (d.d != selfies::Alphabet::kSize)
    throw std::runtime_error("checkpoint alphabet size mismatch");
  VaeModel model = VaeModel::init(d, 0);
  load_into(ck, "embedding", model.embedding);
  for (std::size_t i = 0; i < model.enc.size(); ++i) {
    std::string p = "enc" + std::to_string(i);
    load_into(ck, p + ".w", model.enc[i].w);
    load_into(ck, p + ".b", model.enc[i].b);
    load_into(ck, p + ".bn.gamma", model.enc_bn[i].gamma);
    load_into(ck, p + ".bn.beta", model.enc_bn[i].beta);
    load_vec(ck, p + ".bn.rmean", model.enc_bn[i].running_mean);
    load_vec(ck, p + ".bn.rvar", model.enc_bn[i].running_var);
  }
  load_into(ck, "mu.w", model.mu_head.w);
  load_into(ck, "mu.b", model.mu_head.b);
  load_into(ck, "logvar.w", model.logvar_head.w);
  load_into(ck, "logvar.b", model.logvar_head.b);
  for (std::size_t i = 0; i < model.dec.size(); ++i) {
    std::string p = "dec" + std::to_string(i);
    load_into(ck, p + ".w", model.dec[i].w);
    load_into(ck, p + ".b", model.dec[i].b);
    load_into(ck, p + ".bn.gamma", model.dec_bn[i].gamma);
    load_into(ck, p + ".bn.beta", model.dec_bn[i].beta);
    load_vec(ck, p + ".bn.rmean", model.dec_bn[i].running_mean);
    load_vec(ck, p + ".bn.rvar", model.dec_bn[i].running_var);
  }
  load_into(ck, "out.w", model.dec_out.w);
  load_into(ck, "out.b", model.dec_out.b);
  return model;
}

}  // namespace limo
