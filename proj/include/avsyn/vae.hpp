// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "avsyn/image.hpp"
#include "avsyn/melody.hpp"
#include "avsyn/nn.hpp"

namespace avsyn {

// Reconstruction term of the objective: summed squared error over channels
// (images) or summed per-step cross entropy (melodies). Both are means over
// the batch.
enum class ReconKind { kSumSquared, kStepCrossEntropy };

struct ElboTerms {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

// Encoder emits [mu; logvar] stacked; decoder maps a latent back to sample
// space. The scalar type is a template so gradient checks can run in double
// while training stays in float. `input_shift` centers encoder inputs; with
// all-positive samples the per-row gradient signs otherwise correlate and a
// few Adam steps drift the first layer into tanh saturation.
template <class S>
struct VaeNet {
  DenseNet<S> encoder;
  DenseNet<S> decoder;
  int latent_dim = 0;
  S input_shift = S(0);
};

template <class S>
Gaussian<S> vae_encode(const VaeNet<S>& vae, const Vec<S>& x) {
  const Vec<S> heads = forward(vae.encoder, Vec<S>(x.array() - vae.input_shift));
  return make_gaussian(Vec<S>(heads.head(vae.latent_dim)), Vec<S>(heads.tail(vae.latent_dim)));
}

template <class S>
Vec<S> vae_decode(const VaeNet<S>& vae, const Vec<S>& z) {
  if (z.size() != vae.latent_dim) throw ShapeError("vae_decode: latent length mismatch");
  return forward(vae.decoder, z);
}

namespace detail {

template <class S>
int block_argmax(const Mat<S>& m, Eigen::Index col, Eigen::Index offset, int alphabet) {
  int best = 0;
  S best_value = m(offset, col);
  for (int i = 1; i < alphabet; ++i) {
    const S v = m(offset + i, col);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// One joint forward/backward pass of the beta-weighted objective on a batch
// (columns are samples; reconstruction target is the input itself). `eps` is
// the frozen reparameterization noise, one column per sample. Gradient
// outputs are optional; pass nullptr for evaluation only.
template <class S>
ElboTerms elbo_backward(const VaeNet<S>& vae, const Mat<S>& batch, const Mat<S>& eps, double beta,
                        ReconKind kind, int alphabet, NetGrads<S>* encoder_grads,
                        NetGrads<S>* decoder_grads) {
  const Eigen::Index batch_size = batch.cols();
  if (batch_size == 0) throw ShapeError("elbo: empty batch");
  if (eps.rows() != vae.latent_dim || eps.cols() != batch_size)
    throw ShapeError("elbo: eps shape mismatch");
  if (kind == ReconKind::kStepCrossEntropy &&
      (alphabet <= 0 || batch.rows() % alphabet != 0))
    throw ShapeError("elbo: batch rows do not split into alphabet blocks");

  ForwardCache<S> enc_cache;
  const Mat<S> heads =
      forward(vae.encoder, Mat<S>(batch.array() - vae.input_shift), &enc_cache);
  const Mat<S> mu = heads.topRows(vae.latent_dim);
  const Mat<S> logvar_raw = heads.bottomRows(vae.latent_dim);
  const Mat<S> logvar =
      logvar_raw.array().min(S(kLogVarClampMax)).max(S(kLogVarClampMin)).matrix();
  const Mat<S> sigma = (logvar.array() / S(2)).exp().matrix();
  const Mat<S> z = mu + sigma.cwiseProduct(eps);

  ForwardCache<S> dec_cache;
  const Mat<S> output = forward(vae.decoder, z, &dec_cache);

  ElboTerms terms;
  Mat<S> output_grad(output.rows(), batch_size);
  const S inv_batch = S(1) / static_cast<S>(batch_size);

  if (kind == ReconKind::kSumSquared) {
    for (Eigen::Index b = 0; b < batch_size; ++b)
      for (Eigen::Index j = 0; j < output.rows(); ++j) {
        const double d = static_cast<double>(output(j, b)) - static_cast<double>(batch(j, b));
        terms.recon += d * d;
      }
    terms.recon /= static_cast<double>(batch_size);
    output_grad = S(2) * inv_batch * (output - batch);
  } else {
    const int steps = static_cast<int>(batch.rows()) / alphabet;
    for (Eigen::Index b = 0; b < batch_size; ++b)
      for (int s = 0; s < steps; ++s) {
        const Eigen::Index off = static_cast<Eigen::Index>(s) * alphabet;
        const int target = detail::block_argmax(batch, b, off, alphabet);
        const Vec<S> logits = output.col(b).segment(off, alphabet);
        terms.recon += softmax_cross_entropy(logits, target);
        Vec<S> p = softmax(logits);
        p[target] -= S(1);
        output_grad.col(b).segment(off, alphabet) = p * inv_batch;
      }
    terms.recon /= static_cast<double>(batch_size);
  }

  for (Eigen::Index b = 0; b < batch_size; ++b)
    for (Eigen::Index i = 0; i < vae.latent_dim; ++i) {
      const double m = static_cast<double>(mu(i, b));
      const double lv = static_cast<double>(logvar(i, b));
      terms.kl += 0.5 * (m * m + std::exp(lv) - lv - 1.0);
    }
  terms.kl /= static_cast<double>(batch_size);
  terms.total = terms.recon + beta * terms.kl;

  if (!encoder_grads && !decoder_grads) return terms;

  NetGrads<S> dec = backward(vae.decoder, dec_cache, output_grad);
  const Mat<S>& z_grad = dec.input;

  const S beta_s = static_cast<S>(beta);
  Mat<S> mu_grad = z_grad + beta_s * inv_batch * mu;
  Mat<S> logvar_grad =
      z_grad.cwiseProduct(eps).cwiseProduct(sigma) * S(0.5) +
      beta_s * inv_batch * S(0.5) * (logvar.array().exp() - S(1)).matrix();
  // The clamp is flat outside its range: no gradient flows back there.
  const Mat<S> in_range = ((logvar_raw.array() >= S(kLogVarClampMin)) &&
                           (logvar_raw.array() <= S(kLogVarClampMax)))
                              .template cast<S>()
                              .matrix();
  logvar_grad = logvar_grad.cwiseProduct(in_range);

  Mat<S> heads_grad(heads.rows(), batch_size);
  heads_grad.topRows(vae.latent_dim) = mu_grad;
  heads_grad.bottomRows(vae.latent_dim) = logvar_grad;
  NetGrads<S> enc = backward(vae.encoder, enc_cache, heads_grad);

  if (encoder_grads) *encoder_grads = std::move(enc);
  if (decoder_grads) *decoder_grads = std::move(dec);
  return terms;
}

template <class S>
ElboTerms elbo_loss(const VaeNet<S>& vae, const Mat<S>& batch, const Mat<S>& eps, double beta,
                    ReconKind kind, int alphabet = 0) {
  return elbo_backward<S>(vae, batch, eps, beta, kind, alphabet, nullptr, nullptr);
}

// Central-difference check of the full objective (through the frozen-noise
// reparameterization) over every encoder and decoder parameter.
template <class S>
double vae_grad_check(VaeNet<S>& vae, const Mat<S>& batch, const Mat<S>& eps, double beta,
                      ReconKind kind, int alphabet = 0, S h = S(1e-4)) {
  NetGrads<S> enc_grads, dec_grads;
  elbo_backward(vae, batch, eps, beta, kind, alphabet, &enc_grads, &dec_grads);

  double worst = 0.0;
  auto probe = [&](S& param, double analytic) {
    const S saved = param;
    param = saved + h;
    const double up = elbo_loss(vae, batch, eps, beta, kind, alphabet).total;
    param = saved - h;
    const double down = elbo_loss(vae, batch, eps, beta, kind, alphabet).total;
    param = saved;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2.0 * static_cast<double>(h))));
  };
  auto probe_net = [&](DenseNet<S>& net, const NetGrads<S>& grads) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      auto& layer = net.layers[k];
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
          probe(layer.weight(r, c), static_cast<double>(grads.layers[k].weight(r, c)));
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
        probe(layer.bias[i], static_cast<double>(grads.layers[k].bias[i]));
    }
  };
  probe_net(vae.encoder, enc_grads);
  probe_net(vae.decoder, dec_grads);
  return worst;
}

// ---------------------------------------------------------------------------
// Trained models (float)
// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  std::uint64_t seed = 7;
  float beta = 1.0f;
  float kl_warmup_frac = 0.2f;
  float learning_rate = 1e-3f;
};

struct EpochStats {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

// Shuffled minibatch Adam on the beta-VAE objective; beta ramps linearly from
// 0 over the first kl_warmup_frac of all steps. Deterministic given the
// config seed and dataset column order.
std::vector<EpochStats> train_vae(VaeNet<float>& vae, const MatF& dataset, ReconKind kind,
                                  int alphabet, const TrainConfig& config,
                                  std::string_view rng_tag);

struct ImageVae {
  VaeNet<float> core;
  int bars = 2;  // run bookkeeping carried into checkpoints
  int epochs_trained = 0;
  std::uint64_t seed = 0;
};

struct MelodyVae {
  VaeNet<float> core;
  int bars = 2;
  int epochs_trained = 0;
  std::uint64_t seed = 0;
};

inline constexpr int kDefaultLatentDim = 32;
inline constexpr int kDefaultHiddenDim = 512;

// Fresh models: Glorot trunks, zero-initialized encoder heads so the initial
// posterior equals the prior.
ImageVae make_image_vae(int latent_dim, int hidden_dim, int bars, Rng rng);
MelodyVae make_melody_vae(int latent_dim, int hidden_dim, int bars, Rng rng);

VecF melody_to_onehot(const TokenGrid& grid);
TokenGrid logits_to_grid(const VecF& logits, int bars);

GaussianLatent encode_image(const ImageVae& vae, const ImageRgb64& image);
ImageRgb64 decode_image(const ImageVae& vae, const VecF& z);
GaussianLatent encode_melody(const MelodyVae& vae, const TokenGrid& grid);
TokenGrid decode_melody(const MelodyVae& vae, const VecF& z);

std::vector<EpochStats> train_image_vae(ImageVae& vae, const std::vector<ImageRgb64>& images,
                                        const TrainConfig& config);
std::vector<EpochStats> train_melody_vae(MelodyVae& vae, const std::vector<TokenGrid>& melodies,
                                         const TrainConfig& config);

// Decode z ~ N(0, I). Requires a trained model.
std::vector<ImageRgb64> sample_image_prior(const ImageVae& vae, int count, Rng rng);
std::vector<TokenGrid> sample_melody_prior(const MelodyVae& vae, int count, Rng rng);

}  // namespace avsyn
