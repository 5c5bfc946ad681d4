// SPDX-License-Identifier: Apache-2.0
#include "avsyn/vae.hpp"

#include <algorithm>
#include <numeric>

#include "avsyn/error.hpp"

namespace avsyn {

std::vector<EpochStats> train_vae(VaeNet<float>& vae, const MatF& dataset, ReconKind kind,
                                  int alphabet, const TrainConfig& config,
                                  std::string_view rng_tag) {
  const Eigen::Index n = dataset.cols();
  if (n == 0) throw ConfigError("training dataset is empty");
  if (config.epochs <= 0) throw ConfigError("epochs must be positive");
  if (config.batch_size <= 0) throw ConfigError("batch_size must be positive");

  Rng run = Rng(config.seed).split(rng_tag);
  Rng shuffle_rng = run.split("shuffle");
  Rng eps_rng = run.split("eps");

  AdamState<float> enc_opt = make_adam(vae.encoder, AdamConfig<float>{config.learning_rate});
  AdamState<float> dec_opt = make_adam(vae.decoder, AdamConfig<float>{config.learning_rate});

  const Eigen::Index batches_per_epoch =
      (n + config.batch_size - 1) / config.batch_size;
  const long total_steps = static_cast<long>(batches_per_epoch) * config.epochs;
  const long warmup_steps =
      static_cast<long>(static_cast<double>(total_steps) * config.kl_warmup_frac);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));

  std::vector<EpochStats> history;
  history.reserve(static_cast<std::size_t>(config.epochs));
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochStats stats;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index bsize = std::min<Eigen::Index>(config.batch_size, n - start);
      MatF batch(dataset.rows(), bsize);
      for (Eigen::Index b = 0; b < bsize; ++b)
        batch.col(b) = dataset.col(order[static_cast<std::size_t>(start + b)]);
      MatF eps(vae.latent_dim, bsize);
      for (Eigen::Index b = 0; b < bsize; ++b)
        for (int i = 0; i < vae.latent_dim; ++i)
          eps(i, b) = static_cast<float>(eps_rng.normal());

      const double ramp =
          warmup_steps > 0 ? std::min(1.0, static_cast<double>(step) /
                                               static_cast<double>(warmup_steps))
                           : 1.0;
      const double beta = static_cast<double>(config.beta) * ramp;

      NetGrads<float> enc_grads, dec_grads;
      const ElboTerms terms =
          elbo_backward(vae, batch, eps, beta, kind, alphabet, &enc_grads, &dec_grads);
      adam_step(enc_opt, vae.encoder, enc_grads);
      adam_step(dec_opt, vae.decoder, dec_grads);

      const double weight = static_cast<double>(bsize) / static_cast<double>(n);
      stats.total += terms.total * weight;
      stats.recon += terms.recon * weight;
      stats.kl += terms.kl * weight;
      ++step;
    }
    history.push_back(stats);
  }
  return history;
}

namespace {

VaeNet<float> make_core(int input_dim, int latent_dim, int hidden_dim,
                        Activation decoder_output_act, Rng& rng) {
  if (latent_dim <= 0 || hidden_dim <= 0) throw ConfigError("model dims must be positive");
  VaeNet<float> core;
  core.latent_dim = latent_dim;
  core.encoder = make_dense_net<float>({input_dim, hidden_dim, 2 * latent_dim},
                                       {Activation::kTanh, Activation::kIdentity});
  core.decoder = make_dense_net<float>({latent_dim, hidden_dim, input_dim},
                                       {Activation::kTanh, decoder_output_act});
  glorot_init(core.encoder, rng);
  glorot_init(core.decoder, rng);
  core.encoder.layers.back().weight.setZero();
  core.encoder.layers.back().bias.setZero();
  return core;
}

MatF stack_columns(const std::vector<VecF>& columns) {
  if (columns.empty()) throw ConfigError("training dataset is empty");
  MatF out(columns.front().size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].size() != out.rows()) throw ShapeError("dataset columns differ in length");
    out.col(static_cast<Eigen::Index>(i)) = columns[i];
  }
  return out;
}

}  // namespace

ImageVae make_image_vae(int latent_dim, int hidden_dim, int bars, Rng rng) {
  if (bars <= 0) throw ConfigError("bars must be positive");
  ImageVae vae;
  vae.bars = bars;
  Rng init = rng.split("image-vae-init");
  vae.core = make_core(kImageChannels, latent_dim, hidden_dim, Activation::kSigmoid, init);
  // Channels live in [0, 1]; center them so first-layer gradients decorrelate.
  vae.core.input_shift = 0.5f;
  return vae;
}

MelodyVae make_melody_vae(int latent_dim, int hidden_dim, int bars, Rng rng) {
  if (bars <= 0) throw ConfigError("bars must be positive");
  MelodyVae vae;
  vae.bars = bars;
  const int input_dim = bars * kStepsPerBar * kAlphabetSize;
  Rng init = rng.split("melody-vae-init");
  vae.core = make_core(input_dim, latent_dim, hidden_dim, Activation::kIdentity, init);
  return vae;
}

VecF melody_to_onehot(const TokenGrid& grid) {
  const int steps = grid.step_count();
  if (static_cast<int>(grid.steps.size()) != steps)
    throw ShapeError("grid step count does not match bars");
  VecF out = VecF::Zero(static_cast<Eigen::Index>(steps) * kAlphabetSize);
  for (int s = 0; s < steps; ++s)
    out[static_cast<Eigen::Index>(s) * kAlphabetSize + grid.steps[static_cast<std::size_t>(s)].index()] = 1.0f;
  return out;
}

TokenGrid logits_to_grid(const VecF& logits, int bars) {
  const int steps = bars * kStepsPerBar;
  if (logits.size() != static_cast<Eigen::Index>(steps) * kAlphabetSize)
    throw ShapeError("logits length does not match bar count");
  std::vector<Token> tokens;
  tokens.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    const Eigen::Index off = static_cast<Eigen::Index>(s) * kAlphabetSize;
    int best = 0;
    float best_value = logits[off];
    for (int i = 1; i < kAlphabetSize; ++i)
      if (logits[off + i] > best_value) {
        best_value = logits[off + i];
        best = i;
      }
    tokens.push_back(Token::from_index(best));
  }
  return normalize_tokens(bars, std::move(tokens));
}

GaussianLatent encode_image(const ImageVae& vae, const ImageRgb64& image) {
  if (!is_valid_image(image)) throw DomainError("image channels must lie in [0, 1]");
  return vae_encode(vae.core, image.rgb);
}

ImageRgb64 decode_image(const ImageVae& vae, const VecF& z) {
  ImageRgb64 image;
  image.rgb = vae_decode(vae.core, z);
  // Sigmoid output already lies in (0, 1); clamp only to absorb rounding.
  image.rgb = image.rgb.cwiseMax(0.0f).cwiseMin(1.0f);
  return image;
}

GaussianLatent encode_melody(const MelodyVae& vae, const TokenGrid& grid) {
  if (grid.bars != vae.bars) throw ShapeError("melody bar count does not match model");
  return vae_encode(vae.core, melody_to_onehot(grid));
}

TokenGrid decode_melody(const MelodyVae& vae, const VecF& z) {
  return logits_to_grid(vae_decode(vae.core, z), vae.bars);
}

std::vector<EpochStats> train_image_vae(ImageVae& vae, const std::vector<ImageRgb64>& images,
                                        const TrainConfig& config) {
  std::vector<VecF> columns;
  columns.reserve(images.size());
  for (const auto& image : images) {
    if (!is_valid_image(image)) throw DomainError("image channels must lie in [0, 1]");
    columns.push_back(image.rgb);
  }
  const MatF dataset = stack_columns(columns);
  auto history = train_vae(vae.core, dataset, ReconKind::kSumSquared, 0, config, "image-vae");
  vae.epochs_trained += config.epochs;
  vae.seed = config.seed;
  return history;
}

std::vector<EpochStats> train_melody_vae(MelodyVae& vae, const std::vector<TokenGrid>& melodies,
                                         const TrainConfig& config) {
  std::vector<VecF> columns;
  columns.reserve(melodies.size());
  for (const auto& grid : melodies) {
    if (grid.bars != vae.bars) throw ShapeError("melody bar count does not match model");
    columns.push_back(melody_to_onehot(grid));
  }
  const MatF dataset = stack_columns(columns);
  auto history =
      train_vae(vae.core, dataset, ReconKind::kStepCrossEntropy, kAlphabetSize, config,
                "melody-vae");
  vae.epochs_trained += config.epochs;
  vae.seed = config.seed;
  return history;
}

namespace {

VecF draw_standard_normal(int dim, Rng& rng) {
  VecF z(dim);
  for (int i = 0; i < dim; ++i) z[i] = static_cast<float>(rng.normal());
  return z;
}

}  // namespace

std::vector<ImageRgb64> sample_image_prior(const ImageVae& vae, int count, Rng rng) {
  if (vae.epochs_trained <= 0) throw ContractError("image model has not been trained");
  if (count < 0) throw ConfigError("sample count must be nonnegative");
  Rng stream = rng.split("image-prior");
  std::vector<ImageRgb64> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(decode_image(vae, draw_standard_normal(vae.core.latent_dim, stream)));
  return out;
}

std::vector<TokenGrid> sample_melody_prior(const MelodyVae& vae, int count, Rng rng) {
  if (vae.epochs_trained <= 0) throw ContractError("melody model has not been trained");
  if (count < 0) throw ConfigError("sample count must be nonnegative");
  Rng stream = rng.split("melody-prior");
  std::vector<TokenGrid> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(decode_melody(vae, draw_standard_normal(vae.core.latent_dim, stream)));
  return out;
}

}  // namespace avsyn
