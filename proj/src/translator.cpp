// SPDX-License-Identifier: Apache-2.0
#include "avsyn/translator.hpp"

#include <algorithm>
#include <numeric>

#include "avsyn/codec.hpp"
#include "avsyn/error.hpp"

namespace avsyn {

Translator make_translator(int d_image, int d_melody, int bars, Rng rng) {
  if (d_image <= 0 || d_melody <= 0) throw ConfigError("latent dims must be positive");
  if (bars <= 0) throw ConfigError("bars must be positive");
  Translator t;
  t.bars = bars;
  t.i2m = make_dense_net<float>({d_image, 128, 128, d_melody},
                         {Activation::kTanh, Activation::kTanh, Activation::kIdentity});
  t.m2i = make_dense_net<float>({d_melody, 128, 128, d_image},
                         {Activation::kTanh, Activation::kTanh, Activation::kIdentity});
  Rng init_i2m = rng.split("translator-i2m-init");
  Rng init_m2i = rng.split("translator-m2i-init");
  glorot_init(t.i2m, init_i2m);
  glorot_init(t.m2i, init_m2i);
  return t;
}

void check_compatible(const Models& models) {
  const int d_img = models.image_vae.core.latent_dim;
  const int d_mel = models.melody_vae.core.latent_dim;
  if (translator_d_image(models.translator) != d_img)
    throw ContractError("translator d_image=" + std::to_string(translator_d_image(models.translator)) +
                        " but image checkpoint latent_dim=" + std::to_string(d_img));
  if (translator_d_melody(models.translator) != d_mel)
    throw ContractError("translator d_melody=" +
                        std::to_string(translator_d_melody(models.translator)) +
                        " but melody checkpoint latent_dim=" + std::to_string(d_mel));
  if (models.translator.bars != models.melody_vae.bars)
    throw ContractError("translator bars=" + std::to_string(models.translator.bars) +
                        " but melody checkpoint bars=" + std::to_string(models.melody_vae.bars));
  if (models.image_vae.bars != models.melody_vae.bars)
    throw ContractError("image checkpoint bars=" + std::to_string(models.image_vae.bars) +
                        " but melody checkpoint bars=" + std::to_string(models.melody_vae.bars));
}

std::vector<LatentPair> make_synthetic_pairs(const ImageVae& image_vae,
                                             const MelodyVae& melody_vae, int count, Rng rng) {
  if (image_vae.epochs_trained <= 0) throw ContractError("image model has not been trained");
  if (count < 0) throw ConfigError("pair count must be nonnegative");
  const std::vector<TokenGrid> melodies = sample_melody_prior(melody_vae, count, rng);
  std::vector<LatentPair> pairs;
  pairs.reserve(melodies.size());
  for (const TokenGrid& grid : melodies) {
    LatentPair pair;
    pair.z_image = encode_image(image_vae, melody_to_image(grid)).mu;
    pair.z_melody = encode_melody(melody_vae, grid).mu;
    pair.origin = PairOrigin::kSynthetic;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

namespace {

// One shuffled pass per epoch updates both directions on the same batches.
std::vector<TranslatorEpochStats> train_pairs(Translator& translator,
                                              const std::vector<LatentPair>& pairs,
                                              const TranslatorTrainConfig& config,
                                              std::string_view rng_tag) {
  if (pairs.empty()) throw ConfigError("translator training needs at least one pair");
  if (config.epochs <= 0) throw ConfigError("epochs must be positive");
  if (config.batch_size <= 0) throw ConfigError("batch_size must be positive");

  const Eigen::Index d_img = pairs.front().z_image.size();
  const Eigen::Index d_mel = pairs.front().z_melody.size();
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  MatF images(d_img, n);
  MatF melodies(d_mel, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LatentPair& p = pairs[static_cast<std::size_t>(i)];
    if (p.z_image.size() != d_img || p.z_melody.size() != d_mel)
      throw ShapeError("latent pair dims differ within the set");
    images.col(i) = p.z_image;
    melodies.col(i) = p.z_melody;
  }

  Rng shuffle_rng = Rng(config.seed).split(rng_tag).split("shuffle");
  AdamState<float> i2m_opt = make_adam(translator.i2m, AdamConfig<float>{config.learning_rate});
  AdamState<float> m2i_opt = make_adam(translator.m2i, AdamConfig<float>{config.learning_rate});

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));

  std::vector<TranslatorEpochStats> history;
  history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    TranslatorEpochStats stats;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index bsize = std::min<Eigen::Index>(config.batch_size, n - start);
      MatF x_img(d_img, bsize);
      MatF x_mel(d_mel, bsize);
      for (Eigen::Index b = 0; b < bsize; ++b) {
        const Eigen::Index j = order[static_cast<std::size_t>(start + b)];
        x_img.col(b) = images.col(j);
        x_mel.col(b) = melodies.col(j);
      }
      const double weight = static_cast<double>(bsize) / static_cast<double>(n);

      ForwardCache<float> cache;
      MatF y = forward(translator.i2m, x_img, &cache);
      stats.i2m_mse += static_cast<double>(mse(y, x_mel)) * weight;
      MatF grad = 2.0f / static_cast<float>(y.size()) * (y - x_mel);
      NetGrads<float> grads = backward(translator.i2m, cache, grad);
      adam_step(i2m_opt, translator.i2m, grads);

      y = forward(translator.m2i, x_mel, &cache);
      stats.m2i_mse += static_cast<double>(mse(y, x_img)) * weight;
      grad = 2.0f / static_cast<float>(y.size()) * (y - x_img);
      grads = backward(translator.m2i, cache, grad);
      adam_step(m2i_opt, translator.m2i, grads);
    }
    history.push_back(stats);
  }
  return history;
}

}  // namespace

std::vector<TranslatorEpochStats> train_stage1(Translator& translator,
                                               const std::vector<LatentPair>& pairs,
                                               const TranslatorTrainConfig& config) {
  auto history = train_pairs(translator, pairs, config, "translator-stage1");
  translator.stage = std::max(translator.stage, 1);
  translator.seed = config.seed;
  return history;
}

std::vector<LatentPair> make_tile_pairs(const Translator& translator, const ImageVae& image_vae,
                                        const MelodyVae& melody_vae,
                                        const std::vector<ImageRgb64>& tiles) {
  if (translator.stage < 1) throw ContractError("translator has not completed stage 1");
  std::vector<LatentPair> pairs;
  pairs.reserve(tiles.size());
  for (const ImageRgb64& tile : tiles) {
    LatentPair pair;
    pair.z_image = encode_image(image_vae, tile).mu;
    const TokenGrid melody =
        decode_melody(melody_vae, translate_latent_i2m(translator, pair.z_image));
    pair.z_melody = encode_melody(melody_vae, melody).mu;
    pair.origin = PairOrigin::kTile;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<TranslatorEpochStats> refine_stage2(Translator& translator,
                                                const std::vector<ImageRgb64>& tiles,
                                                const ImageVae& image_vae,
                                                const MelodyVae& melody_vae,
                                                const std::vector<LatentPair>& synthetic_pairs,
                                                const TranslatorTrainConfig& config,
                                                std::vector<LatentPair>* tile_pairs_out) {
  if (translator.stage < 1) throw ContractError("translator has not completed stage 1");
  std::vector<LatentPair> tile_pairs =
      make_tile_pairs(translator, image_vae, melody_vae, tiles);
  if (tile_pairs_out) *tile_pairs_out = tile_pairs;
  if (tiles.empty()) {
    translator.stage = 2;
    return {};
  }
  std::vector<LatentPair> all = synthetic_pairs;
  all.insert(all.end(), tile_pairs.begin(), tile_pairs.end());
  auto history = train_pairs(translator, all, config, "translator-stage2");
  translator.stage = 2;
  translator.seed = config.seed;
  return history;
}

VecF translate_latent_i2m(const Translator& translator, const VecF& z_image) {
  return forward(translator.i2m, z_image);
}

VecF translate_latent_m2i(const Translator& translator, const VecF& z_melody) {
  return forward(translator.m2i, z_melody);
}

TokenGrid translate_image_to_melody(const ImageRgb64& image, const Models& models) {
  if (models.image_vae.epochs_trained <= 0 || models.melody_vae.epochs_trained <= 0)
    throw ContractError("models have not been trained");
  if (models.translator.stage < 1) throw ContractError("translator has not been trained");
  check_compatible(models);
  const VecF z = encode_image(models.image_vae, image).mu;
  return decode_melody(models.melody_vae, translate_latent_i2m(models.translator, z));
}

ImageRgb64 translate_melody_to_image(const TokenGrid& grid, const Models& models) {
  if (models.image_vae.epochs_trained <= 0 || models.melody_vae.epochs_trained <= 0)
    throw ContractError("models have not been trained");
  if (models.translator.stage < 1) throw ContractError("translator has not been trained");
  check_compatible(models);
  const VecF z = encode_melody(models.melody_vae, grid).mu;
  return decode_image(models.image_vae, translate_latent_m2i(models.translator, z));
}

}  // namespace avsyn
