// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "avsyn/vae.hpp"

namespace avsyn {

enum class PairOrigin : std::uint8_t { kSynthetic = 0, kTile = 1 };

// A ground-truth correspondence between the two latent spaces. Latents are
// posterior means, never samples.
struct LatentPair {
  VecF z_image;
  VecF z_melody;
  PairOrigin origin = PairOrigin::kSynthetic;
};

// Dense maps between the image and melody latent spaces. stage is 0 before
// any training, 1 after pair training, 2 after tile refinement.
struct Translator {
  DenseNet<float> i2m;
  DenseNet<float> m2i;
  int bars = 2;
  int stage = 0;
  std::uint64_t seed = 0;
};

struct Models {
  ImageVae image_vae;
  MelodyVae melody_vae;
  Translator translator;
};

inline int translator_d_image(const Translator& t) {
  return static_cast<int>(t.i2m.layers.front().weight.cols());
}
inline int translator_d_melody(const Translator& t) {
  return static_cast<int>(t.m2i.layers.front().weight.cols());
}

Translator make_translator(int d_image, int d_melody, int bars, Rng rng);

// Throws a contract error naming the offending field when latent dims or bar
// counts disagree across the three models.
void check_compatible(const Models& models);

struct TranslatorTrainConfig {
  int epochs = 300;
  int batch_size = 32;
  std::uint64_t seed = 7;
  float learning_rate = 1e-3f;
};

struct TranslatorEpochStats {
  double i2m_mse = 0.0;
  double m2i_mse = 0.0;
};

// Prior melodies rendered through the note-color map and encoded on both
// sides. Deterministic per rng seed.
std::vector<LatentPair> make_synthetic_pairs(const ImageVae& image_vae,
                                             const MelodyVae& melody_vae, int count, Rng rng);

// Minibatch Adam on mean squared latent error, both directions per batch.
std::vector<TranslatorEpochStats> train_stage1(Translator& translator,
                                               const std::vector<LatentPair>& pairs,
                                               const TranslatorTrainConfig& config);

// Tile latents paired with the re-encoded melodies the current translator
// produces for them.
std::vector<LatentPair> make_tile_pairs(const Translator& translator, const ImageVae& image_vae,
                                        const MelodyVae& melody_vae,
                                        const std::vector<ImageRgb64>& tiles);

// Retrains both directions on synthetic and tile pairs together. With no
// tiles there is no new evidence and the weights are left untouched.
std::vector<TranslatorEpochStats> refine_stage2(Translator& translator,
                                                const std::vector<ImageRgb64>& tiles,
                                                const ImageVae& image_vae,
                                                const MelodyVae& melody_vae,
                                                const std::vector<LatentPair>& synthetic_pairs,
                                                const TranslatorTrainConfig& config,
                                                std::vector<LatentPair>* tile_pairs_out = nullptr);

VecF translate_latent_i2m(const Translator& translator, const VecF& z_image);
VecF translate_latent_m2i(const Translator& translator, const VecF& z_melody);

TokenGrid translate_image_to_melody(const ImageRgb64& image, const Models& models);
ImageRgb64 translate_melody_to_image(const TokenGrid& grid, const Models& models);

}  // namespace avsyn
