// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <doctest.h>

#include "avsyn/codec.hpp"
#include "avsyn/interp.hpp"
#include "avsyn/rng.hpp"
#include "test_util.hpp"

namespace avsyn {
namespace {

VecF random_vec(int n, Rng& rng) {
  VecF v(n);
  for (int i = 0; i < n; ++i) v[i] = static_cast<float>(rng.normal());
  return v;
}

const Models& trained_models() {
  static const Models models = [] {
    Models m;
    auto melodies = procedural_generate(31, 2, 48);
    std::vector<ImageRgb64> images;
    images.reserve(melodies.size());
    for (const auto& grid : melodies) images.push_back(melody_to_image(grid));

    TrainConfig vae_config;
    vae_config.epochs = 8;
    vae_config.batch_size = 16;
    m.melody_vae = make_melody_vae(5, 24, 2, Rng(32));
    train_melody_vae(m.melody_vae, melodies, vae_config);
    m.image_vae = make_image_vae(6, 24, 2, Rng(32));
    train_image_vae(m.image_vae, images, vae_config);

    m.translator = make_translator(6, 5, 2, Rng(33));
    auto pairs = make_synthetic_pairs(m.image_vae, m.melody_vae, 64, Rng(34));
    TranslatorTrainConfig t_config;
    t_config.epochs = 80;
    train_stage1(m.translator, pairs, t_config);
    return m;
  }();
  return models;
}

// A grid whose final step sounds, so segment windows cover its full length.
TokenGrid grid_with_tail(Rng& rng, int closing_pitch) {
  TokenGrid grid = testutil::random_grid(rng, 2, false);
  grid.steps[31] = Token::note(closing_pitch);
  return grid;
}

MidiData midi_of_segments(const std::vector<TokenGrid>& segments) {
  std::vector<Token> all_steps;
  for (const auto& g : segments) all_steps.insert(all_steps.end(), g.steps.begin(), g.steps.end());
  return parse_midi(write_midi_steps(all_steps, 120));
}

}  // namespace

TEST_CASE("slerp hits its endpoints") {
  Rng rng(41);
  VecF z0 = random_vec(5, rng);
  VecF z1 = random_vec(5, rng);
  CHECK((slerp(z0, z1, 0.0f) - z0).norm() < 1e-6f);
  CHECK((slerp(z0, z1, 1.0f) - z1).norm() < 1e-6f);
}

TEST_CASE("slerp midpoint of an orthonormal pair") {
  VecF z0 = VecF::Zero(2), z1 = VecF::Zero(2);
  z0[0] = 1.0f;
  z1[1] = 1.0f;
  VecF mid = slerp(z0, z1, 0.5f);
  const float half_sqrt2 = static_cast<float>(std::sqrt(2.0) / 2.0);
  CHECK(mid[0] == doctest::Approx(half_sqrt2).epsilon(1e-6));
  CHECK(mid[1] == doctest::Approx(half_sqrt2).epsilon(1e-6));
  CHECK(mid.norm() == doctest::Approx(1.0f).epsilon(1e-6));
}

TEST_CASE("slerp of identical endpoints returns the endpoint") {
  Rng rng(42);
  VecF z = random_vec(4, rng);
  for (float t : {0.0f, 0.3f, 0.7f, 1.0f}) {
    CHECK((slerp(z, z, t) - z).norm() < 1e-6f);
  }
}

TEST_CASE("slerp preserves unit norm along the arc") {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    VecF z0 = random_vec(6, rng).normalized();
    VecF z1 = random_vec(6, rng).normalized();
    for (float t : {0.1f, 0.25f, 0.5f, 0.9f}) {
      CHECK(slerp(z0, z1, t).norm() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("slerp is symmetric under endpoint swap") {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    VecF z0 = random_vec(6, rng);
    VecF z1 = random_vec(6, rng);
    for (float t : {0.2f, 0.5f, 0.8f}) {
      CHECK((slerp(z0, z1, t) - slerp(z1, z0, 1.0f - t)).norm() < 1e-6f);
    }
  }
}

TEST_CASE("slerp degenerate arcs fall back to straight lines") {
  Rng rng(45);
  VecF z1 = random_vec(4, rng);
  VecF zero = VecF::Zero(4);
  CHECK((slerp(zero, z1, 0.25f) - VecF(0.25f * z1)).norm() < 1e-6f);

  // Antipodal endpoints have sin(omega) = 0; the lerp fallback stays finite.
  VecF anti = -z1;
  VecF mid = slerp(z1, anti, 0.5f);
  CHECK(mid.allFinite());
  CHECK(mid.norm() < 1e-5f);

  CHECK_THROWS_AS(slerp(z1, VecF(VecF::Zero(5)), 0.5f), ShapeError);
}

TEST_CASE("heterogeneity is zero for a constant series") {
  VecF z(3);
  z << 1.0f, -2.0f, 0.5f;
  CHECK(heterogeneity({z, z, z}) == 0.0);
}

TEST_CASE("heterogeneity of two opposite unit vectors is one") {
  VecF a(2), b(2);
  a << 1.0f, 0.0f;
  b << -1.0f, 0.0f;
  CHECK(heterogeneity({a, b}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("heterogeneity is invariant under positive scaling") {
  Rng rng(46);
  std::vector<VecF> series, scaled;
  for (int i = 0; i < 8; ++i) {
    VecF z = random_vec(5, rng);
    series.push_back(z);
    scaled.push_back(VecF(3.7f * z));
  }
  CHECK(heterogeneity(scaled) == doctest::Approx(heterogeneity(series)).epsilon(1e-9));
}

TEST_CASE("heterogeneity rejects empty input and degenerates to zero on zeros") {
  CHECK_THROWS_AS(heterogeneity({}), DomainError);
  VecF zero = VecF::Zero(4);
  CHECK(heterogeneity({zero, zero}) == 0.0);
}

TEST_CASE("interpolation produces nine segments and the pinned frame count") {
  const Models& m = trained_models();
  Rng rng(47);
  InterpSpec spec;
  spec.image_a = melody_to_image(testutil::random_grid(rng, 2, false));
  spec.image_b = melody_to_image(testutil::random_grid(rng, 2, false));

  InterpResult result = interpolation_sequence(spec, m);
  CHECK(result.melodies.size() == 9);
  CHECK(result.frames.size() == 864);  // 24 fps * 9 segments * 4 s
  for (const auto& grid : result.melodies) CHECK(is_valid_grid(grid));
  for (const auto& frame : result.frames) CHECK(is_valid_image(frame));

  CHECK(result.melodies.front() == translate_image_to_melody(spec.image_a, m));
  CHECK(result.melodies.back() == translate_image_to_melody(spec.image_b, m));

  MidiData parsed = parse_midi(result.midi);
  CHECK(parsed.ticks_per_quarter == 480);
  CHECK(parsed.duration_ticks == 34560);  // 18 bars * 1920 ticks
}

TEST_CASE("interpolation honors non-default fps, tempo, and counts") {
  const Models& m = trained_models();
  Rng rng(48);
  InterpSpec spec;
  spec.image_a = melody_to_image(testutil::random_grid(rng, 2, false));
  spec.image_b = melody_to_image(testutil::random_grid(rng, 2, false));
  spec.intermediate_count = 2;
  spec.fps = 5;
  spec.tempo_bpm = 240;

  InterpResult result = interpolation_sequence(spec, m);
  CHECK(result.melodies.size() == 4);
  // 4 segments * 2 bars * 4 beats / 240 bpm = 8 s; 5 fps -> 40 frames.
  CHECK(result.frames.size() == 40);
  MidiData parsed = parse_midi(result.midi);
  CHECK(parsed.duration_ticks == 4 * 32 * kTicksPerStep);
}

TEST_CASE("interpolation validates models and spec") {
  Models fresh;
  fresh.image_vae = make_image_vae(6, 8, 2, Rng(49));
  fresh.melody_vae = make_melody_vae(5, 8, 2, Rng(49));
  fresh.translator = make_translator(6, 5, 2, Rng(49));
  InterpSpec spec;
  CHECK_THROWS_AS(interpolation_sequence(spec, fresh), ContractError);

  const Models& m = trained_models();
  InterpSpec bad_bars;
  bad_bars.bars = 16;
  CHECK_THROWS_AS(interpolation_sequence(bad_bars, m), ContractError);

  InterpSpec bad_count;
  bad_count.intermediate_count = 0;
  CHECK_THROWS_AS(interpolation_sequence(bad_count, m), ConfigError);
}

TEST_CASE("a repeated segment series has zero heterogeneity") {
  const Models& m = trained_models();
  Rng rng(50);
  TokenGrid pattern = grid_with_tail(rng, 60);
  MidiData midi = midi_of_segments({pattern, pattern, pattern, pattern});

  SeriesAnalysis analysis = analyze_series(midi, m);
  CHECK(analysis.melody.n == 4);
  CHECK(analysis.image.n == 4);
  CHECK(analysis.melody.heterogeneity == 0.0);
  CHECK(analysis.image.heterogeneity == 0.0);
}

TEST_CASE("series analysis needs at least two segments") {
  const Models& m = trained_models();
  Rng rng(51);
  MidiData midi = midi_of_segments({grid_with_tail(rng, 60)});
  CHECK_THROWS_AS(analyze_series(midi, m), DomainError);
}

TEST_CASE("a diverse series measures more heterogeneous than a uniform one") {
  const Models& m = trained_models();
  Rng rng(52);
  TokenGrid pattern = grid_with_tail(rng, 60);
  MidiData uniform = midi_of_segments({pattern, pattern, pattern, pattern});
  MidiData diverse = midi_of_segments({grid_with_tail(rng, 48), grid_with_tail(rng, 55),
                                       grid_with_tail(rng, 62), grid_with_tail(rng, 76)});

  auto [u, d] = series_compare(uniform, diverse, m);
  CHECK(u.melody.heterogeneity < d.melody.heterogeneity);
  CHECK(u.image.heterogeneity < d.image.heterogeneity);
}

}  // namespace avsyn
