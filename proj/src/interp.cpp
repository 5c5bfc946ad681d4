// SPDX-License-Identifier: Apache-2.0
#include "avsyn/interp.hpp"

#include <cmath>

#include "avsyn/error.hpp"

namespace avsyn {

double heterogeneity(const std::vector<VecF>& latents) {
  if (latents.empty()) throw DomainError("heterogeneity: empty series");
  const Eigen::Index dim = latents.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const VecF& z : latents) {
    if (z.size() != dim) throw ShapeError("heterogeneity: latent dims differ");
    mean += z.cast<double>();
  }
  mean /= static_cast<double>(latents.size());

  double spread = 0.0;
  double scale = 0.0;
  for (const VecF& z : latents) {
    const Eigen::VectorXd zd = z.cast<double>();
    spread += (zd - mean).norm();
    scale += zd.norm();
  }
  spread /= static_cast<double>(latents.size());
  scale /= static_cast<double>(latents.size());
  return scale < 1e-12 ? 0.0 : spread / scale;
}

InterpResult interpolation_sequence(const InterpSpec& spec, const Models& models) {
  if (models.image_vae.epochs_trained <= 0 || models.melody_vae.epochs_trained <= 0)
    throw ContractError("models have not been trained");
  if (models.translator.stage < 1) throw ContractError("translator has not been trained");
  check_compatible(models);
  if (spec.intermediate_count < 1) throw ConfigError("intermediate_count must be >= 1");
  if (spec.fps < 1) throw ConfigError("fps must be >= 1");
  if (spec.tempo_bpm < 1) throw ConfigError("tempo must be >= 1");
  if (spec.bars != models.melody_vae.bars)
    throw ContractError("interpolation bars=" + std::to_string(spec.bars) +
                        " but melody checkpoint bars=" +
                        std::to_string(models.melody_vae.bars));

  const VecF z_img_a = encode_image(models.image_vae, spec.image_a).mu;
  const VecF z_img_b = encode_image(models.image_vae, spec.image_b).mu;
  const VecF m_a = translate_latent_i2m(models.translator, z_img_a);
  const VecF m_b = translate_latent_i2m(models.translator, z_img_b);

  InterpResult result;
  const int segments = spec.intermediate_count + 2;
  result.melodies.reserve(static_cast<std::size_t>(segments));
  std::vector<Token> all_steps;
  all_steps.reserve(static_cast<std::size_t>(segments) * spec.bars * kStepsPerBar);
  for (int k = 0; k < segments; ++k) {
    const float t = static_cast<float>(k) / static_cast<float>(segments - 1);
    TokenGrid grid = decode_melody(models.melody_vae, slerp(m_a, m_b, t));
    all_steps.insert(all_steps.end(), grid.steps.begin(), grid.steps.end());
    result.melodies.push_back(std::move(grid));
  }
  result.midi = write_midi_steps(all_steps, spec.tempo_bpm);

  const double seconds_per_segment =
      static_cast<double>(spec.bars) * 4.0 * 60.0 / static_cast<double>(spec.tempo_bpm);
  const double total_seconds = seconds_per_segment * segments;
  const long frame_count = std::lround(static_cast<double>(spec.fps) * total_seconds);

  // Decode all frame latents in one batched pass through the decoder.
  const int d_img = models.image_vae.core.latent_dim;
  MatF z_frames(d_img, frame_count);
  for (long i = 0; i < frame_count; ++i) {
    const float t = frame_count > 1
                        ? static_cast<float>(i) / static_cast<float>(frame_count - 1)
                        : 0.0f;
    z_frames.col(i) = slerp(z_img_a, z_img_b, t);
  }
  const MatF decoded = forward(models.image_vae.core.decoder, z_frames);
  result.frames.reserve(static_cast<std::size_t>(frame_count));
  for (long i = 0; i < frame_count; ++i) {
    ImageRgb64 frame;
    frame.rgb = decoded.col(i).cwiseMax(0.0f).cwiseMin(1.0f);
    result.frames.push_back(std::move(frame));
  }
  return result;
}

SeriesAnalysis analyze_series(const MidiData& midi, const Models& models) {
  const int bars = models.melody_vae.bars;
  const std::vector<TokenGrid> segments =
      segment_midi(midi.events, midi.ticks_per_quarter, bars);
  if (segments.size() < 2) throw DomainError("series needs at least 2 segments");

  std::vector<VecF> melody_latents;
  std::vector<VecF> image_latents;
  melody_latents.reserve(segments.size());
  image_latents.reserve(segments.size());
  for (const TokenGrid& segment : segments) {
    melody_latents.push_back(encode_melody(models.melody_vae, segment).mu);
    const ImageRgb64 image = translate_melody_to_image(segment, models);
    image_latents.push_back(encode_image(models.image_vae, image).mu);
  }

  SeriesAnalysis out;
  out.melody.n = static_cast<int>(segments.size());
  out.melody.heterogeneity = heterogeneity(melody_latents);
  out.image.n = out.melody.n;
  out.image.heterogeneity = heterogeneity(image_latents);
  return out;
}

std::pair<SeriesAnalysis, SeriesAnalysis> series_compare(const MidiData& midi_a,
                                                         const MidiData& midi_b,
                                                         const Models& models) {
  return {analyze_series(midi_a, models), analyze_series(midi_b, models)};
}

}  // namespace avsyn
