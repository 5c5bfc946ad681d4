// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "avsyn/midi.hpp"
#include "avsyn/translator.hpp"

namespace avsyn {

// Great-circle interpolation between latent codes. Degenerate arcs (either
// endpoint near zero, angle near 0 or pi) fall back to straight lerp, so the
// map is total.
template <class S>
Vec<S> slerp(const Vec<S>& z0, const Vec<S>& z1, S t) {
  if (z0.size() != z1.size()) throw ShapeError("slerp: length mismatch");
  const double n0 = static_cast<double>(z0.norm());
  const double n1 = static_cast<double>(z1.norm());
  const double td = static_cast<double>(t);
  auto lerp = [&] { return Vec<S>(static_cast<S>(1.0 - td) * z0 + t * z1); };
  if (n0 < 1e-9 || n1 < 1e-9) return lerp();
  const double cos_omega =
      std::clamp(static_cast<double>(z0.dot(z1)) / (n0 * n1), -1.0, 1.0);
  const double omega = std::acos(cos_omega);
  const double sin_omega = std::sin(omega);
  if (omega < 1e-6 || sin_omega < 1e-6) return lerp();
  const S a = static_cast<S>(std::sin((1.0 - td) * omega) / sin_omega);
  const S b = static_cast<S>(std::sin(td * omega) / sin_omega);
  return a * z0 + b * z1;
}

// Average normalized distance of a series from its mean: mean distance to the
// centroid divided by the series' mean norm. Dimensionless, so the two latent
// spaces are comparable.
double heterogeneity(const std::vector<VecF>& latents);

struct InterpSpec {
  ImageRgb64 image_a;
  ImageRgb64 image_b;
  int intermediate_count = 7;
  int bars = 2;
  int fps = 24;
  int tempo_bpm = 120;
};

struct InterpResult {
  std::vector<TokenGrid> melodies;   // endpoints plus intermediates
  std::vector<std::uint8_t> midi;    // one format-0 file of all segments
  std::vector<ImageRgb64> frames;    // round(fps * total seconds) images
};

// Audio track: melody latents of the two images slerped at t = k/(n+1),
// decoded, concatenated. Video track: image latents slerped at frame times
// t = i/(F-1) and decoded.
InterpResult interpolation_sequence(const InterpSpec& spec, const Models& models);

struct SeriesStats {
  int n = 0;
  double heterogeneity = 0.0;
};

struct SeriesAnalysis {
  SeriesStats melody;  // over melody posterior means
  SeriesStats image;   // over posterior means of the translated images
};

// Heterogeneity of a MIDI file's fixed-length segments, in melody space and
// in the space of their image translations.
SeriesAnalysis analyze_series(const MidiData& midi, const Models& models);

std::pair<SeriesAnalysis, SeriesAnalysis> series_compare(const MidiData& midi_a,
                                                         const MidiData& midi_b,
                                                         const Models& models);

}  // namespace avsyn
