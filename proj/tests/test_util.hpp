// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <vector>

#include "avsyn/image.hpp"
#include "avsyn/melody.hpp"
#include "avsyn/rng.hpp"

namespace avsyn::testutil {

// Random valid TokenGrid. With allow_retrigger=false a note never restarts on
// the pitch that is already sounding, so every NOTE starts a fresh pixel run;
// such grids survive the pixel codec exactly. MIDI round trips have separate
// note-on events and may retrigger freely.
inline TokenGrid random_grid(Rng& rng, int bars, bool allow_retrigger) {
  const int steps = bars * kStepsPerBar;
  std::vector<Token> tokens;
  tokens.reserve(static_cast<std::size_t>(steps));
  int sounding = -1;  // pitch currently held, -1 after a rest
  for (int s = 0; s < steps; ++s) {
    const double roll = rng.uniform();
    if (sounding >= 0 && roll < 0.45) {
      tokens.push_back(Token::hold());
      continue;
    }
    if (roll < 0.65) {
      tokens.push_back(Token::rest());
      sounding = -1;
      continue;
    }
    int pitch = kPitchMin + static_cast<int>(rng.uniform_int(kPitchCount));
    if (!allow_retrigger && pitch == sounding)
      pitch = kPitchMin + (pitch - kPitchMin + 1) % kPitchCount;
    tokens.push_back(Token::note(pitch));
    sounding = pitch;
  }
  return TokenGrid{bars, std::move(tokens)};
}

// Deterministic synthetic "artwork": overlapping soft color rectangles over a
// smooth gradient. Stands in for source paintings in tiling tests.
inline ImageRgbFull synthetic_artwork(Rng& rng, int width, int height) {
  ImageRgbFull image;
  image.width = width;
  image.height = height;
  image.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      image.rgb[(static_cast<std::size_t>(y) * width + x) * 3 + 0] =
          static_cast<std::uint8_t>((x * 255) / std::max(width - 1, 1));
      image.rgb[(static_cast<std::size_t>(y) * width + x) * 3 + 1] =
          static_cast<std::uint8_t>((y * 255) / std::max(height - 1, 1));
      image.rgb[(static_cast<std::size_t>(y) * width + x) * 3 + 2] = 96;
    }
  const int rects = 12;
  for (int r = 0; r < rects; ++r) {
    const int x0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(width)));
    const int y0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(height)));
    const int w = 8 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(width / 2)));
    const int h = 8 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(height / 2)));
    std::uint8_t color[3];
    for (auto& c : color) c = static_cast<std::uint8_t>(rng.uniform_int(256));
    for (int y = y0; y < std::min(height, y0 + h); ++y)
      for (int x = x0; x < std::min(width, x0 + w); ++x)
        for (int c = 0; c < 3; ++c) {
          auto& px = image.rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
          px = static_cast<std::uint8_t>((px + color[c]) / 2);
        }
  }
  return image;
}

}  // namespace avsyn::testutil
