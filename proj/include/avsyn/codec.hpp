// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "avsyn/image.hpp"
#include "avsyn/melody.hpp"

namespace avsyn {

// Cylindrical color coordinates with saturation standing in for the fixed
// chroma: hue in [0, 360) carries the chromatic class, value in [0, 1] the
// octave level. Canonical note colors use saturation 1; black is the rest.
struct HcvColor {
  float hue = 0.0f;
  float saturation = 0.0f;
  float value = 0.0f;
};

inline constexpr float kHuePerClass = 30.0f;  // red C at 0 deg ... violet B at 330

// Note -> color: hue = 30 * (pitch mod 12), value = octave level / 4 with
// octaves 2..5 on levels 1..4, saturation fixed at 1.
HcvColor pitch_to_color(int pitch);

std::array<float, 3> hcv_to_rgb(const HcvColor& color);
HcvColor rgb_to_hcv(float r, float g, float b);

// Color -> token: value level 0 is REST; otherwise the nearest hue class and
// value level pick the pitch. Rounding ties go to the lower bin.
Token color_to_token(float r, float g, float b);

// Canonical color for a token (black for REST; HOLD has no color of its own).
std::array<float, 3> token_to_rgb(Token token);

// Snap to the 49-color lattice (48 note colors + black). Idempotent.
std::array<float, 3> quantize_color(float r, float g, float b);

// One pixel per 16th step, notes sustained over their HOLDs, rests black;
// the sequence fills the 64x64 canvas row-major and repeats cyclically.
ImageRgb64 melody_to_image(const TokenGrid& grid);

// Row-major pixel scan, one step per pixel; runs of the same note color merge
// into NOTE + HOLDs; truncated to 16*bars steps and normalized.
TokenGrid image_to_melody(const ImageRgb64& image, int bars);

}  // namespace avsyn
