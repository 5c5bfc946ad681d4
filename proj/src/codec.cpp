// SPDX-License-Identifier: Apache-2.0
#include "avsyn/codec.hpp"

#include <algorithm>
#include <cmath>

namespace avsyn {

HcvColor pitch_to_color(int pitch) {
  if (pitch < kPitchMin || pitch > kPitchMax)
    throw DomainError("pitch_to_color: pitch " + std::to_string(pitch) + " outside [36, 83]");
  const int pitch_class = pitch % 12;  // C = 0
  const int octave = pitch / 12 - 1;   // C4 = 60 convention, so 36 -> octave 2
  return HcvColor{kHuePerClass * static_cast<float>(pitch_class), 1.0f,
                  static_cast<float>(octave - 1) / 4.0f};
}

std::array<float, 3> hcv_to_rgb(const HcvColor& color) {
  const float h = color.hue / 60.0f;
  const float c = color.value * color.saturation;
  const float x = c * (1.0f - std::fabs(std::fmod(h, 2.0f) - 1.0f));
  const float m = color.value - c;
  float r = 0, g = 0, b = 0;
  if (h < 1)      { r = c; g = x; }
  else if (h < 2) { r = x; g = c; }
  else if (h < 3) { g = c; b = x; }
  else if (h < 4) { g = x; b = c; }
  else if (h < 5) { r = x; b = c; }
  else            { r = c; b = x; }
  return {r + m, g + m, b + m};
}

HcvColor rgb_to_hcv(float r, float g, float b) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float delta = mx - mn;
  HcvColor out;
  out.value = mx;
  out.saturation = mx > 0.0f ? delta / mx : 0.0f;
  if (delta <= 0.0f) {
    out.hue = 0.0f;  // gray: hue defaults to the C class
    return out;
  }
  float h;
  if (mx == r)
    h = std::fmod((g - b) / delta, 6.0f);
  else if (mx == g)
    h = (b - r) / delta + 2.0f;
  else
    h = (r - g) / delta + 4.0f;
  h *= 60.0f;
  if (h < 0.0f) h += 360.0f;
  out.hue = h;
  return out;
}

namespace {

// Nearest-bin index with ties going to the lower bin.
int round_half_down(float x) { return static_cast<int>(std::ceil(x - 0.5f)); }

}  // namespace

Token color_to_token(float r, float g, float b) {
  const HcvColor hcv = rgb_to_hcv(std::clamp(r, 0.0f, 1.0f), std::clamp(g, 0.0f, 1.0f),
                                  std::clamp(b, 0.0f, 1.0f));
  const int level = std::clamp(round_half_down(4.0f * hcv.value), 0, 4);
  if (level == 0) return Token::rest();
  const int pitch_class = ((round_half_down(hcv.hue / kHuePerClass) % 12) + 12) % 12;
  const int octave = level + 1;
  return Token::note(12 * (octave + 1) + pitch_class);
}

std::array<float, 3> token_to_rgb(Token token) {
  if (token.is_note()) return hcv_to_rgb(pitch_to_color(token.pitch()));
  return {0.0f, 0.0f, 0.0f};
}

std::array<float, 3> quantize_color(float r, float g, float b) {
  return token_to_rgb(color_to_token(r, g, b));
}

ImageRgb64 melody_to_image(const TokenGrid& grid) {
  if (!is_valid_grid(grid)) throw DomainError("melody_to_image: invalid token grid");
  const int length = grid.step_count();
  std::vector<std::array<float, 3>> sequence(length, {0.0f, 0.0f, 0.0f});
  std::array<float, 3> current = {0.0f, 0.0f, 0.0f};
  for (int i = 0; i < length; ++i) {
    const Token& t = grid.steps[i];
    if (t.is_note()) current = token_to_rgb(t);
    else if (t.is_rest()) current = {0.0f, 0.0f, 0.0f};
    sequence[i] = current;
  }
  ImageRgb64 image;
  for (int p = 0; p < kImageSide * kImageSide; ++p) {
    const auto& rgb = sequence[p % length];
    image.rgb[p * 3 + 0] = rgb[0];
    image.rgb[p * 3 + 1] = rgb[1];
    image.rgb[p * 3 + 2] = rgb[2];
  }
  return image;
}

TokenGrid image_to_melody(const ImageRgb64& image, int bars) {
  if (bars < 1) throw DomainError("image_to_melody: bars must be >= 1");
  const int length = std::min(bars * kStepsPerBar, kImageSide * kImageSide);
  std::vector<Token> steps;
  steps.reserve(bars * kStepsPerBar);
  int previous_pitch = -1;
  for (int p = 0; p < length; ++p) {
    const Token t = color_to_token(image.rgb[p * 3], image.rgb[p * 3 + 1], image.rgb[p * 3 + 2]);
    if (t.is_note()) {
      if (t.pitch() == previous_pitch)
        steps.push_back(Token::hold());  // same color continues the note
      else
        steps.push_back(t);
      previous_pitch = t.pitch();
    } else {
      steps.push_back(Token::rest());
      previous_pitch = -1;
    }
  }
  return normalize_tokens(bars, std::move(steps));
}

}  // namespace avsyn
