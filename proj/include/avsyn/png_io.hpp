// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "avsyn/image.hpp"

namespace avsyn {

// Decode an 8-bit PNG (grayscale, RGB, or RGBA; non-interlaced). Alpha is
// composited over black with round-half-up; grayscale expands to RGB.
ImageRgbFull load_png(std::span<const std::uint8_t> bytes);

// Encode as 8-bit RGB PNG. load_png inverts this exactly.
std::vector<std::uint8_t> save_png(const ImageRgbFull& image);

}  // namespace avsyn
