// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "avsyn/error.hpp"
#include "avsyn/nn.hpp"

namespace avsyn {

inline constexpr int kImageSide = 64;
inline constexpr int kImageChannels = kImageSide * kImageSide * 3;  // 12288

// The 64x64 working image: RGB channels in [0,1], flattened row-major with
// interleaved channels. This is exactly the image VAE's input layout.
struct ImageRgb64 {
  VecF rgb = VecF::Zero(kImageChannels);

  float& at(int x, int y, int c) { return rgb[(y * kImageSide + x) * 3 + c]; }
  float at(int x, int y, int c) const { return rgb[(y * kImageSide + x) * 3 + c]; }
};

bool is_valid_image(const ImageRgb64& image);  // finite channels within [0,1]

// A full-size 8-bit RGB image as loaded from disk.
struct ImageRgbFull {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  std::uint8_t at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

ImageRgbFull to_rgb8(const ImageRgb64& image);  // round(255*v) per channel

// Box-filter downsample to 64x64 with channels scaled to [0,1]. Images
// smaller than 64 on a side are edge-replicated up first.
ImageRgb64 downsample64(const ImageRgbFull& image);

// Non-overlapping 64x64 tiles of the unresized image, stride 64, row-major;
// right/bottom remainders dropped. Empty when the image is smaller than 64x64.
std::vector<ImageRgb64> tile64(const ImageRgbFull& image);

}  // namespace avsyn
