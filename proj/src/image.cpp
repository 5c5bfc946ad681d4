// SPDX-License-Identifier: Apache-2.0
#include "avsyn/image.hpp"

#include <algorithm>
#include <cmath>

namespace avsyn {

bool is_valid_image(const ImageRgb64& image) {
  if (image.rgb.size() != kImageChannels) return false;
  for (Eigen::Index i = 0; i < image.rgb.size(); ++i) {
    const float v = image.rgb[i];
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) return false;
  }
  return true;
}

ImageRgbFull to_rgb8(const ImageRgb64& image) {
  ImageRgbFull out;
  out.width = kImageSide;
  out.height = kImageSide;
  out.rgb.resize(static_cast<std::size_t>(kImageChannels));
  for (int i = 0; i < kImageChannels; ++i) {
    const float v = std::clamp(image.rgb[i], 0.0f, 1.0f);
    out.rgb[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

namespace {

ImageRgbFull replicate_to_minimum(const ImageRgbFull& src, int min_side) {
  if (src.width >= min_side && src.height >= min_side) return src;
  ImageRgbFull out;
  out.width = std::max(src.width, min_side);
  out.height = std::max(src.height, min_side);
  out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int y = 0; y < out.height; ++y) {
    const int sy = std::min(y, src.height - 1);
    for (int x = 0; x < out.width; ++x) {
      const int sx = std::min(x, src.width - 1);
      for (int c = 0; c < 3; ++c)
        out.rgb[(static_cast<std::size_t>(y) * out.width + x) * 3 + c] = src.at(sx, sy, c);
    }
  }
  return out;
}

}  // namespace

ImageRgb64 downsample64(const ImageRgbFull& image) {
  if (image.width < 1 || image.height < 1) throw DomainError("downsample64: empty image");
  const ImageRgbFull src = replicate_to_minimum(image, kImageSide);

  ImageRgb64 out;
  for (int ty = 0; ty < kImageSide; ++ty) {
    const int y0 = static_cast<int>(static_cast<std::int64_t>(ty) * src.height / kImageSide);
    const int y1 = static_cast<int>(static_cast<std::int64_t>(ty + 1) * src.height / kImageSide);
    for (int tx = 0; tx < kImageSide; ++tx) {
      const int x0 = static_cast<int>(static_cast<std::int64_t>(tx) * src.width / kImageSide);
      const int x1 = static_cast<int>(static_cast<std::int64_t>(tx + 1) * src.width / kImageSide);
      double acc[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) acc[c] += src.at(x, y, c);
      const double n = static_cast<double>(y1 - y0) * (x1 - x0) * 255.0;
      for (int c = 0; c < 3; ++c) out.at(tx, ty, c) = static_cast<float>(acc[c] / n);
    }
  }
  return out;
}

std::vector<ImageRgb64> tile64(const ImageRgbFull& image) {
  const int tiles_x = image.width / kImageSide;
  const int tiles_y = image.height / kImageSide;
  std::vector<ImageRgb64> tiles;
  if (tiles_x <= 0 || tiles_y <= 0) return tiles;
  tiles.reserve(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (int ty = 0; ty < tiles_y; ++ty)
    for (int tx = 0; tx < tiles_x; ++tx) {
      ImageRgb64 tile;
      for (int y = 0; y < kImageSide; ++y)
        for (int x = 0; x < kImageSide; ++x)
          for (int c = 0; c < 3; ++c)
            tile.at(x, y, c) = image.at(tx * kImageSide + x, ty * kImageSide + y, c) / 255.0f;
      tiles.push_back(std::move(tile));
    }
  return tiles;
}

}  // namespace avsyn
