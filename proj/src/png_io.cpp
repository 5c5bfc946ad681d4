// SPDX-License-Identifier: Apache-2.0
#include "avsyn/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <string>

namespace avsyn {

namespace {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::uint32_t read_u32(std::span<const std::uint8_t> d, std::size_t pos) {
  return (static_cast<std::uint32_t>(d[pos]) << 24) | (static_cast<std::uint32_t>(d[pos + 1]) << 16) |
         (static_cast<std::uint32_t>(d[pos + 2]) << 8) | d[pos + 3];
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

void unfilter_scanlines(std::vector<std::uint8_t>& raw, int width, int height, int bpp,
                        std::size_t error_offset) {
  const std::size_t stride = static_cast<std::size_t>(width) * bpp;
  std::vector<std::uint8_t> prior(stride, 0);
  for (int y = 0; y < height; ++y) {
    std::uint8_t* line = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
    const int filter = line[0];
    std::uint8_t* cur = line + 1;
    switch (filter) {
      case 0:
        break;
      case 1:  // Sub
        for (std::size_t i = bpp; i < stride; ++i) cur[i] = static_cast<std::uint8_t>(cur[i] + cur[i - bpp]);
        break;
      case 2:  // Up
        for (std::size_t i = 0; i < stride; ++i) cur[i] = static_cast<std::uint8_t>(cur[i] + prior[i]);
        break;
      case 3:  // Average
        for (std::size_t i = 0; i < stride; ++i) {
          const int left = i >= static_cast<std::size_t>(bpp) ? cur[i - bpp] : 0;
          cur[i] = static_cast<std::uint8_t>(cur[i] + ((left + prior[i]) >> 1));
        }
        break;
      case 4:  // Paeth
        for (std::size_t i = 0; i < stride; ++i) {
          const int left = i >= static_cast<std::size_t>(bpp) ? cur[i - bpp] : 0;
          const int upleft = i >= static_cast<std::size_t>(bpp) ? prior[i - bpp] : 0;
          cur[i] = static_cast<std::uint8_t>(cur[i] + paeth(left, prior[i], upleft));
        }
        break;
      default:
        throw ParseError("unknown PNG filter type " + std::to_string(filter), error_offset);
    }
    std::memcpy(prior.data(), cur, stride);
  }
}

}  // namespace

ImageRgbFull load_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0)
    throw ParseError("not a PNG file (bad signature)", 0);

  std::size_t pos = 8;
  bool have_header = false;
  std::uint32_t width = 0, height = 0;
  int color_type = 0, channels = 0;
  std::vector<std::uint8_t> compressed;

  while (true) {
    if (bytes.size() - pos < 12) throw ParseError("truncated PNG chunk", pos);
    const std::uint32_t length = read_u32(bytes, pos);
    if (bytes.size() - pos < 12 + static_cast<std::size_t>(length))
      throw ParseError("PNG chunk runs past end of data", pos);
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const std::uint8_t* data = bytes.data() + pos + 8;

    const std::uint32_t expected_crc = read_u32(bytes, pos + 8 + length);
    const std::uint32_t actual_crc =
        crc32(crc32(0L, bytes.data() + pos + 4, 4), data, length);
    if (expected_crc != actual_crc) throw ParseError("PNG chunk CRC mismatch", pos + 8 + length);

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (length != 13) throw ParseError("IHDR chunk has wrong length", pos);
      width = read_u32(bytes, pos + 8);
      height = read_u32(bytes, pos + 12);
      const int bit_depth = data[8];
      color_type = data[9];
      const int compression = data[10], filter = data[11], interlace = data[12];
      if (width == 0 || height == 0) throw ParseError("PNG has zero dimension", pos + 8);
      if (static_cast<std::uint64_t>(width) * height > 100000000ull)
        throw ParseError("PNG dimensions unreasonably large", pos + 8);
      if (bit_depth != 8)
        throw ParseError("unsupported PNG bit depth " + std::to_string(bit_depth), pos + 16);
      if (color_type != 0 && color_type != 2 && color_type != 6)
        throw ParseError("unsupported PNG color type " + std::to_string(color_type), pos + 17);
      if (compression != 0 || filter != 0)
        throw ParseError("unsupported PNG compression/filter method", pos + 18);
      if (interlace != 0) throw ParseError("interlaced PNG is not supported", pos + 20);
      channels = color_type == 0 ? 1 : (color_type == 2 ? 3 : 4);
      have_header = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      if (!have_header) throw ParseError("IDAT before IHDR", pos);
      compressed.insert(compressed.end(), data, data + length);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    // Ancillary chunks are skipped.
    pos += 12 + length;
  }

  if (!have_header) throw ParseError("PNG has no IHDR chunk", 8);
  if (compressed.empty()) throw ParseError("PNG has no image data", 8);

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  std::vector<std::uint8_t> raw((stride + 1) * height);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  const int zrc = uncompress(raw.data(), &raw_len, compressed.data(),
                             static_cast<uLong>(compressed.size()));
  if (zrc != Z_OK || raw_len != raw.size())
    throw ParseError("PNG image data failed to decompress", 8);

  unfilter_scanlines(raw, static_cast<int>(width), static_cast<int>(height), channels, 8);

  ImageRgbFull out;
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.rgb.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t* line = raw.data() + static_cast<std::size_t>(y) * (stride + 1) + 1;
    for (std::uint32_t x = 0; x < width; ++x) {
      std::uint8_t rgb[3];
      if (channels == 1) {
        rgb[0] = rgb[1] = rgb[2] = line[x];
      } else if (channels == 3) {
        rgb[0] = line[x * 3];
        rgb[1] = line[x * 3 + 1];
        rgb[2] = line[x * 3 + 2];
      } else {
        const int alpha = line[x * 4 + 3];
        for (int c = 0; c < 3; ++c) {
          // Composite over black, round half up.
          rgb[c] = static_cast<std::uint8_t>((line[x * 4 + c] * alpha + 127) / 255);
        }
      }
      std::uint8_t* dst = out.rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
      dst[0] = rgb[0];
      dst[1] = rgb[1];
      dst[2] = rgb[2];
    }
  }
  return out;
}

namespace {

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               std::span<const std::uint8_t> data) {
  put_u32be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  std::uint32_t crc = crc32(0L, out.data() + type_pos, 4);
  if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
  put_u32be(out, crc);
}

}  // namespace

std::vector<std::uint8_t> save_png(const ImageRgbFull& image) {
  if (image.width < 1 || image.height < 1 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3)
    throw DomainError("save_png: invalid image dimensions");

  const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
  std::vector<std::uint8_t> raw((stride + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    std::uint8_t* line = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
    line[0] = 0;  // filter: None
    std::memcpy(line + 1, image.rgb.data() + static_cast<std::size_t>(y) * stride, stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw ContractError("save_png: deflate failed");
  compressed.resize(bound);

  std::vector<std::uint8_t> out(kSignature, kSignature + 8);
  std::uint8_t ihdr[13];
  ihdr[0] = static_cast<std::uint8_t>(image.width >> 24);
  ihdr[1] = static_cast<std::uint8_t>((image.width >> 16) & 0xff);
  ihdr[2] = static_cast<std::uint8_t>((image.width >> 8) & 0xff);
  ihdr[3] = static_cast<std::uint8_t>(image.width & 0xff);
  ihdr[4] = static_cast<std::uint8_t>(image.height >> 24);
  ihdr[5] = static_cast<std::uint8_t>((image.height >> 16) & 0xff);
  ihdr[6] = static_cast<std::uint8_t>((image.height >> 8) & 0xff);
  ihdr[7] = static_cast<std::uint8_t>(image.height & 0xff);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // color type: RGB
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter
  ihdr[12] = 0;  // interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace avsyn
