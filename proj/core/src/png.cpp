#include "arise/png.hpp"

#include <array>
#include <cstring>
#include <string_view>

#include <zlib.h>

#include "arise/errors.hpp"

namespace arise::png {
namespace {

constexpr std::array<std::uint8_t, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_chunk(std::vector<std::uint8_t>& out, std::string_view type, std::span<const std::uint8_t> data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type.begin(), type.end());
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_rgb(std::uint32_t width, std::uint32_t height, std::span<const std::uint8_t> rgb) {
  const std::size_t stride = std::size_t{width} * 3;
  if (width == 0 || height == 0 || rgb.size() != stride * height) {
    throw DomainError("pixel buffer does not match image dimensions");
  }

  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * height);
  for (std::uint32_t y = 0; y < height; ++y) {
    raw.push_back(0);
    const auto row = rgb.subspan(y * stride, stride);
    raw.insert(raw.end(), row.begin(), row.end());
  }

  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw GenerationError("zlib compression failed");
  }
  packed.resize(packed_size);

  std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, width);
  put_u32(ihdr, height);
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit, truecolor, deflate, adaptive filter, no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

std::optional<Header> read_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 + 25) return std::nullopt;
  if (std::memcmp(bytes.data(), kSignature.data(), kSignature.size()) != 0) return std::nullopt;
  if (get_u32(bytes, 8) != 13 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) return std::nullopt;
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data() + 12, 17);
  if (static_cast<std::uint32_t>(crc) != get_u32(bytes, 29)) return std::nullopt;
  return Header{get_u32(bytes, 16), get_u32(bytes, 20), bytes[24], bytes[25]};
}

}  // namespace arise::png
