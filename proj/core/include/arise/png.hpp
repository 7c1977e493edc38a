#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace arise::png {

// Encodes 8-bit RGB pixels (row-major, 3 bytes per pixel) as a PNG with a
// single IDAT chunk and filter type 0 on every row. Output is a pure
// function of the input.
std::vector<std::uint8_t> encode_rgb(std::uint32_t width, std::uint32_t height, std::span<const std::uint8_t> rgb);

struct Header {
  std::uint32_t width;
  std::uint32_t height;
  std::uint8_t bit_depth;
  std::uint8_t color_type;
};

// Reads the signature and IHDR chunk (CRC checked). nullopt if the bytes do
// not start like a PNG.
std::optional<Header> read_header(std::span<const std::uint8_t> bytes);

}  // namespace arise::png
