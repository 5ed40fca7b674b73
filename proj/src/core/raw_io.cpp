#include "xct/core/raw_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "raw file formats are little-endian; big-endian hosts unsupported");

namespace xct {
namespace {

void write_bytes(const std::string& path, const void* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(count));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<unsigned char> buf(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(buf.data()), size);
  if (!in) throw std::runtime_error("read failed: " + path);
  return buf;
}

// 16-bit big-endian sample rows (both PGM P5 maxval>255 and PNG use network
// byte order).
std::vector<unsigned char> quantize16_rows(const Image<float>& img, float lo, float hi,
                                           bool png_filter_bytes) {
  const double span = (hi > lo) ? static_cast<double>(hi) - lo : 1.0;
  std::vector<unsigned char> rows;
  rows.reserve((img.size() + (png_filter_bytes ? img.height() : 0)) * 2);
  for (int y = 0; y < img.height(); ++y) {
    if (png_filter_bytes) rows.push_back(0);  // filter type: none
    for (int x = 0; x < img.width(); ++x) {
      double t = (static_cast<double>(img(y, x)) - lo) / span;
      t = std::clamp(t, 0.0, 1.0);
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      rows.push_back(static_cast<unsigned char>(v >> 8));
      rows.push_back(static_cast<unsigned char>(v & 0xFF));
    }
  }
  return rows;
}

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void put_chunk(std::vector<unsigned char>& out, const char type[4],
               const std::vector<unsigned char>& payload) {
  put_be32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + payload.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_raw_f32(const std::string& path, const float* data, std::size_t count) {
  write_bytes(path, data, count * sizeof(float));
}

void write_raw_f32(const std::string& path, const Image<float>& img) {
  write_raw_f32(path, img.data(), img.size());
}

std::vector<float> read_raw_f32(const std::string& path, std::size_t expected_count) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != expected_count * sizeof(float))
    throw std::runtime_error(path + ": expected " + std::to_string(expected_count * 4) +
                             " bytes, found " + std::to_string(bytes.size()));
  std::vector<float> out(expected_count);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

Image<float> read_raw_f32_image(const std::string& path, int height, int width) {
  Image<float> img(height, width);
  auto v = read_raw_f32(path, img.size());
  std::memcpy(img.data(), v.data(), v.size() * sizeof(float));
  return img;
}

void write_text_file(const std::string& path, const std::string& text) {
  write_bytes(path, text.data(), text.size());
}

std::string read_text_file(const std::string& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_pgm16(const std::string& path, const Image<float>& img, float lo, float hi) {
  std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                       "\n65535\n";
  auto rows = quantize16_rows(img, lo, hi, false);
  std::vector<unsigned char> out(header.begin(), header.end());
  out.insert(out.end(), rows.begin(), rows.end());
  write_bytes(path, out.data(), out.size());
}

void write_png16(const std::string& path, const Image<float>& img, float lo, float hi) {
  auto rows = quantize16_rows(img, lo, hi, true);

  uLongf comp_bound = compressBound(static_cast<uLong>(rows.size()));
  std::vector<unsigned char> compressed(comp_bound);
  if (::compress2(compressed.data(), &comp_bound, rows.data(), static_cast<uLong>(rows.size()),
                  9) != Z_OK)
    throw std::runtime_error("deflate failed for " + path);
  compressed.resize(comp_bound);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  std::vector<unsigned char> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width()));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height()));
  ihdr.push_back(16);  // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});
  write_bytes(path, out.data(), out.size());
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t count) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  const auto bytes = read_bytes(path);
  return fnv1a_bytes(bytes.data(), bytes.size());
}

}  // namespace xct
