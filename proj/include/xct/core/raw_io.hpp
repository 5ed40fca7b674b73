#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xct/core/grid.hpp"

namespace xct {

// Raw frame files are float32 little-endian, row-major, no header; shape
// travels in a human-readable text sidecar next to the file.

void write_raw_f32(const std::string& path, const float* data, std::size_t count);
void write_raw_f32(const std::string& path, const Image<float>& img);

std::vector<float> read_raw_f32(const std::string& path, std::size_t expected_count);
Image<float> read_raw_f32_image(const std::string& path, int height, int width);

// Writes `text` atomically enough for our purposes (single write).
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// 16-bit grayscale exporters. Values are mapped linearly from [lo, hi] to
// [0, 65535] with clamping; callers pick lo/hi (e.g. image min/max).
void write_pgm16(const std::string& path, const Image<float>& img, float lo, float hi);
void write_png16(const std::string& path, const Image<float>& img, float lo, float hi);

// FNV-1a over a file's bytes; used to stamp input provenance into run
// manifests. Throws if the file cannot be read.
std::uint64_t fnv1a_file(const std::string& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t count);

}  // namespace xct
