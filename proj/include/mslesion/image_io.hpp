#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mslesion/image.hpp"

namespace msl {

// Reads a PGM (P2 or P5, maxval <= 255) or an 8-bit grayscale PNG.
GrayImage load_image(const std::filesystem::path& path);

// P5, maxval 255; values are rounded to the nearest integer and clamped.
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

// 16-bit P5 (maxval 65535, big-endian) used for label maps.
void save_pgm16(std::span<const std::uint32_t> values, int width, int height,
                const std::filesystem::path& path);
std::vector<std::uint32_t> load_pgm16(const std::filesystem::path& path, int& width, int& height);

// RGB overlay writers: grayscale content with label boundaries / mask edges in red.
void save_overlay(const GrayImage& img, std::span<const std::uint32_t> labels,
                  const std::filesystem::path& path);
void save_overlay(const GrayImage& img, const BinaryMask& mask,
                  const std::filesystem::path& path);

// 8-bit RGB PNG codec (writer used by the overlays; reader used in tests).
void save_png_rgb(std::span<const std::uint8_t> rgb, int width, int height,
                  const std::filesystem::path& path);
std::vector<std::uint8_t> load_png_rgb(const std::filesystem::path& path, int& width, int& height);

}  // namespace msl
