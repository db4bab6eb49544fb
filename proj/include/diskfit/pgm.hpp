#pragma once

#include <filesystem>

#include "diskfit/image.hpp"

namespace diskfit {

/// Reads a P2 (ASCII) or P5 (binary) PGM file, maxval up to 65535.
/// Comments are tolerated anywhere in the header.
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes a binary (P5) PGM. Pixel values are rounded and clamped to
/// [0, maxval]; 16-bit payloads are big-endian per the format.
void write_pgm(const GrayImage& image, const std::filesystem::path& path, int maxval = 255);

/// ASCII (P2) variant, mainly for debugging small images.
void write_pgm_ascii(const GrayImage& image, const std::filesystem::path& path, int maxval = 255);

} // namespace diskfit
