#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "f3a/model.h"

namespace f3a {

// Binary PGM (P5, maxval 255), rows x cols, values min-max scaled to 0..255.
// A constant field maps to 0.
std::vector<uint8_t> encode_pgm(int rows, int cols, std::span<const double> values);

// Binary PPM (P6): the odor field as gray with selected tokens' red channel
// set to 255.
std::vector<uint8_t> encode_overlay_ppm(int rows, int cols, std::span<const double> values,
                                        const IndexSet& selected);

void write_bytes(const std::filesystem::path& path, std::span<const uint8_t> bytes);

}  // namespace f3a
