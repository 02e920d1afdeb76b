#pragma once

#include <string>

#include "fpc/matrix.hpp"

namespace fpc {

// Reads a PGM image (P2 ASCII or P5 binary, maxval <= 65535) into a matrix of
// intensities, one row per scanline.
Matrix load_pgm(const std::string& path);

// Writes a P2 (ASCII) PGM with maxval 255; values are clamped and rounded.
void save_pgm(const Matrix& pixels, const std::string& path);

}  // namespace fpc
