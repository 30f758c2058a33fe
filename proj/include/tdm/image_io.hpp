#pragma once

#include <string>

#include "tdm/image.hpp"

namespace tdm {

// PGM (P5): 8-bit by default, 16-bit when maxval > 255; intensities are
// mapped linearly between [0, 1] and [0, maxval]. Values outside [0, 1]
// are clipped on write.
void write_pgm(const std::string& path, const Image& img, int maxval = 255);
Image read_pgm(const std::string& path);

// PFM (Pf): 32-bit float, scale -1.0 (little-endian), rows bottom-to-top.
// Lossless up to the float32 round; used for intermediate storage.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

}  // namespace tdm
