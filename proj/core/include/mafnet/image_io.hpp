#pragma once

#include <string>

#include "mafnet/disparity_map.hpp"

namespace mafnet {

// PFM, grayscale "Pf" only. Invalid pixels are stored as -1; on read, any
// negative sample is marked invalid but its raw value is kept. The scale
// line's sign records byte order (negative = little-endian); reads swap
// bytes when the file and host disagree. Rows are stored bottom to top.
void write_pfm(const DisparityMap& map, const std::string& path);
DisparityMap read_pfm(const std::string& path);

// 8-bit PGM preview: values mapped [0, dmax] -> [0, 255], invalid -> 0.
void write_pgm(const DisparityMap& map, double dmax, const std::string& path);

// Binary PPM (P6, maxval 255) <-> [3,H,W] doubles in [0,1].
void write_ppm(const Tensor& img, const std::string& path);
Tensor read_ppm(const std::string& path);

}  // namespace mafnet
