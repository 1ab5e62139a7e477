#pragma once

#include <string>

#include "mafnet/disparity_map.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {

// One rectified pair with exact ground truth. The defining relation: for
// every valid gt pixel, left(x, y) equals the right image sampled at
// (x - gt(x, y), y) with linear interpolation.
struct StereoSample {
  Tensor left;   // [3, H, W], values in [0, 1]
  Tensor right;  // [3, H, W]
  DisparityMap gt;
};

// Deterministic synthetic pair: a smooth disparity field (Gaussian-blurred
// noise rescaled to [0, dmax]) over a textured right image; the left image
// is resampled from the right along the disparity, so the ground truth is
// exact by construction. Pixels whose source column falls outside the frame
// are marked invalid. H, W must be multiples of 32; dmax must not exceed W/4.
StereoSample gen_synthetic_pair(std::uint64_t seed, std::int64_t h, std::int64_t w, double dmax);

// Whole-sample binary container (magic "MAFSMP01", extents, raw doubles,
// validity bytes). Little-endian, intended as scratch interchange between
// gen-data and train/eval.
void write_sample(const StereoSample& s, const std::string& path);
StereoSample read_sample(const std::string& path);

}  // namespace mafnet
