#include "mafnet/data.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace mafnet {

namespace {

// Separable Gaussian blur with clamped borders; sigma = radius/2.
void gaussian_blur(Tensor& img, std::int64_t radius) {
  if (radius < 1) return;
  const std::int64_t h = img.dim(0), w = img.dim(1);
  const double sigma = static_cast<double>(radius) / 2.0;
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::int64_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  Tensor tmp{img.shape()};
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::int64_t i = -radius; i <= radius; ++i) {
        const std::int64_t xx = std::min(std::max(x + i, std::int64_t{0}), w - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * img[y * w + xx];
      }
      tmp[y * w + x] = acc;
    }
  }
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::int64_t i = -radius; i <= radius; ++i) {
        const std::int64_t yy = std::min(std::max(y + i, std::int64_t{0}), h - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[yy * w + x];
      }
      img[y * w + x] = acc;
    }
  }
}

// Bilinear value noise: a coarse random grid interpolated back to full
// resolution. One octave contributes structure at roughly its cell size.
Tensor value_noise(std::int64_t h, std::int64_t w, std::int64_t cell, Rng& rng) {
  const std::int64_t gh = h / cell + 2, gw = w / cell + 2;
  Tensor grid{Shape{gh, gw}};
  for (std::int64_t i = 0; i < grid.size(); ++i) grid[i] = rng.uniform();
  Tensor out{Shape{h, w}};
  for (std::int64_t y = 0; y < h; ++y) {
    const double v = static_cast<double>(y) / static_cast<double>(cell);
    const std::int64_t iy = static_cast<std::int64_t>(v);
    const double fy = v - static_cast<double>(iy);
    for (std::int64_t x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(cell);
      const std::int64_t ix = static_cast<std::int64_t>(u);
      const double fx = u - static_cast<double>(ix);
      const double a = grid[iy * gw + ix], b = grid[iy * gw + ix + 1];
      const double c = grid[(iy + 1) * gw + ix], d = grid[(iy + 1) * gw + ix + 1];
      out[y * w + x] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d);
    }
  }
  return out;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_exact(std::FILE* f, const void* data, std::size_t bytes, const std::string& path) {
  if (std::fwrite(data, 1, bytes, f) != bytes) {
    throw FormatError("write failed: " + path);
  }
}

void read_exact(std::FILE* f, void* data, std::size_t bytes, const std::string& path,
                const char* what) {
  if (std::fread(data, 1, bytes, f) != bytes) {
    throw FormatError(path + ": truncated " + what);
  }
}

constexpr char kSampleMagic[8] = {'M', 'A', 'F', 'S', 'M', 'P', '0', '1'};

}  // namespace

StereoSample gen_synthetic_pair(std::uint64_t seed, std::int64_t h, std::int64_t w, double dmax) {
  if (h < 32 || w < 32 || h % 32 != 0 || w % 32 != 0) {
    throw ConfigError("gen_synthetic_pair: extents must be multiples of 32 and >= 32, got " +
                      std::to_string(h) + "x" + std::to_string(w));
  }
  if (dmax < 0.0 || dmax > static_cast<double>(w) / 4.0) {
    throw ConfigError("gen_synthetic_pair: dmax " + std::to_string(dmax) +
                      " outside [0, W/4] for W=" + std::to_string(w));
  }

  // Smooth disparity: blurred uniform noise rescaled to span [0, amp] with a
  // per-pair amplitude in [0.55, 0.85] * dmax. The candidate grid at quarter
  // resolution tops out at dmax - 4 full-resolution pixels, so a field that
  // always peaked exactly at dmax would put its summit outside the
  // representable range for every pair.
  Rng rng_disp(seed, 1);
  Tensor gt{Shape{h, w}};
  for (std::int64_t i = 0; i < gt.size(); ++i) gt[i] = rng_disp.uniform();
  // Strong blur keeps the field locally near-constant at matching-window
  // scale; rough fields make window correlation ill-posed at any feature
  // resolution.
  gaussian_blur(gt, w / 4);
  const double amp = (0.55 + 0.3 * rng_disp.uniform()) * dmax;
  double lo = gt[0], hi = gt[0];
  for (std::int64_t i = 1; i < gt.size(); ++i) {
    lo = std::min(lo, gt[i]);
    hi = std::max(hi, gt[i]);
  }
  if (dmax == 0.0 || hi == lo) {
    gt.fill(0.0);
  } else {
    // Standardize, then squash through a sigmoid. A heavily blurred field
    // concentrates near its midpoint after a min/max rescale, which makes a
    // single constant a cheap prediction; the squash pushes mass toward both
    // ends of (0, amp) while keeping the field smooth.
    double mean = 0.0;
    for (std::int64_t i = 0; i < gt.size(); ++i) mean += gt[i];
    mean /= static_cast<double>(gt.size());
    double var = 0.0;
    for (std::int64_t i = 0; i < gt.size(); ++i) var += (gt[i] - mean) * (gt[i] - mean);
    const double sd = std::sqrt(var / static_cast<double>(gt.size()));
    constexpr double kFieldGain = 1.8;
    for (std::int64_t i = 0; i < gt.size(); ++i) {
      const double z = (gt[i] - mean) / sd;
      gt[i] = amp / (1.0 + std::exp(-kFieldGain * z));
    }
  }

  // Right image: multi-octave value noise per channel. The mid octaves put
  // texture at the scales the quarter-resolution matcher actually sees; the
  // fine octaves localize the full-resolution refinement.
  Rng rng_tex(seed, 2);
  StereoSample s;
  s.right = Tensor{Shape{3, h, w}};
  constexpr std::int64_t kCells[] = {16, 8, 4, 2};
  constexpr double kWeights[] = {0.40, 0.35, 0.15, 0.10};  // sums to 1: stays in [0,1]
  for (std::int64_t c = 0; c < 3; ++c) {
    double* plane = s.right.data() + c * h * w;
    for (std::int64_t i = 0; i < h * w; ++i) plane[i] = 0.0;
    for (int o = 0; o < 4; ++o) {
      const Tensor oct = value_noise(h, w, kCells[o], rng_tex);
      for (std::int64_t i = 0; i < h * w; ++i) plane[i] += kWeights[o] * oct[i];
    }
  }

  // Left image by sampling the right at x - gt(x,y): the ground-truth
  // relation holds exactly by construction. Sources left of the frame are
  // invalid (clamped sample kept for visual continuity).
  s.left = Tensor{Shape{3, h, w}};
  s.gt.values = gt;
  s.gt.valid.assign(static_cast<std::size_t>(h * w), 1);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const double xs = static_cast<double>(x) - gt[y * w + x];
      const bool ok = xs >= 0.0;
      if (!ok) s.gt.valid[static_cast<std::size_t>(y * w + x)] = 0;
      const double xc = ok ? xs : 0.0;
      const std::int64_t x0 = std::min(static_cast<std::int64_t>(xc), w - 1);
      const std::int64_t x1 = std::min(x0 + 1, w - 1);
      const double frac = xc - static_cast<double>(x0);
      for (std::int64_t c = 0; c < 3; ++c) {
        const double* plane = s.right.data() + c * h * w;
        s.left[(c * h + y) * w + x] =
            (1.0 - frac) * plane[y * w + x0] + frac * plane[y * w + x1];
      }
    }
  }
  return s;
}

void write_sample(const StereoSample& s, const std::string& path) {
  const std::int64_t h = s.left.dim(1), w = s.left.dim(2);
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw FormatError("cannot open for writing: " + path);
  write_exact(f.get(), kSampleMagic, sizeof(kSampleMagic), path);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(w)};
  write_exact(f.get(), dims, sizeof(dims), path);
  write_exact(f.get(), s.left.data(), sizeof(double) * static_cast<std::size_t>(s.left.size()), path);
  write_exact(f.get(), s.right.data(), sizeof(double) * static_cast<std::size_t>(s.right.size()), path);
  write_exact(f.get(), s.gt.values.data(), sizeof(double) * static_cast<std::size_t>(s.gt.values.size()), path);
  write_exact(f.get(), s.gt.valid.data(), s.gt.valid.size(), path);
}

StereoSample read_sample(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw FormatError("cannot open: " + path);
  char magic[8];
  read_exact(f.get(), magic, sizeof(magic), path, "magic");
  if (std::memcmp(magic, kSampleMagic, sizeof(magic)) != 0) {
    throw FormatError(path + ": bad magic, not a sample file");
  }
  std::uint64_t dims[2];
  read_exact(f.get(), dims, sizeof(dims), path, "extents");
  const std::int64_t h = static_cast<std::int64_t>(dims[0]);
  const std::int64_t w = static_cast<std::int64_t>(dims[1]);
  if (h < 1 || w < 1 || h > (1 << 20) || w > (1 << 20)) {
    throw FormatError(path + ": implausible extents");
  }
  StereoSample s;
  s.left = Tensor{Shape{3, h, w}};
  s.right = Tensor{Shape{3, h, w}};
  s.gt.values = Tensor{Shape{h, w}};
  s.gt.valid.resize(static_cast<std::size_t>(h * w));
  read_exact(f.get(), s.left.data(), sizeof(double) * static_cast<std::size_t>(s.left.size()), path, "left image");
  read_exact(f.get(), s.right.data(), sizeof(double) * static_cast<std::size_t>(s.right.size()), path, "right image");
  read_exact(f.get(), s.gt.values.data(), sizeof(double) * static_cast<std::size_t>(s.gt.values.size()), path, "disparity");
  read_exact(f.get(), s.gt.valid.data(), s.gt.valid.size(), path, "validity mask");
  check_finite(s.left, "read_sample left");
  check_finite(s.right, "read_sample right");
  check_finite(s.gt.values, "read_sample disparity");
  return s;
}

}  // namespace mafnet
