#include "mafnet/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "mafnet/errors.hpp"

namespace mafnet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError("cannot open: " + path);
  return f;
}

bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}

// Reads one whitespace-delimited token, skipping '#' comments.
std::string next_token(std::FILE* f, const std::string& path, const char* field) {
  std::string tok;
  int c;
  while ((c = std::fgetc(f)) != EOF) {
    if (c == '#') {
      while ((c = std::fgetc(f)) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw FormatError(path + ": missing " + field);
  return tok;
}

std::int64_t parse_extent(const std::string& tok, const std::string& path, const char* field) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size() || v < 1 || v > (1 << 20)) {
      throw FormatError(path + ": bad " + field + " '" + tok + "'");
    }
    return static_cast<std::int64_t>(v);
  } catch (const FormatError&) {
    throw;
  } catch (...) {
    throw FormatError(path + ": bad " + field + " '" + tok + "'");
  }
}

void write_exact(std::FILE* f, const void* data, std::size_t bytes, const std::string& path) {
  if (std::fwrite(data, 1, bytes, f) != bytes) {
    throw FormatError("write failed: " + path);
  }
}

}  // namespace

void write_pfm(const DisparityMap& map, const std::string& path) {
  const std::int64_t h = map.height(), w = map.width();
  auto f = open_or_throw(path, "wb");
  const double scale = host_is_little_endian() ? -1.0 : 1.0;
  const std::string header =
      "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n" + std::to_string(scale) + "\n";
  write_exact(f.get(), header.data(), header.size(), path);
  std::vector<float> row(static_cast<std::size_t>(w));
  for (std::int64_t y = h - 1; y >= 0; --y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * w + x);
      row[static_cast<std::size_t>(x)] =
          map.valid[i] ? static_cast<float>(map.values[static_cast<std::int64_t>(i)]) : -1.0f;
    }
    write_exact(f.get(), row.data(), sizeof(float) * row.size(), path);
  }
}

DisparityMap read_pfm(const std::string& path) {
  auto f = open_or_throw(path, "rb");
  const std::string magic = next_token(f.get(), path, "magic");
  if (magic == "PF") {
    throw FormatError(path + ": color PFM not supported, expected grayscale 'Pf'");
  }
  if (magic != "Pf") {
    throw FormatError(path + ": bad magic '" + magic + "', expected 'Pf'");
  }
  const std::int64_t w = parse_extent(next_token(f.get(), path, "width"), path, "width");
  const std::int64_t h = parse_extent(next_token(f.get(), path, "height"), path, "height");
  const std::string scale_tok = next_token(f.get(), path, "scale");
  double scale = 0.0;
  try {
    std::size_t pos = 0;
    scale = std::stod(scale_tok, &pos);
    if (pos != scale_tok.size()) throw FormatError("");
  } catch (...) {
    throw FormatError(path + ": bad scale '" + scale_tok + "'");
  }
  if (scale == 0.0) throw FormatError(path + ": scale must be nonzero");
  const bool file_little = scale < 0.0;
  const bool swap = file_little != host_is_little_endian();

  DisparityMap map;
  map.values = Tensor{Shape{h, w}};
  map.valid.assign(static_cast<std::size_t>(h * w), 1);
  std::vector<float> row(static_cast<std::size_t>(w));
  for (std::int64_t y = h - 1; y >= 0; --y) {
    if (std::fread(row.data(), sizeof(float), row.size(), f.get()) != row.size()) {
      throw FormatError(path + ": truncated pixel data");
    }
    for (std::int64_t x = 0; x < w; ++x) {
      float v = row[static_cast<std::size_t>(x)];
      if (swap) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) | ((u & 0x0000FF00u) << 8) |
            ((u & 0x000000FFu) << 24);
        std::memcpy(&v, &u, 4);
      }
      map.values[y * w + x] = static_cast<double>(v);
      if (!(v >= 0.0f)) map.valid[static_cast<std::size_t>(y * w + x)] = 0;
    }
  }
  return map;
}

void write_pgm(const DisparityMap& map, double dmax, const std::string& path) {
  if (!(dmax > 0.0)) {
    throw ConfigError("write_pgm: dmax must be positive, got " + std::to_string(dmax));
  }
  const std::int64_t h = map.height(), w = map.width();
  auto f = open_or_throw(path, "wb");
  const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  write_exact(f.get(), header.data(), header.size(), path);
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * w + x);
      double v = map.valid[i] ? map.values[static_cast<std::int64_t>(i)] / dmax : 0.0;
      v = std::min(std::max(v, 0.0), 1.0);
      row[static_cast<std::size_t>(x)] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    write_exact(f.get(), row.data(), row.size(), path);
  }
}

void write_ppm(const Tensor& img, const std::string& path) {
  if (img.rank() != 3 || img.dim(0) != 3) {
    throw DimensionError("write_ppm: expected [3,H,W], got " + shape_str(img.shape()));
  }
  const std::int64_t h = img.dim(1), w = img.dim(2);
  auto f = open_or_throw(path, "wb");
  const std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  write_exact(f.get(), header.data(), header.size(), path);
  std::vector<unsigned char> row(static_cast<std::size_t>(3 * w));
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < 3; ++c) {
        double v = img[(c * h + y) * w + x];
        v = std::min(std::max(v, 0.0), 1.0);
        row[static_cast<std::size_t>(3 * x + c)] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
    write_exact(f.get(), row.data(), row.size(), path);
  }
}

Tensor read_ppm(const std::string& path) {
  auto f = open_or_throw(path, "rb");
  const std::string magic = next_token(f.get(), path, "magic");
  if (magic != "P6") {
    throw FormatError(path + ": bad magic '" + magic + "', expected 'P6'");
  }
  const std::int64_t w = parse_extent(next_token(f.get(), path, "width"), path, "width");
  const std::int64_t h = parse_extent(next_token(f.get(), path, "height"), path, "height");
  const std::string maxval = next_token(f.get(), path, "maxval");
  if (maxval != "255") {
    throw FormatError(path + ": unsupported maxval '" + maxval + "', expected 255");
  }
  // next_token consumed exactly one whitespace byte after the maxval.
  Tensor img{Shape{3, h, w}};
  std::vector<unsigned char> row(static_cast<std::size_t>(3 * w));
  for (std::int64_t y = 0; y < h; ++y) {
    if (std::fread(row.data(), 1, row.size(), f.get()) != row.size()) {
      throw FormatError(path + ": truncated pixel data");
    }
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < 3; ++c) {
        img[(c * h + y) * w + x] =
            static_cast<double>(row[static_cast<std::size_t>(3 * x + c)]) / 255.0;
      }
    }
  }
  return img;
}

}  // namespace mafnet
