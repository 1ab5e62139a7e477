#include "mafnet/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include "mafnet/errors.hpp"

namespace mafnet {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'F', 'C', 'K', 'P', 'T', '1'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put(std::FILE* f, const void* data, std::size_t bytes, const std::string& path) {
  if (std::fwrite(data, 1, bytes, f) != bytes) {
    throw FormatError("checkpoint write failed: " + path);
  }
}

void get(std::FILE* f, void* data, std::size_t bytes, const std::string& path, const char* what) {
  if (std::fread(data, 1, bytes, f) != bytes) {
    throw FormatError(path + ": truncated checkpoint (" + what + ")");
  }
}

void put_u64(std::FILE* f, std::uint64_t v, const std::string& path) {
  put(f, &v, sizeof(v), path);
}

std::uint64_t get_u64(std::FILE* f, const std::string& path, const char* what) {
  std::uint64_t v = 0;
  get(f, &v, sizeof(v), path, what);
  return v;
}

void put_tensor_data(std::FILE* f, const Tensor& t, const std::string& path) {
  put(f, t.data(), sizeof(double) * static_cast<std::size_t>(t.size()), path);
}

void get_tensor_data(std::FILE* f, Tensor& t, const std::string& path, const char* what) {
  get(f, t.data(), sizeof(double) * static_cast<std::size_t>(t.size()), path, what);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw FormatError("cannot open for writing: " + path);
  put(f.get(), kMagic, sizeof(kMagic), path);
  put_u64(f.get(), ckpt.config_hash, path);
  put_u64(f.get(), ckpt.step, path);
  for (const std::uint64_t w : ckpt.rng_state) put_u64(f.get(), w, path);
  put_u64(f.get(), static_cast<std::uint64_t>(ckpt.params.size()), path);
  for (const ParamState& p : ckpt.params) {
    if (!same_shape(p.value, p.m) || !same_shape(p.value, p.v)) {
      throw ContractError("checkpoint: moment shape mismatch for '" + p.name + "'");
    }
    put_u64(f.get(), p.name.size(), path);
    put(f.get(), p.name.data(), p.name.size(), path);
    put_u64(f.get(), static_cast<std::uint64_t>(p.value.rank()), path);
    for (const std::int64_t d : p.value.shape()) {
      put_u64(f.get(), static_cast<std::uint64_t>(d), path);
    }
    put_tensor_data(f.get(), p.value, path);
    put_tensor_data(f.get(), p.m, path);
    put_tensor_data(f.get(), p.v, path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw FormatError("cannot open: " + path);
  char magic[8];
  get(f.get(), magic, sizeof(magic), path, "magic");
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw FormatError(path + ": bad magic, not a checkpoint");
  }
  Checkpoint ckpt;
  ckpt.config_hash = get_u64(f.get(), path, "config hash");
  ckpt.step = get_u64(f.get(), path, "step");
  for (std::uint64_t& w : ckpt.rng_state) w = get_u64(f.get(), path, "rng state");
  const std::uint64_t n = get_u64(f.get(), path, "param count");
  if (n > 1u << 20) throw FormatError(path + ": implausible parameter count");
  ckpt.params.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    ParamState p;
    const std::uint64_t name_len = get_u64(f.get(), path, "name length");
    if (name_len > 4096) throw FormatError(path + ": implausible name length");
    p.name.resize(name_len);
    get(f.get(), p.name.data(), name_len, path, "name");
    const std::uint64_t rank = get_u64(f.get(), path, "rank");
    if (rank > 8) throw FormatError(path + ": implausible rank");
    Shape shape(rank);
    std::int64_t total = 1;
    for (std::uint64_t a = 0; a < rank; ++a) {
      const std::uint64_t d = get_u64(f.get(), path, "extent");
      if (d < 1 || d > (1u << 30)) throw FormatError(path + ": implausible extent");
      shape[a] = static_cast<std::int64_t>(d);
      total *= shape[a];
      if (total > (1ll << 32)) throw FormatError(path + ": implausible tensor size");
    }
    p.value = Tensor{shape};
    p.m = Tensor{shape};
    p.v = Tensor{shape};
    get_tensor_data(f.get(), p.value, path, "values");
    get_tensor_data(f.get(), p.m, path, "first moment");
    get_tensor_data(f.get(), p.v, path, "second moment");
    ckpt.params.push_back(std::move(p));
  }
  return ckpt;
}

}  // namespace mafnet
