#include "mafnet/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "mafnet/rng.hpp"

namespace mafnet {

std::int64_t shape_size(const Shape& s) {
  std::int64_t n = 1;
  for (std::int64_t d : s) {
    if (d < 0) throw DimensionError("negative extent in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << s[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)),
      data_(static_cast<std::size_t>(shape_size(shape_)), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != shape_size(shape_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::scalar(double v) {
  Tensor t{Shape{}};
  t.data_ = {v};
  return t;
}

Tensor Tensor::full(Shape shape, double v) {
  Tensor t{std::move(shape)};
  t.fill(v);
  return t;
}

Tensor Tensor::arange(std::int64_t n) {
  Tensor t{Shape{n}};
  for (std::int64_t i = 0; i < n; ++i) t.data_[static_cast<std::size_t>(i)] = static_cast<double>(i);
  return t;
}

Tensor Tensor::uniform(Shape shape, Rng& rng, double lo, double hi) {
  Tensor t{std::move(shape)};
  for (auto& v : t.data_) v = rng.uniform(lo, hi);
  return t;
}

std::int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape_));
  }
  return shape_[static_cast<std::size_t>(axis)];
}

std::int64_t Tensor::flat_index(std::initializer_list<std::int64_t> idx) const {
  if (static_cast<int>(idx.size()) != rank()) {
    throw DimensionError("index rank " + std::to_string(idx.size()) +
                         " does not match tensor shape " + shape_str(shape_));
  }
  std::int64_t flat = 0;
  int axis = 0;
  for (std::int64_t i : idx) {
    const std::int64_t extent = shape_[static_cast<std::size_t>(axis)];
    if (i < 0 || i >= extent) {
      throw DimensionError("index " + std::to_string(i) + " out of bounds for axis " +
                           std::to_string(axis) + " of shape " + shape_str(shape_));
    }
    flat = flat * extent + i;
    ++axis;
  }
  return flat;
}

double& Tensor::at(std::initializer_list<std::int64_t> idx) {
  return data_[static_cast<std::size_t>(flat_index(idx))];
}

double Tensor::at(std::initializer_list<std::int64_t> idx) const {
  return data_[static_cast<std::size_t>(flat_index(idx))];
}

Tensor Tensor::reshaped(Shape new_shape) const {
  if (shape_size(new_shape) != size()) {
    throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(new_shape));
  }
  Tensor out;
  out.shape_ = std::move(new_shape);
  out.data_ = data_;
  return out;
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) {
    throw DimensionError("max_abs_diff shape mismatch: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  double m = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void check_finite(const Tensor& t, const char* what) {
  for (std::int64_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) {
      throw NumericsError(std::string(what) + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace mafnet
