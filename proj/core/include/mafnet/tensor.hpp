#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "mafnet/errors.hpp"

namespace mafnet {

class Rng;

using Shape = std::vector<std::int64_t>;

std::int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

// Dense row-major array of doubles. Plain value type: copying copies data.
// Double precision throughout; desk-scale sizes keep that affordable and the
// gradient checks honest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor full(Shape shape, double v);
  static Tensor arange(std::int64_t n);
  static Tensor uniform(Shape shape, Rng& rng, double lo, double hi);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int axis) const;
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  // Multi-index access, mainly for tests and small reference code.
  double& at(std::initializer_list<std::int64_t> idx);
  double at(std::initializer_list<std::int64_t> idx) const;

  Tensor reshaped(Shape new_shape) const;

  void fill(double v);

 private:
  std::int64_t flat_index(std::initializer_list<std::int64_t> idx) const;

  Shape shape_;
  std::vector<double> data_;
};

bool same_shape(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Throws NumericsError if any element is NaN or infinite.
void check_finite(const Tensor& t, const char* what);

}  // namespace mafnet
