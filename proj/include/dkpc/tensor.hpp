#ifndef DKPC_TENSOR_HPP
#define DKPC_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dkpc/error.hpp"
#include "dkpc/rng.hpp"

namespace dkpc {

// Dense row-major tensor, 32-bit float storage. Rank 1 (vectors) and rank 2
// (matrices) cover everything the model needs; scalars are rank-1 of size 1.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), 0.0f);
  }

  Tensor(std::vector<int> shape, std::vector<float> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != numel_of(shape_))
      throw DimensionError("tensor data length does not match shape");
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor uniform(std::vector<int> shape, Rng& rng, double lo = -0.1, double hi = 0.1) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }

  int rows() const {
    if (rank() != 2) throw DimensionError("rows() on non-matrix tensor");
    return shape_[0];
  }
  int cols() const {
    if (rank() != 2) throw DimensionError("cols() on non-matrix tensor");
    return shape_[1];
  }

  float& at(int i) { return data_[static_cast<std::size_t>(i)]; }
  float at(int i) const { return data_[static_cast<std::size_t>(i)]; }
  float& at(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  float at(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool all_finite() const {
    for (float v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw DimensionError("negative dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  static std::string shape_str(const std::vector<int>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

// A named trainable tensor. Gradients accumulate in double precision so that
// summing contributions over a batch does not lose mass to f32 rounding.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;
  bool freeze_first_row = false;  // PAD embedding row stays at zero

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.numel(), 0.0) {}

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

}  // namespace dkpc

#endif  // DKPC_TENSOR_HPP
