// shaasr/tensor.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_TENSOR_HPP_
#define SHAASR_TENSOR_HPP_

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shaasr/error.hpp"

namespace shaasr {

/// Dense row-major 64-bit float tensor with an optional gradient buffer.
/// Values are required to stay finite; ops validate this after computing.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    SHAASR_CHECK(data_.size() == checked_size(shape_), ErrKind::kData,
                 "dimension error: data length %zu does not match shape product %zu",
                 data_.size(), checked_size(shape_));
  }

  /// 1-D convenience constructor.
  static Tensor vector(std::initializer_list<double> v) {
    return Tensor({v.size()}, std::vector<double>(v));
  }

  /// 2-D convenience constructor (row-major rows of equal length).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> flat;
    flat.reserve(r * c);
    for (const auto& row : rows) {
      SHAASR_CHECK(row.size() == c, ErrKind::kData, "dimension error: ragged matrix rows");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(flat));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// 2-D element access.
  double at2(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& at2(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void check_finite(const char* where) const {
    SHAASR_CHECK(all_finite(), ErrKind::kData, "numeric error: non-finite value in %s", where);
  }

  // --- optional gradient buffer -------------------------------------------

  bool has_grad() const { return grad_.has_value(); }

  /// Allocates (zeroed) if missing; shape always mirrors the value.
  std::vector<double>& grad() {
    if (!grad_) grad_.emplace(data_.size(), 0.0);
    return *grad_;
  }
  const std::vector<double>& grad() const {
    SHAASR_CHECK(grad_.has_value(), ErrKind::kData, "numeric error: tensor has no grad buffer");
    return *grad_;
  }

  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
  }
  void drop_grad() { grad_.reset(); }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  static Tensor full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  /// Glorot-style uniform init in (-a, a), a = sqrt(6 / (fan_in + fan_out)).
  static Tensor glorot(std::vector<std::size_t> shape, std::size_t fan_in,
                       std::size_t fan_out, std::mt19937_64& rng) {
    double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-a, a);
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = dist(rng);
    return t;
  }

 private:
  static std::size_t checked_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      SHAASR_CHECK(d > 0, ErrKind::kData, "dimension error: zero-sized tensor dim");
      n *= d;
    }
    return shape.empty() ? 0 : n;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  std::optional<std::vector<double>> grad_;
};

inline std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.rank(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.shape()[i]);
  }
  return s + "]";
}

}  // namespace shaasr

#endif  // SHAASR_TENSOR_HPP_
