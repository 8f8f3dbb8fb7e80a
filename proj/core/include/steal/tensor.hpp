#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace steal {

// Dense row-major tensor of small rank. Float for the training path,
// double where tests demand 64-bit math.
template <typename S>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), S(0));
  }

  TensorT(std::initializer_list<int> shape)
      : TensorT(std::vector<int>(shape)) {}

  static TensorT full(std::vector<int> shape, S value) {
    TensorT t(std::move(shape));
    t.fill(value);
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }

  S& operator[](std::size_t i) { return data_[i]; }
  const S& operator[](std::size_t i) const { return data_[i]; }

  S& at(int i, int j) { return data_[idx2(i, j)]; }
  const S& at(int i, int j) const { return data_[idx2(i, j)]; }
  S& at(int i, int j, int k) { return data_[idx3(i, j, k)]; }
  const S& at(int i, int j, int k) const { return data_[idx3(i, j, k)]; }
  S& at(int i, int j, int k, int l) { return data_[idx4(i, j, k, l)]; }
  const S& at(int i, int j, int k, int l) const { return data_[idx4(i, j, k, l)]; }
  S& at(int i, int j, int k, int l, int m) { return data_[idx5(i, j, k, l, m)]; }
  const S& at(int i, int j, int k, int l, int m) const {
    return data_[idx5(i, j, k, l, m)];
  }

  void fill(S v) { std::fill(data_.begin(), data_.end(), v); }

  void zero() { fill(S(0)); }

  bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) os << "x";
      os << shape_[i];
    }
    os << ")";
    return os.str();
  }

  static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw std::invalid_argument("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

 private:
  std::size_t idx2(int i, int j) const {
    assert(rank() == 2);
    return static_cast<std::size_t>(i) * shape_[1] + j;
  }
  std::size_t idx3(int i, int j, int k) const {
    assert(rank() == 3);
    return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
  }
  std::size_t idx4(int i, int j, int k, int l) const {
    assert(rank() == 4);
    return ((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l;
  }
  std::size_t idx5(int i, int j, int k, int l, int m) const {
    assert(rank() == 5);
    return (((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l) *
               shape_[4] +
           m;
  }

  std::vector<int> shape_;
  std::vector<S> data_;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace steal
