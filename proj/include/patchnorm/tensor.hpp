#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "patchnorm/errors.hpp"

namespace patchnorm {

// Dense rank-4 layout: sample x channel x height x width, row-major.
// Rank-2 data is represented as N x C x 1 x 1.
struct Shape {
  int64_t n = 0, c = 0, h = 0, w = 0;

  int64_t numel() const { return n * c * h * w; }
  int64_t spatial() const { return h * w; }
  bool operator==(const Shape&) const = default;

  std::string str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
  }
};

// Value-semantic handle onto a shared buffer. Operations never mutate their
// inputs; the gradient buffer exists exactly when requires_grad is set and
// always matches the value buffer in length.
template <class S>
class TensorT {
 public:
  using scalar_type = S;

  TensorT() = default;

  explicit TensorT(Shape shape, bool requires_grad = false)
      : impl_(std::make_shared<Impl>()) {
    if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
      throw DimensionError("tensor shape has negative extent: " + shape.str());
    impl_->shape = shape;
    impl_->value.assign(static_cast<size_t>(shape.numel()), S(0));
    impl_->requires_grad = requires_grad;
    if (requires_grad) impl_->grad.assign(impl_->value.size(), S(0));
  }

  static TensorT from_data(Shape shape, std::vector<S> data, bool requires_grad = false) {
    TensorT t(shape, requires_grad);
    if (static_cast<int64_t>(data.size()) != shape.numel())
      throw DimensionError("tensor data length " + std::to_string(data.size()) +
                           " does not match shape " + shape.str());
    t.impl_->value = std::move(data);
    return t;
  }

  static TensorT full(Shape shape, S value, bool requires_grad = false) {
    TensorT t(shape, requires_grad);
    for (auto& v : t.impl_->value) v = value;
    return t;
  }

  static TensorT scalar(S value, bool requires_grad = false) {
    return full(Shape{1, 1, 1, 1}, value, requires_grad);
  }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int64_t numel() const { return impl_->shape.numel(); }
  bool requires_grad() const { return impl_ && impl_->requires_grad; }

  std::span<const S> values() const { return impl_->value; }
  std::span<S> values() { return impl_->value; }
  std::span<const S> grad() const { return impl_->grad; }
  std::span<S> grad() { return impl_->grad; }

  int64_t index(int64_t n, int64_t c, int64_t h, int64_t w) const {
    const Shape& s = impl_->shape;
    return ((n * s.c + c) * s.h + h) * s.w + w;
  }

  S at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return impl_->value[static_cast<size_t>(index(n, c, h, w))];
  }
  S& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return impl_->value[static_cast<size_t>(index(n, c, h, w))];
  }

  void set_requires_grad(bool on) {
    impl_->requires_grad = on;
    if (on)
      impl_->grad.assign(impl_->value.size(), S(0));
    else
      impl_->grad.clear();
  }

  void zero_grad() {
    for (auto& g : impl_->grad) g = S(0);
  }

  // Deep copy of the values; the copy gets a fresh zero gradient buffer.
  TensorT clone() const {
    TensorT t(impl_->shape, impl_->requires_grad);
    t.impl_->value = impl_->value;
    return t;
  }

  bool shares_storage(const TensorT& other) const { return impl_ == other.impl_; }

  bool all_finite() const {
    for (S v : impl_->value)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

 private:
  struct Impl {
    Shape shape;
    std::vector<S> value;
    std::vector<S> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace patchnorm
