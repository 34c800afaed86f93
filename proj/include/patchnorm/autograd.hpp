#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "patchnorm/errors.hpp"
#include "patchnorm/tensor.hpp"

namespace patchnorm {

// Reverse-mode tape. Operations that can see a non-null tape push one
// backward step each; steps are recorded in execution (topological) order.
// backward() seeds d(loss)/d(loss) = 1, replays the steps in reverse exactly
// once and consumes the tape. Single-owner: not safe for concurrent use.
template <class S>
class TapeT {
 public:
  void record(std::function<void()> backward_step) {
    nodes_.push_back(std::move(backward_step));
  }

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  void backward(TensorT<S>& loss) {
    if (!loss.defined() || loss.numel() != 1)
      throw UsageError("backward: loss must be a scalar tensor");
    if (!loss.requires_grad())
      throw UsageError("backward: loss was not recorded on the tape");
    loss.grad()[0] += S(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    nodes_.clear();
  }

 private:
  std::vector<std::function<void()>> nodes_;
};

using TapeF = TapeT<float>;
using TapeD = TapeT<double>;

}  // namespace patchnorm
