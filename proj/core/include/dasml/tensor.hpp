#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "dasml/types.hpp"

namespace dasml::cnn {

// Dense row-major value container, up to 4 dims. Layers here work on
// single-sample (channels, height, width) tensors; the batch loop lives in
// the trainer.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::initializer_list<std::size_t> d) : dims(d) {
    std::size_t n = 1;
    for (std::size_t x : dims) n *= x;
    v.assign(n, 0.0);
  }

  std::size_t size() const { return v.size(); }
  std::size_t dim(std::size_t i) const { return dims[i]; }

  // (channel, row, col) accessors for rank-3 tensors
  double at3(std::size_t c, std::size_t h, std::size_t w) const {
    return v[(c * dims[1] + h) * dims[2] + w];
  }
  double& at3(std::size_t c, std::size_t h, std::size_t w) {
    return v[(c * dims[1] + h) * dims[2] + w];
  }
  // (filter, channel, row, col) accessors for rank-4 tensors
  double at4(std::size_t f, std::size_t c, std::size_t h, std::size_t w) const {
    return v[((f * dims[1] + c) * dims[2] + h) * dims[3] + w];
  }
  double& at4(std::size_t f, std::size_t c, std::size_t h, std::size_t w) {
    return v[((f * dims[1] + c) * dims[2] + h) * dims[3] + w];
  }

  bool same_shape(const Tensor& o) const { return dims == o.dims; }
  void check_finite(const char* what) const;

  bool operator==(const Tensor&) const = default;
};

}  // namespace dasml::cnn
