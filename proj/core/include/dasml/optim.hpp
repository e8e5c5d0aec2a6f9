#pragma once

#include <span>

#include "dasml/types.hpp"

namespace dasml {

// Momentum update, exactly in this order:
//   v      <- momentum * v + lr * grad
//   params <- params - v
// The learning rate scales the gradient inside the velocity.
inline void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                              std::span<double> velocity, double lr, double momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw DataError("sgd_momentum_step: shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + lr * grads[i];
    params[i] -= velocity[i];
  }
}

}  // namespace dasml
