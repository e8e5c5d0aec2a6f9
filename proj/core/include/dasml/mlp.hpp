#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dasml/dataset.hpp"

namespace dasml::ml {

struct MlpConfig {
  std::size_t hidden = 5;
  std::size_t epochs = 50;
  double lr = 1e-4;
  double momentum = 0.9;
  std::size_t batch = 128;
  std::uint64_t seed = 0;
};

// in -> tanh hidden -> softmax over {Other, Excavator}.
struct MlpModel {
  std::size_t in_dim = 0;
  std::size_t hidden = 5;
  std::vector<double> w1;  // in_dim x hidden
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden x 2
  std::vector<double> b2;  // 2

  std::array<double, 2> forward(const std::vector<double>& x) const;
};

struct MlpGrads {
  std::vector<double> w1, b1, w2, b2;
  void zero(const MlpModel& m);
};

// Seeded uniform init scaled by 1/sqrt(fan-in); guarantees distinct hidden
// units (all-zero init would freeze them identical).
MlpModel init_mlp(std::size_t in_dim, std::size_t hidden, std::uint64_t seed);

// Summed cross-entropy over the batch plus gradients (when g != nullptr).
double mlp_loss_grad(const MlpModel& m, const std::vector<const std::vector<double>*>& xs,
                     const std::vector<int>& ys, MlpGrads* g);

// Mini-batch gradient descent with the shared momentum update; deterministic
// under a fixed seed. Throws NumericError on divergence.
MlpModel train_mlp(const Dataset& train, const MlpConfig& cfg = {});

}  // namespace dasml::ml
