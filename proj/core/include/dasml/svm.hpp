#pragma once

#include <cstdint>
#include <vector>

#include "dasml/dataset.hpp"

namespace dasml::ml {

struct SvmConfig {
  double c = 1.0;
  int degree = 3;
  double tol = 1e-3;                  // KKT violation tolerance
  std::size_t max_steps = 1'000'000;  // optimization steps before giving up
  // Inner-product scale in K(u,v) = (1 + gamma * u.v)^degree; 0 selects
  // 1/dim. High-dimensional spiky features make the unscaled cubic kernel
  // numerically intractable for any SMO-type solver.
  double gamma = 0.0;
};

// Soft-margin kernel machine with K(u,v) = (1 + gamma * u.v)^degree.
struct SvmModel {
  int degree = 3;
  double c = 1.0;
  double gamma = 1.0;
  double bias = 0.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i, in [-C, C]

  // training diagnostics
  std::size_t steps = 0;
  std::uint64_t kernel_evals = 0;

  double decision(const std::vector<double>& v) const;
};

double poly_kernel(const std::vector<double>& a, const std::vector<double>& b, int degree,
                   double gamma = 1.0);

// Sequential minimal optimization on the dual until every KKT violation is
// below tol. Deterministic: candidate sweeps run in fixed index order.
// Throws NumericError when the step cap is hit.
SvmModel train_svm(const Dataset& train, const SvmConfig& cfg = {});

}  // namespace dasml::ml
