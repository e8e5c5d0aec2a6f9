#include "dasml/tensor.hpp"

#include <cmath>
#include <string>

namespace dasml::cnn {

void Tensor::check_finite(const char* what) const {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite tensor value");
}

}  // namespace dasml::cnn
