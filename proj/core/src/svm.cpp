#include "dasml/svm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <cstdio>
#include <cstdlib>

namespace dasml::ml {

double poly_kernel(const std::vector<double>& a, const std::vector<double>& b, int degree,
                   double gamma) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double k = 1.0 + gamma * dot;
  double out = 1.0;
  for (int d = 0; d < degree; ++d) out *= k;
  return out;
}

double SvmModel::decision(const std::vector<double>& v) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i)
    f += coef[i] * poly_kernel(support_vectors[i], v, degree, gamma);
  return f;
}

namespace {

// Sequential minimal optimization with maximal-violating-pair selection
// (the b_up/b_low form). The cache holds F_i = sum_j alpha_j y_j K_ij - y_i,
// which never references the threshold, so the update is exact and the
// stopping rule "largest KKT violation below tol" is read directly off
// b_low - b_up. Fully deterministic: argmin/argmax ties resolve to the
// lowest index.
class SmoSolver {
 public:
  SmoSolver(const Dataset& train, const SvmConfig& cfg) : d_(train), cfg_(cfg) {
    gamma_ = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(train.dim);
    n_ = d_.size();
    y_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) y_[i] = d_.y[i] == 1 ? 1.0 : -1.0;
    alpha_.assign(n_, 0.0);
    f_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) f_[i] = -y_[i];
    // The cache updates walk whole kernel rows; precompute the Gram matrix
    // when it fits comfortably in memory.
    if (n_ <= 7000) {
      gram_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double k = poly_kernel(d_.x[i], d_.x[j], cfg_.degree, gamma_);
          gram_[i * n_ + j] = k;
          gram_[j * n_ + i] = k;
        }
      }
      kernel_evals_ += (n_ * (n_ + 1)) / 2;
    }
  }

  SvmModel solve() {
    while (true) {
      // i: most violating member of I_up, j: of I_low
      std::size_t i = n_, j = n_;
      double b_up = 0.0, b_low = 0.0;
      const double edge = 1e-9 * cfg_.c;  // treat near-bound alphas as bound
      for (std::size_t t = 0; t < n_; ++t) {
        const bool below_c = alpha_[t] < cfg_.c - edge;
        const bool above_0 = alpha_[t] > edge;
        const bool in_up = (y_[t] > 0.0 && below_c) || (y_[t] < 0.0 && above_0);
        const bool in_low = (y_[t] > 0.0 && above_0) || (y_[t] < 0.0 && below_c);
        if (in_up && (i == n_ || f_[t] < b_up)) {
          i = t;
          b_up = f_[t];
        }
        if (in_low && (j == n_ || f_[t] > b_low)) {
          j = t;
          b_low = f_[t];
        }
      }
      if (i == n_ || j == n_ || b_low - b_up < 2.0 * cfg_.tol) {
        bias_ = -(b_up + b_low) / 2.0;
        break;
      }
      if (std::getenv("DASML_SVM_TRACE") && steps_ % 100000 == 0)
        std::fprintf(stderr, "step=%zu viol=%.6f i=%zu j=%zu ai=%.9f aj=%.9f fi=%.4f fj=%.4f\n",
                     steps_, b_low - b_up, i, j, alpha_[i], alpha_[j], f_[i], f_[j]);
      if (steps_ >= cfg_.max_steps)
        throw NumericError("train_svm: no convergence after " + std::to_string(steps_) +
                           " steps (max violation " + std::to_string(b_low - b_up) + ", " +
                           std::to_string(kernel_evals_) + " kernel evaluations)");
      take_step(i, j);
    }
    return extract();
  }

 private:
  double kernel(std::size_t i, std::size_t j) {
    if (!gram_.empty()) return gram_[i * n_ + j];
    ++kernel_evals_;
    return poly_kernel(d_.x[i], d_.x[j], cfg_.degree, gamma_);
  }

  void take_step(std::size_t i1, std::size_t i2) {
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(cfg_.c, cfg_.c + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - cfg_.c);
      hi = std::min(cfg_.c, a1 + a2);
    }

    const double k11 = kernel(i1, i1);
    const double k12 = kernel(i1, i2);
    const double k22 = kernel(i2, i2);
    // A non-positive-curvature direction still gets a step; the clip bounds
    // keep it finite (LIBSVM treats the curvature as epsilon-positive).
    const double eta = std::max(k11 + k22 - 2.0 * k12, 1e-12);
    const double a2_new = std::clamp(a2 + y2 * (f_[i1] - f_[i2]) / eta, lo, hi);
    double a1_new = a1 + s * (a2 - a2_new);
    // Rounding can leave the compensating multiplier a hair off its bound,
    // which would keep a bound point in the working set forever.
    if (a1_new < 1e-12 * cfg_.c) a1_new = 0.0;
    if (a1_new > cfg_.c * (1.0 - 1e-12)) a1_new = cfg_.c;
    if (std::getenv("DASML_SVM_TRACE2") && steps_ > 99990 && steps_ < 100010)
      std::fprintf(stderr,
                   "  pair(%zu,%zu) y1=%.0f y2=%.0f a1=%.12f a2=%.12f L=%.12f H=%.12f "
                   "k11=%.3e k22=%.3e k12=%.3e eta=%.3e raw=%.6e a2n=%.12f\n",
                   i1, i2, y1, y2, a1, a2, lo, hi, k11, k22, k12, eta,
                   a2 + y2 * (f_[i1] - f_[i2]) / eta, a2_new);

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;

    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);
    if (!gram_.empty()) {
      const double* row1 = &gram_[i1 * n_];
      const double* row2 = &gram_[i2 * n_];
      for (std::size_t k = 0; k < n_; ++k) f_[k] += d1 * row1[k] + d2 * row2[k];
    } else {
      for (std::size_t k = 0; k < n_; ++k)
        f_[k] += d1 * kernel(i1, k) + d2 * kernel(i2, k);
    }
    ++steps_;
  }

  SvmModel extract() const {
    SvmModel m;
    m.degree = cfg_.degree;
    m.c = cfg_.c;
    m.gamma = gamma_;
    m.bias = bias_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] > 1e-9) {
        m.support_vectors.push_back(d_.x[i]);
        m.coef.push_back(alpha_[i] * y_[i]);
      }
    }
    m.steps = steps_;
    m.kernel_evals = kernel_evals_;
    return m;
  }

  const Dataset& d_;
  SvmConfig cfg_;
  double gamma_ = 1.0;
  std::size_t n_ = 0;
  std::vector<double> gram_;
  std::vector<double> y_, alpha_, f_;
  double bias_ = 0.0;
  std::size_t steps_ = 0;
  std::uint64_t kernel_evals_ = 0;
};

}  // namespace

SvmModel train_svm(const Dataset& train, const SvmConfig& cfg) {
  train.validate_for_training();
  if (cfg.c <= 0.0) throw DataError("train_svm: C must be > 0");
  if (cfg.degree < 1) throw DataError("train_svm: degree must be >= 1");
  return SmoSolver(train, cfg).solve();
}

}  // namespace dasml::ml
