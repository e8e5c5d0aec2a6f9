#include "dasml/fft.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace dasml::dsp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Forward twiddle table e^{-2*pi*i*j/n} for j in [0, n/2); shared across
// stages by stride indexing.
const std::vector<std::complex<double>>& twiddles(std::size_t n) {
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::unique_ptr<std::vector<std::complex<double>>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    auto table = std::make_unique<std::vector<std::complex<double>>>(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double ang = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
      (*table)[j] = {std::cos(ang), std::sin(ang)};
    }
    slot = std::move(table);
  }
  return *slot;
}

// Chirp plan for Bluestein's algorithm, cached per transform length.
struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;                            // convolution length, power of two
  std::vector<std::complex<double>> chirp;      // e^{-i*pi*k^2/n}, k in [0, n)
  std::vector<std::complex<double>> kernel_ft;  // DFT of the wrapped conjugate chirp
};

const BluesteinPlan& bluestein_plan(std::size_t n) {
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::unique_ptr<BluesteinPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    auto plan = std::make_unique<BluesteinPlan>();
    plan->n = n;
    plan->m = next_pow2(2 * n - 1);
    plan->chirp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // Reduce k^2 mod 2n first so the angle stays small and exact.
      const std::uint64_t q = (static_cast<std::uint64_t>(k) * k) % (2 * n);
      const double ang = -kPi * static_cast<double>(q) / static_cast<double>(n);
      plan->chirp[k] = {std::cos(ang), std::sin(ang)};
    }
    std::vector<std::complex<double>> b(plan->m, {0.0, 0.0});
    b[0] = std::conj(plan->chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      b[k] = std::conj(plan->chirp[k]);
      b[plan->m - k] = std::conj(plan->chirp[k]);
    }
    fft_pow2(b, false);
    plan->kernel_ft = std::move(b);
    slot = std::move(plan);
  }
  return *slot;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> tw = w[j * stride];
        if (inverse) tw = std::conj(tw);
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * tw;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= scale;
  }
}

std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n == 1) return x;
  if (is_pow2(n)) {
    std::vector<std::complex<double>> a = x;
    fft_pow2(a, false);
    return a;
  }
  const BluesteinPlan& plan = bluestein_plan(n);
  std::vector<std::complex<double>> a(plan.m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * plan.chirp[k];
  fft_pow2(a, false);
  for (std::size_t k = 0; k < plan.m; ++k) a[k] *= plan.kernel_ft[k];
  fft_pow2(a, true);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * plan.chirp[k];
  return out;
}

}  // namespace dasml::dsp
