#pragma once

#include <complex>
#include <vector>

namespace dasml::dsp {

// In-place iterative radix-2 transform; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

// Forward DFT of arbitrary length. Power-of-two sizes go straight through
// the radix-2 path; other sizes use Bluestein's chirp-z reduction to a
// power-of-two convolution. Twiddle and chirp tables are cached per length.
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x);

}  // namespace dasml::dsp
