#pragma once

#include <complex>
#include <vector>

namespace failbench {

// In-place radix-2 Cooley-Tukey; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& data, bool inverse);

// Forward DFT of arbitrary length (Bluestein for non-power-of-two sizes).
std::vector<std::complex<double>> dft(const std::vector<double>& signal);

// One-sided power spectrum |X_k|^2 for k = 1 .. floor(N/2), DC excluded.
std::vector<double> power_spectrum_no_dc(const std::vector<double>& signal);

}  // namespace failbench
