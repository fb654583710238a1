#include "failbench/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace failbench {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

void fft_pow2(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : data) x /= static_cast<double>(n);
    }
}

std::vector<std::complex<double>> dft(const std::vector<double>& signal) {
    const std::size_t n = signal.size();
    if (n == 0) return {};

    if (is_pow2(n)) {
        std::vector<std::complex<double>> data(n);
        for (std::size_t i = 0; i < n; ++i) data[i] = signal[i];
        fft_pow2(data, false);
        return data;
    }

    // Bluestein: X_k = conj(b_k) * IFFT(FFT(a) . FFT(b)) with chirp
    // b_j = exp(i*pi*j^2/n), a_j = x_j * conj(b_j), convolved at length m.
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the phase argument small for long signals.
        const std::size_t j2 = (j * j) % (2 * n);
        const double angle = kPi * static_cast<double>(j2) / static_cast<double>(n);
        chirp[j] = std::complex<double>(std::cos(angle), std::sin(angle));
    }

    std::vector<std::complex<double>> a(m, {0.0, 0.0});
    std::vector<std::complex<double>> b(m, {0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) {
        a[j] = signal[j] * std::conj(chirp[j]);
        b[j] = chirp[j];
        if (j > 0) b[m - j] = chirp[j];
    }
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t j = 0; j < m; ++j) a[j] *= b[j];
    fft_pow2(a, true);

    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * std::conj(chirp[k]);
    return out;
}

std::vector<double> power_spectrum_no_dc(const std::vector<double>& signal) {
    const auto spectrum = dft(signal);
    const std::size_t half = signal.size() / 2;
    std::vector<double> power;
    power.reserve(half);
    for (std::size_t k = 1; k <= half; ++k) power.push_back(std::norm(spectrum[k]));
    return power;
}

}  // namespace failbench
