#include <cmath>
#include <complex>
#include <doctest.h>

#include "failbench/fft.hpp"
#include "failbench/rng.hpp"

using namespace failbench;

namespace {

// Independent O(N^2) DFT used as the oracle for the fast path.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> sum{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double angle = -2.0 * M_PI * static_cast<double>(k * j) / static_cast<double>(n);
            sum += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = sum;
    }
    return out;
}

}  // namespace

TEST_CASE("dft matches the naive oracle on random signals") {
    Rng rng(7);
    for (std::size_t n : {8u, 16u, 12u, 17u, 30u, 64u, 100u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        const auto fast = dft(x);
        const auto slow = naive_dft(x);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(std::abs(fast[k] - slow[k]) < 1e-9 * (1.0 + std::abs(slow[k])));
        }
    }
}

TEST_CASE("power spectrum drops the DC bin") {
    const std::vector<double> constant(16, 3.5);
    const auto power = power_spectrum_no_dc(constant);
    REQUIRE(power.size() == 8);
    for (double p : power) CHECK(p < 1e-18);
}

TEST_CASE("exact-bin sinusoid concentrates all power in one bin") {
    const std::size_t n = 64;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::sin(2.0 * M_PI * 5.0 * static_cast<double>(i) / static_cast<double>(n));
    }
    const auto power = power_spectrum_no_dc(x);
    double total = 0.0;
    for (double p : power) total += p;
    CHECK(power[4] / total > 0.999);  // bin k=5 sits at index 4 after dropping DC
}
