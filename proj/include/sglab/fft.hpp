#pragma once

#include <complex>
#include <vector>

#include "base.hpp"

namespace sglab {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey transform.
// sign = -1 gives the forward transform sum_j x_j e^{-2pi i jk/n};
// sign = +1 the unnormalized inverse (divide by n afterwards).
inline void fft_inplace(std::vector<std::complex<double>>& x, int sign) {
    const std::size_t n = x.size();
    if (!is_power_of_two(n)) throw numerical_error("fft: length must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = x[i + k];
                std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline void ifft_inplace(std::vector<std::complex<double>>& x) {
    fft_inplace(x, +1);
    const double inv = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v *= inv;
}

// Square 2D transform on row-major data of size n*n: rows first, then columns.
inline void fft2_inplace(std::vector<std::complex<double>>& a, std::size_t n, int sign) {
    if (a.size() != n * n) throw numerical_error("fft2: size mismatch");
    std::vector<std::complex<double>> scratch(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(a.begin() + i * n, a.begin() + (i + 1) * n, scratch.begin());
        fft_inplace(scratch, sign);
        std::copy(scratch.begin(), scratch.end(), a.begin() + i * n);
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) scratch[i] = a[i * n + j];
        fft_inplace(scratch, sign);
        for (std::size_t i = 0; i < n; ++i) a[i * n + j] = scratch[i];
    }
}

// Frequency of bin k for an n-point transform with sample spacing h,
// in angular units (the DFT convention matching fft_inplace).
inline double fft_frequency(std::size_t k, std::size_t n, double h) {
    const double pi = 3.14159265358979323846;
    const auto ks = static_cast<std::ptrdiff_t>(k);
    const auto ns = static_cast<std::ptrdiff_t>(n);
    const std::ptrdiff_t signed_k = (ks < ns - ks) ? ks : ks - ns;
    return 2.0 * pi * static_cast<double>(signed_k) / (static_cast<double>(n) * h);
}

} // namespace sglab
