#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fairvol::detail {

// In-place iterative radix-2 Cooley-Tukey transform. Size must be a power of
// two; callers pad. Deterministic (no plan heuristics), which matters because
// simulation output must be byte-stable across runs.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Linear convolution of two real sequences via FFT, truncated to out_len.
inline std::vector<double> convolve_fft(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        std::size_t out_len) {
    const std::size_t full = x.size() + y.size() - 1;
    const std::size_t n = next_pow2(full);
    std::vector<std::complex<double>> fx(n), fy(n);
    for (std::size_t i = 0; i < x.size(); ++i) fx[i] = x[i];
    for (std::size_t i = 0; i < y.size(); ++i) fy[i] = y[i];
    fft_radix2(fx, false);
    fft_radix2(fy, false);
    for (std::size_t i = 0; i < n; ++i) fx[i] *= fy[i];
    fft_radix2(fx, true);
    std::vector<double> out(std::min(out_len, full));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fx[i].real();
    return out;
}

}  // namespace fairvol::detail
