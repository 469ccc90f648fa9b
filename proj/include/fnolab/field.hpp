#pragma once

#include <complex>
#include <cstddef>

#include "fnolab/common.hpp"

namespace fnolab {

// Periodic scalar field sampled on a regular h x w grid over [0,1)^2.
// values[i*w + j] is the sample at (x, y) = (i/h, j/w): x runs along rows,
// y along columns. Grid dims must be even and >= 4 (half-spectrum layout).
struct RealField {
    int h = 0, w = 0;
    AVec<double> values;

    RealField() = default;
    RealField(int h_, int w_) : h(h_), w(w_), values(static_cast<std::size_t>(h_) * w_, 0.0) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * w + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * w + j]; }
    std::size_t size() const { return values.size(); }
};

// Half-spectrum of a real field: row-major h x (w/2+1), coeffs[kx*(w/2+1)+ky].
// kx in [0,h) indexes the row (x) frequency -- signed value kx-h for kx > h/2;
// ky in [0,w/2] is the nonnegative column (y) frequency. Forward transform is
// unnormalized, the inverse carries the 1/(h*w) factor.
struct SpectralField {
    int h = 0, w = 0;
    AVec<std::complex<double>> coeffs;

    SpectralField() = default;
    SpectralField(int h_, int w_)
        : h(h_), w(w_), coeffs(static_cast<std::size_t>(h_) * (w_ / 2 + 1), {0.0, 0.0}) {}

    int cols() const { return w / 2 + 1; }
    std::complex<double>& at(int kx, int ky) {
        return coeffs[static_cast<std::size_t>(kx) * cols() + ky];
    }
    std::complex<double> at(int kx, int ky) const {
        return coeffs[static_cast<std::size_t>(kx) * cols() + ky];
    }
};

// c fields on one grid, stored channel-major: channel(ch)[i*w + j].
struct ChannelStack {
    int h = 0, w = 0, c = 0;
    AVec<double> values;

    ChannelStack() = default;
    ChannelStack(int h_, int w_, int c_)
        : h(h_), w(w_), c(c_), values(static_cast<std::size_t>(h_) * w_ * c_, 0.0) {}

    std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
    double* channel(int ch) { return values.data() + plane() * ch; }
    const double* channel(int ch) const { return values.data() + plane() * ch; }
};

// Signed frequency for index k on an axis of n samples (n even):
// 0..n/2 map to themselves, n/2+1..n-1 map to k-n.
inline long signed_freq(long k, long n) { return k <= n / 2 ? k : k - n; }

// Throws ConfigError unless both dims are even and >= 4.
void validate_grid(int h, int w);

SpectralField dft2(const RealField& f);

// Validates the four self-conjugate entries (|Im| must be <= 1e-9 relative to
// the largest magnitude), Hermitian-projects the ky=0 and ky=w/2 columns
// (exactly the identity on valid spectra), and inverse-transforms.
RealField idft2(const SpectralField& s);

// g(i,j) = f((i-di) mod h, (j-dj) mod w): contents move by +di rows, +dj cols.
RealField periodic_shift(const RealField& f, long di, long dj);

// sqrt(sum of squares) over the flattened samples. Always the scalar kernel,
// so norms are identical under every SIMD backend.
double l2_norm(const RealField& f);
double l2_norm(const double* p, std::size_t n);

}  // namespace fnolab
