#include "fnolab/field.hpp"

#include <cmath>
#include <string>

#include "fnolab/fft.hpp"
#include "fnolab/kernels.hpp"

namespace fnolab {

void validate_grid(int h, int w) {
    if (h < 4 || w < 4 || h % 2 != 0 || w % 2 != 0)
        throw ConfigError("grid dims must be even and >= 4, got " + std::to_string(h) + "x" +
                          std::to_string(w));
}

SpectralField dft2(const RealField& f) {
    validate_grid(f.h, f.w);
    SpectralField s(f.h, f.w);
    fft::forward(f.h, f.w, 1, f.values.data(), s.coeffs.data());
    return s;
}

RealField idft2(const SpectralField& s) {
    validate_grid(s.h, s.w);
    const int h = s.h, w = s.w, cols = s.w / 2 + 1;

    double linf = 0.0;
    for (const auto& z : s.coeffs) linf = std::max(linf, std::max(std::abs(z.real()), std::abs(z.imag())));
    const double tol = 1e-9 * std::max(1.0, linf);
    for (int kx : {0, h / 2})
        for (int ky : {0, w / 2})
            if (std::abs(s.at(kx, ky).imag()) > tol)
                throw NumericError("invalid spectrum: self-conjugate entry (" + std::to_string(kx) +
                                   "," + std::to_string(ky) + ") has imaginary part " +
                                   std::to_string(s.at(kx, ky).imag()));

    // Work on a copy: the c2r transform destroys its input, and we project the
    // two self-conjugate columns first so the result is well defined even for
    // spectra that are not exactly Hermitian there. For valid spectra the
    // projection reproduces the coefficients bit for bit.
    AVec<std::complex<double>> buf = s.coeffs;
    auto at = [&](int kx, int ky) -> std::complex<double>& {
        return buf[static_cast<std::size_t>(kx) * cols + ky];
    };
    for (int ky : {0, w / 2}) {
        at(0, ky) = {at(0, ky).real(), 0.0};
        at(h / 2, ky) = {at(h / 2, ky).real(), 0.0};
        for (int kx = 1; kx < h / 2; ++kx) {
            const std::complex<double> avg =
                0.5 * (at(kx, ky) + std::conj(at(h - kx, ky)));
            at(kx, ky) = avg;
            at(h - kx, ky) = std::conj(avg);
        }
    }

    RealField f(h, w);
    fft::inverse(h, w, 1, buf.data(), f.values.data());
    kernels::scalar::scal(f.values.data(), 1.0 / (static_cast<double>(h) * w), f.size());
    return f;
}

RealField periodic_shift(const RealField& f, long di, long dj) {
    validate_grid(f.h, f.w);
    RealField g(f.h, f.w);
    const long h = f.h, w = f.w;
    // ((a % n) + n) % n keeps the source index in range for negative shifts
    const long si0 = ((-di) % h + h) % h;
    const long sj0 = ((-dj) % w + w) % w;
    for (long i = 0; i < h; ++i) {
        const long src_i = (i + si0) % h;
        for (long j = 0; j < w; ++j) g.at(i, j) = f.at(src_i, (j + sj0) % w);
    }
    return g;
}

double l2_norm(const double* p, std::size_t n) {
    return std::sqrt(kernels::scalar::sumsq(p, n));
}

double l2_norm(const RealField& f) { return l2_norm(f.values.data(), f.size()); }

}  // namespace fnolab
