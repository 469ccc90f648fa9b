#include "fnolab/pde.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace fnolab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSolvabilityTol = 1e-10;  // |f_hat(0)| vs ||f|| when D(0)=0
constexpr double kResonanceTol = 1e-12;    // |D(k)| floor away from k=0
}  // namespace

const char* system_name(PdeSystem s) {
    switch (s) {
        case PdeSystem::poisson: return "POISSON";
        case PdeSystem::adv_diff: return "ADV_DIFF";
        case PdeSystem::helmholtz: return "HELMHOLTZ";
    }
    return "?";
}

PdeSystem system_from_name(const std::string& name) {
    if (name == "POISSON") return PdeSystem::poisson;
    if (name == "ADV_DIFF") return PdeSystem::adv_diff;
    if (name == "HELMHOLTZ") return PdeSystem::helmholtz;
    throw ConfigError("unknown system name '" + name + "'");
}

DiffusionTensor DiffusionTensor::from_eigs(double e, double theta) {
    if (!(e > 0.0)) throw ConfigError("diffusion eigenvalue ratio must be positive");
    const double c = std::cos(theta), s = std::sin(theta);
    DiffusionTensor k;
    k.k11 = c * c + e * s * s;
    k.k22 = s * s + e * c * c;
    k.k12 = (1.0 - e) * s * c;
    return k;
}

int SourceConfig::per_axis() const {
    if (!(sigma > 0.0)) throw ConfigError("source sigma must be positive");
    const double n = 1.0 / (2.0 * sigma);
    const int ni = static_cast<int>(std::lround(n));
    if (ni < 1 || std::abs(n - ni) > 1e-9)
        throw ConfigError("1/(2*sigma) must be a positive integer for the bump lattice");
    return ni;
}

std::complex<double> pde_symbol(const PdeCoefficients& c, long kx, long ky) {
    const double fx = static_cast<double>(kx), fy = static_cast<double>(ky);
    const double diff =
        kTwoPi * kTwoPi * (c.k.k11 * fx * fx + c.k.k22 * fy * fy + 2.0 * c.k.k12 * fx * fy);
    const double adv = kTwoPi * (c.v1 * fx + c.v2 * fy);
    return {diff + c.omega, adv};
}

namespace {

// Effective symbol for the half-spectrum entry at grid index (kx, ky). On a
// Nyquist line (kx = h/2 or ky = w/2) the grid cannot distinguish the +- sign
// of that axis frequency; applying the operator to the band-limited
// interpolant (Nyquist energy split evenly between the two signs) and
// resampling cancels every symbol term that is odd in the ambiguous axis --
// the advective term of that axis and the k12 cross term. Centered finite
// differences realize the same cancellation (sin(pi) = 0), and the resulting
// multiplier keeps the Hermitian structure of real-field spectra intact, so
// apply_operator(solve_spectral(f)) is an exact round trip on any real field.
std::complex<double> entry_symbol(const PdeCoefficients& c, int kx, int ky, int h, int w) {
    const double fx = static_cast<double>(signed_freq(kx, h));
    const double fy = static_cast<double>(ky);
    const bool nyq_x = kx == h / 2, nyq_y = ky == w / 2;
    double diff = kTwoPi * kTwoPi * (c.k.k11 * fx * fx + c.k.k22 * fy * fy);
    if (!nyq_x && !nyq_y) diff += kTwoPi * kTwoPi * 2.0 * c.k.k12 * fx * fy;
    double adv = 0.0;
    if (!nyq_x) adv += kTwoPi * c.v1 * fx;
    if (!nyq_y) adv += kTwoPi * c.v2 * fy;
    return {diff + c.omega, adv};
}

}  // namespace

RealField solve_spectral(const PdeCoefficients& c, const RealField& f) {
    SpectralField fh = dft2(f);
    const int h = f.h, w = f.w;
    const std::complex<double> d0 = pde_symbol(c, 0, 0);

    if (std::abs(d0) < kResonanceTol) {
        if (std::abs(fh.at(0, 0)) > kSolvabilityTol * l2_norm(f))
            throw NumericError("solvability: D(0)=0 but the source has non-zero mean");
        fh.at(0, 0) = 0.0;
    } else {
        fh.at(0, 0) /= d0;
    }

    for (int kx = 0; kx < h; ++kx) {
        for (int ky = 0; ky <= w / 2; ++ky) {
            if (kx == 0 && ky == 0) continue;
            const std::complex<double> d = entry_symbol(c, kx, ky, h, w);
            if (std::abs(d) < kResonanceTol)
                throw NumericError("resonance: |D(k)| < 1e-12 at k=(" +
                                   std::to_string(signed_freq(kx, h)) + "," + std::to_string(ky) +
                                   ")");
            fh.at(kx, ky) /= d;
        }
    }
    return idft2(fh);
}

RealField apply_operator(const PdeCoefficients& c, const RealField& u) {
    SpectralField uh = dft2(u);
    const int h = u.h, w = u.w;
    for (int kx = 0; kx < h; ++kx)
        for (int ky = 0; ky <= w / 2; ++ky) uh.at(kx, ky) *= entry_symbol(c, kx, ky, h, w);
    return idft2(uh);
}

double measure_psi(const PdeCoefficients& c, const RealField& u) {
    const SpectralField uh = dft2(u);
    const int h = u.h, w = u.w;
    // Parseval: ||field||^2 = (1/(h*w)) * sum over the full spectrum; stored
    // columns 0 < ky < w/2 stand in for their conjugate mirrors (weight 2).
    double adv2 = 0.0, diff2 = 0.0;
    for (int kx = 0; kx < h; ++kx) {
        const double fx = static_cast<double>(signed_freq(kx, h));
        for (int ky = 0; ky <= w / 2; ++ky) {
            const double fy = static_cast<double>(ky);
            const double wgt = (ky == 0 || ky == w / 2) ? 1.0 : 2.0;
            const double u2 = std::norm(uh.at(kx, ky));
            // same Nyquist-line convention as entry_symbol
            const bool nyq_x = kx == h / 2, nyq_y = ky == w / 2;
            double adv_sym = 0.0;
            if (!nyq_x) adv_sym += kTwoPi * c.v1 * fx;
            if (!nyq_y) adv_sym += kTwoPi * c.v2 * fy;
            double diff_sym = kTwoPi * kTwoPi * (c.k.k11 * fx * fx + c.k.k22 * fy * fy);
            if (!nyq_x && !nyq_y) diff_sym += kTwoPi * kTwoPi * 2.0 * c.k.k12 * fx * fy;
            adv2 += wgt * adv_sym * adv_sym * u2;
            diff2 += wgt * diff_sym * diff_sym * u2;
        }
    }
    if (!(diff2 > 0.0))
        throw NumericError("degenerate instance: ||div(K grad u)|| vanishes in measure_psi");
    return std::sqrt(adv2 / diff2);
}

RealField sample_source(Rng& rng, const SourceConfig& cfg, int h, int w) {
    validate_grid(h, w);
    const int n = cfg.per_axis();
    const int n_bumps = n * n;
    const double spacing = 2.0 * cfg.sigma;
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);

    // Amplitudes in lattice row-major order (a over x, b over y), then the
    // sparsity fraction, then the zeroed subset -- the draw order contract.
    std::vector<double> amp(n_bumps);
    for (int i = 0; i < n_bumps; ++i) amp[i] = rng.uniform();
    const double sparsity = rng.uniform(cfg.sparsity_lo, cfg.sparsity_hi);
    const int n_zero = static_cast<int>(std::lround(sparsity * n_bumps));

    std::vector<int> idx(n_bumps);
    for (int i = 0; i < n_bumps; ++i) idx[i] = i;
    for (int t = 0; t < n_zero; ++t) {
        const int pick = t + static_cast<int>(rng.uniform_index(n_bumps - t));
        std::swap(idx[t], idx[pick]);
        amp[idx[t]] = 0.0;
    }

    // Separable evaluation: exp(-(dx^2+dy^2)/(2s^2)) factorizes per axis, with
    // minimum-image wrapping applied to each axis independently.
    auto axis_table = [&](int grid_n) {
        std::vector<double> t(static_cast<std::size_t>(n) * grid_n);
        for (int a = 0; a < n; ++a) {
            const double center = a * spacing;
            for (int i = 0; i < grid_n; ++i) {
                double d = static_cast<double>(i) / grid_n - center;
                d -= std::round(d);  // wrap to [-0.5, 0.5]
                t[static_cast<std::size_t>(a) * grid_n + i] = std::exp(-d * d * inv_two_sigma2);
            }
        }
        return t;
    };
    const std::vector<double> gx = axis_table(h);
    const std::vector<double> gy = axis_table(w);

    // inner[a][j] = sum_b amp[a*n+b] * gy[b][j]
    std::vector<double> inner(static_cast<std::size_t>(n) * w, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double p = amp[static_cast<std::size_t>(a) * n + b];
            if (p == 0.0) continue;
            const double* gyb = gy.data() + static_cast<std::size_t>(b) * w;
            double* row = inner.data() + static_cast<std::size_t>(a) * w;
            for (int j = 0; j < w; ++j) row[j] += p * gyb[j];
        }

    RealField f(h, w);
    for (int i = 0; i < h; ++i)
        for (int a = 0; a < n; ++a) {
            const double g = gx[static_cast<std::size_t>(a) * h + i];
            const double* row = inner.data() + static_cast<std::size_t>(a) * w;
            double* out = f.values.data() + static_cast<std::size_t>(i) * w;
            for (int j = 0; j < w; ++j) out[j] += g * row[j];
        }
    return f;
}

CoefficientSample sample_coefficients(Rng& rng, PdeSystem system, const SamplingRanges& ranges) {
    CoefficientSample out;
    out.coeffs.system = system;
    switch (system) {
        case PdeSystem::poisson: {
            const double e = rng.uniform(ranges.e.lo, ranges.e.hi);
            const double theta = rng.uniform(0.0, std::numbers::pi);
            out.coeffs.k = DiffusionTensor::from_eigs(e, theta);
            break;
        }
        case PdeSystem::adv_diff: {
            const double e = rng.uniform(ranges.e.lo, ranges.e.hi);
            const double theta = rng.uniform(0.0, std::numbers::pi);
            out.coeffs.k = DiffusionTensor::from_eigs(e, theta);
            const double alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
            out.coeffs.v1 = std::cos(alpha);
            out.coeffs.v2 = std::sin(alpha);
            out.psi_target = rng.uniform(ranges.psi.lo, ranges.psi.hi);
            break;
        }
        case PdeSystem::helmholtz: {
            // omega is drawn as a uniform integer over the range
            const long lo = static_cast<long>(std::ceil(ranges.omega.lo));
            const long hi = static_cast<long>(std::floor(ranges.omega.hi));
            if (lo < 1 || hi < lo)
                throw ConfigError("omega range must contain a positive integer");
            out.coeffs.omega =
                static_cast<double>(lo + static_cast<long>(rng.uniform_index(hi - lo + 1)));
            break;
        }
    }
    return out;
}

CalibrationResult calibrate_advection(const PdeCoefficients& base, const RealField& f,
                                      double psi_target, double rel_tol) {
    if (base.system != PdeSystem::adv_diff)
        throw ConfigError("calibrate_advection requires an ADV_DIFF instance");
    if (!(psi_target > 0.0)) throw ConfigError("psi target must be positive");

    auto eval = [&](double speed) {
        PdeCoefficients c = base;
        c.v1 = base.v1 * speed;
        c.v2 = base.v2 * speed;
        RealField u = solve_spectral(c, f);
        const double psi = measure_psi(c, u);
        return std::make_pair(psi, std::move(u));
    };

    CalibrationResult res;
    // Bracket [lo, hi] with psi(lo) < target <= psi(hi); psi(0) = 0.
    double lo = 0.0, hi = 1.0;
    auto [psi_hi, u_hi] = eval(hi);
    for (int it = 0; psi_hi < psi_target; ++it) {
        if (it >= 60) return res;  // ok=false, caller resamples
        lo = hi;
        hi *= 2.0;
        std::tie(psi_hi, u_hi) = eval(hi);
    }
    if (std::abs(psi_hi - psi_target) <= rel_tol * psi_target) {
        res.ok = true;
        res.speed = hi;
        res.psi = psi_hi;
        res.solution = std::move(u_hi);
        return res;
    }
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto [psi_mid, u_mid] = eval(mid);
        if (std::abs(psi_mid - psi_target) <= rel_tol * psi_target) {
            res.ok = true;
            res.speed = mid;
            res.psi = psi_mid;
            res.solution = std::move(u_mid);
            return res;
        }
        (psi_mid < psi_target ? lo : hi) = mid;
    }
    return res;
}

}  // namespace fnolab
