#pragma once

#include <complex>

#include "fnolab/field.hpp"
#include "fnolab/rng.hpp"

namespace fnolab {

// The three operator families, all periodic on [0,1)^2:
//   POISSON    -div(K grad u)            = f
//   ADV_DIFF   -div(K grad u) + v.grad u = f
//   HELMHOLTZ  -lap u + omega u          = f   (omega > 0, i.e. screened)
enum class PdeSystem { poisson, adv_diff, helmholtz };

const char* system_name(PdeSystem s);            // "POISSON" | "ADV_DIFF" | "HELMHOLTZ"
PdeSystem system_from_name(const std::string&);  // throws ConfigError

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Symmetric positive definite diffusion tensor, parameterized by the
// eigenvalue pair (1, e) and the rotation angle of the first eigenvector.
struct DiffusionTensor {
    double k11 = 1.0, k22 = 1.0, k12 = 0.0;

    // K = R(theta) diag(1, e) R(theta)^T
    static DiffusionTensor from_eigs(double e, double theta);
};

struct PdeCoefficients {
    PdeSystem system = PdeSystem::poisson;
    DiffusionTensor k;            // identity for HELMHOLTZ
    double v1 = 0.0, v2 = 0.0;    // zero except ADV_DIFF
    double omega = 0.0;           // zero except HELMHOLTZ
};

// Gaussian-bump source model: bump centers on a regular lattice with spacing
// 2*sigma (so 1/(2*sigma) per axis), amplitudes U(0,1), and a sparsity
// fraction of bumps zeroed out.
struct SourceConfig {
    double sigma = 1.0 / 32.0;
    double sparsity_lo = 0.2, sparsity_hi = 0.8;

    int per_axis() const;  // bumps per axis = 1/(2*sigma); validates
    int n_bumps() const { return per_axis() * per_axis(); }
};

struct SamplingRanges {
    Interval e{1.0, 5.0};        // diffusion eigenvalue ratio
    Interval psi{0.2, 1.0};      // advection-diffusion ratio target (ADV_DIFF)
    Interval omega{1.0, 10.0};   // potential strength (HELMHOLTZ)
};

// Fourier symbol of the operator at integer frequency (kx, ky):
//   D(k) = (2pi)^2 (k11 kx^2 + k22 ky^2 + 2 k12 kx ky)
//        + 2pi i (v1 kx + v2 ky) + omega
std::complex<double> pde_symbol(const PdeCoefficients& c, long kx, long ky);

// u with u_hat = f_hat / D(k). When D(0) = 0 the source must be zero-mean
// (|f_hat(0)| <= 1e-10 * ||f||, else a solvability NumericError) and u_hat(0)
// is set to 0; any other |D(k)| < 1e-12 raises a resonance NumericError.
// On the Nyquist lines (kx = h/2 or ky = w/2) the sign of that axis frequency
// is ambiguous on the grid; the solver uses the symbol of the band-limited
// interpolant (Nyquist energy split evenly between the signs), which cancels
// the terms odd in the ambiguous axis -- that axis's advective term and the
// k12 cross term. apply_operator and measure_psi use the same convention, so
// solve -> apply is an exact round trip on every real field.
RealField solve_spectral(const PdeCoefficients& c, const RealField& f);

// Forward application: idft2(D(k) * dft2(u)). Used for residual checks.
RealField apply_operator(const PdeCoefficients& c, const RealField& u);

// Advection-diffusion balance Psi = ||v.grad u|| / ||div(K grad u)||, both
// norms evaluated spectrally (Parseval; identical to the field-space L2 up to
// rounding). Throws a degenerate-instance NumericError when the denominator
// vanishes.
double measure_psi(const PdeCoefficients& c, const RealField& u);

// Draw order is pinned (amplitudes in lattice row-major order, then sparsity,
// then the zeroed subset via partial Fisher-Yates), so a seed fully determines
// the field. Bump distances are minimum-image wrapped.
RealField sample_source(Rng& rng, const SourceConfig& cfg, int h, int w);

// Draw order per system: POISSON e, theta; ADV_DIFF e, theta, direction angle,
// psi target; HELMHOLTZ omega. ADV_DIFF velocity is returned as a unit vector;
// the magnitude comes from calibrate_advection. HELMHOLTZ omega is a uniform
// integer over the range (ConfigError when the range contains none >= 1).
struct CoefficientSample {
    PdeCoefficients coeffs;
    double psi_target = 0.0;  // only meaningful for ADV_DIFF
};
CoefficientSample sample_coefficients(Rng& rng, PdeSystem system, const SamplingRanges& ranges);

// Scales |v| by bracketing (doubling from 1) + bisection until the realized
// Psi is within rel_tol of psi_target. ok=false when the bracket or the 64
// bisection steps fail; callers resample the instance.
struct CalibrationResult {
    bool ok = false;
    double speed = 0.0;
    double psi = 0.0;
    RealField solution;
};
CalibrationResult calibrate_advection(const PdeCoefficients& base, const RealField& f,
                                      double psi_target, double rel_tol = 0.05);

}  // namespace fnolab
