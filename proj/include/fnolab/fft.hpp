#pragma once

#include <complex>

// Thin wrapper over FFTW (double and float). Raw FFTW scaling semantics:
// forward is the unnormalized r2c half-spectrum transform (row-major
// h x (w/2+1)), inverse is the unnormalized c2r transform -- callers divide by
// h*w themselves. inverse() destroys its input buffer (multi-d c2r does).
//
// Plans are created once per (h, w, batch, precision) with FFTW_ESTIMATE --
// deterministic algorithm choice, so repeated runs produce identical bits --
// and cached for the process lifetime. Buffers must come from AVec (64-byte
// aligned) so they are alignment-compatible with the cached plans; executing
// a cached plan on fresh arrays is thread-safe, plan creation is serialized
// internally.

namespace fnolab::fft {

void forward(int h, int w, int batch, const float* in, std::complex<float>* out);
void forward(int h, int w, int batch, const double* in, std::complex<double>* out);
void inverse(int h, int w, int batch, std::complex<float>* in, float* out);
void inverse(int h, int w, int batch, std::complex<double>* in, double* out);

}  // namespace fnolab::fft
