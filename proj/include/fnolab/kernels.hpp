#pragma once

#include <complex>
#include <cstddef>

// Hot numeric loops for training/evaluation. Every operation has a scalar
// reference implementation and (on x86) an AVX2+FMA variant; the public
// functions dispatch once per process based on cpuid, overridable with the
// FNOLAB_KERNELS environment variable ("scalar" | "avx2") or force_backend().
// Vector variants may reassociate reductions, so they match the scalar
// reference to rounding, not bitwise; the equivalence tests pin tolerances.

namespace fnolab::kernels {

enum class Backend { scalar = 0, avx2 = 1 };

Backend active_backend();
const char* backend_name(Backend b);
bool backend_available(Backend b);
// Test/CLI hook; throws ConfigError if the backend is not available here.
void force_backend(Backend b);

// ---- dispatched API (float and double overloads) ----

// y += a*x
void axpy(float* y, const float* x, float a, std::size_t n);
void axpy(double* y, const double* x, double a, std::size_t n);

// x *= a
void scal(float* x, float a, std::size_t n);
void scal(double* x, double a, std::size_t n);

float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

float sumsq(const float* a, std::size_t n);
double sumsq(const double* a, std::size_t n);

// sum (a-b)^2
float sumsq_diff(const float* a, const float* b, std::size_t n);
double sumsq_diff(const double* a, const double* b, std::size_t n);

float sum_abs(const float* a, std::size_t n);
double sum_abs(const double* a, std::size_t n);

// tanh-form GELU: 0.5*x*(1 + tanh(0.7978845608028654*(x + 0.044715*x^3)))
void gelu(float* out, const float* in, std::size_t n);
void gelu(double* out, const double* in, std::size_t n);

// din = dout * gelu'(pre)
void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n);
void gelu_grad(double* din, const double* pre, const double* dout, std::size_t n);

// One Adam update over a contiguous span. c1 = 1/(1-beta1^t), c2 = 1/(1-beta2^t).
//   m <- beta1*m + (1-beta1)*g ; v <- beta2*v + (1-beta2)*g^2
//   p <- p - lr * (m*c1) / (sqrt(v*c2) + eps)
void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2);

// Pointwise channel mix over planar fields: for o in [0,d_out):
//   y[o*p .. ] (+)= sum_i w[o*d_in+i] * x[i*p ..]  (+ bias[o] unless null)
// When accumulate is true, adds into y (bias still applied when non-null).
void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate);
void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate);

// Weight-gradient outer product: wg[o*d_in+i] += dot(dy[o*p..], x[i*p..])
void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p);
void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p);

// bg[o] += sum over row dy[o*p..]
void row_sum_acc(float* bg, const float* dy, std::size_t d_out, std::size_t p);
void row_sum_acc(double* bg, const double* dy, std::size_t d_out, std::size_t p);

// Complex mode mixing (d x d matrix, row-major, interleaved complex):
//   y[o] += sum_i a[o*d+i] * x[i]
template <class T>
void cmatvec_acc(std::complex<T>* y, const std::complex<T>* a, const std::complex<T>* x, std::size_t d);
//   y[i] += sum_o conj(a[o*d+i]) * x[o]
template <class T>
void cmatvec_adj_acc(std::complex<T>* y, const std::complex<T>* a, const std::complex<T>* x, std::size_t d);
//   ga[o*d+i] += gy[o] * conj(x[i])
template <class T>
void couter_adj_acc(std::complex<T>* ga, const std::complex<T>* gy, const std::complex<T>* x, std::size_t d);

// ---- direct access to the variants (tests compare these) ----

namespace scalar {
void axpy(float* y, const float* x, float a, std::size_t n);
void axpy(double* y, const double* x, double a, std::size_t n);
void scal(float* x, float a, std::size_t n);
void scal(double* x, double a, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
float sumsq(const float* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
float sumsq_diff(const float* a, const float* b, std::size_t n);
double sumsq_diff(const double* a, const double* b, std::size_t n);
float sum_abs(const float* a, std::size_t n);
double sum_abs(const double* a, std::size_t n);
void gelu(float* out, const float* in, std::size_t n);
void gelu(double* out, const double* in, std::size_t n);
void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n);
void gelu_grad(double* din, const double* pre, const double* dout, std::size_t n);
void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2);
void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate);
void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate);
void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p);
void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p);
void row_sum_acc(float* bg, const float* dy, std::size_t d_out, std::size_t p);
void row_sum_acc(double* bg, const double* dy, std::size_t d_out, std::size_t p);
}  // namespace scalar

namespace avx2 {
// True when this binary carries real AVX2 bodies (x86 build); otherwise the
// symbols below forward to scalar and the backend is never selectable.
bool compiled();
void axpy(float* y, const float* x, float a, std::size_t n);
void axpy(double* y, const double* x, double a, std::size_t n);
void scal(float* x, float a, std::size_t n);
void scal(double* x, double a, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
float sumsq(const float* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
float sumsq_diff(const float* a, const float* b, std::size_t n);
double sumsq_diff(const double* a, const double* b, std::size_t n);
float sum_abs(const float* a, std::size_t n);
double sum_abs(const double* a, std::size_t n);
void gelu(float* out, const float* in, std::size_t n);
void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n);
void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2);
void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate);
void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate);
void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p);
void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p);
}  // namespace avx2

// Complex mode mixing stays scalar on every backend: it is ~0.2% of the
// training flops, and interleaved complex FMA chains vectorize poorly.
template <class T>
inline void cmatvec_acc(std::complex<T>* y, const std::complex<T>* a,
                        const std::complex<T>* x, std::size_t d) {
    for (std::size_t o = 0; o < d; ++o) {
        T re = y[o].real(), im = y[o].imag();
        const std::complex<T>* row = a + o * d;
        for (std::size_t i = 0; i < d; ++i) {
            const T ar = row[i].real(), ai = row[i].imag();
            const T xr = x[i].real(), xi = x[i].imag();
            re += ar * xr - ai * xi;
            im += ar * xi + ai * xr;
        }
        y[o] = {re, im};
    }
}

template <class T>
inline void cmatvec_adj_acc(std::complex<T>* y, const std::complex<T>* a,
                            const std::complex<T>* x, std::size_t d) {
    for (std::size_t o = 0; o < d; ++o) {
        const std::complex<T>* row = a + o * d;
        const T xr = x[o].real(), xi = x[o].imag();
        for (std::size_t i = 0; i < d; ++i) {
            // conj(a[o][i]) * x[o]
            const T ar = row[i].real(), ai = row[i].imag();
            y[i] += std::complex<T>(ar * xr + ai * xi, ar * xi - ai * xr);
        }
    }
}

template <class T>
inline void couter_adj_acc(std::complex<T>* ga, const std::complex<T>* gy,
                           const std::complex<T>* x, std::size_t d) {
    for (std::size_t o = 0; o < d; ++o) {
        const T gr = gy[o].real(), gi = gy[o].imag();
        std::complex<T>* row = ga + o * d;
        for (std::size_t i = 0; i < d; ++i) {
            // gy[o] * conj(x[i])
            const T xr = x[i].real(), xi = x[i].imag();
            row[i] += std::complex<T>(gr * xr + gi * xi, gi * xr - gr * xi);
        }
    }
}

}  // namespace fnolab::kernels
