#include "fnolab/kernels.hpp"

#include <cmath>

// Reference implementations. Plain loops, one accumulator, no reassociation:
// these define the semantics the vector variants are tested against.

namespace fnolab::kernels::scalar {

namespace {

constexpr double kGeluC0 = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluC1 = 0.044715;

template <class T>
void axpy_impl(T* y, const T* x, T a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
void scal_impl(T* x, T a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

template <class T>
T dot_impl(const T* a, const T* b, std::size_t n) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

template <class T>
T sumsq_impl(const T* a, std::size_t n) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

template <class T>
T sumsq_diff_impl(const T* a, const T* b, std::size_t n) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const T d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

template <class T>
T sum_abs_impl(const T* a, std::size_t n) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i]);
    return s;
}

template <class T>
void gelu_impl(T* out, const T* in, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const T x = in[i];
        const T u = T(kGeluC0) * (x + T(kGeluC1) * x * x * x);
        out[i] = T(0.5) * x * (T(1) + std::tanh(u));
    }
}

template <class T>
void gelu_grad_impl(T* din, const T* pre, const T* dout, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const T x = pre[i];
        const T u = T(kGeluC0) * (x + T(kGeluC1) * x * x * x);
        const T t = std::tanh(u);
        const T du = T(kGeluC0) * (T(1) + T(3) * T(kGeluC1) * x * x);
        const T g = T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * du;
        din[i] = dout[i] * g;
    }
}

template <class T>
void adam_step_impl(T* p, T* m, T* v, const T* g, std::size_t n,
                    T lr, T beta1, T beta2, T eps, T c1, T c2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
        v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
    }
}

template <class T>
void channel_mix_impl(T* y, const T* x, const T* w, const T* bias,
                      std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    for (std::size_t o = 0; o < d_out; ++o) {
        T* yo = y + o * p;
        if (!accumulate) {
            const T b = bias ? bias[o] : T(0);
            for (std::size_t k = 0; k < p; ++k) yo[k] = b;
        } else if (bias) {
            const T b = bias[o];
            for (std::size_t k = 0; k < p; ++k) yo[k] += b;
        }
        for (std::size_t i = 0; i < d_in; ++i) {
            const T wv = w[o * d_in + i];
            const T* xi = x + i * p;
            for (std::size_t k = 0; k < p; ++k) yo[k] += wv * xi[k];
        }
    }
}

template <class T>
void mix_outer_acc_impl(T* wg, const T* dy, const T* x,
                        std::size_t d_out, std::size_t d_in, std::size_t p) {
    for (std::size_t o = 0; o < d_out; ++o)
        for (std::size_t i = 0; i < d_in; ++i)
            wg[o * d_in + i] += dot_impl(dy + o * p, x + i * p, p);
}

template <class T>
void row_sum_acc_impl(T* bg, const T* dy, std::size_t d_out, std::size_t p) {
    for (std::size_t o = 0; o < d_out; ++o) {
        T s = 0;
        const T* row = dy + o * p;
        for (std::size_t k = 0; k < p; ++k) s += row[k];
        bg[o] += s;
    }
}

}  // namespace

void axpy(float* y, const float* x, float a, std::size_t n) { axpy_impl(y, x, a, n); }
void axpy(double* y, const double* x, double a, std::size_t n) { axpy_impl(y, x, a, n); }
void scal(float* x, float a, std::size_t n) { scal_impl(x, a, n); }
void scal(double* x, double a, std::size_t n) { scal_impl(x, a, n); }
float dot(const float* a, const float* b, std::size_t n) { return dot_impl(a, b, n); }
double dot(const double* a, const double* b, std::size_t n) { return dot_impl(a, b, n); }
float sumsq(const float* a, std::size_t n) { return sumsq_impl(a, n); }
double sumsq(const double* a, std::size_t n) { return sumsq_impl(a, n); }
float sumsq_diff(const float* a, const float* b, std::size_t n) { return sumsq_diff_impl(a, b, n); }
double sumsq_diff(const double* a, const double* b, std::size_t n) { return sumsq_diff_impl(a, b, n); }
float sum_abs(const float* a, std::size_t n) { return sum_abs_impl(a, n); }
double sum_abs(const double* a, std::size_t n) { return sum_abs_impl(a, n); }
void gelu(float* out, const float* in, std::size_t n) { gelu_impl(out, in, n); }
void gelu(double* out, const double* in, std::size_t n) { gelu_impl(out, in, n); }
void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n) {
    gelu_grad_impl(din, pre, dout, n);
}
void gelu_grad(double* din, const double* pre, const double* dout, std::size_t n) {
    gelu_grad_impl(din, pre, dout, n);
}
void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2) {
    adam_step_impl(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2) {
    adam_step_impl(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}
void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    channel_mix_impl(y, x, w, bias, d_out, d_in, p, accumulate);
}
void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    channel_mix_impl(y, x, w, bias, d_out, d_in, p, accumulate);
}
void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    mix_outer_acc_impl(wg, dy, x, d_out, d_in, p);
}
void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    mix_outer_acc_impl(wg, dy, x, d_out, d_in, p);
}
void row_sum_acc(float* bg, const float* dy, std::size_t d_out, std::size_t p) {
    row_sum_acc_impl(bg, dy, d_out, p);
}
void row_sum_acc(double* bg, const double* dy, std::size_t d_out, std::size_t p) {
    row_sum_acc_impl(bg, dy, d_out, p);
}

}  // namespace fnolab::kernels::scalar
