#include "fnolab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define FNOLAB_AVX2_BODY 1
#include <immintrin.h>
#endif

// AVX2+FMA variants of the hot kernels. This translation unit is built with
// -mavx2 -mfma on x86; callers must only reach these through the dispatcher,
// which checks cpuid first. float tanh/exp use a Cephes-style polynomial
// (relative error ~1e-7, validated against libm in the kernel tests).

namespace fnolab::kernels::avx2 {

#ifdef FNOLAB_AVX2_BODY

bool compiled() { return true; }

namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// exp(x) for the 8 lanes, Cephes expf coefficients.
inline __m256 exp256(__m256 x) {
    const __m256 hi = _mm256_set1_ps(88.3762626647949f);
    const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
    const __m256 log2e = _mm256_set1_ps(1.44269504088896341f);
    const __m256 ln2_hi = _mm256_set1_ps(0.693359375f);
    const __m256 ln2_lo = _mm256_set1_ps(-2.12194440e-4f);
    const __m256 one = _mm256_set1_ps(1.0f);

    x = _mm256_max_ps(_mm256_min_ps(x, hi), lo);
    __m256 fx = _mm256_floor_ps(_mm256_fmadd_ps(x, log2e, _mm256_set1_ps(0.5f)));
    x = _mm256_fnmadd_ps(fx, ln2_hi, x);
    x = _mm256_fnmadd_ps(fx, ln2_lo, x);

    __m256 z = _mm256_mul_ps(x, x);
    __m256 y = _mm256_set1_ps(1.9875691500e-4f);
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
    y = _mm256_fmadd_ps(y, z, _mm256_add_ps(x, one));

    __m256i n = _mm256_cvttps_epi32(fx);
    n = _mm256_slli_epi32(_mm256_add_epi32(n, _mm256_set1_epi32(127)), 23);
    return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

// tanh(x) = (e^{2x}-1)/(e^{2x}+1); |x| clamped to 10 where tanh is 1 in f32.
inline __m256 tanh256(__m256 x) {
    const __m256 cap = _mm256_set1_ps(10.0f);
    x = _mm256_max_ps(_mm256_min_ps(x, cap), _mm256_sub_ps(_mm256_setzero_ps(), cap));
    const __m256 e = exp256(_mm256_add_ps(x, x));
    const __m256 one = _mm256_set1_ps(1.0f);
    return _mm256_div_ps(_mm256_sub_ps(e, one), _mm256_add_ps(e, one));
}

constexpr float kC0 = 0.7978845608028654f;  // sqrt(2/pi)
constexpr float kC1 = 0.044715f;

}  // namespace

void axpy(float* y, const float* x, float a, std::size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy(double* y, const double* x, double a, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal(float* x, float a, std::size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void scal(double* x, double a, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

float dot(const float* a, const float* b, std::size_t n) {
    __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
    __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s0);
        s1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), s1);
        s2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), s2);
        s3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), s3);
    }
    for (; i + 8 <= n; i += 8)
        s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s0);
    float s = hsum(_mm256_add_ps(_mm256_add_ps(s0, s1), _mm256_add_ps(s2, s3)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    }
    for (; i + 4 <= n; i += 4)
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

float sumsq(const float* a, std::size_t n) { return dot(a, a, n); }
double sumsq(const double* a, std::size_t n) { return dot(a, a, n); }

float sumsq_diff(const float* a, const float* b, std::size_t n) {
    __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const __m256 d0 = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        const __m256 d1 = _mm256_sub_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8));
        s0 = _mm256_fmadd_ps(d0, d0, s0);
        s1 = _mm256_fmadd_ps(d1, d1, s1);
    }
    for (; i + 8 <= n; i += 8) {
        const __m256 d0 = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        s0 = _mm256_fmadd_ps(d0, d0, s0);
    }
    float s = hsum(_mm256_add_ps(s0, s1));
    for (; i < n; ++i) {
        const float d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sumsq_diff(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        s0 = _mm256_fmadd_pd(d0, d0, s0);
        s1 = _mm256_fmadd_pd(d1, d1, s1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        s0 = _mm256_fmadd_pd(d0, d0, s0);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

float sum_abs(const float* a, std::size_t n) {
    const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
    __m256 s0 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        s0 = _mm256_add_ps(s0, _mm256_and_ps(mask, _mm256_loadu_ps(a + i)));
    float s = hsum(s0);
    for (; i < n; ++i) s += a[i] < 0 ? -a[i] : a[i];
    return s;
}

double sum_abs(const double* a, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
    __m256d s0 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        s0 = _mm256_add_pd(s0, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
    double s = hsum(s0);
    for (; i < n; ++i) s += a[i] < 0 ? -a[i] : a[i];
    return s;
}

void gelu(float* out, const float* in, std::size_t n) {
    const __m256 c0 = _mm256_set1_ps(kC0);
    const __m256 c1 = _mm256_set1_ps(kC1);
    const __m256 half = _mm256_set1_ps(0.5f);
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 x = _mm256_loadu_ps(in + i);
        const __m256 x2 = _mm256_mul_ps(x, x);
        const __m256 u = _mm256_mul_ps(c0, _mm256_fmadd_ps(_mm256_mul_ps(c1, x2), x, x));
        const __m256 t = tanh256(u);
        _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_mul_ps(half, x), _mm256_add_ps(one, t)));
    }
    if (i < n) scalar::gelu(out + i, in + i, n - i);
}

void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n) {
    const __m256 c0 = _mm256_set1_ps(kC0);
    const __m256 c1x3 = _mm256_set1_ps(3.0f * kC1);
    const __m256 c1 = _mm256_set1_ps(kC1);
    const __m256 half = _mm256_set1_ps(0.5f);
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 x = _mm256_loadu_ps(pre + i);
        const __m256 x2 = _mm256_mul_ps(x, x);
        const __m256 u = _mm256_mul_ps(c0, _mm256_fmadd_ps(_mm256_mul_ps(c1, x2), x, x));
        const __m256 t = tanh256(u);
        const __m256 du = _mm256_mul_ps(c0, _mm256_fmadd_ps(c1x3, x2, one));
        const __m256 sech2 = _mm256_fnmadd_ps(t, t, one);  // 1 - t^2
        __m256 g = _mm256_mul_ps(half, _mm256_add_ps(one, t));
        g = _mm256_add_ps(g, _mm256_mul_ps(_mm256_mul_ps(half, x), _mm256_mul_ps(sech2, du)));
        _mm256_storeu_ps(din + i, _mm256_mul_ps(_mm256_loadu_ps(dout + i), g));
    }
    if (i < n) scalar::gelu_grad(din + i, pre + i, dout + i, n - i);
}

void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2) {
    const __m256 b1 = _mm256_set1_ps(beta1), omb1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 b2 = _mm256_set1_ps(beta2), omb2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 lrv = _mm256_set1_ps(lr), epsv = _mm256_set1_ps(eps);
    const __m256 c1v = _mm256_set1_ps(c1), c2v = _mm256_set1_ps(c2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gv = _mm256_loadu_ps(g + i);
        __m256 mv = _mm256_fmadd_ps(omb1, gv, _mm256_mul_ps(b1, _mm256_loadu_ps(m + i)));
        __m256 vv = _mm256_fmadd_ps(omb2, _mm256_mul_ps(gv, gv), _mm256_mul_ps(b2, _mm256_loadu_ps(v + i)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vv, c2v)), epsv);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, _mm256_mul_ps(mv, c1v)), denom);
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
    }
    if (i < n) scalar::adam_step(p + i, m + i, v + i, g + i, n - i, lr, beta1, beta2, eps, c1, c2);
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2) {
    const __m256d b1 = _mm256_set1_pd(beta1), omb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d b2 = _mm256_set1_pd(beta2), omb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
    const __m256d c1v = _mm256_set1_pd(c1), c2v = _mm256_set1_pd(c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_fmadd_pd(omb1, gv, _mm256_mul_pd(b1, _mm256_loadu_pd(m + i)));
        __m256d vv = _mm256_fmadd_pd(omb2, _mm256_mul_pd(gv, gv), _mm256_mul_pd(b2, _mm256_loadu_pd(v + i)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, c2v)), epsv);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mv, c1v)), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    if (i < n) scalar::adam_step(p + i, m + i, v + i, g + i, n - i, lr, beta1, beta2, eps, c1, c2);
}

namespace {

// One output row: y[0..p) (+)= sum_i w[i]*x[i*p ..] (+ b)
void mix_row_f32(float* yo, const float* x, const float* wrow, float b, bool has_bias,
                 std::size_t d_in, std::size_t p, bool accumulate) {
    const std::size_t p8 = p - p % 8;
    for (std::size_t k = 0; k < p8; k += 8) {
        __m256 acc = accumulate ? _mm256_loadu_ps(yo + k) : _mm256_setzero_ps();
        for (std::size_t i = 0; i < d_in; ++i)
            acc = _mm256_fmadd_ps(_mm256_set1_ps(wrow[i]), _mm256_loadu_ps(x + i * p + k), acc);
        if (has_bias) acc = _mm256_add_ps(acc, _mm256_set1_ps(b));
        _mm256_storeu_ps(yo + k, acc);
    }
    for (std::size_t k = p8; k < p; ++k) {
        float acc = accumulate ? yo[k] : 0.0f;
        for (std::size_t i = 0; i < d_in; ++i) acc += wrow[i] * x[i * p + k];
        yo[k] = acc + (has_bias ? b : 0.0f);
    }
}

void mix_row_f64(double* yo, const double* x, const double* wrow, double b, bool has_bias,
                 std::size_t d_in, std::size_t p, bool accumulate) {
    const std::size_t p4 = p - p % 4;
    for (std::size_t k = 0; k < p4; k += 4) {
        __m256d acc = accumulate ? _mm256_loadu_pd(yo + k) : _mm256_setzero_pd();
        for (std::size_t i = 0; i < d_in; ++i)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(wrow[i]), _mm256_loadu_pd(x + i * p + k), acc);
        if (has_bias) acc = _mm256_add_pd(acc, _mm256_set1_pd(b));
        _mm256_storeu_pd(yo + k, acc);
    }
    for (std::size_t k = p4; k < p; ++k) {
        double acc = accumulate ? yo[k] : 0.0;
        for (std::size_t i = 0; i < d_in; ++i) acc += wrow[i] * x[i * p + k];
        yo[k] = acc + (has_bias ? b : 0.0);
    }
}

}  // namespace

void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    const std::size_t p8 = p - p % 8;
    std::size_t o = 0;
    // 4 output rows at a time: x chunks are loaded once per 4 FMAs.
    for (; o + 4 <= d_out; o += 4) {
        const float* w0 = w + (o + 0) * d_in;
        const float* w1 = w + (o + 1) * d_in;
        const float* w2 = w + (o + 2) * d_in;
        const float* w3 = w + (o + 3) * d_in;
        float* y0 = y + (o + 0) * p;
        float* y1 = y + (o + 1) * p;
        float* y2 = y + (o + 2) * p;
        float* y3 = y + (o + 3) * p;
        for (std::size_t k = 0; k < p8; k += 8) {
            __m256 a0 = accumulate ? _mm256_loadu_ps(y0 + k) : _mm256_setzero_ps();
            __m256 a1 = accumulate ? _mm256_loadu_ps(y1 + k) : _mm256_setzero_ps();
            __m256 a2 = accumulate ? _mm256_loadu_ps(y2 + k) : _mm256_setzero_ps();
            __m256 a3 = accumulate ? _mm256_loadu_ps(y3 + k) : _mm256_setzero_ps();
            for (std::size_t i = 0; i < d_in; ++i) {
                const __m256 xv = _mm256_loadu_ps(x + i * p + k);
                a0 = _mm256_fmadd_ps(_mm256_set1_ps(w0[i]), xv, a0);
                a1 = _mm256_fmadd_ps(_mm256_set1_ps(w1[i]), xv, a1);
                a2 = _mm256_fmadd_ps(_mm256_set1_ps(w2[i]), xv, a2);
                a3 = _mm256_fmadd_ps(_mm256_set1_ps(w3[i]), xv, a3);
            }
            if (bias) {
                a0 = _mm256_add_ps(a0, _mm256_set1_ps(bias[o + 0]));
                a1 = _mm256_add_ps(a1, _mm256_set1_ps(bias[o + 1]));
                a2 = _mm256_add_ps(a2, _mm256_set1_ps(bias[o + 2]));
                a3 = _mm256_add_ps(a3, _mm256_set1_ps(bias[o + 3]));
            }
            _mm256_storeu_ps(y0 + k, a0);
            _mm256_storeu_ps(y1 + k, a1);
            _mm256_storeu_ps(y2 + k, a2);
            _mm256_storeu_ps(y3 + k, a3);
        }
        for (std::size_t k = p8; k < p; ++k) {
            for (std::size_t r = 0; r < 4; ++r) {
                float* yr = y + (o + r) * p;
                const float* wr = w + (o + r) * d_in;
                float acc = accumulate ? yr[k] : 0.0f;
                for (std::size_t i = 0; i < d_in; ++i) acc += wr[i] * x[i * p + k];
                yr[k] = acc + (bias ? bias[o + r] : 0.0f);
            }
        }
    }
    for (; o < d_out; ++o)
        mix_row_f32(y + o * p, x, w + o * d_in, bias ? bias[o] : 0.0f, bias != nullptr,
                    d_in, p, accumulate);
}

void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    for (std::size_t o = 0; o < d_out; ++o)
        mix_row_f64(y + o * p, x, w + o * d_in, bias ? bias[o] : 0.0, bias != nullptr,
                    d_in, p, accumulate);
}

void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    for (std::size_t o = 0; o < d_out; ++o) {
        const float* dyo = dy + o * p;
        std::size_t i = 0;
        for (; i + 2 <= d_in; i += 2) {
            __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
            const float* x0 = x + i * p;
            const float* x1 = x + (i + 1) * p;
            std::size_t k = 0;
            for (; k + 8 <= p; k += 8) {
                const __m256 dv = _mm256_loadu_ps(dyo + k);
                s0 = _mm256_fmadd_ps(dv, _mm256_loadu_ps(x0 + k), s0);
                s1 = _mm256_fmadd_ps(dv, _mm256_loadu_ps(x1 + k), s1);
            }
            float r0 = hsum(s0), r1 = hsum(s1);
            for (; k < p; ++k) {
                r0 += dyo[k] * x0[k];
                r1 += dyo[k] * x1[k];
            }
            wg[o * d_in + i] += r0;
            wg[o * d_in + i + 1] += r1;
        }
        for (; i < d_in; ++i) wg[o * d_in + i] += dot(dyo, x + i * p, p);
    }
}

void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    for (std::size_t o = 0; o < d_out; ++o)
        for (std::size_t i = 0; i < d_in; ++i)
            wg[o * d_in + i] += dot(dy + o * p, x + i * p, p);
}

#else  // !FNOLAB_AVX2_BODY: non-x86 build, forward everything to scalar.

bool compiled() { return false; }

void axpy(float* y, const float* x, float a, std::size_t n) { scalar::axpy(y, x, a, n); }
void axpy(double* y, const double* x, double a, std::size_t n) { scalar::axpy(y, x, a, n); }
void scal(float* x, float a, std::size_t n) { scalar::scal(x, a, n); }
void scal(double* x, double a, std::size_t n) { scalar::scal(x, a, n); }
float dot(const float* a, const float* b, std::size_t n) { return scalar::dot(a, b, n); }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
float sumsq(const float* a, std::size_t n) { return scalar::sumsq(a, n); }
double sumsq(const double* a, std::size_t n) { return scalar::sumsq(a, n); }
float sumsq_diff(const float* a, const float* b, std::size_t n) { return scalar::sumsq_diff(a, b, n); }
double sumsq_diff(const double* a, const double* b, std::size_t n) { return scalar::sumsq_diff(a, b, n); }
float sum_abs(const float* a, std::size_t n) { return scalar::sum_abs(a, n); }
double sum_abs(const double* a, std::size_t n) { return scalar::sum_abs(a, n); }
void gelu(float* out, const float* in, std::size_t n) { scalar::gelu(out, in, n); }
void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n) {
    scalar::gelu_grad(din, pre, dout, n);
}
void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2) {
    scalar::adam_step(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2) {
    scalar::adam_step(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}
void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    scalar::channel_mix(y, x, w, bias, d_out, d_in, p, accumulate);
}
void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    scalar::channel_mix(y, x, w, bias, d_out, d_in, p, accumulate);
}
void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    scalar::mix_outer_acc(wg, dy, x, d_out, d_in, p);
}
void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    scalar::mix_outer_acc(wg, dy, x, d_out, d_in, p);
}

#endif  // FNOLAB_AVX2_BODY

}  // namespace fnolab::kernels::avx2
