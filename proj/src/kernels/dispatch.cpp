#include "fnolab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "fnolab/common.hpp"

namespace fnolab::kernels {

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend resolve_initial() {
    const bool hw = avx2::compiled() && cpu_has_avx2();
    if (const char* env = std::getenv("FNOLAB_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!hw)
                throw ConfigError("FNOLAB_KERNELS=avx2 but this CPU/build has no AVX2 support");
            return Backend::avx2;
        }
        throw ConfigError(std::string("unknown FNOLAB_KERNELS value '") + env +
                          "' (expected scalar|avx2)");
    }
    return hw ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
    static std::atomic<Backend> slot{resolve_initial()};
    return slot;
}

inline bool use_avx2() { return backend_slot().load(std::memory_order_relaxed) == Backend::avx2; }

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) {
    return b == Backend::scalar || (avx2::compiled() && cpu_has_avx2());
}

void force_backend(Backend b) {
    if (!backend_available(b))
        throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                          "' is not available on this machine");
    backend_slot().store(b, std::memory_order_relaxed);
}

void axpy(float* y, const float* x, float a, std::size_t n) {
    use_avx2() ? avx2::axpy(y, x, a, n) : scalar::axpy(y, x, a, n);
}
void axpy(double* y, const double* x, double a, std::size_t n) {
    use_avx2() ? avx2::axpy(y, x, a, n) : scalar::axpy(y, x, a, n);
}
void scal(float* x, float a, std::size_t n) {
    use_avx2() ? avx2::scal(x, a, n) : scalar::scal(x, a, n);
}
void scal(double* x, double a, std::size_t n) {
    use_avx2() ? avx2::scal(x, a, n) : scalar::scal(x, a, n);
}
float dot(const float* a, const float* b, std::size_t n) {
    return use_avx2() ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}
double dot(const double* a, const double* b, std::size_t n) {
    return use_avx2() ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}
float sumsq(const float* a, std::size_t n) {
    return use_avx2() ? avx2::sumsq(a, n) : scalar::sumsq(a, n);
}
double sumsq(const double* a, std::size_t n) {
    return use_avx2() ? avx2::sumsq(a, n) : scalar::sumsq(a, n);
}
float sumsq_diff(const float* a, const float* b, std::size_t n) {
    return use_avx2() ? avx2::sumsq_diff(a, b, n) : scalar::sumsq_diff(a, b, n);
}
double sumsq_diff(const double* a, const double* b, std::size_t n) {
    return use_avx2() ? avx2::sumsq_diff(a, b, n) : scalar::sumsq_diff(a, b, n);
}
float sum_abs(const float* a, std::size_t n) {
    return use_avx2() ? avx2::sum_abs(a, n) : scalar::sum_abs(a, n);
}
double sum_abs(const double* a, std::size_t n) {
    return use_avx2() ? avx2::sum_abs(a, n) : scalar::sum_abs(a, n);
}
void gelu(float* out, const float* in, std::size_t n) {
    use_avx2() ? avx2::gelu(out, in, n) : scalar::gelu(out, in, n);
}
void gelu(double* out, const double* in, std::size_t n) {
    scalar::gelu(out, in, n);  // no f64 vector tanh; scalar on every backend
}
void gelu_grad(float* din, const float* pre, const float* dout, std::size_t n) {
    use_avx2() ? avx2::gelu_grad(din, pre, dout, n) : scalar::gelu_grad(din, pre, dout, n);
}
void gelu_grad(double* din, const double* pre, const double* dout, std::size_t n) {
    scalar::gelu_grad(din, pre, dout, n);
}
void adam_step(float* p, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float c1, float c2) {
    use_avx2() ? avx2::adam_step(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2)
               : scalar::adam_step(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps, double c1, double c2) {
    use_avx2() ? avx2::adam_step(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2)
               : scalar::adam_step(p, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}
void channel_mix(float* y, const float* x, const float* w, const float* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    use_avx2() ? avx2::channel_mix(y, x, w, bias, d_out, d_in, p, accumulate)
               : scalar::channel_mix(y, x, w, bias, d_out, d_in, p, accumulate);
}
void channel_mix(double* y, const double* x, const double* w, const double* bias,
                 std::size_t d_out, std::size_t d_in, std::size_t p, bool accumulate) {
    use_avx2() ? avx2::channel_mix(y, x, w, bias, d_out, d_in, p, accumulate)
               : scalar::channel_mix(y, x, w, bias, d_out, d_in, p, accumulate);
}
void mix_outer_acc(float* wg, const float* dy, const float* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    use_avx2() ? avx2::mix_outer_acc(wg, dy, x, d_out, d_in, p)
               : scalar::mix_outer_acc(wg, dy, x, d_out, d_in, p);
}
void mix_outer_acc(double* wg, const double* dy, const double* x,
                   std::size_t d_out, std::size_t d_in, std::size_t p) {
    use_avx2() ? avx2::mix_outer_acc(wg, dy, x, d_out, d_in, p)
               : scalar::mix_outer_acc(wg, dy, x, d_out, d_in, p);
}
void row_sum_acc(float* bg, const float* dy, std::size_t d_out, std::size_t p) {
    scalar::row_sum_acc(bg, dy, d_out, p);  // negligible cost, scalar everywhere
}
void row_sum_acc(double* bg, const double* dy, std::size_t d_out, std::size_t p) {
    scalar::row_sum_acc(bg, dy, d_out, p);
}

}  // namespace fnolab::kernels
