#include "fnolab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "fnolab/common.hpp"

namespace fnolab::fft {

namespace {

// FFTW plan-time buffers must share the execution buffers' alignment class;
// we plan on AVec scratch (64-byte aligned) and require the same of callers.
struct PlanKey {
    int h, w, batch;
    bool operator<(const PlanKey& o) const {
        return std::tie(h, w, batch) < std::tie(o.h, o.w, o.batch);
    }
};

template <class T>
struct Traits;

template <>
struct Traits<double> {
    using plan_t = fftw_plan;
    using complex_t = fftw_complex;
    static plan_t plan_r2c(int h, int w, int batch, double* in, complex_t* out) {
        const int n[2] = {h, w};
        return fftw_plan_many_dft_r2c(2, n, batch, in, nullptr, 1, h * w, out, nullptr, 1,
                                      h * (w / 2 + 1), FFTW_ESTIMATE);
    }
    static plan_t plan_c2r(int h, int w, int batch, complex_t* in, double* out) {
        const int n[2] = {h, w};
        return fftw_plan_many_dft_c2r(2, n, batch, in, nullptr, 1, h * (w / 2 + 1), out, nullptr,
                                      1, h * w, FFTW_ESTIMATE);
    }
    static void run_r2c(plan_t p, double* in, complex_t* out) { fftw_execute_dft_r2c(p, in, out); }
    static void run_c2r(plan_t p, complex_t* in, double* out) { fftw_execute_dft_c2r(p, in, out); }
};

template <>
struct Traits<float> {
    using plan_t = fftwf_plan;
    using complex_t = fftwf_complex;
    static plan_t plan_r2c(int h, int w, int batch, float* in, complex_t* out) {
        const int n[2] = {h, w};
        return fftwf_plan_many_dft_r2c(2, n, batch, in, nullptr, 1, h * w, out, nullptr, 1,
                                       h * (w / 2 + 1), FFTW_ESTIMATE);
    }
    static plan_t plan_c2r(int h, int w, int batch, complex_t* in, float* out) {
        const int n[2] = {h, w};
        return fftwf_plan_many_dft_c2r(2, n, batch, in, nullptr, 1, h * (w / 2 + 1), out, nullptr,
                                       1, h * w, FFTW_ESTIMATE);
    }
    static void run_r2c(plan_t p, float* in, complex_t* out) { fftwf_execute_dft_r2c(p, in, out); }
    static void run_c2r(plan_t p, complex_t* in, float* out) { fftwf_execute_dft_c2r(p, in, out); }
};

template <class T>
class PlanCache {
public:
    using plan_t = typename Traits<T>::plan_t;

    std::pair<plan_t, plan_t> get(int h, int w, int batch) {
        std::lock_guard<std::mutex> lk(mu_);
        const PlanKey key{h, w, batch};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        // Scratch arrays only pin the layout/alignment for planning.
        AVec<T> real(static_cast<std::size_t>(batch) * h * w);
        AVec<std::complex<T>> spec(static_cast<std::size_t>(batch) * h * (w / 2 + 1));
        auto* c = reinterpret_cast<typename Traits<T>::complex_t*>(spec.data());
        plan_t fwd = Traits<T>::plan_r2c(h, w, batch, real.data(), c);
        plan_t inv = Traits<T>::plan_c2r(h, w, batch, c, real.data());
        if (!fwd || !inv) throw NumericError("FFT plan creation failed");
        auto entry = std::make_pair(fwd, inv);
        plans_.emplace(key, entry);
        return entry;
    }

private:
    std::mutex mu_;
    std::map<PlanKey, std::pair<plan_t, plan_t>> plans_;
};

template <class T>
PlanCache<T>& cache() {
    static PlanCache<T> c;
    return c;
}

void validate(int h, int w, int batch) {
    if (h < 4 || w < 4 || h % 2 != 0 || w % 2 != 0)
        throw ConfigError("grid dims must be even and >= 4, got " + std::to_string(h) + "x" +
                          std::to_string(w));
    if (batch < 1) throw ConfigError("fft batch must be >= 1");
}

}  // namespace

void forward(int h, int w, int batch, const float* in, std::complex<float>* out) {
    validate(h, w, batch);
    auto [fwd, inv] = cache<float>().get(h, w, batch);
    (void)inv;
    // r2c out-of-place preserves the input; FFTW just lacks a const signature.
    Traits<float>::run_r2c(fwd, const_cast<float*>(in),
                           reinterpret_cast<fftwf_complex*>(out));
}

void forward(int h, int w, int batch, const double* in, std::complex<double>* out) {
    validate(h, w, batch);
    auto [fwd, inv] = cache<double>().get(h, w, batch);
    (void)inv;
    Traits<double>::run_r2c(fwd, const_cast<double*>(in),
                            reinterpret_cast<fftw_complex*>(out));
}

void inverse(int h, int w, int batch, std::complex<float>* in, float* out) {
    validate(h, w, batch);
    auto [fwd, inv] = cache<float>().get(h, w, batch);
    (void)fwd;
    Traits<float>::run_c2r(inv, reinterpret_cast<fftwf_complex*>(in), out);
}

void inverse(int h, int w, int batch, std::complex<double>* in, double* out) {
    validate(h, w, batch);
    auto [fwd, inv] = cache<double>().get(h, w, batch);
    (void)fwd;
    Traits<double>::run_c2r(inv, reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace fnolab::fft
