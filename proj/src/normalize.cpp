#include "fnolab/normalize.hpp"

#include <algorithm>
#include <cmath>

namespace fnolab {

namespace {

constexpr double kStatFloor = 1e-12;

// Mean of the two middle order statistics for even counts.
double median_inplace(std::vector<double>& v) {
    if (v.empty()) throw ConfigError("cannot fit references on an empty split set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double source_norm(const float* input, std::size_t plane) {
    double s = 0.0;
    for (std::size_t k = 0; k < plane; ++k) {
        const double x = input[k];
        s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace

NormalizationReferences fit_references_records(const std::vector<const float*>& inputs,
                                               std::size_t plane, const std::string& fitted_on) {
    NormalizationReferences refs;
    refs.fitted_on = fitted_on;

    std::vector<double> norms;
    norms.reserve(inputs.size());
    for (const float* rec : inputs) norms.push_back(source_norm(rec, plane));
    double f_ref = median_inplace(norms);
    if (f_ref < kStatFloor) f_ref = 1.0;
    refs.f_ref = f_ref;

    // Channel statistics after the per-instance relative-norm division.
    for (int ch = 1; ch < kNumChannels; ++ch) {
        std::vector<double> stats;
        stats.reserve(inputs.size());
        for (const float* rec : inputs) {
            const double r = source_norm(rec, plane) / f_ref;
            if (!(r > 0.0)) throw NumericError("degenerate input: zero source channel");
            const float* cplane = rec + static_cast<std::size_t>(ch) * plane;
            double mean_abs = 0.0;
            for (std::size_t k = 0; k < plane; ++k) mean_abs += std::abs(double(cplane[k]));
            stats.push_back(mean_abs / static_cast<double>(plane) / r);
        }
        double c = median_inplace(stats);
        refs.c_ref[ch] = c < kStatFloor ? 1.0 : c;
    }
    refs.c_ref[0] = 1.0;
    return refs;
}

NormalizationReferences fit_references(const std::vector<const SplitData*>& splits,
                                       const std::string& fitted_on) {
    std::vector<const float*> inputs;
    std::size_t plane = 0;
    for (const SplitData* s : splits) {
        if (plane == 0) plane = s->plane;
        if (s->plane != plane) throw ConfigError("fit_references: splits on different grids");
        for (int i = 0; i < s->n; ++i) inputs.push_back(s->input(i));
    }
    if (inputs.empty()) throw ConfigError("cannot fit references on an empty split set");
    return fit_references_records(inputs, plane, fitted_on);
}

template <class T>
void normalize_record(const float* input, std::size_t plane, const NormalizationReferences& refs,
                      T* out) {
    const double r = source_norm(input, plane) / refs.f_ref;
    if (!(r > 0.0)) throw NumericError("degenerate input: zero source channel");
    for (int ch = 0; ch < kNumChannels; ++ch) {
        const double scale = 1.0 / (r * refs.c_ref[ch]);
        const float* src = input + static_cast<std::size_t>(ch) * plane;
        T* dst = out + static_cast<std::size_t>(ch) * plane;
        for (std::size_t k = 0; k < plane; ++k) dst[k] = static_cast<T>(double(src[k]) * scale);
    }
}

template void normalize_record<float>(const float*, std::size_t, const NormalizationReferences&,
                                      float*);
template void normalize_record<double>(const float*, std::size_t, const NormalizationReferences&,
                                       double*);

ChannelStack normalize_stack(const ChannelStack& stack, const NormalizationReferences& refs) {
    if (stack.c != kNumChannels)
        throw ConfigError("normalize_stack expects " + std::to_string(kNumChannels) + " channels");
    const std::size_t plane = stack.plane();
    const double r = l2_norm(stack.channel(0), plane) / refs.f_ref;
    if (!(r > 0.0)) throw NumericError("degenerate input: zero source channel");
    ChannelStack out(stack.h, stack.w, stack.c);
    for (int ch = 0; ch < kNumChannels; ++ch) {
        const double scale = 1.0 / (r * refs.c_ref[ch]);
        const double* src = stack.channel(ch);
        double* dst = out.channel(ch);
        for (std::size_t k = 0; k < plane; ++k) dst[k] = src[k] * scale;
    }
    return out;
}

}  // namespace fnolab
