#pragma once

#include <array>
#include <string>
#include <vector>

#include "fnolab/dataset.hpp"

namespace fnolab {

// Frozen input-normalization constants. f_ref is the median training-split
// source norm; c_ref[j] (j >= 1) is the median per-example mean-|.| of
// coefficient channel j after the per-instance relative-norm division.
// c_ref[0] is always 1. Fitted once (on the pre-training split for the
// transfer pipeline), serialized into checkpoints, reused unchanged downstream.
struct NormalizationReferences {
    double f_ref = 1.0;
    std::array<double, kNumChannels> c_ref{1, 1, 1, 1, 1, 1, 1};
    std::string fitted_on;
};

// Medians over the concatenation of the given splits, in order. Even counts
// average the two middle order statistics. Statistics below 1e-12 fall back
// to 1 (identically-zero channels must stay untouched).
NormalizationReferences fit_references(const std::vector<const SplitData*>& splits,
                                       const std::string& fitted_on);

// Same statistics over an explicit record list (each pointer: 7 input planes
// of `plane` floats) — the harness fits from-scratch references on subsets.
NormalizationReferences fit_references_records(const std::vector<const float*>& inputs,
                                               std::size_t plane, const std::string& fitted_on);

// r = ||f||/f_ref; all channels divided by r, then channel j >= 1 by c_ref[j].
// Targets are never modified. Throws on an identically-zero source channel.
ChannelStack normalize_stack(const ChannelStack& stack, const NormalizationReferences& refs);

// Record-level variant for the training path: reads an f32 record's input
// planes, writes normalized planes of T. Scales are computed in double
// (identical r for the f32 and f64 paths) and applied per element.
template <class T>
void normalize_record(const float* input, std::size_t plane, const NormalizationReferences& refs,
                      T* out);

extern template void normalize_record<float>(const float*, std::size_t,
                                             const NormalizationReferences&, float*);
extern template void normalize_record<double>(const float*, std::size_t,
                                              const NormalizationReferences&, double*);

}  // namespace fnolab
