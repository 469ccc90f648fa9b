#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fnolab/pde.hpp"

namespace fnolab {

// Model input channels, in record order.
inline constexpr int kNumChannels = 7;  // f, k11, k22, k12, v1, v2, omega
inline constexpr int kChannelLayoutVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;

struct PdeInstance {
    PdeCoefficients coeffs;
    RealField source;    // zero-mean for POISSON/ADV_DIFF (D(0)=0)
    RealField solution;
    double psi = 0.0;         // realized balance (ADV_DIFF only)
    double psi_target = 0.0;  // calibration target (ADV_DIFF only)
    std::uint64_t seed = 0;
};

// [f | k11 | k22 | k12 | v1 | v2 | omega]; coefficient channels are constant.
ChannelStack stack_channels(const PdeCoefficients& coeffs, const RealField& source);

struct SplitSpec {
    int train = 0, val = 0, test = 0;
};

struct DatasetSpec {
    std::string name;
    PdeSystem system = PdeSystem::poisson;
    int h = 64, w = 64;
    SplitSpec counts;
    SamplingRanges ranges;
    SourceConfig source;
    std::uint64_t master_seed = 0;
};

// One split held exactly as stored on disk: f32 records with
// [7*h*w inputs (channel-major) | h*w target], row-major planes.
struct SplitData {
    int n = 0;
    std::size_t plane = 0;  // h*w
    AVec<float> data;       // n * 8*plane
    std::vector<double> psi;         // realized per record (0 outside ADV_DIFF)
    std::vector<double> psi_target;  // per record (0 outside ADV_DIFF)

    std::size_t record_floats() const { return (kNumChannels + 1) * plane; }
    const float* input(int i) const { return data.data() + record_floats() * i; }
    const float* target(int i) const { return input(i) + kNumChannels * plane; }
    float* input(int i) { return data.data() + record_floats() * i; }
};

struct Dataset {
    DatasetSpec spec;
    SplitData train, val, test;
};

// Instance seeds derive from (master_seed, split 0/1/2, record index); the rng
// stream continues across resample attempts, so a seed pins the instance.
PdeInstance generate_instance(const DatasetSpec& spec, std::uint64_t instance_seed);
std::uint64_t instance_seed(const DatasetSpec& spec, int split, int index);

Dataset generate_dataset(const DatasetSpec& spec);

// Container: <dir>/manifest.json + train.bin/val.bin/test.bin (f32 LE records).
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace fnolab
