#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fnolab/train.hpp"

namespace fnolab {

enum class SweepMode { from_scratch = 0, fine_tune = 1, zero_shot = 2 };

const char* sweep_mode_name(SweepMode m);
SweepMode sweep_mode_from_name(const std::string& s);

// One experiment-matrix cell result; the row type of the curve CSV
// (system,mode,model_id,n_examples,seed,lr,test_error).
struct CurvePoint {
    std::string system, mode, model_id;
    int n_examples = 0;
    std::uint64_t seed = 0;
    double lr = 0;  // tuned (or fixed) learning rate; 0 when nothing trained
    double test_error = 0;
};

// Append-only result table backed by the curve CSV. Rows are keyed by
// (system, mode, model_id, n_examples, seed); every append persists
// immediately, so an interrupted sweep resumes where it stopped.
class ResultsCsv {
public:
    explicit ResultsCsv(std::filesystem::path path);  // loads rows if present

    bool contains(const std::string& system, const std::string& mode,
                  const std::string& model_id, int n_examples, std::uint64_t seed) const;
    void append(const CurvePoint& p);
    const std::vector<CurvePoint>& rows() const { return rows_; }
    const std::filesystem::path& path() const { return path_; }

    static const char* const kHeader[7];

private:
    using Key = std::tuple<std::string, std::string, std::string, int, std::uint64_t>;
    std::filesystem::path path_;
    std::vector<CurvePoint> rows_;
    std::set<Key> keys_;
};

// The deterministic downstream subsampling order for one (dataset, seed):
// size-n subsets are prefixes, so they nest across sizes.
std::vector<std::size_t> subsample_permutation(std::size_t n_total, std::uint64_t seed);

struct SweepSpec {
    const Dataset* downstream = nullptr;
    const Checkpoint* source = nullptr;  // required for fine_tune / zero_shot
    std::string system_label;            // system name stamped into rows
    std::vector<int> sizes;              // ascending; 0 = untrained baseline
    std::vector<FnoConfig> models;       // from-scratch archs (fine-tune uses source's)
    std::vector<SweepMode> modes;
    std::vector<std::uint64_t> seeds;
    TrainConfig base;  // epochs/precision/mode template; lr0+batch used when !tune
    bool tune = true;
    std::vector<double> lr_grid = default_lr_grid();
    std::vector<int> batch_grid = default_batch_grid();
    // Cap on validation examples used during training (snapshot selection and
    // the per-epoch val_loss column); 0 = the whole val split. The final
    // test_error always uses the full test split. Per-epoch validation
    // dominates small-n cell cost, so big sweeps cap it.
    int val_cap = 0;
};

// Q1 inner loop (also the engine of Q2/Q3): one row per (model, mode, seed,
// size) cell — zero-shot collapses to one row per seed at n = 0. Cells already
// in `out` are skipped. From-scratch cells fit normalization references on
// their own subset (identity references at n = 0); fine-tune reuses the
// source checkpoint's.
void run_data_scaling(const SweepSpec& spec, ResultsCsv& out);

// Q2: same cells across a model ladder (spec.models carries the ladder).
void run_model_scaling(const SweepSpec& spec, ResultsCsv& out);

// Q4 pre-training stage: concatenates the systems' train/val splits, fits
// references on the union, trains one checkpoint. Downstream evaluation is a
// normal run_data_scaling with source = the returned checkpoint.
TrainResult run_mixed_pretraining(const std::vector<const Dataset*>& systems,
                                  const FnoConfig& model, const TrainConfig& cfg,
                                  const std::string& dataset_id);

// Aggregated curve node (e.g. the median across seeds at one size).
struct CurveSample {
    int n = 0;
    double error = 0;
};

struct EquivRow {
    int n_tl = 0;          // transfer-learning cell size (0 = zero-shot)
    double tl_error = 0;
    double n_equiv = 0;    // from-scratch examples reaching the same error
    bool exceeds = false;  // TL beats the best from-scratch point; n_equiv unset
};

// Piecewise-linear interpolation in (log n, log error) along the from-scratch
// curve, restricted to its monotone lower envelope (warning on stderr when
// points get dropped). Exact at envelope nodes; TL errors worse than the
// envelope's first node extrapolate along its first segment.
std::vector<EquivRow> data_equivalence(std::vector<CurveSample> scratch,
                                       const std::vector<CurveSample>& tl);

// Order-statistic quantile with linear interpolation: position p*(n-1).
double quantile_linear(std::vector<double> v, double p);

struct SeedAggregate {
    std::string system, mode, model_id;
    int n_examples = 0;
    int n_seeds = 0;
    double mean = 0, q1 = 0, median = 0, q3 = 0;
};

// Groups rows by (system, mode, model_id, n_examples) in first-seen order.
std::vector<SeedAggregate> aggregate_seeds(const std::vector<CurvePoint>& rows);

}  // namespace fnolab
