#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "fnolab/dataset.hpp"
#include "fnolab/fno.hpp"
#include "fnolab/normalize.hpp"

namespace fnolab {

enum class TrainMode { from_scratch = 0, fine_tune = 1 };
enum class Precision { f32 = 0, f64 = 1 };

const char* train_mode_name(TrainMode m);
TrainMode train_mode_from_name(const std::string& s);
const char* precision_name(Precision p);
Precision precision_from_name(const std::string& s);

struct TrainConfig {
    double lr0 = 1e-3;
    int batch_size = 16;
    int epochs = 500;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::from_scratch;
    Precision precision = Precision::f32;

    void validate() const;  // lr0 > 0, batch_size >= 1, epochs >= 1
};

// lr(t) = 0.5 * lr0 * (1 + cos(pi*t/T)), annealed per epoch: epoch e of T
// uses t = e (0-based), so training starts at lr0 and never quite reaches 0.
double cosine_lr(int t, int total, double lr0);

// Flat list of (split, record) references on one grid; subsets and
// concatenations share the underlying SplitData and never copy records.
class DataView {
public:
    struct RecordRef {
        const SplitData* split = nullptr;
        int index = 0;
    };

    DataView() = default;

    static DataView all(const SplitData& split, int h, int w);
    static DataView concat(const std::vector<const DataView*>& views);
    // positions into *this* view, any order, repeats allowed
    DataView subset(const std::vector<std::size_t>& positions) const;

    std::size_t size() const { return refs_.size(); }
    int h() const { return h_; }
    int w() const { return w_; }
    std::size_t plane() const { return static_cast<std::size_t>(h_) * w_; }
    const float* input(std::size_t i) const {
        const RecordRef& r = refs_[i];
        return r.split->input(r.index);
    }
    const float* target(std::size_t i) const {
        const RecordRef& r = refs_[i];
        return r.split->target(r.index);
    }
    const RecordRef& ref(std::size_t i) const { return refs_[i]; }

private:
    int h_ = 0, w_ = 0;
    std::vector<RecordRef> refs_;
};

struct TrainProvenance {
    std::string dataset_id;
    TrainConfig config;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
};

struct Checkpoint {
    FnoParams params;  // params.config carries the architecture
    NormalizationReferences refs;
    TrainProvenance prov;
};

struct LogRow {
    int epoch = 0;
    double train_loss = 0, val_loss = 0, lr = 0;
};

struct TrainResult {
    Checkpoint ckpt;
    std::vector<LogRow> log;
    bool diverged = false;
};

// Adam + cosine schedule + best-on-validation snapshotting. init supplies the
// starting parameters and the (frozen) normalization references. Train data is
// shuffled each epoch with a seeded permutation; batch gradients accumulate
// per-example contributions in example order, so results do not depend on the
// worker count. FINE_TUNE with an empty train split returns init unchanged
// (zero-shot); FROM_SCRATCH with an empty train split is a config error.
// Divergence (non-finite loss) stops the run and flags the result.
TrainResult train_model(const Checkpoint& init, const DataView& train, const DataView& val,
                        const TrainConfig& cfg, const std::string& dataset_id);

// mu_l2 = (1/N) sum ||pred - target||_2 / ||target||_2 over the split, in
// 64-bit. Zero-norm targets are excluded with a warning on stderr.
double evaluate(const Checkpoint& ckpt, const DataView& test);

// Reference 64-bit API (finite-difference oracle target): batch-mean MSE over
// grid points and exact reverse-mode gradients, accumulated into grad (which
// is resized and zeroed). Throws NumericError on a non-finite loss.
double mse_loss_and_grad(const FnoParams& params, const std::vector<const ChannelStack*>& stacks,
                         const std::vector<const RealField*>& targets,
                         const NormalizationReferences& refs, std::vector<double>& grad);

struct Trial {
    TrainConfig config;
    bool diverged = false;
    double val_mu = std::numeric_limits<double>::quiet_NaN();
    double best_val_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
};

struct GridSearchResult {
    std::size_t best_index = 0;
    std::vector<Trial> trials;  // lr-major over lr_grid x batch_grid
    TrainResult best;
};

std::vector<double> default_lr_grid();  // 5 log-spaced in [1e-4, 1e-2]
std::vector<int> default_batch_grid();  // {16, 64}

// One trial per grid cell (same seed/init per cell), selected by lowest
// validation mu_l2; diverged trials stay in the table but cannot win.
// Throws NumericError when every trial diverged.
GridSearchResult grid_search(const Checkpoint& init, const DataView& train, const DataView& val,
                             const TrainConfig& base, const std::vector<double>& lr_grid,
                             const std::vector<int>& batch_grid, const std::string& dataset_id);

// CSV with header epoch,train_loss,val_loss,lr
void write_training_log(const std::filesystem::path& path, const std::vector<LogRow>& log);

// Directory container: checkpoint.json (config, refs, provenance) +
// weights.bin (param scalars, little-endian f64, layout traversal order).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace fnolab
