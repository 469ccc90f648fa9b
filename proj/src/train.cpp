#include "fnolab/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "fnolab/kernels.hpp"
#include "fnolab/rng.hpp"
#include "fnolab/threadpool.hpp"

namespace fnolab {

using nlohmann::json;

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr std::uint64_t kEpochPermStream = 1;  // derive_seed(seed, stream, epoch)

// sum (pred - target)^2 with double accumulation, independent of precision
// and kernel backend (validation/evaluation must not depend on either).
template <class T>
double target_sumsq_diff(const T* pred, const float* tgt, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(pred[i]) - static_cast<double>(tgt[i]);
        s += d * d;
    }
    return s;
}

double target_sumsq(const float* tgt, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(tgt[i]) * tgt[i];
    return s;
}

// Per-slot scratch for wave-parallel passes: each in-flight example owns one
// slot, and the caller folds slots in example order.
template <class T>
struct Slots {
    FnoNet<T>& net;
    std::vector<typename FnoNet<T>::Workspace> ws;
    std::vector<AVec<T>> grad;
    std::vector<AVec<T>> out;
    std::vector<double> sum;

    Slots(FnoNet<T>& n, std::size_t count, bool with_grad) : net(n) {
        ws.reserve(count);
        for (std::size_t i = 0; i < count; ++i) ws.push_back(n.make_workspace());
        if (with_grad) grad.assign(count, AVec<T>(n.layout().total, T(0)));
        out.assign(count, AVec<T>(n.plane(), T(0)));
        sum.assign(count, 0.0);
    }
};

// Validation / evaluation forward pass: sum over per-example sumsq terms,
// folded in index order.
template <class T>
double mse_sumsq(FnoNet<T>& net, const DataView& data, const NormalizationReferences& refs,
                 ThreadPool& pool, Slots<T>& slots) {
    const std::size_t P = net.plane();
    const std::size_t W = slots.ws.size();
    double total = 0;
    for (std::size_t start = 0; start < data.size(); start += W) {
        const std::size_t wn = std::min(W, data.size() - start);
        pool.parallel_for(wn, [&](std::size_t j) {
            auto& ws = slots.ws[j];
            normalize_record<T>(data.input(start + j), P, refs, ws.xin.data());
            net.forward(ws.xin.data(), slots.out[j].data(), ws);
            slots.sum[j] = target_sumsq_diff(slots.out[j].data(), data.target(start + j), P);
        });
        for (std::size_t j = 0; j < wn; ++j) total += slots.sum[j];
    }
    return total;
}

template <class T>
TrainResult train_impl(const Checkpoint& init, const DataView& train, const DataView& val,
                       const TrainConfig& cfg, const std::string& dataset_id) {
    if (val.size() == 0) throw ConfigError("train: validation split is empty");
    if (train.h() != val.h() || train.w() != val.w())
        throw ConfigError("train: train and validation grids differ");

    FnoNet<T> net(init.params.config, train.h(), train.w());
    net.set_params(init.params.flat);
    const std::size_t total = net.layout().total;
    const std::size_t P = net.plane();
    const std::size_t n = train.size();

    ThreadPool pool;
    const std::size_t W = std::min<std::size_t>(pool.size(), std::max<std::size_t>(n, 1));
    Slots<T> slots(net, W, /*with_grad=*/true);
    AVec<T> grad(total, T(0)), mom(total, T(0)), vel(total, T(0));

    TrainResult res;
    res.ckpt.params.config = init.params.config;
    res.ckpt.refs = init.refs;
    res.ckpt.prov.dataset_id = dataset_id;
    res.ckpt.prov.config = cfg;

    std::vector<double> best_flat = init.params.flat;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    int adam_t = 0;

    for (int e = 0; e < cfg.epochs && !res.diverged; ++e) {
        const double lr = cosine_lr(e, cfg.epochs, cfg.lr0);
        Rng prng(derive_seed(cfg.seed, kEpochPermStream, static_cast<std::uint64_t>(e)));
        fisher_yates(perm, prng);

        double epoch_sumsq = 0;
        for (std::size_t bstart = 0; bstart < n; bstart += cfg.batch_size) {
            const std::size_t bn = std::min<std::size_t>(cfg.batch_size, n - bstart);
            const T scale = static_cast<T>(1.0 / (static_cast<double>(bn) * P));
            std::fill(grad.begin(), grad.end(), T(0));
            double batch_sumsq = 0;
            for (std::size_t wstart = 0; wstart < bn; wstart += W) {
                const std::size_t wn = std::min(W, bn - wstart);
                pool.parallel_for(wn, [&](std::size_t j) {
                    auto& ws = slots.ws[j];
                    auto& g = slots.grad[j];
                    std::fill(g.begin(), g.end(), T(0));
                    slots.sum[j] = 0;
                    const std::size_t idx = perm[bstart + wstart + j];
                    normalize_record<T>(train.input(idx), P, init.refs, ws.xin.data());
                    net.forward_backward(ws.xin.data(), train.target(idx), scale, g.data(), ws,
                                         &slots.sum[j]);
                });
                for (std::size_t j = 0; j < wn; ++j) {
                    kernels::axpy(grad.data(), slots.grad[j].data(), T(1), total);
                    batch_sumsq += slots.sum[j];
                }
            }
            const double batch_loss = batch_sumsq / (static_cast<double>(bn) * P);
            if (!std::isfinite(batch_loss)) {
                res.diverged = true;
                break;
            }
            epoch_sumsq += batch_sumsq;
            ++adam_t;
            const double c1 = 1.0 / (1.0 - std::pow(kBeta1, adam_t));
            const double c2 = 1.0 / (1.0 - std::pow(kBeta2, adam_t));
            kernels::adam_step(net.params().data(), mom.data(), vel.data(), grad.data(), total,
                               static_cast<T>(lr), static_cast<T>(kBeta1),
                               static_cast<T>(kBeta2), static_cast<T>(kAdamEps),
                               static_cast<T>(c1), static_cast<T>(c2));
        }
        if (res.diverged) break;

        const double train_loss = epoch_sumsq / (static_cast<double>(n) * P);
        const double val_loss =
            mse_sumsq(net, val, init.refs, pool, slots) / (static_cast<double>(val.size()) * P);
        res.log.push_back({e, train_loss, val_loss, lr});
        if (!std::isfinite(val_loss)) {
            res.diverged = true;
            break;
        }
        if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = e;
            net.params_to_double(best_flat);
        }
    }

    res.ckpt.params.flat = std::move(best_flat);
    res.ckpt.prov.best_val_loss = best_val;
    res.ckpt.prov.best_epoch = best_epoch;
    return res;
}

}  // namespace

const char* train_mode_name(TrainMode m) {
    return m == TrainMode::from_scratch ? "from_scratch" : "fine_tune";
}

TrainMode train_mode_from_name(const std::string& s) {
    if (s == "from_scratch") return TrainMode::from_scratch;
    if (s == "fine_tune") return TrainMode::fine_tune;
    throw ConfigError("unknown train mode '" + s + "'");
}

const char* precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision precision_from_name(const std::string& s) {
    if (s == "f32") return Precision::f32;
    if (s == "f64") return Precision::f64;
    throw ConfigError("unknown precision '" + s + "'");
}

void TrainConfig::validate() const {
    if (!(lr0 > 0)) throw ConfigError("train: lr0 must be > 0");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
}

double cosine_lr(int t, int total, double lr0) {
    if (total < 1) throw ConfigError("cosine_lr: total must be >= 1");
    if (t < 0 || t > total)
        throw ConfigError("cosine_lr: t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(total) + "]");
    return 0.5 * lr0 * (1.0 + std::cos(M_PI * static_cast<double>(t) / total));
}

DataView DataView::all(const SplitData& split, int h, int w) {
    if (static_cast<std::size_t>(h) * w != split.plane)
        throw ConfigError("data view: grid " + std::to_string(h) + "x" + std::to_string(w) +
                          " does not match split plane");
    DataView v;
    v.h_ = h;
    v.w_ = w;
    v.refs_.reserve(split.n);
    for (int i = 0; i < split.n; ++i) v.refs_.push_back({&split, i});
    return v;
}

DataView DataView::concat(const std::vector<const DataView*>& views) {
    DataView v;
    for (const DataView* src : views) {
        if (!src) throw ConfigError("data view: null view in concat");
        if (v.refs_.empty() && v.h_ == 0) {
            v.h_ = src->h_;
            v.w_ = src->w_;
        } else if (src->h_ != v.h_ || src->w_ != v.w_) {
            throw ConfigError("data view: concat of mismatched grids");
        }
        v.refs_.insert(v.refs_.end(), src->refs_.begin(), src->refs_.end());
    }
    return v;
}

DataView DataView::subset(const std::vector<std::size_t>& positions) const {
    DataView v;
    v.h_ = h_;
    v.w_ = w_;
    v.refs_.reserve(positions.size());
    for (std::size_t p : positions) {
        if (p >= refs_.size())
            throw ConfigError("data view: subset position " + std::to_string(p) +
                              " out of range");
        v.refs_.push_back(refs_[p]);
    }
    return v;
}

TrainResult train_model(const Checkpoint& init, const DataView& train, const DataView& val,
                        const TrainConfig& cfg, const std::string& dataset_id) {
    cfg.validate();
    init.params.config.validate();
    if (init.params.flat.size() != static_cast<std::size_t>(param_count(init.params.config)))
        throw ConfigError("train: init parameter count mismatch");
    if (train.size() == 0) {
        if (cfg.mode == TrainMode::fine_tune) {
            // zero-shot: the source checkpoint is the result
            TrainResult res;
            res.ckpt = init;
            return res;
        }
        throw ConfigError("train: empty training split for from-scratch mode");
    }
    return cfg.precision == Precision::f32 ? train_impl<float>(init, train, val, cfg, dataset_id)
                                           : train_impl<double>(init, train, val, cfg, dataset_id);
}

double evaluate(const Checkpoint& ckpt, const DataView& test) {
    if (test.size() == 0) throw ConfigError("evaluate: empty test split");
    FnoNet<double> net(ckpt.params.config, test.h(), test.w());
    net.set_params(ckpt.params.flat);
    ThreadPool pool;
    const std::size_t W = std::min<std::size_t>(pool.size(), test.size());
    Slots<double> slots(net, W, /*with_grad=*/false);
    const std::size_t P = net.plane();

    std::vector<double> rel(test.size(), -1.0);  // -1 marks an excluded example
    for (std::size_t start = 0; start < test.size(); start += W) {
        const std::size_t wn = std::min(W, test.size() - start);
        pool.parallel_for(wn, [&](std::size_t j) {
            const std::size_t i = start + j;
            const double tnorm2 = target_sumsq(test.target(i), P);
            if (tnorm2 == 0) return;
            auto& ws = slots.ws[j];
            normalize_record<double>(test.input(i), P, ckpt.refs, ws.xin.data());
            net.forward(ws.xin.data(), slots.out[j].data(), ws);
            rel[i] = std::sqrt(target_sumsq_diff(slots.out[j].data(), test.target(i), P) /
                               tnorm2);
        });
    }
    double sum = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        if (rel[i] < 0) {
            std::fprintf(stderr, "warning: evaluate: skipping zero-norm target %zu\n", i);
            continue;
        }
        sum += rel[i];
        ++used;
    }
    if (used == 0) throw ConfigError("evaluate: no usable targets (all zero-norm)");
    return sum / static_cast<double>(used);
}

double mse_loss_and_grad(const FnoParams& params, const std::vector<const ChannelStack*>& stacks,
                         const std::vector<const RealField*>& targets,
                         const NormalizationReferences& refs, std::vector<double>& grad) {
    if (stacks.empty() || stacks.size() != targets.size())
        throw ConfigError("loss: batch is empty or stacks/targets disagree");
    const ChannelStack& first = *stacks.front();
    FnoNet<double> net(params.config, first.h, first.w);
    net.set_params(params.flat);
    auto ws = net.make_workspace();
    const std::size_t P = net.plane();
    grad.assign(net.layout().total, 0.0);
    AVec<float> tgt(P);
    const double scale = 1.0 / (static_cast<double>(stacks.size()) * P);
    double sumsq = 0;
    for (std::size_t b = 0; b < stacks.size(); ++b) {
        const ChannelStack& st = *stacks[b];
        const RealField& t = *targets[b];
        if (st.h != first.h || st.w != first.w || t.h != st.h || t.w != st.w)
            throw ConfigError("loss: mismatched grids in batch");
        const ChannelStack norm = normalize_stack(st, refs);
        for (std::size_t i = 0; i < P; ++i) tgt[i] = static_cast<float>(t.values[i]);
        net.forward_backward(norm.values.data(), tgt.data(), scale, grad.data(), ws, &sumsq);
    }
    const double loss = sumsq * scale;
    if (!std::isfinite(loss)) throw NumericError("divergence: non-finite loss");
    return loss;
}

std::vector<double> default_lr_grid() {
    // 5 log-spaced values spanning [1e-4, 1e-2]
    std::vector<double> g(5);
    for (int i = 0; i < 5; ++i) g[i] = std::pow(10.0, -4.0 + 0.5 * i);
    return g;
}

std::vector<int> default_batch_grid() { return {16, 64}; }

GridSearchResult grid_search(const Checkpoint& init, const DataView& train, const DataView& val,
                             const TrainConfig& base, const std::vector<double>& lr_grid,
                             const std::vector<int>& batch_grid, const std::string& dataset_id) {
    if (lr_grid.empty() || batch_grid.empty())
        throw ConfigError("grid search: empty lr or batch grid");
    GridSearchResult res;
    double best_mu = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double lr : lr_grid)
        for (int bs : batch_grid) {
            TrainConfig cfg = base;
            cfg.lr0 = lr;
            cfg.batch_size = bs;
            Trial trial;
            trial.config = cfg;
            TrainResult run = train_model(init, train, val, cfg, dataset_id);
            trial.diverged = run.diverged;
            trial.best_val_loss = run.ckpt.prov.best_val_loss;
            trial.best_epoch = run.ckpt.prov.best_epoch;
            if (!run.diverged) {
                trial.val_mu = evaluate(run.ckpt, val);
                if (trial.val_mu < best_mu) {
                    best_mu = trial.val_mu;
                    res.best_index = res.trials.size();
                    res.best = std::move(run);
                    any = true;
                }
            }
            res.trials.push_back(std::move(trial));
        }
    if (!any) throw NumericError("grid search: all trials diverged");
    return res;
}

void write_training_log(const std::filesystem::path& path, const std::vector<LogRow>& log) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "epoch,train_loss,val_loss,lr\n";
    for (const LogRow& r : log)
        os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss)
           << ',' << format_double(r.lr) << '\n';
    if (!os.flush()) throw IoError("failed writing " + path.string());
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
    ckpt.params.config.validate();
    const auto expect = static_cast<std::size_t>(param_count(ckpt.params.config));
    if (ckpt.params.flat.size() != expect)
        throw ConfigError("checkpoint: parameter count mismatch");
    std::filesystem::create_directories(dir);

    json j;
    j["format_version"] = 1;
    j["config"] = {{"c_in", ckpt.params.config.c_in},   {"d", ckpt.params.config.d},
                   {"m", ckpt.params.config.m},         {"L", ckpt.params.config.L},
                   {"head_width", ckpt.params.config.head_width},
                   {"activation", ckpt.params.config.activation}};
    j["param_count"] = expect;
    j["refs"] = {{"f_ref", ckpt.refs.f_ref},
                 {"c_ref", std::vector<double>(ckpt.refs.c_ref.begin(), ckpt.refs.c_ref.end())},
                 {"fitted_on", ckpt.refs.fitted_on}};
    const TrainConfig& tc = ckpt.prov.config;
    j["provenance"] = {
        {"dataset_id", ckpt.prov.dataset_id},
        {"train_config",
         {{"lr0", tc.lr0},
          {"batch_size", tc.batch_size},
          {"epochs", tc.epochs},
          {"seed", tc.seed},
          {"mode", train_mode_name(tc.mode)},
          {"precision", precision_name(tc.precision)}}},
        {"best_val_loss", std::isfinite(ckpt.prov.best_val_loss)
                              ? json(ckpt.prov.best_val_loss)
                              : json(nullptr)},
        {"best_epoch", ckpt.prov.best_epoch}};
    {
        std::ofstream os(dir / "checkpoint.json");
        if (!os) throw IoError("cannot write " + (dir / "checkpoint.json").string());
        os << j.dump(2) << '\n';
        if (!os.flush()) throw IoError("failed writing " + (dir / "checkpoint.json").string());
    }
    {
        std::ofstream os(dir / "weights.bin", std::ios::binary);
        if (!os) throw IoError("cannot write " + (dir / "weights.bin").string());
        os.write(reinterpret_cast<const char*>(ckpt.params.flat.data()),
                 static_cast<std::streamsize>(ckpt.params.flat.size() * sizeof(double)));
        if (!os.flush()) throw IoError("failed writing " + (dir / "weights.bin").string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream is(dir / "checkpoint.json");
    if (!is) throw IoError("cannot open " + (dir / "checkpoint.json").string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw IoError("bad checkpoint " + (dir / "checkpoint.json").string() + ": " + e.what());
    }

    Checkpoint ckpt;
    try {
        if (j.at("format_version").get<int>() != 1)
            throw IoError("checkpoint: unsupported format_version");
        const json& c = j.at("config");
        ckpt.params.config.c_in = c.at("c_in").get<int>();
        ckpt.params.config.d = c.at("d").get<int>();
        ckpt.params.config.m = c.at("m").get<int>();
        ckpt.params.config.L = c.at("L").get<int>();
        ckpt.params.config.head_width = c.at("head_width").get<int>();
        ckpt.params.config.activation = c.at("activation").get<std::string>();
        const json& r = j.at("refs");
        ckpt.refs.f_ref = r.at("f_ref").get<double>();
        const auto cr = r.at("c_ref").get<std::vector<double>>();
        if (cr.size() != ckpt.refs.c_ref.size())
            throw IoError("checkpoint: bad c_ref length");
        std::copy(cr.begin(), cr.end(), ckpt.refs.c_ref.begin());
        ckpt.refs.fitted_on = r.at("fitted_on").get<std::string>();
        const json& p = j.at("provenance");
        ckpt.prov.dataset_id = p.at("dataset_id").get<std::string>();
        const json& tc = p.at("train_config");
        ckpt.prov.config.lr0 = tc.at("lr0").get<double>();
        ckpt.prov.config.batch_size = tc.at("batch_size").get<int>();
        ckpt.prov.config.epochs = tc.at("epochs").get<int>();
        ckpt.prov.config.seed = tc.at("seed").get<std::uint64_t>();
        ckpt.prov.config.mode = train_mode_from_name(tc.at("mode").get<std::string>());
        ckpt.prov.config.precision = precision_from_name(tc.at("precision").get<std::string>());
        ckpt.prov.best_val_loss = p.at("best_val_loss").is_null()
                                      ? std::numeric_limits<double>::infinity()
                                      : p.at("best_val_loss").get<double>();
        ckpt.prov.best_epoch = p.at("best_epoch").get<int>();
    } catch (const json::exception& e) {
        throw IoError("bad checkpoint " + (dir / "checkpoint.json").string() + ": " + e.what());
    }
    ckpt.params.config.validate();

    const auto expect = static_cast<std::size_t>(param_count(ckpt.params.config));
    if (j.at("param_count").get<std::size_t>() != expect)
        throw IoError("checkpoint: param_count does not match config");
    const auto wpath = dir / "weights.bin";
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(wpath, ec);
    if (ec) throw IoError("cannot stat " + wpath.string());
    if (bytes != expect * sizeof(double))
        throw IoError("checkpoint: weights.bin holds " + std::to_string(bytes / sizeof(double)) +
                      " scalars, expected " + std::to_string(expect));
    std::ifstream ws(wpath, std::ios::binary);
    if (!ws) throw IoError("cannot open " + wpath.string());
    ckpt.params.flat.resize(expect);
    ws.read(reinterpret_cast<char*>(ckpt.params.flat.data()),
            static_cast<std::streamsize>(expect * sizeof(double)));
    if (ws.gcount() != static_cast<std::streamsize>(expect * sizeof(double)))
        throw IoError("truncated " + wpath.string());
    return ckpt;
}

}  // namespace fnolab
