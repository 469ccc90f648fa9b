#include "fnolab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "fnolab/csv.hpp"
#include "fnolab/rng.hpp"

namespace fnolab {

namespace {

constexpr std::uint64_t kSubsampleStream = 2;  // derive_seed(seed, stream, 0)
constexpr std::uint64_t kModelInitStream = 3;

int parse_int(const std::string& s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw IoError("curve csv: bad integer '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw IoError("curve csv: bad seed '" + s + "'");
    return v;
}

double parse_double(const std::string& s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw IoError("curve csv: bad number '" + s + "'");
    return v;
}

}  // namespace

const char* sweep_mode_name(SweepMode m) {
    switch (m) {
        case SweepMode::from_scratch: return "from_scratch";
        case SweepMode::fine_tune: return "fine_tune";
        case SweepMode::zero_shot: return "zero_shot";
    }
    throw ConfigError("bad sweep mode");
}

SweepMode sweep_mode_from_name(const std::string& s) {
    if (s == "from_scratch") return SweepMode::from_scratch;
    if (s == "fine_tune") return SweepMode::fine_tune;
    if (s == "zero_shot") return SweepMode::zero_shot;
    throw ConfigError("unknown sweep mode '" + s + "'");
}

const char* const ResultsCsv::kHeader[7] = {"system", "mode",  "model_id",  "n_examples",
                                            "seed",   "lr",    "test_error"};

ResultsCsv::ResultsCsv(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(path_)) {
        csv::Table t = csv::read_file(path_.string());
        if (t.header != std::vector<std::string>(kHeader, kHeader + 7))
            throw IoError("curve csv: unexpected header in " + path_.string());
        for (const auto& r : t.rows) {
            if (r.size() != 7) throw IoError("curve csv: short row in " + path_.string());
            CurvePoint p{r[0], r[1], r[2], parse_int(r[3]), parse_u64(r[4]), parse_double(r[5]),
                         parse_double(r[6])};
            keys_.insert({p.system, p.mode, p.model_id, p.n_examples, p.seed});
            rows_.push_back(std::move(p));
        }
        return;
    }
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream os(path_, std::ios::binary);
    if (!os) throw IoError("cannot write " + path_.string());
    os << csv::join_row(std::vector<std::string>(kHeader, kHeader + 7)) << '\n';
    if (!os.flush()) throw IoError("failed writing " + path_.string());
}

bool ResultsCsv::contains(const std::string& system, const std::string& mode,
                          const std::string& model_id, int n_examples,
                          std::uint64_t seed) const {
    return keys_.count({system, mode, model_id, n_examples, seed}) != 0;
}

void ResultsCsv::append(const CurvePoint& p) {
    if (contains(p.system, p.mode, p.model_id, p.n_examples, p.seed))
        throw ConfigError("results: duplicate cell " + p.system + "/" + p.mode + "/" +
                          p.model_id + "/n=" + std::to_string(p.n_examples));
    std::ofstream os(path_, std::ios::binary | std::ios::app);
    if (!os) throw IoError("cannot append to " + path_.string());
    os << csv::join_row({p.system, p.mode, p.model_id, std::to_string(p.n_examples),
                         std::to_string(p.seed), format_double(p.lr),
                         format_double(p.test_error)})
       << '\n';
    if (!os.flush()) throw IoError("failed writing " + path_.string());
    keys_.insert({p.system, p.mode, p.model_id, p.n_examples, p.seed});
    rows_.push_back(p);
}

std::vector<std::size_t> subsample_permutation(std::size_t n_total, std::uint64_t seed) {
    std::vector<std::size_t> perm(n_total);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, kSubsampleStream, 0));
    fisher_yates(perm, rng);
    return perm;
}

void run_data_scaling(const SweepSpec& spec, ResultsCsv& out) {
    if (!spec.downstream) throw ConfigError("sweep: no downstream dataset");
    if (spec.modes.empty() || spec.seeds.empty()) throw ConfigError("sweep: no modes or seeds");
    const Dataset& ds = *spec.downstream;
    for (std::size_t i = 1; i < spec.sizes.size(); ++i)
        if (spec.sizes[i - 1] > spec.sizes[i])
            throw ConfigError("sweep: sizes must be ascending");
    for (int n : spec.sizes) {
        if (n < 0) throw ConfigError("sweep: negative size");
        if (n > ds.train.n)
            throw ConfigError("sweep: size " + std::to_string(n) + " exceeds the " +
                              std::to_string(ds.train.n) + " available train examples");
    }
    bool needs_source = false;
    for (SweepMode m : spec.modes)
        if (m != SweepMode::from_scratch) needs_source = true;
    if (needs_source && !spec.source)
        throw ConfigError("sweep: fine_tune/zero_shot modes need a source checkpoint");

    const DataView train_all = DataView::all(ds.train, ds.spec.h, ds.spec.w);
    DataView val = DataView::all(ds.val, ds.spec.h, ds.spec.w);
    if (spec.val_cap < 0) throw ConfigError("sweep: val_cap must be >= 0");
    if (spec.val_cap > 0 && static_cast<std::size_t>(spec.val_cap) < val.size()) {
        std::vector<std::size_t> head(static_cast<std::size_t>(spec.val_cap));
        std::iota(head.begin(), head.end(), std::size_t{0});
        val = val.subset(head);
    }
    const DataView test = DataView::all(ds.test, ds.spec.h, ds.spec.w);

    for (SweepMode mode : spec.modes) {
        const std::string mode_name = sweep_mode_name(mode);
        if (mode == SweepMode::zero_shot) {
            const std::string mid = spec.source->params.config.model_id();
            for (std::uint64_t seed : spec.seeds) {
                if (out.contains(spec.system_label, mode_name, mid, 0, seed)) continue;
                const double mu = evaluate(*spec.source, test);
                out.append({spec.system_label, mode_name, mid, 0, seed, 0.0, mu});
            }
            continue;
        }
        const bool ft = mode == SweepMode::fine_tune;
        std::vector<FnoConfig> archs =
            ft ? std::vector<FnoConfig>{spec.source->params.config} : spec.models;
        if (archs.empty()) throw ConfigError("sweep: no model configs");
        for (const FnoConfig& arch : archs) {
            const std::string mid = arch.model_id();
            for (std::uint64_t seed : spec.seeds) {
                const auto perm = subsample_permutation(ds.train.n, seed);
                for (int n : spec.sizes) {
                    if (out.contains(spec.system_label, mode_name, mid, n, seed)) continue;
                    CurvePoint row{spec.system_label, mode_name, mid, n, seed, 0.0, 0.0};
                    const std::vector<std::size_t> pos(perm.begin(), perm.begin() + n);
                    const DataView sub = train_all.subset(pos);
                    if (n == 0) {
                        // untrained baseline: the source as-is, or a fresh init
                        // evaluated through identity references
                        Checkpoint base;
                        if (ft) {
                            base = *spec.source;
                        } else {
                            base.params =
                                init_params(arch, derive_seed(seed, kModelInitStream, 0));
                            base.refs.fitted_on = "identity";
                        }
                        row.test_error = evaluate(base, test);
                    } else {
                        Checkpoint init;
                        if (ft) {
                            init = *spec.source;
                        } else {
                            init.params =
                                init_params(arch, derive_seed(seed, kModelInitStream, 0));
                            std::vector<const float*> recs;
                            recs.reserve(sub.size());
                            for (std::size_t i = 0; i < sub.size(); ++i)
                                recs.push_back(sub.input(i));
                            init.refs = fit_references_records(
                                recs, sub.plane(), ds.spec.name + ":n" + std::to_string(n));
                        }
                        TrainConfig cfg = spec.base;
                        cfg.seed = seed;
                        cfg.mode = ft ? TrainMode::fine_tune : TrainMode::from_scratch;
                        if (spec.tune) {
                            GridSearchResult gs = grid_search(init, sub, val, cfg, spec.lr_grid,
                                                              spec.batch_grid, ds.spec.name);
                            row.lr = gs.trials[gs.best_index].config.lr0;
                            row.test_error = evaluate(gs.best.ckpt, test);
                        } else {
                            TrainResult tr = train_model(init, sub, val, cfg, ds.spec.name);
                            if (tr.diverged)
                                throw NumericError("sweep: diverged at fixed lr (" +
                                                   spec.system_label + "/" + mode_name +
                                                   "/n=" + std::to_string(n) + ")");
                            row.lr = cfg.lr0;
                            row.test_error = evaluate(tr.ckpt, test);
                        }
                    }
                    out.append(row);
                }
            }
        }
    }
}

void run_model_scaling(const SweepSpec& spec, ResultsCsv& out) {
    if (spec.models.empty()) throw ConfigError("model scaling: empty model ladder");
    for (std::size_t i = 1; i < spec.models.size(); ++i)
        if (param_count(spec.models[i]) <= param_count(spec.models[i - 1]))
            throw ConfigError("model scaling: ladder must strictly increase in parameters");
    run_data_scaling(spec, out);
}

TrainResult run_mixed_pretraining(const std::vector<const Dataset*>& systems,
                                  const FnoConfig& model, const TrainConfig& cfg,
                                  const std::string& dataset_id) {
    if (systems.empty()) throw ConfigError("mixed: no systems");
    std::vector<const SplitData*> trains;
    std::vector<DataView> train_views, val_views;
    for (const Dataset* d : systems) {
        if (!d) throw ConfigError("mixed: null dataset");
        if (d->spec.h != systems[0]->spec.h || d->spec.w != systems[0]->spec.w)
            throw ConfigError("mixed: grid mismatch across systems");
        trains.push_back(&d->train);
        train_views.push_back(DataView::all(d->train, d->spec.h, d->spec.w));
        val_views.push_back(DataView::all(d->val, d->spec.h, d->spec.w));
    }
    std::vector<const DataView*> tv, vv;
    for (const auto& v : train_views) tv.push_back(&v);
    for (const auto& v : val_views) vv.push_back(&v);
    const DataView train = DataView::concat(tv);
    const DataView val = DataView::concat(vv);

    Checkpoint init;
    init.params = init_params(model, derive_seed(cfg.seed, kModelInitStream, 0));
    init.refs = fit_references(trains, dataset_id);
    TrainConfig c = cfg;
    c.mode = TrainMode::from_scratch;
    return train_model(init, train, val, c, dataset_id);
}

std::vector<EquivRow> data_equivalence(std::vector<CurveSample> scratch,
                                       const std::vector<CurveSample>& tl) {
    for (const CurveSample& s : scratch) {
        if (s.n < 1) throw ConfigError("data_equivalence: from-scratch sizes must be >= 1");
        if (!(s.error > 0)) throw ConfigError("data_equivalence: errors must be positive");
    }
    for (const CurveSample& s : tl)
        if (!(s.error > 0)) throw ConfigError("data_equivalence: errors must be positive");
    std::stable_sort(scratch.begin(), scratch.end(),
                     [](const CurveSample& a, const CurveSample& b) { return a.n < b.n; });

    // monotone lower envelope: keep strictly improving points
    std::vector<CurveSample> env;
    int dropped = 0;
    double best = std::numeric_limits<double>::infinity();
    for (const CurveSample& s : scratch) {
        if (s.error < best) {
            env.push_back(s);
            best = s.error;
        } else {
            ++dropped;
        }
    }
    if (dropped)
        std::fprintf(stderr,
                     "warning: data_equivalence: dropped %d non-monotone from-scratch points\n",
                     dropped);
    if (env.size() < 2)
        throw ConfigError("data_equivalence: need >= 2 strictly improving from-scratch points");

    std::vector<EquivRow> rows;
    rows.reserve(tl.size());
    for (const CurveSample& t : tl) {
        EquivRow row;
        row.n_tl = t.n;
        row.tl_error = t.error;
        // exact at nodes
        bool done = false;
        for (const CurveSample& e : env)
            if (t.error == e.error) {
                row.n_equiv = static_cast<double>(e.n);
                done = true;
                break;
            }
        if (!done) {
            if (t.error < env.back().error) {
                row.exceeds = true;  // beats every from-scratch point
            } else {
                std::size_t i = 0;  // env errors strictly decrease
                if (t.error < env.front().error)
                    while (i + 2 < env.size() && env[i + 1].error > t.error) ++i;
                const double le0 = std::log(env[i].error), le1 = std::log(env[i + 1].error);
                const double ln0 = std::log(static_cast<double>(env[i].n));
                const double ln1 = std::log(static_cast<double>(env[i + 1].n));
                const double s = (std::log(t.error) - le0) / (le1 - le0);
                row.n_equiv = std::exp(ln0 + s * (ln1 - ln0));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

double quantile_linear(std::vector<double> v, double p) {
    if (v.empty()) throw ConfigError("quantile of empty set");
    if (p < 0 || p > 1) throw ConfigError("quantile probability outside [0,1]");
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

std::vector<SeedAggregate> aggregate_seeds(const std::vector<CurvePoint>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, int>;
    std::vector<Key> order;
    std::map<Key, std::vector<double>> groups;
    for (const CurvePoint& r : rows) {
        Key k{r.system, r.mode, r.model_id, r.n_examples};
        auto [it, fresh] = groups.try_emplace(k);
        if (fresh) order.push_back(k);
        it->second.push_back(r.test_error);
    }
    std::vector<SeedAggregate> out;
    out.reserve(order.size());
    for (const Key& k : order) {
        const std::vector<double>& v = groups[k];
        SeedAggregate a;
        a.system = std::get<0>(k);
        a.mode = std::get<1>(k);
        a.model_id = std::get<2>(k);
        a.n_examples = std::get<3>(k);
        a.n_seeds = static_cast<int>(v.size());
        double sum = 0;
        for (double x : v) sum += x;
        a.mean = sum / static_cast<double>(v.size());
        a.q1 = quantile_linear(v, 0.25);
        a.median = quantile_linear(v, 0.5);
        a.q3 = quantile_linear(v, 0.75);
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace fnolab
