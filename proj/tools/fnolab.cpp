// fnolab: datasets, training, and the transfer-learning experiment matrix.
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "fnolab/dataset.hpp"
#include "fnolab/harness.hpp"
#include "fnolab/report.hpp"
#include "fnolab/rng.hpp"
#include "fnolab/train.hpp"

namespace fs = std::filesystem;
using namespace fnolab;

namespace {

constexpr std::uint64_t kModelInitStream = 3;  // must match the sweep harness

// Named dataset presets mirroring the OOD-shift table: per system one
// pre-training range and the downstream ranges ordered by shift extent.
struct Preset {
    const char* key;
    const char* label;
    PdeSystem system;
    double lo, hi;
    bool pretrain;
};

const Preset kPresets[] = {
    {"sys1-pre", "SYS-1(1,5)", PdeSystem::poisson, 1, 5, true},
    {"sys1-none", "SYS-1(1,2.5)", PdeSystem::poisson, 1, 2.5, false},
    {"sys1-mild", "SYS-1(2.5,7.5)", PdeSystem::poisson, 2.5, 7.5, false},
    {"sys1-med", "SYS-1(5,10)", PdeSystem::poisson, 5, 10, false},
    {"sys1-large", "SYS-1(10,20)", PdeSystem::poisson, 10, 20, false},
    {"sys2-pre", "SYS-2(0.2,1)", PdeSystem::adv_diff, 0.2, 1, true},
    {"sys2-none", "SYS-2(0.2,0.4)", PdeSystem::adv_diff, 0.2, 0.4, false},
    {"sys2-mild", "SYS-2(0.4,1.6)", PdeSystem::adv_diff, 0.4, 1.6, false},
    {"sys2-med", "SYS-2(1,2)", PdeSystem::adv_diff, 1, 2, false},
    {"sys2-large", "SYS-2(2,5)", PdeSystem::adv_diff, 2, 5, false},
    {"sys3-pre", "SYS-3(1,10)", PdeSystem::helmholtz, 1, 10, true},
    {"sys3-in", "SYS-3(1,5)", PdeSystem::helmholtz, 1, 5, false},
    {"sys3-ood", "SYS-3(2,12)", PdeSystem::helmholtz, 2, 12, false},
};

const Preset* find_preset(const std::string& key) {
    for (const Preset& p : kPresets)
        if (key == p.key) return &p;
    return nullptr;
}

std::string preset_help() {
    std::string s = "presets:";
    for (const Preset& p : kPresets) s += std::string(" ") + p.key;
    return s;
}

struct Scale {
    int grid;
    SplitSpec pre, down;
    int epochs;
    std::vector<int> sizes;
    std::vector<std::pair<int, int>> ladder;  // (d, m)
};

Scale scale_for(bool paper) {
    Scale s;
    if (paper) {
        s.grid = 128;
        s.pre = s.down = {32768, 4096, 4096};
        s.epochs = 500;
        for (int n = 8; n <= 32768; n *= 2) s.sizes.push_back(n);
        s.ladder = {{16, 4}, {16, 16}, {32, 32}, {128, 32}};
    } else {
        s.grid = 64;
        s.pre = {4096, 512, 512};
        s.down = {2048, 512, 512};
        s.epochs = 200;
        for (int n = 8; n <= 2048; n *= 2) s.sizes.push_back(n);
        s.ladder = {{8, 4}, {16, 8}, {32, 12}};
    }
    return s;
}

struct Globals {
    std::uint64_t seed = 0;
    int grid = 0;  // 0 = scale default
    std::string out = "out";
    bool paper = false;
    std::string precision = "f32";
};

std::string sanitize(const std::string& name) {
    std::string s;
    for (char c : name) {
        const bool keep =
            std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
        if (keep)
            s += c;
        else if (!s.empty() && s.back() != '-')
            s += '-';  // collapse runs of separators
    }
    while (!s.empty() && s.back() == '-') s.pop_back();
    return s.empty() ? "unnamed" : s;
}

// Dataset argument: a preset key or generated name (resolved under
// <out>/data) or a directory path.
fs::path data_dir(const Globals& g, const std::string& arg) {
    if (find_preset(arg)) return fs::path(g.out) / "data" / arg;
    const fs::path named = fs::path(g.out) / "data" / arg;
    if (!fs::exists(fs::path(arg) / "manifest.json") && fs::exists(named / "manifest.json"))
        return named;
    return fs::path(arg);
}

std::string data_stem(const std::string& arg) {
    if (find_preset(arg)) return arg;
    return fs::path(arg).filename().string();
}

Dataset load_data(const Globals& g, const std::string& arg) {
    const fs::path dir = data_dir(g, arg);
    if (!fs::exists(dir / "manifest.json"))
        throw ConfigError("no dataset at " + dir.string() + " (run `fnolab gen " + arg +
                          "` first?)");
    return load_dataset(dir);
}

// Checkpoint argument: a directory, or a run name under <out>/ckpt.
Checkpoint load_ckpt(const Globals& g, const std::string& arg) {
    if (fs::exists(fs::path(arg) / "checkpoint.json")) return load_checkpoint(arg);
    const fs::path named = fs::path(g.out) / "ckpt" / arg;
    if (fs::exists(named / "checkpoint.json")) return load_checkpoint(named);
    throw ConfigError("no checkpoint at " + arg + " or " + named.string());
}

FnoConfig make_model(int d, int m, int L, int width) {
    FnoConfig cfg;
    cfg.d = d;
    cfg.m = m;
    cfg.L = L;
    cfg.head_width = width;
    cfg.validate();
    return cfg;
}

// "16x8" -> FnoConfig{d=16, m=8}
FnoConfig parse_model(const std::string& s, int L, int width) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos || x == 0 || x + 1 == s.size()) throw std::invalid_argument(s);
        return make_model(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)), L, width);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad model spec '" + s + "' (expected DxM, e.g. 16x8)");
    }
}

Checkpoint fresh_init(const FnoConfig& model, const NormalizationReferences& refs,
                      std::uint64_t seed) {
    Checkpoint init;
    init.params = init_params(model, derive_seed(seed, kModelInitStream, 0));
    init.refs = refs;
    return init;
}

void save_run(const Globals& g, const std::string& name, const TrainResult& r) {
    const fs::path ckpt_dir = fs::path(g.out) / "ckpt" / sanitize(name);
    const fs::path log_path = fs::path(g.out) / "runs" / (sanitize(name) + ".csv");
    fs::create_directories(log_path.parent_path());
    save_checkpoint(r.ckpt, ckpt_dir);
    write_training_log(log_path, r.log);
    std::cout << "checkpoint: " << ckpt_dir.string() << "\n";
    std::cout << "log:        " << log_path.string() << "\n";
    std::cout << "best val loss " << format_double(r.ckpt.prov.best_val_loss) << " at epoch "
              << r.ckpt.prov.best_epoch << "\n";
}

void print_trials(const GridSearchResult& gs) {
    std::cout << "grid search (" << gs.trials.size() << " trials):\n";
    for (std::size_t i = 0; i < gs.trials.size(); ++i) {
        const Trial& t = gs.trials[i];
        std::cout << "  lr=" << format_double(t.config.lr0) << " batch=" << t.config.batch_size;
        if (t.diverged)
            std::cout << "  DIVERGED";
        else
            std::cout << "  val_mu=" << format_double(t.val_mu);
        if (i == gs.best_index) std::cout << "  <- selected";
        std::cout << "\n";
    }
}

// Median across seeds per size for one (system, mode, model) slice of a curve
// table; n >= 0, sorted ascending.
std::vector<CurveSample> median_curve(const std::vector<CurvePoint>& rows,
                                      const std::string& system, const std::string& mode,
                                      const std::string& model_id) {
    std::map<int, std::vector<double>> by_n;
    for (const CurvePoint& p : rows)
        if (p.system == system && p.mode == mode && p.model_id == model_id)
            by_n[p.n_examples].push_back(p.test_error);
    std::vector<CurveSample> out;
    for (const auto& [n, errs] : by_n) out.push_back({n, quantile_linear(errs, 0.5)});
    return out;
}

// ---- subcommand drivers ----

int cmd_gen(const Globals& g, const std::string& preset_key, const std::string& system_name_arg,
            double lo, double hi, std::string name, int train_n, int val_n, int test_n,
            double sigma, std::string dir_arg) {
    const Scale sc = scale_for(g.paper);
    DatasetSpec spec;
    spec.h = spec.w = g.grid ? g.grid : sc.grid;
    spec.master_seed = g.seed;
    if (sigma > 0) spec.source.sigma = sigma;

    bool pretrain_role = false;
    std::string stem;
    if (!preset_key.empty()) {
        const Preset* p = find_preset(preset_key);
        if (!p) throw ConfigError("unknown preset '" + preset_key + "'; " + preset_help());
        spec.system = p->system;
        spec.name = p->label;
        pretrain_role = p->pretrain;
        stem = p->key;
        switch (p->system) {
            case PdeSystem::poisson: spec.ranges.e = {p->lo, p->hi}; break;
            case PdeSystem::adv_diff: spec.ranges.psi = {p->lo, p->hi}; break;
            case PdeSystem::helmholtz: spec.ranges.omega = {p->lo, p->hi}; break;
        }
    } else {
        if (system_name_arg.empty())
            throw ConfigError("gen needs a preset or --system; " + preset_help());
        spec.system = system_from_name(system_name_arg);
        if (!(lo < hi)) throw ConfigError("gen --system needs --lo < --hi");
        switch (spec.system) {
            case PdeSystem::poisson: spec.ranges.e = {lo, hi}; break;
            case PdeSystem::adv_diff: spec.ranges.psi = {lo, hi}; break;
            case PdeSystem::helmholtz: spec.ranges.omega = {lo, hi}; break;
        }
        spec.name = name.empty() ? std::string(system_name(spec.system)) + "(" +
                                       format_double(lo) + "," + format_double(hi) + ")"
                                 : name;
        stem = sanitize(spec.name);
    }
    if (!name.empty()) spec.name = name;
    const SplitSpec def = pretrain_role ? sc.pre : sc.down;
    spec.counts.train = train_n >= 0 ? train_n : def.train;
    spec.counts.val = val_n >= 0 ? val_n : def.val;
    spec.counts.test = test_n >= 0 ? test_n : def.test;

    const fs::path dir = dir_arg.empty() ? fs::path(g.out) / "data" / stem : fs::path(dir_arg);
    std::cout << "generating " << spec.name << " (" << system_name(spec.system) << ", "
              << spec.h << "x" << spec.w << ", " << spec.counts.train << "/" << spec.counts.val
              << "/" << spec.counts.test << ", seed " << g.seed << ")\n";
    Dataset ds = generate_dataset(spec);
    save_dataset(ds, dir);
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_pretrain(const Globals& g, const std::string& data_arg, const std::string& model_str,
                 int L, int width, int epochs, double lr, int batch, bool tune,
                 std::string name) {
    const Scale sc = scale_for(g.paper);
    const Dataset ds = load_data(g, data_arg);
    const FnoConfig model = parse_model(model_str, L, width);
    model.validate_grid(ds.spec.h, ds.spec.w);

    TrainConfig cfg;
    cfg.lr0 = lr;
    cfg.batch_size = batch;
    cfg.epochs = epochs > 0 ? epochs : sc.epochs;
    cfg.seed = g.seed;
    cfg.mode = TrainMode::from_scratch;
    cfg.precision = precision_from_name(g.precision);

    const DataView train = DataView::all(ds.train, ds.spec.h, ds.spec.w);
    const DataView val = DataView::all(ds.val, ds.spec.h, ds.spec.w);
    const auto refs = fit_references({&ds.train}, ds.spec.name);
    const Checkpoint init = fresh_init(model, refs, g.seed);

    TrainResult r;
    if (tune) {
        GridSearchResult gs =
            grid_search(init, train, val, cfg, default_lr_grid(), default_batch_grid(),
                        ds.spec.name);
        print_trials(gs);
        r = std::move(gs.best);
    } else {
        r = train_model(init, train, val, cfg, ds.spec.name);
        if (r.diverged) {
            std::cerr << "error: training diverged (lr " << format_double(cfg.lr0) << ")\n";
            return 2;
        }
    }
    if (name.empty()) name = "pre-" + data_stem(data_arg) + "-" + model.model_id();
    save_run(g, name, r);
    const double mu = evaluate(r.ckpt, DataView::all(ds.test, ds.spec.h, ds.spec.w));
    std::cout << "test mu_l2 " << format_double(mu) << "\n";
    return 0;
}

int cmd_finetune(const Globals& g, const std::string& ckpt_arg, const std::string& data_arg,
                 int n, int epochs, double lr, int batch, bool tune, std::string name) {
    const Scale sc = scale_for(g.paper);
    const Dataset ds = load_data(g, data_arg);
    const Checkpoint src = load_ckpt(g, ckpt_arg);
    src.params.config.validate_grid(ds.spec.h, ds.spec.w);

    TrainConfig cfg;
    cfg.lr0 = lr;
    cfg.batch_size = batch;
    cfg.epochs = epochs > 0 ? epochs : sc.epochs;
    cfg.seed = g.seed;
    cfg.mode = TrainMode::fine_tune;
    cfg.precision = precision_from_name(g.precision);

    DataView train = DataView::all(ds.train, ds.spec.h, ds.spec.w);
    if (n >= 0) {
        if (n > ds.train.n)
            throw ConfigError("--n " + std::to_string(n) + " exceeds train split (" +
                              std::to_string(ds.train.n) + ")");
        const auto perm = subsample_permutation(ds.train.n, g.seed);
        train = train.subset({perm.begin(), perm.begin() + n});
    }
    const DataView val = DataView::all(ds.val, ds.spec.h, ds.spec.w);

    TrainResult r;
    if (tune && train.size() > 0) {
        GridSearchResult gs = grid_search(src, train, val, cfg, default_lr_grid(),
                                          default_batch_grid(), ds.spec.name);
        print_trials(gs);
        r = std::move(gs.best);
    } else {
        r = train_model(src, train, val, cfg, ds.spec.name);
        if (r.diverged) {
            std::cerr << "error: training diverged (lr " << format_double(cfg.lr0) << ")\n";
            return 2;
        }
    }
    if (name.empty())
        name = fs::path(ckpt_arg).filename().string() + "-ft-" + data_stem(data_arg) +
               (n >= 0 ? "-n" + std::to_string(n) : "") + "-s" + std::to_string(g.seed);
    save_run(g, name, r);
    const double mu = evaluate(r.ckpt, DataView::all(ds.test, ds.spec.h, ds.spec.w));
    std::cout << "test mu_l2 " << format_double(mu) << "\n";
    return 0;
}

int cmd_eval(const Globals& g, const std::string& ckpt_arg, const std::string& data_arg,
             const std::string& split) {
    const Dataset ds = load_data(g, data_arg);
    const Checkpoint ckpt = load_ckpt(g, ckpt_arg);
    const SplitData* sd = nullptr;
    if (split == "train")
        sd = &ds.train;
    else if (split == "val")
        sd = &ds.val;
    else if (split == "test")
        sd = &ds.test;
    else
        throw ConfigError("--split must be train|val|test");
    const double mu = evaluate(ckpt, DataView::all(*sd, ds.spec.h, ds.spec.w));
    std::cout << ds.spec.name << " " << split << " mu_l2 " << format_double(mu) << "\n";
    return 0;
}

int cmd_sweep(const Globals& g, const std::string& data_arg, const std::string& ckpt_arg,
              std::vector<std::string> mode_names, std::vector<int> sizes,
              std::vector<std::uint64_t> seeds, std::vector<std::string> model_strs,
              bool ladder, int L, int width, int epochs, double fixed_lr, int batch,
              std::string label, std::string results_arg) {
    const Scale sc = scale_for(g.paper);
    const Dataset ds = load_data(g, data_arg);

    Checkpoint src;
    const bool have_src = !ckpt_arg.empty();
    if (have_src) {
        src = load_ckpt(g, ckpt_arg);
        src.params.config.validate_grid(ds.spec.h, ds.spec.w);
    }
    if (mode_names.empty())
        mode_names = have_src
                         ? std::vector<std::string>{"from_scratch", "fine_tune", "zero_shot"}
                         : std::vector<std::string>{"from_scratch"};

    SweepSpec spec;
    spec.downstream = &ds;
    spec.source = have_src ? &src : nullptr;
    spec.system_label = label.empty() ? ds.spec.name : label;
    spec.sizes = sizes.empty() ? sc.sizes : sizes;
    for (const std::string& m : mode_names) spec.modes.push_back(sweep_mode_from_name(m));
    spec.seeds = seeds.empty() ? std::vector<std::uint64_t>{0, 1, 2} : seeds;
    if (ladder)
        for (auto [d, m] : sc.ladder) spec.models.push_back(make_model(d, m, L, width));
    else if (!model_strs.empty())
        for (const std::string& s : model_strs) spec.models.push_back(parse_model(s, L, width));
    else
        spec.models.push_back(have_src ? src.params.config : make_model(16, 8, L, width));
    for (const FnoConfig& m : spec.models) m.validate_grid(ds.spec.h, ds.spec.w);

    spec.base.epochs = epochs > 0 ? epochs : sc.epochs;
    spec.base.seed = g.seed;
    spec.base.precision = precision_from_name(g.precision);
    if (fixed_lr > 0) {
        spec.tune = false;
        spec.base.lr0 = fixed_lr;
        spec.base.batch_size = batch;
    }

    const fs::path results =
        results_arg.empty()
            ? fs::path(g.out) / "results" / (sanitize(spec.system_label) + ".csv")
            : fs::path(results_arg);
    ResultsCsv out(results);
    const std::size_t before = out.rows().size();
    if (spec.models.size() > 1)
        run_model_scaling(spec, out);
    else
        run_data_scaling(spec, out);
    std::cout << "sweep: " << (out.rows().size() - before) << " new cells, "
              << out.rows().size() << " total in " << results.string() << "\n";
    return 0;
}

int cmd_mixed(const Globals& g, const std::vector<std::string>& data_args,
              const std::string& model_str, int L, int width, int epochs, double lr, int batch,
              std::string name) {
    const Scale sc = scale_for(g.paper);
    if (data_args.size() != 3) throw ConfigError("mixed needs exactly three datasets");
    std::vector<Dataset> ds;
    for (const std::string& a : data_args) ds.push_back(load_data(g, a));
    const FnoConfig model = parse_model(model_str, L, width);
    model.validate_grid(ds[0].spec.h, ds[0].spec.w);

    TrainConfig cfg;
    cfg.lr0 = lr;
    cfg.batch_size = batch;
    cfg.epochs = epochs > 0 ? epochs : sc.epochs;
    cfg.seed = g.seed;
    cfg.precision = precision_from_name(g.precision);

    std::string id = "MIXED(" + ds[0].spec.name + "+" + ds[1].spec.name + "+" +
                     ds[2].spec.name + ")";
    TrainResult r =
        run_mixed_pretraining({&ds[0], &ds[1], &ds[2]}, model, cfg, id);
    if (r.diverged) {
        std::cerr << "error: training diverged (lr " << format_double(cfg.lr0) << ")\n";
        return 2;
    }
    if (name.empty()) name = "mixed-" + model.model_id();
    save_run(g, name, r);
    for (const Dataset& d : ds) {
        const double mu = evaluate(r.ckpt, DataView::all(d.test, d.spec.h, d.spec.w));
        std::cout << d.spec.name << " test mu_l2 " << format_double(mu) << "\n";
    }
    return 0;
}

int cmd_equiv(const Globals& g, const std::string& results_arg, const std::string& system,
              std::string model_id, const std::string& scratch_mode, const std::string& tl_mode,
              bool zero_shot, std::string out_arg) {
    const auto rows = read_curve_csv(results_arg);
    if (model_id.empty()) {
        for (const CurvePoint& p : rows)
            if (p.system == system) {
                model_id = p.model_id;
                break;
            }
        if (model_id.empty()) throw ConfigError("no rows for system '" + system + "'");
    }
    const auto scratch = median_curve(rows, system, scratch_mode, model_id);
    std::vector<CurveSample> tl;
    if (zero_shot)
        for (const CurveSample& s : median_curve(rows, system, "zero_shot", model_id))
            tl.push_back(s);
    for (const CurveSample& s : median_curve(rows, system, tl_mode, model_id))
        if (s.n > 0) tl.push_back(s);
    if (tl.empty()) throw ConfigError("no transfer rows for system '" + system + "'");

    std::vector<CurveSample> scratch_pos;
    for (const CurveSample& s : scratch)
        if (s.n > 0) scratch_pos.push_back(s);
    const auto table = data_equivalence(scratch_pos, tl);

    const fs::path out_path = out_arg.empty() ? fs::path(g.out) / "report" /
                                                    ("equiv-" + sanitize(system) + ".csv")
                                              : fs::path(out_arg);
    fs::create_directories(out_path.parent_path());
    write_equivalence_csv(out_path, table);
    for (const EquivRow& r : table) {
        std::cout << "n_tl=" << r.n_tl << " tl_error=" << format_double(r.tl_error);
        if (r.exceeds)
            std::cout << "  exceeds best from-scratch\n";
        else
            std::cout << "  n_scratch_equivalent=" << format_double(r.n_equiv) << "\n";
    }
    std::cout << "wrote " << out_path.string() << "\n";
    return 0;
}

int cmd_seeds(const Globals& g, const std::string& results_arg, const std::string& system,
              const std::string& mode, std::string out_arg) {
    auto rows = read_curve_csv(results_arg);
    if (!system.empty() || !mode.empty()) {
        std::vector<CurvePoint> kept;
        for (CurvePoint& p : rows)
            if ((system.empty() || p.system == system) && (mode.empty() || p.mode == mode))
                kept.push_back(std::move(p));
        rows = std::move(kept);
    }
    const auto agg = aggregate_seeds(rows);
    const fs::path out_path =
        out_arg.empty()
            ? fs::path(g.out) / "report" /
                  ("seeds-" + sanitize(fs::path(results_arg).stem().string()) + ".csv")
            : fs::path(out_arg);
    fs::create_directories(out_path.parent_path());
    write_aggregate_csv(out_path, agg);
    for (const SeedAggregate& a : agg)
        std::cout << a.system << " " << a.mode << " " << a.model_id << " n=" << a.n_examples
                  << " seeds=" << a.n_seeds << " mean=" << format_double(a.mean)
                  << " q1=" << format_double(a.q1) << " median=" << format_double(a.median)
                  << " q3=" << format_double(a.q3) << "\n";
    std::cout << "wrote " << out_path.string() << "\n";
    return 0;
}

int cmd_report(const Globals& g, const std::vector<std::string>& results_args,
               const std::vector<std::string>& field_args, std::string dir_arg) {
    ReportInputs in;
    for (const std::string& r : results_args) in.curve_csvs.push_back(fs::path(r));
    for (const std::string& a : field_args) {
        const Dataset ds = load_data(g, a);
        if (ds.test.n < 1) throw ConfigError("dataset " + a + " has an empty test split");
        const std::size_t plane = ds.test.plane;
        RealField source(ds.spec.h, ds.spec.w), solution(ds.spec.h, ds.spec.w);
        for (std::size_t i = 0; i < plane; ++i) {
            source.values[i] = ds.test.input(0)[i];  // channel 0 = f
            solution.values[i] = ds.test.target(0)[i];
        }
        in.fields.emplace_back(data_stem(a) + "-source", std::move(source));
        in.fields.emplace_back(data_stem(a) + "-solution", std::move(solution));
    }
    const fs::path dir = dir_arg.empty() ? fs::path(g.out) / "report" : fs::path(dir_arg);
    emit_report(in, dir);
    std::cout << "report: " << dir.string() << " (" << in.curve_csvs.size() << " curves, "
              << in.fields.size() << " fields)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fnolab: FNO transfer-learning study on periodic 2D PDEs"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--grid", g.grid, "grid resolution h=w (default per scale)");
    app.add_option("--out", g.out, "workspace root (data/, ckpt/, runs/, results/, report/)");
    app.add_flag("--paper-scale", g.paper, "paper-scale defaults (128^2, 32768 examples, ...)");
    app.add_option("--precision", g.precision, "training precision: f32|f64")
        ->check(CLI::IsMember({"f32", "f64"}));

    // gen
    auto* gen = app.add_subcommand("gen", "generate a dataset; " + preset_help());
    std::string gen_preset, gen_system, gen_name, gen_dir;
    double gen_lo = 0, gen_hi = 0, gen_sigma = 0;
    int gen_train = -1, gen_val = -1, gen_test = -1;
    gen->add_option("preset", gen_preset, "preset key (e.g. sys1-pre)");
    gen->add_option("--system", gen_system, "POISSON|ADV_DIFF|HELMHOLTZ (custom range)");
    gen->add_option("--lo", gen_lo, "custom range low (e, psi, or omega by system)");
    gen->add_option("--hi", gen_hi, "custom range high");
    gen->add_option("--name", gen_name, "dataset name override");
    gen->add_option("--train", gen_train, "train split size");
    gen->add_option("--val", gen_val, "val split size");
    gen->add_option("--test", gen_test, "test split size");
    gen->add_option("--sigma", gen_sigma, "source bump width (default 1/32)");
    gen->add_option("--dir", gen_dir, "output directory override");

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "train a model from scratch on a dataset");
    std::string pre_data = "sys1-pre", pre_model = "16x8", pre_name;
    int pre_L = 4, pre_width = 128, pre_epochs = 0, pre_batch = 16;
    double pre_lr = 1e-3;
    bool pre_tune = false;
    pre->add_option("--data", pre_data, "dataset (preset key or directory)");
    pre->add_option("--model", pre_model, "architecture DxM (default 16x8)");
    pre->add_option("--layers", pre_L, "spectral blocks (default 4)");
    pre->add_option("--width", pre_width, "head hidden width (default 128)");
    pre->add_option("--epochs", pre_epochs, "epochs (default per scale)");
    pre->add_option("--lr", pre_lr, "learning rate (default 1e-3)");
    pre->add_option("--batch", pre_batch, "batch size (default 16)");
    pre->add_flag("--tune", pre_tune, "grid-search lr x batch instead of fixed");
    pre->add_option("--name", pre_name, "checkpoint name");

    // finetune
    auto* fine = app.add_subcommand("finetune", "fine-tune a checkpoint on a downstream set");
    std::string fine_ckpt, fine_data, fine_name;
    int fine_n = -1, fine_epochs = 0, fine_batch = 16;
    double fine_lr = 1e-3;
    bool fine_tune_flag = false;
    fine->add_option("--ckpt", fine_ckpt, "source checkpoint directory")->required();
    fine->add_option("--data", fine_data, "downstream dataset")->required();
    fine->add_option("--n", fine_n, "downstream examples (seeded subsample; default all)");
    fine->add_option("--epochs", fine_epochs, "epochs (default per scale)");
    fine->add_option("--lr", fine_lr, "learning rate (default 1e-3)");
    fine->add_option("--batch", fine_batch, "batch size (default 16)");
    fine->add_flag("--tune", fine_tune_flag, "grid-search lr x batch instead of fixed");
    fine->add_option("--name", fine_name, "checkpoint name");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint (mu_l2)");
    std::string ev_ckpt, ev_data, ev_split = "test";
    ev->add_option("--ckpt", ev_ckpt, "checkpoint directory")->required();
    ev->add_option("--data", ev_data, "dataset")->required();
    ev->add_option("--split", ev_split, "train|val|test (default test)");

    // sweep
    auto* sw = app.add_subcommand("sweep", "data/model-scaling curves into a results CSV");
    std::string sw_data, sw_ckpt, sw_label, sw_results;
    std::vector<std::string> sw_modes, sw_models;
    std::vector<int> sw_sizes;
    std::vector<std::uint64_t> sw_seeds;
    bool sw_ladder = false;
    int sw_L = 4, sw_width = 128, sw_epochs = 0, sw_batch = 16;
    double sw_fixed_lr = 0;
    sw->add_option("--data", sw_data, "downstream dataset")->required();
    sw->add_option("--ckpt", sw_ckpt, "pre-trained checkpoint (enables fine_tune/zero_shot)");
    sw->add_option("--modes", sw_modes, "from_scratch,fine_tune,zero_shot")->delimiter(',');
    sw->add_option("--sizes", sw_sizes, "example counts (default 8..2048)")->delimiter(',');
    sw->add_option("--seeds", sw_seeds, "seeds (default 0,1,2)")->delimiter(',');
    sw->add_option("--models", sw_models, "from-scratch archs DxM (default: source's)")
        ->delimiter(',');
    sw->add_flag("--ladder", sw_ladder, "use the scale's model ladder (Q2)");
    sw->add_option("--layers", sw_L, "spectral blocks (default 4)");
    sw->add_option("--width", sw_width, "head hidden width (default 128)");
    sw->add_option("--epochs", sw_epochs, "epochs per cell (default per scale)");
    sw->add_option("--fixed-lr", sw_fixed_lr, "skip per-cell tuning, use this lr");
    sw->add_option("--batch", sw_batch, "batch size for --fixed-lr (default 16)");
    sw->add_option("--label", sw_label, "system column value (default dataset name)");
    sw->add_option("--results", sw_results, "results CSV (resumable; default per label)");

    // mixed
    auto* mx = app.add_subcommand("mixed", "pre-train one model on three systems (Q4)");
    std::vector<std::string> mx_data = {"sys1-pre", "sys2-pre", "sys3-pre"};
    std::string mx_model = "16x8", mx_name;
    int mx_L = 4, mx_width = 128, mx_epochs = 0, mx_batch = 16;
    double mx_lr = 1e-3;
    mx->add_option("--data", mx_data, "three datasets")->delimiter(',')->expected(3);
    mx->add_option("--model", mx_model, "architecture DxM (default 16x8)");
    mx->add_option("--layers", mx_L, "spectral blocks (default 4)");
    mx->add_option("--width", mx_width, "head hidden width (default 128)");
    mx->add_option("--epochs", mx_epochs, "epochs (default per scale)");
    mx->add_option("--lr", mx_lr, "learning rate (default 1e-3)");
    mx->add_option("--batch", mx_batch, "batch size (default 16)");
    mx->add_option("--name", mx_name, "checkpoint name");

    // equiv
    auto* eq = app.add_subcommand("equiv", "data-equivalence table from a results CSV");
    std::string eq_results, eq_system, eq_model, eq_scratch = "from_scratch",
                            eq_tl = "fine_tune", eq_out;
    bool eq_no_zs = false;
    eq->add_option("--results", eq_results, "curve CSV")->required();
    eq->add_option("--system", eq_system, "system column value")->required();
    eq->add_option("--model", eq_model, "model_id (default: first seen)");
    eq->add_option("--scratch-mode", eq_scratch, "baseline mode (default from_scratch)");
    eq->add_option("--tl-mode", eq_tl, "transfer mode (default fine_tune)");
    eq->add_flag("--no-zero-shot", eq_no_zs, "exclude the zero_shot row");
    eq->add_option("-o,--output", eq_out, "output CSV path");

    // seeds
    auto* sd = app.add_subcommand("seeds", "seed-sensitivity aggregate (mean, Q1, median, Q3)");
    std::string sd_results, sd_system, sd_mode, sd_out;
    sd->add_option("--results", sd_results, "curve CSV")->required();
    sd->add_option("--system", sd_system, "filter by system");
    sd->add_option("--mode", sd_mode, "filter by mode");
    sd->add_option("-o,--output", sd_out, "output CSV path");

    // report
    auto* rp = app.add_subcommand("report", "render figures + summary from results CSVs");
    std::vector<std::string> rp_results, rp_fields;
    std::string rp_dir;
    rp->add_option("--results", rp_results, "curve CSVs")->delimiter(',');
    rp->add_option("--fields", rp_fields, "datasets to render sample fields from")
        ->delimiter(',');
    rp->add_option("--dir", rp_dir, "output directory (default <out>/report)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen)
            return cmd_gen(g, gen_preset, gen_system, gen_lo, gen_hi, gen_name, gen_train,
                           gen_val, gen_test, gen_sigma, gen_dir);
        if (*pre)
            return cmd_pretrain(g, pre_data, pre_model, pre_L, pre_width, pre_epochs, pre_lr,
                                pre_batch, pre_tune, pre_name);
        if (*fine)
            return cmd_finetune(g, fine_ckpt, fine_data, fine_n, fine_epochs, fine_lr,
                                fine_batch, fine_tune_flag, fine_name);
        if (*ev) return cmd_eval(g, ev_ckpt, ev_data, ev_split);
        if (*sw)
            return cmd_sweep(g, sw_data, sw_ckpt, sw_modes, sw_sizes, sw_seeds, sw_models,
                             sw_ladder, sw_L, sw_width, sw_epochs, sw_fixed_lr, sw_batch,
                             sw_label, sw_results);
        if (*mx)
            return cmd_mixed(g, mx_data, mx_model, mx_L, mx_width, mx_epochs, mx_lr, mx_batch,
                             mx_name);
        if (*eq)
            return cmd_equiv(g, eq_results, eq_system, eq_model, eq_scratch, eq_tl, !eq_no_zs,
                             eq_out);
        if (*sd) return cmd_seeds(g, sd_results, sd_system, sd_mode, sd_out);
        if (*rp) return cmd_report(g, rp_results, rp_fields, rp_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
