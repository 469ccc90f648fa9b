// Acceptance gate. Runs the published criteria end to end and prints exactly
// one PASS/FAIL line per criterion (criterion 12 downgrades to WARN: it checks
// a stochastic claim). Exit status is nonzero iff a hard criterion failed.
//
//   acceptance [--criteria 1,2,...] [--work-dir DIR]
//
// Criteria 1-7 and 11 are oracle checks and finish in minutes. Criteria 8, 9,
// 10 and 12 (the trend tier) train real models at desk scale; datasets,
// checkpoints and finished sweep cells are cached under --work-dir, so an
// interrupted run resumes where it stopped and a completed run replays from
// the cache in seconds.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "fnolab/dataset.hpp"
#include "fnolab/fno.hpp"
#include "fnolab/harness.hpp"
#include "fnolab/normalize.hpp"
#include "fnolab/pde.hpp"
#include "fnolab/report.hpp"
#include "fnolab/train.hpp"

namespace fs = std::filesystem;
using namespace fnolab;

namespace {

constexpr std::uint64_t kModelInitStream = 3;  // matches the harness convention

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void note(const std::string& msg) {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%H:%M:%S", std::localtime(&t));
    std::fprintf(stderr, "[%s] %s\n", buf, msg.c_str());
    std::fflush(stderr);
}

std::string fmt(double v) { return format_double(v); }

double rel_l2(const RealField& a, const RealField& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        num += d * d;
        den += b.values[i] * b.values[i];
    }
    return std::sqrt(num / den);
}

double max_abs_diff(const RealField& a, const RealField& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

// ---------------------------------------------------------------------------
// criterion 1: single-mode closed forms, 64x64, <= 1e-10 max-abs, < 1 s/solve
// ---------------------------------------------------------------------------

Outcome c1(const fs::path&) {
    const int N = 64;
    const double tpi = 2.0 * M_PI;
    double worst = 0, worst_ms = 0;

    auto run = [&](const PdeCoefficients& c, const RealField& f, const RealField& want) {
        const double t0 = now_s();
        const RealField u = solve_spectral(c, f);
        worst_ms = std::max(worst_ms, (now_s() - t0) * 1e3);
        worst = std::max(worst, max_abs_diff(u, want));
    };

    RealField sinx(N, N), cosx(N, N), cosy(N, N), want(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            sinx.at(i, j) = std::sin(tpi * i / N);
            cosx.at(i, j) = std::cos(tpi * i / N);
            cosy.at(i, j) = std::cos(tpi * j / N);
        }

    // -lap u = sin(2 pi x)  ->  u = sin / (4 pi^2)
    PdeCoefficients pois;
    pois.system = PdeSystem::poisson;
    for (std::size_t i = 0; i < want.size(); ++i) want.values[i] = sinx.values[i] / (tpi * tpi);
    run(pois, sinx, want);

    // -lap u + u = cos(2 pi y)  ->  u = cos / (4 pi^2 + 1)
    PdeCoefficients helm;
    helm.system = PdeSystem::helmholtz;
    helm.omega = 1.0;
    for (std::size_t i = 0; i < want.size(); ++i)
        want.values[i] = cosy.values[i] / (tpi * tpi + 1.0);
    run(helm, cosy, want);

    // -lap u + du/dx = sin(2 pi x)  ->
    // u = (4 pi^2 sin - 2 pi cos) / (16 pi^4 + 4 pi^2)
    PdeCoefficients adv;
    adv.system = PdeSystem::adv_diff;
    adv.v1 = 1.0;
    const double den = tpi * tpi * tpi * tpi + tpi * tpi;
    for (std::size_t i = 0; i < want.size(); ++i)
        want.values[i] = (tpi * tpi * sinx.values[i] - tpi * cosx.values[i]) / den;
    run(adv, sinx, want);

    const bool pass = worst <= 1e-10 && worst_ms < 1000.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "closed forms on 64x64: max abs err %s (<= 1e-10), slowest solve %.2f ms",
                  fmt(worst).c_str(), worst_ms);
    return {pass, buf};
}

// ---------------------------------------------------------------------------
// criterion 2: residual <= 1e-8 on 100 random instances per system
// ---------------------------------------------------------------------------

Outcome c2(const fs::path&) {
    double worst = 0;
    for (PdeSystem sys : {PdeSystem::poisson, PdeSystem::adv_diff, PdeSystem::helmholtz}) {
        DatasetSpec spec;
        spec.system = sys;
        spec.h = spec.w = 64;
        spec.master_seed = 7000 + static_cast<int>(sys);
        for (int i = 0; i < 100; ++i) {
            const PdeInstance inst = generate_instance(spec, instance_seed(spec, 0, i));
            const RealField back = apply_operator(inst.coeffs, inst.solution);
            worst = std::max(worst, rel_l2(back, inst.source));
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "300 instances: max relative residual %s (<= 1e-8)",
                  fmt(worst).c_str());
    return {worst <= 1e-8, buf};
}

// ---------------------------------------------------------------------------
// criterion 3: second-order finite-difference cross-check on ADV_DIFF
// ---------------------------------------------------------------------------

// zero the Nyquist row/column so the band-limited interpolant of the samples
// is unambiguous (the advection symbol is odd in k, so the +-h/2 ambiguity
// would otherwise make the two-grid comparison ill-posed)
RealField filter_nyquist(const RealField& f) {
    SpectralField s = dft2(f);
    for (int ky = 0; ky <= f.w / 2; ++ky) s.at(f.h / 2, ky) = 0.0;
    for (int kx = 0; kx < f.h; ++kx) s.at(kx, f.w / 2) = 0.0;
    return idft2(s);
}

// centered-difference solve on the periodic grid: constant coefficients make
// the FD operator diagonal in Fourier space, so the symbol solve IS the exact
// FD solution (eigenvalues of the centered stencils)
RealField fd_solve(const PdeCoefficients& c, const RealField& f) {
    const int h = f.h, w = f.w;
    const double hx = 1.0 / h, hy = 1.0 / w;
    SpectralField s = dft2(f);
    for (int kx = 0; kx < h; ++kx)
        for (int ky = 0; ky <= w / 2; ++ky) {
            if (kx == 0 && ky == 0) {
                s.at(0, 0) = 0.0;  // zero-mean gauge, as in the spectral solver
                continue;
            }
            const double tx = 2.0 * M_PI * kx / h, ty = 2.0 * M_PI * ky / w;
            const double diff = c.k.k11 * (2.0 - 2.0 * std::cos(tx)) / (hx * hx) +
                                c.k.k22 * (2.0 - 2.0 * std::cos(ty)) / (hy * hy) +
                                2.0 * c.k.k12 * std::sin(tx) * std::sin(ty) / (hx * hy) +
                                c.omega;
            const double adv = c.v1 * std::sin(tx) / hx + c.v2 * std::sin(ty) / hy;
            s.at(kx, ky) /= std::complex<double>(diff, adv);
        }
    return idft2(s);
}

// exact spectral upsampling of a Nyquist-free field to the doubled grid (the
// factor 4 compensates the unnormalized forward transform)
RealField upsample2(const RealField& f) {
    const int h = f.h, w = f.w;
    const SpectralField s = dft2(f);
    SpectralField big(2 * h, 2 * w);
    for (int kx = 0; kx < h; ++kx) {
        if (kx == h / 2) continue;  // filtered to zero
        const int bx = kx < h / 2 ? kx : kx + h;
        for (int ky = 0; ky < w / 2; ++ky) big.at(bx, ky) = 4.0 * s.at(kx, ky);
    }
    return idft2(big);
}

Outcome c3(const fs::path&) {
    DatasetSpec spec;
    spec.system = PdeSystem::adv_diff;
    spec.h = spec.w = 64;
    spec.master_seed = 7100;

    double worst_gap = 0, worst_ratio = 1e300;
    for (int i = 0; i < 10; ++i) {
        const PdeInstance inst = generate_instance(spec, instance_seed(spec, 0, i));
        const RealField f = filter_nyquist(inst.source);
        const RealField u_sp = solve_spectral(inst.coeffs, f);

        const RealField u64 = fd_solve(inst.coeffs, f);
        const double gap64 = rel_l2(u64, u_sp);

        const RealField u128 = fd_solve(inst.coeffs, upsample2(f));
        RealField u128r(64, 64);
        for (int r = 0; r < 64; ++r)
            for (int col = 0; col < 64; ++col) u128r.at(r, col) = u128.at(2 * r, 2 * col);
        const double gap128 = rel_l2(u128r, u_sp);

        worst_gap = std::max(worst_gap, gap64);
        worst_ratio = std::min(worst_ratio, gap64 / gap128);
    }
    const bool pass = worst_gap <= 5e-2 && worst_ratio >= 3.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "10 ADV_DIFF instances (Nyquist-filtered sources): max FD gap %s (<= 0.05), "
                  "min refinement ratio %.2f (>= 3)",
                  fmt(worst_gap).c_str(), worst_ratio);
    return {pass, buf};
}

// ---------------------------------------------------------------------------
// criterion 4: gradients vs central differences, every group, < 2 min
// ---------------------------------------------------------------------------

Outcome c4(const fs::path&) {
    const double t0 = now_s();
    FnoConfig cfg;
    cfg.d = 8;
    cfg.m = 4;
    cfg.L = 4;
    const FnoParams params = init_params(cfg, 401);
    const NormalizationReferences refs;  // identity: probe the raw network

    Rng rng(403);
    std::vector<ChannelStack> stacks(2, ChannelStack(16, 16, kNumChannels));
    std::vector<RealField> targets(2, RealField(16, 16));
    for (auto& s : stacks)
        for (auto& v : s.values) v = rng.uniform(-1, 1);
    for (auto& t : targets)
        for (auto& v : t.values) v = rng.uniform(-1, 1);
    const std::vector<const ChannelStack*> sp{&stacks[0], &stacks[1]};
    const std::vector<const RealField*> tp{&targets[0], &targets[1]};

    std::vector<double> grad, scratch;
    mse_loss_and_grad(params, sp, tp, refs, grad);

    const FnoLayout lay = FnoLayout::make(cfg);
    const double h = 1e-6;
    double worst = 0;
    std::string worst_group = "-";
    for (const auto& g : lay.groups) {
        // probe the two largest-|grad| coordinates of each group
        std::vector<std::size_t> picks;
        for (int rep = 0; rep < 2 && rep < static_cast<int>(g.count); ++rep) {
            std::size_t best = g.offset;
            double bv = -1;
            for (std::size_t i = g.offset; i < g.offset + g.count; ++i) {
                bool taken = false;
                for (std::size_t p : picks) taken |= (p == i);
                if (!taken && std::abs(grad[i]) > bv) {
                    bv = std::abs(grad[i]);
                    best = i;
                }
            }
            picks.push_back(best);
        }
        for (std::size_t i : picks) {
            FnoParams pp = params;
            pp.flat[i] += h;
            const double lp = mse_loss_and_grad(pp, sp, tp, refs, scratch);
            pp.flat[i] -= 2 * h;
            const double lm = mse_loss_and_grad(pp, sp, tp, refs, scratch);
            const double fd = (lp - lm) / (2 * h);
            const double rel =
                std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-10});
            if (rel > worst) {
                worst = rel;
                worst_group = g.name;
            }
        }
    }
    const double secs = now_s() - t0;
    const bool pass = worst < 1e-4 && secs < 120.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "d=8 m=4 L=4 on 16x16: worst group %s rel err %s (< 1e-4), %.1f s (< 120 s)",
                  worst_group.c_str(), fmt(worst).c_str(), secs);
    return {pass, buf};
}

// ---------------------------------------------------------------------------
// criterion 5: normalization equivalence under (c f, c K, c v, c omega)
// ---------------------------------------------------------------------------

Outcome c5(const fs::path&) {
    double worst = 0;
    for (PdeSystem sys : {PdeSystem::poisson, PdeSystem::adv_diff, PdeSystem::helmholtz}) {
        DatasetSpec spec;
        spec.system = sys;
        spec.h = spec.w = 32;
        spec.source.sigma = 1.0 / 16.0;
        spec.master_seed = 7500 + static_cast<int>(sys);
        const PdeInstance inst = generate_instance(spec, instance_seed(spec, 0, 0));
        const ChannelStack stack = stack_channels(inst.coeffs, inst.source);

        std::vector<float> rec(stack.values.size());
        for (std::size_t i = 0; i < rec.size(); ++i) rec[i] = static_cast<float>(stack.values[i]);
        const NormalizationReferences refs =
            fit_references_records({rec.data()}, stack.plane(), "c5");

        const ChannelStack base = normalize_stack(stack, refs);
        double vmax = 1;
        for (double v : base.values) vmax = std::max(vmax, std::abs(v));
        for (double c : {0.1, 10.0, 100.0}) {
            ChannelStack scaled = stack;
            for (auto& v : scaled.values) v *= c;
            const ChannelStack got = normalize_stack(scaled, refs);
            for (std::size_t i = 0; i < base.values.size(); ++i)
                worst = std::max(worst, std::abs(got.values[i] - base.values[i]) / vmax);
        }
    }
    char buf[140];
    std::snprintf(buf, sizeof buf,
                  "3 systems x c in {0.1,10,100}: max normalized-stack deviation %s (<= 1e-12)",
                  fmt(worst).c_str());
    return {worst <= 1e-12, buf};
}

// ---------------------------------------------------------------------------
// criterion 6: translation equivariance on 20 random inputs
// ---------------------------------------------------------------------------

Outcome c6(const fs::path&) {
    FnoConfig cfg;
    cfg.d = 8;
    cfg.m = 4;
    const FnoParams params = init_params(cfg, 601);
    const int N = 32;
    Rng rng(603);
    double worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
        ChannelStack stack(N, N, cfg.c_in);
        for (auto& v : stack.values) v = rng.uniform(-1, 1);
        const long di = 1 + static_cast<long>(rng.uniform_index(N - 1));
        const long dj = 1 + static_cast<long>(rng.uniform_index(N - 1));

        ChannelStack shifted(N, N, cfg.c_in);
        for (int ch = 0; ch < cfg.c_in; ++ch) {
            RealField plane(N, N);
            std::copy(stack.channel(ch), stack.channel(ch) + plane.size(),
                      plane.values.begin());
            const RealField moved = periodic_shift(plane, di, dj);
            std::copy(moved.values.begin(), moved.values.end(), shifted.channel(ch));
        }
        const RealField out = forward_raw(params, stack);
        const RealField got = forward_raw(params, shifted);
        const RealField want = periodic_shift(out, di, dj);
        worst = std::max(worst, rel_l2(got, want));
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "20 random inputs on 32x32: max relative error %s (<= 1e-6)",
                  fmt(worst).c_str());
    return {worst <= 1e-6, buf};
}

// ---------------------------------------------------------------------------
// criterion 7: parameter ladder within [0.9, 1.3]x of the nominal tiers
// ---------------------------------------------------------------------------

Outcome c7(const fs::path&) {
    const int dm[4][2] = {{16, 4}, {16, 16}, {32, 32}, {128, 32}};
    const double nominal[4] = {64e3, 1e6, 16e6, 256e6};
    bool pass = true;
    std::string detail = "ratios vs 64K/1M/16M/256M:";
    for (int i = 0; i < 4; ++i) {
        FnoConfig cfg;
        cfg.d = dm[i][0];
        cfg.m = dm[i][1];
        const double ratio = static_cast<double>(param_count(cfg)) / nominal[i];
        pass = pass && ratio >= 0.9 && ratio <= 1.3;
        char buf[64];
        std::snprintf(buf, sizeof buf, " d%d/m%d %.3f", dm[i][0], dm[i][1], ratio);
        detail += buf;
    }
    return {pass, detail + (pass ? " (all within [0.9, 1.3])" : " (out of range)")};
}

// ---------------------------------------------------------------------------
// criterion 11: analytics exactness
// ---------------------------------------------------------------------------

Outcome c11(const fs::path& work) {
    std::string bad;

    const auto rows = data_equivalence({{100, 0.1}, {1000, 0.01}},
                                       {{4, 0.01}, {8, 0.1}, {16, 0.005}});
    bool nodes_ok = rows.size() == 3;
    for (const auto& r : rows) {
        if (r.n_tl == 4) nodes_ok = nodes_ok && !r.exceeds && r.n_equiv == 1000.0;
        if (r.n_tl == 8) nodes_ok = nodes_ok && !r.exceeds && r.n_equiv == 100.0;
        if (r.n_tl == 16) nodes_ok = nodes_ok && r.exceeds;
    }
    if (!nodes_ok) bad += " equivalence-nodes";

    if (quantile_linear({1, 2, 3, 4}, 0.25) != 1.75 ||
        quantile_linear({1, 2, 3, 4}, 0.5) != 2.5 ||
        quantile_linear({1, 2, 3, 4}, 0.75) != 3.25 ||
        quantile_linear({5, 3, 1, 4, 2}, 0.5) != 3.0)
        bad += " quartiles";

    std::vector<CurvePoint> per_seed;
    for (int s = 0; s < 4; ++s)
        per_seed.push_back({"S", "from_scratch", "m", 8, static_cast<std::uint64_t>(s), 1e-3,
                            static_cast<double>(s + 1)});
    const auto aggs = aggregate_seeds(per_seed);
    if (aggs.size() != 1 || aggs[0].n_seeds != 4 || aggs[0].mean != 2.5 || aggs[0].q1 != 1.75 ||
        aggs[0].median != 2.5 || aggs[0].q3 != 3.25)
        bad += " aggregation";

    const std::vector<CurvePoint> demo{
        {"SYS-1(\"a,b\")", "from_scratch", "fno-d16-m8", 8, 0, 1e-3, 0.30000000000000004},
        {"SYS-1(5,10)", "fine_tune", "fno-d16-m8", 64, 3, 3.0517578125e-05, 0.6189546237856967},
        {"SYS-2(0.2,1)", "zero_shot", "fno-d16-m8", 0, 2, 0.0, 0.001953125},
    };
    const fs::path p = work / "c11-roundtrip.csv";
    write_curve_csv(p, demo);
    const auto back = read_curve_csv(p);
    bool rt = back.size() == demo.size();
    for (std::size_t i = 0; rt && i < demo.size(); ++i)
        rt = back[i].system == demo[i].system && back[i].mode == demo[i].mode &&
             back[i].model_id == demo[i].model_id && back[i].n_examples == demo[i].n_examples &&
             back[i].seed == demo[i].seed && back[i].lr == demo[i].lr &&
             back[i].test_error == demo[i].test_error;
    if (!rt) bad += " csv-round-trip";

    return {bad.empty(),
            bad.empty() ? "equivalence nodes, quartile/mean aggregation and csv round trip exact"
                        : "mismatch in:" + bad};
}

// ---------------------------------------------------------------------------
// trend tier shared infrastructure (criteria 8, 9, 10, 12)
// ---------------------------------------------------------------------------

DatasetSpec spec64(const std::string& name, PdeSystem sys, int n_train, std::uint64_t seed) {
    DatasetSpec s;
    s.name = name;
    s.system = sys;
    s.h = s.w = 64;
    s.counts = {n_train, 512, 512};
    s.master_seed = seed;
    return s;
}

DatasetSpec spec_sys1_pre() { return spec64("sys1-pre", PdeSystem::poisson, 4096, 1001); }

DatasetSpec spec_sys1_med() {
    DatasetSpec s = spec64("sys1-med", PdeSystem::poisson, 2048, 1002);
    s.ranges.e = Interval{5.0, 10.0};
    return s;
}

DatasetSpec spec_sys1_none() {
    DatasetSpec s = spec64("sys1-none", PdeSystem::poisson, 2048, 1003);
    s.ranges.e = Interval{1.0, 2.5};
    return s;
}

DatasetSpec spec_sys2_pre() { return spec64("sys2-pre", PdeSystem::adv_diff, 4096, 2001); }

DatasetSpec spec_sys2_none() {
    DatasetSpec s = spec64("sys2-none", PdeSystem::adv_diff, 2048, 2002);
    s.ranges.psi = Interval{0.2, 0.4};
    return s;
}

DatasetSpec spec_sys3_pre() { return spec64("sys3-pre", PdeSystem::helmholtz, 4096, 3001); }

DatasetSpec spec_sys3_in() {
    DatasetSpec s = spec64("sys3-in", PdeSystem::helmholtz, 2048, 3002);
    s.ranges.omega = Interval{1.0, 5.0};
    return s;
}

Dataset ensure_dataset(const fs::path& work, const DatasetSpec& spec) {
    const fs::path dir = work / "data" / spec.name;
    if (fs::exists(dir / "manifest.json")) {
        try {
            Dataset ds = load_dataset(dir);
            if (ds.spec.counts.train == spec.counts.train &&
                ds.spec.master_seed == spec.master_seed && ds.spec.h == spec.h)
                return ds;
            note("dataset " + spec.name + ": cached copy does not match, regenerating");
        } catch (const std::exception& e) {
            note("dataset " + spec.name + ": reload failed (" + e.what() + "), regenerating");
        }
    }
    note("generating dataset " + spec.name + " (" + std::to_string(spec.counts.train) + "+" +
         std::to_string(spec.counts.val) + "+" + std::to_string(spec.counts.test) + " at " +
         std::to_string(spec.h) + "x" + std::to_string(spec.w) + ")");
    Dataset ds = generate_dataset(spec);
    fs::create_directories(dir);
    save_dataset(ds, dir);
    note("dataset " + spec.name + " ready");
    return ds;
}

TrainConfig trend_train_config() {
    TrainConfig tc;
    tc.lr0 = 3e-3;
    tc.batch_size = 16;
    tc.epochs = 200;
    tc.seed = 0;
    tc.mode = TrainMode::from_scratch;
    tc.precision = Precision::f32;
    return tc;
}

// pre-trains (or reloads) the Q1 source checkpoint: SYS-1(1,5), d=16 m=8,
// 200 epochs, seed 0
Checkpoint ensure_q1_pretrain(const fs::path& work) {
    const fs::path dir = work / "ckpt" / "q1-pre";
    if (fs::exists(dir / "checkpoint.json")) {
        try {
            return load_checkpoint(dir);
        } catch (const std::exception& e) {
            note(std::string("q1-pre checkpoint reload failed (") + e.what() + "), retraining");
        }
    }
    const Dataset pre = ensure_dataset(work, spec_sys1_pre());
    note("pre-training q1-pre (d=16 m=8, 200 epochs on " + pre.spec.name + ")");
    FnoConfig cfg;  // d=16, m=8
    Checkpoint init;
    init.params = init_params(cfg, derive_seed(0, kModelInitStream, 0));
    init.refs = fit_references({&pre.train}, pre.spec.name);
    const TrainConfig tc = trend_train_config();
    const DataView train = DataView::all(pre.train, pre.spec.h, pre.spec.w);
    const DataView val = DataView::all(pre.val, pre.spec.h, pre.spec.w);
    const TrainResult r = train_model(init, train, val, tc, pre.spec.name);
    if (r.diverged) throw NumericError("q1 pre-training diverged");
    fs::create_directories(dir);
    save_checkpoint(r.ckpt, dir);
    write_training_log(work / "runs" / "q1-pre.csv", r.log);
    note("q1-pre ready (best val " + fmt(r.ckpt.prov.best_val_loss) + " at epoch " +
         std::to_string(r.ckpt.prov.best_epoch) + ")");
    return r.ckpt;
}

// pre-trains (or reloads) the Q4 mixed checkpoint on the three-system corpus
Checkpoint ensure_mixed(const fs::path& work) {
    const fs::path dir = work / "ckpt" / "mixed";
    if (fs::exists(dir / "checkpoint.json")) {
        try {
            return load_checkpoint(dir);
        } catch (const std::exception& e) {
            note(std::string("mixed checkpoint reload failed (") + e.what() + "), retraining");
        }
    }
    // the three corpora live only inside this scope (about 2 GB together)
    const Dataset s1 = ensure_dataset(work, spec_sys1_pre());
    const Dataset s2 = ensure_dataset(work, spec_sys2_pre());
    const Dataset s3 = ensure_dataset(work, spec_sys3_pre());
    note("mixed pre-training on sys1-pre + sys2-pre + sys3-pre (d=16 m=8, 200 epochs)");
    FnoConfig cfg;
    const TrainResult r = run_mixed_pretraining({&s1, &s2, &s3}, cfg, trend_train_config(),
                                                "MIXED(sys1-pre+sys2-pre+sys3-pre)");
    if (r.diverged) throw NumericError("mixed pre-training diverged");
    fs::create_directories(dir);
    save_checkpoint(r.ckpt, dir);
    write_training_log(work / "runs" / "mixed-pre.csv", r.log);
    note("mixed checkpoint ready (best val " + fmt(r.ckpt.prov.best_val_loss) + " at epoch " +
         std::to_string(r.ckpt.prov.best_epoch) + ")");
    return r.ckpt;
}

// fixed-lr sweep over (mode, sizes, seeds) for the d=16 m=8 model; finished
// cells already in the table are skipped by run_data_scaling
void sweep_cells(ResultsCsv& table, const Dataset& ds, const std::string& label,
                 const Checkpoint* src, SweepMode mode, const std::vector<int>& sizes,
                 const std::vector<std::uint64_t>& seeds, double lr0) {
    SweepSpec sp;
    sp.downstream = &ds;
    sp.source = src;
    sp.system_label = label;
    sp.sizes = sizes;
    sp.models = {FnoConfig{}};
    sp.modes = {mode};
    sp.seeds = seeds;
    sp.base = trend_train_config();
    sp.base.lr0 = lr0;
    sp.tune = false;
    sp.val_cap = 128;  // per-epoch validation dominates small-n cells otherwise
    run_data_scaling(sp, table);
}

std::vector<double> cell_errors(const ResultsCsv& table, const std::string& system,
                                SweepMode mode, int n, const std::vector<std::uint64_t>& seeds) {
    std::vector<double> v;
    for (std::uint64_t s : seeds)
        for (const auto& r : table.rows())
            if (r.system == system && r.mode == sweep_mode_name(mode) && r.n_examples == n &&
                r.seed == s)
                v.push_back(r.test_error);
    return v;
}

double median_err(const ResultsCsv& table, const std::string& system, SweepMode mode, int n,
                  const std::vector<std::uint64_t>& seeds) {
    const std::vector<double> v = cell_errors(table, system, mode, n, seeds);
    if (v.empty())
        throw NumericError("no sweep rows for " + system + " " + sweep_mode_name(mode) +
                           " at n=" + std::to_string(n));
    return quantile_linear(v, 0.5);
}

// cumulative wall-clock bookkeeping across resumed runs
double load_elapsed(const fs::path& p) {
    std::ifstream in(p);
    double v = 0;
    if (in) in >> v;
    return v;
}

void save_elapsed(const fs::path& p, double v) {
    std::ofstream out(p);
    out << v << "\n";
}

const std::vector<int> kQ1Sizes{32, 64, 128, 256, 512, 1024};
const char* const kQ1Label = "SYS-1(5,10)";

// ---------------------------------------------------------------------------
// criterion 8: Q1 trend (fine-tune vs from-scratch on the medium shift)
// ---------------------------------------------------------------------------

Outcome c8(const fs::path& work) {
    const double t0 = now_s();
    const fs::path elapsed_file = work / "results" / "q1-elapsed.txt";
    const Checkpoint src = ensure_q1_pretrain(work);
    const Dataset down = ensure_dataset(work, spec_sys1_med());
    ResultsCsv table(work / "results" / "q1.csv");
    const std::vector<std::uint64_t> seeds{0, 1, 2};

    note("criterion 8: sweeping " + std::string(kQ1Label) + " (6 sizes x 3 seeds x 2 modes); " +
         std::to_string(table.rows().size()) + " cached rows");
    sweep_cells(table, down, kQ1Label, nullptr, SweepMode::from_scratch, kQ1Sizes, seeds, 3e-3);
    sweep_cells(table, down, kQ1Label, &src, SweepMode::fine_tune, kQ1Sizes, seeds, 1e-3);

    int violations = 0;
    for (int n : kQ1Sizes) {
        const double fs_med = median_err(table, kQ1Label, SweepMode::from_scratch, n, seeds);
        const double ft_med = median_err(table, kQ1Label, SweepMode::fine_tune, n, seeds);
        if (!(ft_med <= fs_med)) ++violations;
        note("  n=" + std::to_string(n) + ": fs median " + fmt(fs_med) + ", ft median " +
             fmt(ft_med));
    }
    const double tl64 = median_err(table, kQ1Label, SweepMode::fine_tune, 64, seeds);
    const double fs1024 = median_err(table, kQ1Label, SweepMode::from_scratch, 1024, seeds);

    const double total_s = load_elapsed(elapsed_file) + (now_s() - t0);
    save_elapsed(elapsed_file, total_s);
    const double cores = std::max(1u, std::thread::hardware_concurrency());
    const double core_h = total_s * cores / 3600.0;

    const bool pass = violations <= 1 && tl64 <= fs1024 && core_h <= 32.0;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "median over 3 seeds: ft > fs at %d of 6 sizes (allow 1); tl@64 %s vs fs@1024 "
                  "%s (need <=); cumulative %.2f core-h on %.0f core(s) (budget 32)",
                  violations, fmt(tl64).c_str(), fmt(fs1024).c_str(), core_h, cores);
    return {pass, buf};
}

// ---------------------------------------------------------------------------
// criterion 9: Q3 in-distribution zero-shot on SYS-1(1,2.5)
// ---------------------------------------------------------------------------

Outcome c9(const fs::path& work) {
    const Checkpoint src = ensure_q1_pretrain(work);
    const Dataset down = ensure_dataset(work, spec_sys1_none());
    ResultsCsv table(work / "results" / "q3-none.csv");
    const std::string label = "SYS-1(1,2.5)";
    const std::vector<int> sizes{8, 16, 32, 64, 128, 256, 512, 1024, 2048};
    const std::vector<std::uint64_t> seeds{0};

    note("criterion 9: zero-shot + fine-tune ladder on " + label + "; " +
         std::to_string(table.rows().size()) + " cached rows");
    sweep_cells(table, down, label, &src, SweepMode::zero_shot, {0}, seeds, 1e-3);
    sweep_cells(table, down, label, &src, SweepMode::fine_tune, sizes, seeds, 1e-3);

    const double zs = median_err(table, label, SweepMode::zero_shot, 0, seeds);
    double best_ft = 1e300;
    int best_n = 0;
    for (int n : sizes) {
        const double e = median_err(table, label, SweepMode::fine_tune, n, seeds);
        note("  ft n=" + std::to_string(n) + ": " + fmt(e));
        if (e < best_ft) {
            best_ft = e;
            best_n = n;
        }
    }
    const bool pass = zs <= 1.5 * best_ft;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "zero-shot %s vs best fine-tuned %s (at n=%d): ratio %.3f (need <= 1.5)",
                  fmt(zs).c_str(), fmt(best_ft).c_str(), best_n, zs / best_ft);
    return {pass, buf};
}

// ---------------------------------------------------------------------------
// criterion 10: Q4 mixed-model zero-shot vs from-scratch at 128 examples
// ---------------------------------------------------------------------------

Outcome c10(const fs::path& work) {
    const Checkpoint mixed = ensure_mixed(work);
    struct Task {
        DatasetSpec spec;
        const char* label;
        const char* csv;
    };
    const Task tasks[3] = {
        {spec_sys1_none(), "SYS-1(1,2.5)", "q4-sys1.csv"},
        {spec_sys2_none(), "SYS-2(0.2,0.4)", "q4-sys2.csv"},
        {spec_sys3_in(), "SYS-3(1,5)", "q4-sys3.csv"},
    };
    const std::vector<std::uint64_t> seeds{0, 1, 2};

    bool pass = true;
    std::string detail = "median over 3 seeds, zero-shot vs fs@128:";
    for (const Task& t : tasks) {
        const Dataset down = ensure_dataset(work, t.spec);  // one corpus in memory at a time
        ResultsCsv table(work / "results" / t.csv);
        note("criterion 10: " + std::string(t.label) + "; " +
             std::to_string(table.rows().size()) + " cached rows");
        sweep_cells(table, down, t.label, &mixed, SweepMode::zero_shot, {0}, seeds, 1e-3);
        sweep_cells(table, down, t.label, nullptr, SweepMode::from_scratch, {128}, seeds, 3e-3);
        const double zs = median_err(table, t.label, SweepMode::zero_shot, 0, seeds);
        const double fs128 = median_err(table, t.label, SweepMode::from_scratch, 128, seeds);
        pass = pass && zs < fs128;
        char buf[120];
        std::snprintf(buf, sizeof buf, " %s %s vs %s;", t.label, fmt(zs).c_str(),
                      fmt(fs128).c_str());
        detail += buf;
    }
    return {pass, detail + (pass ? " all lower" : " NOT all lower")};
}

// ---------------------------------------------------------------------------
// criterion 12: 5-seed IQR comparison (WARN, not a hard gate)
// ---------------------------------------------------------------------------

Outcome c12(const fs::path& work) {
    const Checkpoint src = ensure_q1_pretrain(work);
    const Dataset down = ensure_dataset(work, spec_sys1_med());
    ResultsCsv table(work / "results" / "q1.csv");
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

    note("criterion 12: extending " + std::string(kQ1Label) + " to 5 seeds; " +
         std::to_string(table.rows().size()) + " cached rows");
    sweep_cells(table, down, kQ1Label, nullptr, SweepMode::from_scratch, kQ1Sizes, seeds, 3e-3);
    sweep_cells(table, down, kQ1Label, &src, SweepMode::fine_tune, kQ1Sizes, seeds, 1e-3);

    int wider = 0;
    for (int n : kQ1Sizes) {
        const std::vector<double> fs_err =
            cell_errors(table, kQ1Label, SweepMode::from_scratch, n, seeds);
        const std::vector<double> ft_err =
            cell_errors(table, kQ1Label, SweepMode::fine_tune, n, seeds);
        if (fs_err.size() != 5 || ft_err.size() != 5)
            throw NumericError("criterion 12: missing seed rows at n=" + std::to_string(n));
        const double iqr_fs = quantile_linear(fs_err, 0.75) - quantile_linear(fs_err, 0.25);
        const double iqr_ft = quantile_linear(ft_err, 0.75) - quantile_linear(ft_err, 0.25);
        note("  n=" + std::to_string(n) + ": fs IQR " + fmt(iqr_fs) + ", ft IQR " + fmt(iqr_ft));
        if (iqr_fs > iqr_ft) ++wider;
    }
    const int need = static_cast<int>(std::ceil(0.6 * kQ1Sizes.size()));
    const bool pass = wider >= need;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "5-seed from-scratch IQR exceeds fine-tune IQR at %d of %zu sizes (need >= %d; "
                  "stochastic claim, warning only)",
                  wider, kQ1Sizes.size(), need);
    return {pass, buf};
}

// ---------------------------------------------------------------------------

Outcome run_criterion(int id, const fs::path& work) {
    switch (id) {
        case 1: return c1(work);
        case 2: return c2(work);
        case 3: return c3(work);
        case 4: return c4(work);
        case 5: return c5(work);
        case 6: return c6(work);
        case 7: return c7(work);
        case 8: return c8(work);
        case 9: return c9(work);
        case 10: return c10(work);
        case 11: return c11(work);
        case 12: return c12(work);
        default: throw ConfigError("unknown criterion " + std::to_string(id));
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> ids{1, 2, 3, 4, 5, 6, 7, 11, 8, 9, 10, 12};  // fast tier first
    fs::path work = "acceptance_work";

    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criteria" && i + 1 < argc) {
            ids.clear();
            const std::string list = argv[++i];
            std::size_t pos = 0;
            while (pos < list.size()) {
                const std::size_t comma = list.find(',', pos);
                const std::string tok = list.substr(pos, comma - pos);
                try {
                    const int id = std::stoi(tok);
                    if (id < 1 || id > 12) throw std::out_of_range(tok);
                    ids.push_back(id);
                } catch (const std::exception&) {
                    std::fprintf(stderr, "bad criterion id: '%s'\n", tok.c_str());
                    return 2;
                }
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            if (ids.empty()) {
                std::fprintf(stderr, "--criteria list is empty\n");
                return 2;
            }
        } else if (a == "--work-dir" && i + 1 < argc) {
            work = argv[++i];
        } else if (a == "-h" || a == "--help") {
            std::printf("usage: acceptance [--criteria 1,2,...] [--work-dir DIR]\n");
            return 0;
        } else {
            std::fprintf(stderr, "unknown argument: %s\n", a.c_str());
            return 2;
        }
    }

    fs::create_directories(work / "results");
    fs::create_directories(work / "data");
    fs::create_directories(work / "ckpt");
    fs::create_directories(work / "runs");

    int hard_failures = 0;
    for (int id : ids) {
        note("running criterion " + std::to_string(id));
        Outcome o;
        try {
            o = run_criterion(id, work);
        } catch (const std::exception& e) {
            o = {false, std::string("aborted: ") + e.what()};
        }
        const bool warn_only = id == 12;
        const char* tag = o.pass ? "PASS" : (warn_only ? "WARN" : "FAIL");
        std::printf("%s criterion %d: %s\n", tag, id, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass && !warn_only) ++hard_failures;
    }

    if (hard_failures)
        std::printf("ACCEPTANCE: FAIL (%d hard criterion failure(s) of %zu run)\n", hard_failures,
                    ids.size());
    else
        std::printf("ACCEPTANCE: PASS (%zu criteria run)\n", ids.size());
    return hard_failures ? 1 : 0;
}
