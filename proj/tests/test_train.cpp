// train: finite-difference gradient oracle, exact loss values, optimizer
// plumbing (determinism, schedules, logging, checkpoints, grid search).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fnolab/dataset.hpp"
#include "fnolab/train.hpp"

using namespace fnolab;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("fnolab-train-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

const Dataset& tiny() {
    static const Dataset ds = [] {
        DatasetSpec spec;
        spec.name = "tiny-train";
        spec.system = PdeSystem::poisson;
        spec.h = spec.w = 16;
        spec.counts = {6, 2, 2};
        spec.source.sigma = 1.0 / 8.0;
        spec.master_seed = 41;
        return generate_dataset(spec);
    }();
    return ds;
}

Checkpoint make_init(const FnoConfig& cfg, std::uint64_t seed) {
    Checkpoint c;
    c.params = init_params(cfg, seed);
    c.refs = fit_references({&tiny().train}, tiny().spec.name);
    return c;
}

// constant-prediction network: everything zero except the final head bias
Checkpoint const_net(double beta) {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    Checkpoint c;
    c.params.config = cfg;
    c.params.flat.assign(std::size_t(param_count(cfg)), 0.0);
    c.params.flat[FnoLayout::make(cfg).head_b2] = beta;
    return c;
}

SplitData const_split(int n, int h, int w, float target) {
    SplitData s;
    s.n = n;
    s.plane = std::size_t(h) * w;
    s.data.assign(std::size_t(n) * (kNumChannels + 1) * s.plane, 0.0f);
    s.psi.assign(n, 0.0);
    s.psi_target.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        float* in = s.input(i);
        for (std::size_t p = 0; p < s.plane; ++p) in[p] = 1.0f;  // source channel
        float* tg = in + kNumChannels * s.plane;
        for (std::size_t p = 0; p < s.plane; ++p) tg[p] = target;
    }
    return s;
}

}  // namespace

TEST_CASE("cosine schedule endpoints and domain") {
    CHECK(cosine_lr(0, 200, 2e-3) == doctest::Approx(2e-3).epsilon(1e-15));
    CHECK(cosine_lr(100, 200, 2e-3) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(cosine_lr(200, 200, 2e-3) == doctest::Approx(0.0).scale(1e-3).epsilon(1e-12));
    CHECK_THROWS_AS(cosine_lr(-1, 200, 1e-3), ConfigError);
    CHECK_THROWS_AS(cosine_lr(201, 200, 1e-3), ConfigError);
    CHECK_THROWS_AS(cosine_lr(0, 0, 1e-3), ConfigError);
}

TEST_CASE("reverse-mode gradients match central differences in every group") {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    const FnoParams params = init_params(cfg, 51);
    NormalizationReferences refs;  // identity scales: probe the raw network

    Rng rng(53);
    std::vector<ChannelStack> stacks(2, ChannelStack(8, 8, kNumChannels));
    std::vector<RealField> targets(2, RealField(8, 8));
    for (auto& s : stacks)
        for (auto& v : s.values) v = rng.uniform(-1, 1);
    for (auto& t : targets)
        for (auto& v : t.values) v = rng.uniform(-1, 1);
    const std::vector<const ChannelStack*> sp{&stacks[0], &stacks[1]};
    const std::vector<const RealField*> tp{&targets[0], &targets[1]};

    std::vector<double> grad;
    mse_loss_and_grad(params, sp, tp, refs, grad);
    REQUIRE(grad.size() == params.flat.size());

    const FnoLayout lay = FnoLayout::make(cfg);
    const double h = 1e-6;
    std::vector<double> scratch;
    for (const auto& g : lay.groups) {
        // the two largest-|grad| coordinates of the group
        std::vector<std::size_t> picks;
        for (int rep = 0; rep < 2 && rep < int(g.count); ++rep) {
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
            INFO("group ", g.name, " coord ", i, " fd ", fd, " grad ", grad[i]);
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("loss is exactly zero on a perfect fit and one on unit error") {
    const Checkpoint net = const_net(1.0);
    ChannelStack stack(8, 8, kNumChannels);
    for (std::size_t i = 0; i < stack.plane(); ++i) stack.channel(0)[i] = 1.0;
    RealField ones(8, 8), zeros(8, 8);
    for (auto& v : ones.values) v = 1.0;
    NormalizationReferences refs;

    std::vector<double> grad;
    const double l0 = mse_loss_and_grad(net.params, {&stack}, {&ones}, refs, grad);
    CHECK(l0 == 0.0);
    for (double gv : grad) CHECK(gv == 0.0);

    const double l1 = mse_loss_and_grad(net.params, {&stack}, {&zeros}, refs, grad);
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-15));

    FnoParams bad = net.params;
    bad.flat[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(mse_loss_and_grad(bad, {&stack}, {&zeros}, refs, grad), NumericError);
}

TEST_CASE("evaluate: exact mu_l2 on synthetic splits, zero-norm exclusion") {
    const SplitData split = const_split(2, 8, 8, 2.0f);
    const DataView view = DataView::all(split, 8, 8);
    CHECK(evaluate(const_net(1.0), view) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(evaluate(const_net(0.0), view) == doctest::Approx(1.0).epsilon(1e-12));

    SplitData mixed = const_split(2, 8, 8, 2.0f);
    float* tg = mixed.input(1) + kNumChannels * mixed.plane;
    for (std::size_t p = 0; p < mixed.plane; ++p) tg[p] = 0.0f;  // excluded record
    CHECK(evaluate(const_net(1.0), DataView::all(mixed, 8, 8)) ==
          doctest::Approx(0.5).epsilon(1e-12));

    SplitData allzero = const_split(1, 8, 8, 0.0f);
    CHECK_THROWS_AS(evaluate(const_net(1.0), DataView::all(allzero, 8, 8)), ConfigError);
}

TEST_CASE("data views: sizes, sharing, subsets, grid checks") {
    const Dataset& ds = tiny();
    const DataView train = DataView::all(ds.train, 16, 16);
    CHECK(train.size() == 6);
    CHECK(train.input(2) == ds.train.input(2));  // shared storage, no copies

    const DataView sub = train.subset({2, 0, 0});
    CHECK(sub.size() == 3);
    CHECK(sub.input(0) == ds.train.input(2));
    CHECK(sub.input(1) == ds.train.input(0));
    CHECK(sub.input(2) == ds.train.input(0));
    CHECK_THROWS_AS(train.subset({6}), ConfigError);

    const DataView val = DataView::all(ds.val, 16, 16);
    CHECK(DataView::concat({&train, &val}).size() == 8);
    CHECK_THROWS_AS(DataView::all(ds.train, 8, 8), ConfigError);

    const SplitData other = const_split(1, 8, 8, 1.0f);
    const DataView ov = DataView::all(other, 8, 8);
    CHECK_THROWS_AS(DataView::concat({&train, &ov}), ConfigError);
}

TEST_CASE("plain gradient descent decreases the loss monotonically") {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    FnoParams params = init_params(cfg, 57);
    NormalizationReferences refs;
    ChannelStack stack(8, 8, kNumChannels);
    RealField target(8, 8);
    Rng rng(59);
    for (auto& v : stack.values) v = rng.uniform(-1, 1);
    for (auto& v : target.values) v = rng.uniform(-1, 1);

    std::vector<double> grad;
    double prev = mse_loss_and_grad(params, {&stack}, {&target}, refs, grad);
    for (int step = 0; step < 10; ++step) {
        for (std::size_t i = 0; i < params.flat.size(); ++i) params.flat[i] -= 1e-4 * grad[i];
        const double cur = mse_loss_and_grad(params, {&stack}, {&target}, refs, grad);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("train_model: determinism, schedule column, best-on-val bookkeeping") {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    const Checkpoint init = make_init(cfg, 61);
    const DataView train = DataView::all(tiny().train, 16, 16);
    const DataView val = DataView::all(tiny().val, 16, 16);
    TrainConfig tc;
    tc.lr0 = 1e-3;
    tc.batch_size = 2;
    tc.epochs = 4;
    tc.seed = 7;
    tc.precision = Precision::f32;

    const TrainResult r1 = train_model(init, train, val, tc, "tiny-train");
    const TrainResult r2 = train_model(init, train, val, tc, "tiny-train");
    CHECK_FALSE(r1.diverged);
    REQUIRE(r1.log.size() == 4);
    CHECK(std::memcmp(r1.ckpt.params.flat.data(), r2.ckpt.params.flat.data(),
                      r1.ckpt.params.flat.size() * sizeof(double)) == 0);
    for (std::size_t e = 0; e < r1.log.size(); ++e) {
        CHECK(r1.log[e].epoch == int(e));
        CHECK(r1.log[e].lr == cosine_lr(int(e), tc.epochs, tc.lr0));
        CHECK(r1.log[e].train_loss == r2.log[e].train_loss);
        CHECK(r1.log[e].val_loss == r2.log[e].val_loss);
    }

    double best = r1.log[0].val_loss;
    int best_epoch = 0;
    for (std::size_t e = 1; e < r1.log.size(); ++e)
        if (r1.log[e].val_loss < best) {
            best = r1.log[e].val_loss;
            best_epoch = int(e);
        }
    CHECK(r1.ckpt.prov.best_val_loss == best);
    CHECK(r1.ckpt.prov.best_epoch == best_epoch);
    CHECK(r1.ckpt.prov.dataset_id == "tiny-train");
    CHECK(r1.ckpt.refs.fitted_on == init.refs.fitted_on);

    // a different seed shuffles differently
    TrainConfig tc2 = tc;
    tc2.seed = 8;
    const TrainResult r3 = train_model(init, train, val, tc2, "tiny-train");
    bool differs = false;
    for (std::size_t i = 0; i < r1.ckpt.params.flat.size(); ++i)
        differs |= (r1.ckpt.params.flat[i] != r3.ckpt.params.flat[i]);
    CHECK(differs);
}

TEST_CASE("zero-shot fine-tune returns the checkpoint untouched; scratch refuses") {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    const Checkpoint init = make_init(cfg, 67);
    const DataView train = DataView::all(tiny().train, 16, 16);
    const DataView val = DataView::all(tiny().val, 16, 16);
    const DataView empty = train.subset({});
    TrainConfig tc;
    tc.epochs = 2;

    tc.mode = TrainMode::fine_tune;
    const TrainResult zs = train_model(init, empty, val, tc, "tiny-train");
    CHECK_FALSE(zs.diverged);
    CHECK(zs.log.empty());
    CHECK(std::memcmp(zs.ckpt.params.flat.data(), init.params.flat.data(),
                      init.params.flat.size() * sizeof(double)) == 0);

    tc.mode = TrainMode::from_scratch;
    CHECK_THROWS_AS(train_model(init, empty, val, tc, "tiny-train"), ConfigError);
}

TEST_CASE("divergence is flagged and stops the run") {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    const Checkpoint init = make_init(cfg, 71);
    const DataView train = DataView::all(tiny().train, 16, 16);
    const DataView val = DataView::all(tiny().val, 16, 16);
    TrainConfig tc;
    tc.lr0 = 1e12;
    tc.batch_size = 2;
    tc.epochs = 50;
    tc.precision = Precision::f32;
    const TrainResult r = train_model(init, train, val, tc, "tiny-train");
    CHECK(r.diverged);
    CHECK(r.log.size() < 50);
}

TEST_CASE("checkpoint container round trip") {
    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    const Checkpoint init = make_init(cfg, 73);
    const DataView train = DataView::all(tiny().train, 16, 16);
    const DataView val = DataView::all(tiny().val, 16, 16);
    TrainConfig tc;
    tc.lr0 = 1e-3;
    tc.batch_size = 3;
    tc.epochs = 2;
    tc.seed = 9;
    tc.mode = TrainMode::fine_tune;
    tc.precision = Precision::f64;
    const TrainResult r = train_model(init, train, val, tc, "tiny-train");

    TempDir tmp;
    save_checkpoint(r.ckpt, tmp.path / "ck");
    const Checkpoint back = load_checkpoint(tmp.path / "ck");
    CHECK(std::memcmp(back.params.flat.data(), r.ckpt.params.flat.data(),
                      r.ckpt.params.flat.size() * sizeof(double)) == 0);
    CHECK(back.params.config.d == cfg.d);
    CHECK(back.params.config.m == cfg.m);
    CHECK(back.params.config.L == cfg.L);
    CHECK(back.params.config.head_width == cfg.head_width);
    CHECK(back.params.config.activation == kActivationId);
    CHECK(back.refs.f_ref == r.ckpt.refs.f_ref);
    for (int ch = 0; ch < kNumChannels; ++ch) CHECK(back.refs.c_ref[ch] == r.ckpt.refs.c_ref[ch]);
    CHECK(back.refs.fitted_on == r.ckpt.refs.fitted_on);
    CHECK(back.prov.dataset_id == "tiny-train");
    CHECK(back.prov.config.lr0 == tc.lr0);
    CHECK(back.prov.config.batch_size == tc.batch_size);
    CHECK(back.prov.config.epochs == tc.epochs);
    CHECK(back.prov.config.seed == tc.seed);
    CHECK(back.prov.config.mode == tc.mode);
    CHECK(back.prov.config.precision == tc.precision);
    CHECK(back.prov.best_val_loss == r.ckpt.prov.best_val_loss);
    CHECK(back.prov.best_epoch == r.ckpt.prov.best_epoch);

    const DataView test = DataView::all(tiny().test, 16, 16);
    CHECK(evaluate(back, test) == evaluate(r.ckpt, test));

    CHECK_THROWS_AS(load_checkpoint(tmp.path / "absent"), IoError);
}

TEST_CASE("training log file format") {
    std::vector<LogRow> log{{0, 0.5, 0.25, 1e-3}, {1, 0.125, 0.75, 5e-4}};
    TempDir tmp;
    const auto path = tmp.path / "log.csv";
    write_training_log(path, log);
    std::ifstream is(path);
    std::string line;
    REQUIRE(bool(std::getline(is, line)));
    CHECK(line == "epoch,train_loss,val_loss,lr");
    REQUIRE(bool(std::getline(is, line)));
    CHECK(line == "0,0.5,0.25,0.001");
    REQUIRE(bool(std::getline(is, line)));
    CHECK(line == "1,0.125,0.75,5e-04");  // shortest round-trip form
    CHECK_FALSE(bool(std::getline(is, line)));
}

TEST_CASE("grid search: count, divergence handling, selection") {
    CHECK(default_lr_grid().size() == 5);
    CHECK(default_lr_grid().front() == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(default_lr_grid().back() == doctest::Approx(1e-2).epsilon(1e-12));
    CHECK(default_batch_grid() == std::vector<int>{16, 64});

    FnoConfig cfg;
    cfg.d = 4;
    cfg.m = 2;
    cfg.L = 2;
    cfg.head_width = 8;
    const Checkpoint init = make_init(cfg, 79);
    const DataView train = DataView::all(tiny().train, 16, 16);
    const DataView val = DataView::all(tiny().val, 16, 16);
    TrainConfig base;
    base.batch_size = 2;
    base.epochs = 3;
    base.precision = Precision::f32;

    const GridSearchResult gs =
        grid_search(init, train, val, base, {1e12, 1e-3}, {2}, "tiny-train");
    REQUIRE(gs.trials.size() == 2);
    CHECK(gs.trials[0].config.lr0 == 1e12);
    CHECK(gs.trials[0].diverged);
    CHECK_FALSE(gs.trials[1].diverged);
    CHECK(std::isfinite(gs.trials[1].val_mu));
    CHECK(gs.best_index == 1);
    CHECK(gs.best.ckpt.prov.config.lr0 == 1e-3);

    CHECK_THROWS_AS(grid_search(init, train, val, base, {1e12}, {2}, "tiny-train"),
                    NumericError);
    CHECK_THROWS_AS(grid_search(init, train, val, base, {}, {2}, "tiny-train"), ConfigError);
}

TEST_CASE("a small fno memorizes four examples") {
    FnoConfig cfg;
    cfg.d = 16;
    cfg.m = 8;
    const Checkpoint init = make_init(cfg, 83);
    const DataView four = DataView::all(tiny().train, 16, 16).subset({0, 1, 2, 3});
    TrainConfig tc;
    tc.lr0 = 3e-2;
    tc.batch_size = 4;
    tc.epochs = 4000;
    tc.precision = Precision::f64;
    const TrainResult r = train_model(init, four, four, tc, "tiny-train");
    CHECK_FALSE(r.diverged);
    // The MSE loss memorizes to ~7e-11; the relative-l2 metric bottoms out near
    // 2e-3 because the smallest-norm target in the batch dominates the mean.
    CHECK(r.ckpt.prov.best_val_loss < 1e-9);
    const double mu = evaluate(r.ckpt, four);
    INFO("train mu_l2 after overfit: ", mu);
    CHECK(mu < 5e-3);
}
