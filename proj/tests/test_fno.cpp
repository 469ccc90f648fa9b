// fno: parameter bookkeeping, initialization, spectral-conv oracle
// (band-limit + Hermitian ky=0 handling), symmetry and determinism probes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "fnolab/field.hpp"
#include "fnolab/fno.hpp"
#include "fnolab/rng.hpp"

using namespace fnolab;

namespace {

FnoConfig make_cfg(int d, int m, int L = 4, int head = 128) {
    FnoConfig c;
    c.d = d;
    c.m = m;
    c.L = L;
    c.head_width = head;
    return c;
}

ChannelStack random_stack(int h, int w, int c, std::uint64_t seed) {
    ChannelStack s(h, w, c);
    Rng rng(seed);
    for (auto& v : s.values) v = rng.uniform(-1, 1);
    return s;
}

double max_abs(const AVec<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// is a half-spectrum coordinate inside the retained corner set of ModeSet?
bool retained(int h, int kx, int ky, int m) {
    if (ky > m - 1) return false;
    const bool pos = kx <= m - 1, neg = kx >= h - m;
    if (!pos && !neg) return false;
    if (ky == 0 && kx == h - m && kx != m) return false;  // excluded mirror row
    return true;
}

}  // namespace

TEST_CASE("parameter counts hit the published ladder") {
    CHECK(param_count(make_cfg(16, 4)) == 69057);
    CHECK(param_count(make_cfg(16, 16)) == 1052097);
    CHECK(param_count(make_cfg(32, 32)) == 16786049);
    CHECK(param_count(make_cfg(128, 32)) == 268519169);

    const FnoConfig c = make_cfg(8, 4, 3, 16);
    const FnoLayout lay = FnoLayout::make(c);
    CHECK(std::int64_t(lay.total) == param_count(c));
    // groups tile [0, total) in order
    std::size_t off = 0;
    for (const auto& g : lay.groups) {
        CHECK(g.offset == off);
        off += g.count;
    }
    CHECK(off == lay.total);
}

TEST_CASE("config validation and model id") {
    CHECK(make_cfg(16, 8).model_id() == "fno-d16-m8");
    for (auto bad : {make_cfg(0, 8), make_cfg(16, 0), make_cfg(16, 8, 0),
                     make_cfg(16, 8, 4, 0)})
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(make_cfg(16, 8).validate_grid(8, 8), ConfigError);   // m > h/2
    CHECK_THROWS_AS(make_cfg(16, 5).validate_grid(8, 32), ConfigError);  // m > h/2 on rows
    CHECK_NOTHROW(make_cfg(16, 4).validate_grid(8, 8));
}

TEST_CASE("init_params: deterministic, layout-sized, in the documented ranges") {
    const FnoConfig cfg = make_cfg(8, 4, 2, 16);
    const FnoParams a = init_params(cfg, 7), b = init_params(cfg, 7), c = init_params(cfg, 8);
    CHECK(std::int64_t(a.flat.size()) == param_count(cfg));
    CHECK(std::memcmp(a.flat.data(), b.flat.data(), a.flat.size() * sizeof(double)) == 0);
    bool differs = false;
    for (std::size_t i = 0; i < a.flat.size(); ++i) differs |= (a.flat[i] != c.flat[i]);
    CHECK(differs);

    const FnoLayout lay = FnoLayout::make(cfg);
    const double phi_hi = 1.0 / (double(cfg.d) * cfg.d);
    for (const auto& g : lay.groups) {
        double bound;
        bool nonneg = false;
        if (g.name.find("phi") != std::string::npos) {
            bound = phi_hi;
            nonneg = true;
        } else if (g.name.rfind("lift", 0) == 0) {
            bound = 1.0 / std::sqrt(double(cfg.c_in));
        } else if (g.name == "head.w2" || g.name == "head.b2") {
            bound = 1.0 / std::sqrt(double(cfg.head_width));
        } else {
            bound = 1.0 / std::sqrt(double(cfg.d));
        }
        for (std::size_t i = g.offset; i < g.offset + g.count; ++i) {
            CHECK(std::abs(a.flat[i]) <= bound);
            if (nonneg) CHECK(a.flat[i] >= 0.0);
        }
    }
}

TEST_CASE("all-zero parameters map any input to the zero field") {
    const FnoConfig cfg = make_cfg(6, 3, 2, 8);
    FnoParams p;
    p.config = cfg;
    p.flat.assign(std::size_t(param_count(cfg)), 0.0);
    const RealField out = forward_raw(p, random_stack(8, 8, cfg.c_in, 11));
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("forward is translation-equivariant") {
    const FnoConfig cfg = make_cfg(8, 4, 4, 16);
    const FnoParams p = init_params(cfg, 3);
    const int h = 16, w = 16, di = 3, dj = 5;
    for (int rep = 0; rep < 6; ++rep) {
        const ChannelStack s = random_stack(h, w, cfg.c_in, 100 + rep);
        ChannelStack ss(h, w, cfg.c_in);
        for (int ch = 0; ch < cfg.c_in; ++ch) {
            RealField f(h, w);
            std::copy(s.channel(ch), s.channel(ch) + f.size(), f.values.begin());
            const RealField g = periodic_shift(f, di, dj);
            std::copy(g.values.begin(), g.values.end(), ss.channel(ch));
        }
        const RealField out = forward_raw(p, s);
        const RealField out_shift_in = forward_raw(p, ss);
        const RealField shifted_out = periodic_shift(out, di, dj);
        double diff = 0, scale = max_abs(out.values);
        for (std::size_t i = 0; i < out.size(); ++i)
            diff = std::max(diff, std::abs(out_shift_in.values[i] - shifted_out.values[i]));
        CHECK(diff <= 1e-6 * std::max(1.0, scale));
    }
}

TEST_CASE("spectral_conv with identity Phi is the masked band-limit projection") {
    const int h = 16, w = 16, d = 3, m = 4;
    const std::size_t plane = std::size_t(h) * w, nm = 2 * std::size_t(m) * m;
    std::vector<std::complex<double>> phi(nm * d * d, 0.0);
    for (std::size_t md = 0; md < nm; ++md)
        for (int i = 0; i < d; ++i) phi[md * d * d + std::size_t(i) * d + i] = 1.0;
    const std::complex<double>* pos = phi.data();
    const std::complex<double>* neg = phi.data() + std::size_t(m) * m * d * d;

    Rng rng(19);
    std::vector<double> X(d * plane), Y(d * plane);
    for (auto& v : X) v = rng.uniform(-1, 1);
    spectral_conv(h, w, d, m, pos, neg, X.data(), Y.data());

    for (int p = 0; p < d; ++p) {
        RealField xp(h, w);
        std::copy(X.begin() + p * plane, X.begin() + (p + 1) * plane, xp.values.begin());
        SpectralField s = dft2(xp);
        for (int kx = 0; kx < h; ++kx)
            for (int ky = 0; ky <= w / 2; ++ky)
                if (!retained(h, kx, ky, m)) s.at(kx, ky) = 0.0;
        const RealField want = idft2(s);
        double scale = max_abs(want.values), diff = 0;
        for (std::size_t i = 0; i < plane; ++i)
            diff = std::max(diff, std::abs(Y[p * plane + i] - want.values[i]));
        CHECK(diff <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("spectral_conv output stays inside the retained modes") {
    const int h = 16, w = 12, d = 2, m = 3;
    const std::size_t plane = std::size_t(h) * w, nm = 2 * std::size_t(m) * m;
    Rng rng(29);
    std::vector<std::complex<double>> phi(nm * d * d);
    for (auto& z : phi) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<double> X(d * plane), Y(d * plane);
    for (auto& v : X) v = rng.uniform(-1, 1);
    spectral_conv(h, w, d, m, phi.data(), phi.data() + nm / 2 * d * d, X.data(), Y.data());

    for (int p = 0; p < d; ++p) {
        RealField yp(h, w);
        std::copy(Y.begin() + p * plane, Y.begin() + (p + 1) * plane, yp.values.begin());
        const SpectralField s = dft2(yp);
        double inside = 0;
        for (int kx = 0; kx < h; ++kx)
            for (int ky = 0; ky <= w / 2; ++ky)
                if (retained(h, kx, ky, m)) inside = std::max(inside, std::abs(s.at(kx, ky)));
        for (int kx = 0; kx < h; ++kx)
            for (int ky = 0; ky <= w / 2; ++ky)
                if (!retained(h, kx, ky, m))
                    CHECK(std::abs(s.at(kx, ky)) <= 1e-12 * std::max(1.0, inside));
    }
}

TEST_CASE("spectral_conv kills inputs above the cutoff") {
    const int h = 16, w = 16, d = 2, m = 4;
    const std::size_t plane = std::size_t(h) * w, nm = 2 * std::size_t(m) * m;
    Rng rng(31);
    std::vector<std::complex<double>> phi(nm * d * d);
    for (auto& z : phi) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

    for (int axis = 0; axis < 2; ++axis) {
        std::vector<double> X(d * plane), Y(d * plane, 1.0);
        for (int p = 0; p < d; ++p)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    const double phase = axis == 0 ? double(m + 1) * i / h : double(m + 1) * j / w;
                    X[p * plane + std::size_t(i) * w + j] = std::cos(2.0 * M_PI * phase);
                }
        spectral_conv(h, w, d, m, phi.data(), phi.data() + nm / 2 * d * d, X.data(), Y.data());
        for (double v : Y) CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("spectral_conv: zero Phi gives zero; linear in the input") {
    const int h = 8, w = 8, d = 2, m = 2;
    const std::size_t plane = std::size_t(h) * w, nm = 2 * std::size_t(m) * m;
    Rng rng(37);
    std::vector<std::complex<double>> zero(nm * d * d, 0.0), phi(nm * d * d);
    for (auto& z : phi) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

    std::vector<double> x1(d * plane), x2(d * plane), xc(d * plane);
    for (auto& v : x1) v = rng.uniform(-1, 1);
    for (auto& v : x2) v = rng.uniform(-1, 1);
    const double a = 1.7, b = -0.3;
    for (std::size_t i = 0; i < xc.size(); ++i) xc[i] = a * x1[i] + b * x2[i];

    std::vector<double> y0(d * plane, 1.0);
    spectral_conv(h, w, d, m, zero.data(), zero.data() + nm / 2 * d * d, x1.data(), y0.data());
    for (double v : y0) CHECK(std::abs(v) <= 1e-15);

    std::vector<double> y1(d * plane), y2(d * plane), yc(d * plane);
    const auto* neg = phi.data() + nm / 2 * d * d;
    spectral_conv(h, w, d, m, phi.data(), neg, x1.data(), y1.data());
    spectral_conv(h, w, d, m, phi.data(), neg, x2.data(), y2.data());
    spectral_conv(h, w, d, m, phi.data(), neg, xc.data(), yc.data());
    double scale = 0;
    for (double v : yc) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < yc.size(); ++i)
        CHECK(std::abs(yc[i] - (a * y1[i] + b * y2[i])) <= 1e-10 * std::max(1.0, scale));
}

TEST_CASE("ModeSet classifies the ky = 0 column") {
    const ModeSet ms = ModeSet::make(16, 16, 4);
    REQUIRE(ms.modes.size() == 32);
    auto at = [&](std::size_t i) { return ms.modes[i]; };
    // pos corner row-major: index = kx*m + ky
    CHECK(at(0).kx == 0);
    CHECK(at(0).ky == 0);
    CHECK(at(0).self);
    CHECK(at(0).pair == -1);
    CHECK_FALSE(at(0).excluded);
    CHECK(at(4).kx == 1);
    CHECK(at(4).pair == 28);
    CHECK(at(28).kx == 15);
    CHECK(at(28).pair == 4);
    CHECK(at(8).pair == 24);   // kx=2 <-> kx=14
    CHECK(at(12).pair == 20);  // kx=3 <-> kx=13
    CHECK(at(16).kx == 12);    // mirror +4 not retained
    CHECK(at(16).excluded);
    for (const auto& md : ms.modes)
        if (md.ky != 0) {
            CHECK_FALSE(md.self);
            CHECK_FALSE(md.excluded);
            CHECK(md.pair == -1);
        }

    // 2m == h: the h/2 row is its own mirror, nothing is excluded
    const ModeSet full = ModeSet::make(8, 8, 4);
    bool any_excluded = false;
    int selves = 0;
    for (const auto& md : full.modes) {
        any_excluded |= md.excluded;
        if (md.self) {
            ++selves;
            CHECK((md.kx == 0 || md.kx == 4));
        }
    }
    CHECK_FALSE(any_excluded);
    CHECK(selves == 2);

    CHECK_THROWS_AS(ModeSet::make(8, 8, 5), ConfigError);
}

TEST_CASE("forward is deterministic; the f32 engine tracks the f64 reference") {
    const FnoConfig cfg = make_cfg(8, 4, 2, 16);
    const FnoParams p = init_params(cfg, 13);
    const ChannelStack s = random_stack(16, 16, cfg.c_in, 17);
    const RealField o1 = forward_raw(p, s), o2 = forward_raw(p, s);
    CHECK(std::memcmp(o1.values.data(), o2.values.data(),
                      o1.size() * sizeof(double)) == 0);

    FnoNet<float> net(cfg, 16, 16);
    net.set_params(p.flat);
    auto ws = net.make_workspace();
    AVec<float> in(s.values.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = float(s.values[i]);
    AVec<float> out(o1.size());
    net.forward(in.data(), out.data(), ws);
    const double scale = max_abs(o1.values);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(std::abs(double(out[i]) - o1.values[i]) <= 1e-3 * std::max(1.0, scale));
}
