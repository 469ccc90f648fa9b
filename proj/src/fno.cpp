#include "fnolab/fno.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnolab/common.hpp"
#include "fnolab/fft.hpp"
#include "fnolab/kernels.hpp"
#include "fnolab/rng.hpp"

namespace fnolab {

void FnoConfig::validate() const {
    if (c_in < 1) throw ConfigError("fno: c_in must be >= 1");
    if (d < 1) throw ConfigError("fno: embedding dimension must be >= 1");
    if (m < 1) throw ConfigError("fno: mode cutoff must be >= 1");
    if (L < 1) throw ConfigError("fno: block count must be >= 1");
    if (head_width < 1) throw ConfigError("fno: head width must be >= 1");
    if (activation != kActivationId)
        throw ConfigError("fno: unsupported activation '" + activation + "'");
}

void FnoConfig::validate_grid(int h, int w) const {
    validate();
    fnolab::validate_grid(h, w);
    if (m > h / 2 || m > w / 2)
        throw ConfigError("fno: mode cutoff " + std::to_string(m) + " exceeds Nyquist for " +
                          std::to_string(h) + "x" + std::to_string(w));
}

std::string FnoConfig::model_id() const {
    return "fno-d" + std::to_string(d) + "-m" + std::to_string(m);
}

std::int64_t param_count(const FnoConfig& cfg) {
    cfg.validate();
    const std::int64_t d = cfg.d, m = cfg.m, hw = cfg.head_width;
    return cfg.L * (4 * d * d * m * m + d * d + d) + (cfg.c_in * d + d) + (d * hw + hw) +
           (hw + 1);
}

FnoLayout FnoLayout::make(const FnoConfig& cfg) {
    cfg.validate();
    const std::size_t d = static_cast<std::size_t>(cfg.d);
    const std::size_t m = static_cast<std::size_t>(cfg.m);
    const std::size_t hw = static_cast<std::size_t>(cfg.head_width);
    FnoLayout lay;
    lay.phi_scalars = 2 * m * m * d * d;
    std::size_t off = 0;
    auto add = [&](std::string name, std::size_t count) {
        const std::size_t at = off;
        lay.groups.push_back({std::move(name), at, count});
        off += count;
        return at;
    };
    lay.lift_w = add("lift.w", static_cast<std::size_t>(cfg.c_in) * d);
    lay.lift_b = add("lift.b", d);
    for (int l = 0; l < cfg.L; ++l) {
        const std::string p = "block" + std::to_string(l);
        Block blk;
        blk.phi_pos = add(p + ".phi_pos", lay.phi_scalars);
        blk.phi_neg = add(p + ".phi_neg", lay.phi_scalars);
        blk.w = add(p + ".w", d * d);
        blk.b = add(p + ".b", d);
        lay.blocks.push_back(blk);
    }
    lay.head_w1 = add("head.w1", hw * d);
    lay.head_b1 = add("head.b1", hw);
    lay.head_w2 = add("head.w2", hw);
    lay.head_b2 = add("head.b2", 1);
    lay.total = off;
    return lay;
}

FnoParams init_params(const FnoConfig& cfg, std::uint64_t seed) {
    const FnoLayout lay = FnoLayout::make(cfg);
    FnoParams p;
    p.config = cfg;
    p.flat.assign(lay.total, 0.0);
    Rng rng(seed);
    const double phi_scale = 1.0 / (static_cast<double>(cfg.d) * cfg.d);
    auto affine = [&](std::size_t off, std::size_t count, int fan_in) {
        const double b = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) p.flat[off + i] = rng.uniform(-b, b);
    };
    auto phi = [&](std::size_t off) {
        for (std::size_t i = 0; i < lay.phi_scalars; ++i)
            p.flat[off + i] = rng.uniform() * phi_scale;
    };
    const std::size_t d = static_cast<std::size_t>(cfg.d);
    affine(lay.lift_w, static_cast<std::size_t>(cfg.c_in) * d, cfg.c_in);
    affine(lay.lift_b, d, cfg.c_in);
    for (const auto& blk : lay.blocks) {
        phi(blk.phi_pos);
        phi(blk.phi_neg);
        affine(blk.w, d * d, cfg.d);
        affine(blk.b, d, cfg.d);
    }
    const std::size_t hw = static_cast<std::size_t>(cfg.head_width);
    affine(lay.head_w1, hw * d, cfg.d);
    affine(lay.head_b1, hw, cfg.d);
    affine(lay.head_w2, hw, cfg.head_width);
    affine(lay.head_b2, 1, cfg.head_width);
    return p;
}

ModeSet ModeSet::make(int h, int w, int m) {
    validate_grid(h, w);
    if (m < 1 || m > h / 2 || m > w / 2)
        throw ConfigError("fno: mode cutoff " + std::to_string(m) + " out of range for " +
                          std::to_string(h) + "x" + std::to_string(w));
    ModeSet ms;
    ms.h = h;
    ms.w = w;
    ms.m = m;
    ms.modes.resize(2 * static_cast<std::size_t>(m) * m);
    for (int corner = 0; corner < 2; ++corner)
        for (int r = 0; r < m; ++r)
            for (int ky = 0; ky < m; ++ky) {
                Mode& md = ms.modes[(static_cast<std::size_t>(corner) * m + r) * m + ky];
                md.kx = corner == 0 ? r : h - m + r;
                md.ky = ky;
            }
    // classify the ky = 0 column: each retained row either mirrors onto itself
    // (DC, and h/2 when m == h/2), onto another retained row, or onto +m,
    // which is outside the retained set.
    for (std::size_t idx = 0; idx < ms.modes.size(); ++idx) {
        Mode& md = ms.modes[idx];
        if (md.ky != 0) continue;
        const int mirror = (h - md.kx) % h;
        if (mirror == md.kx) {
            md.self = true;
        } else if (mirror < m) {
            md.pair = mirror * m;
        } else if (mirror >= h - m) {
            md.pair = (m + (mirror - (h - m))) * m;
        } else {
            md.excluded = true;
        }
    }
    return ms;
}

namespace {

// Hermitian projection of the ky = 0 modes of an all-mode vector block
// (2m^2 rows of d complex values): self-conjugate slots become real, pairs are
// conjugate-averaged, excluded rows zeroed. Applied to the forward outputs and
// to the backward T vectors (the adjoint of the forward projection composed
// with the real inverse transform reduces to the same map; see the tests).
template <class T>
void project_ky0(const ModeSet& ms, int d, std::complex<T>* vm) {
    for (std::size_t idx = 0; idx < ms.modes.size(); ++idx) {
        const auto& md = ms.modes[idx];
        if (md.ky != 0) continue;
        std::complex<T>* v = vm + idx * static_cast<std::size_t>(d);
        if (md.excluded) {
            std::fill(v, v + d, std::complex<T>(0));
        } else if (md.self) {
            for (int ch = 0; ch < d; ++ch) v[ch] = std::complex<T>(v[ch].real(), T(0));
        } else if (md.pair > static_cast<int>(idx)) {
            std::complex<T>* pv = vm + static_cast<std::size_t>(md.pair) * d;
            for (int ch = 0; ch < d; ++ch) {
                const std::complex<T> a = T(0.5) * (v[ch] + std::conj(pv[ch]));
                v[ch] = a;
                pv[ch] = std::conj(a);
            }
        }
    }
}

// Shared forward core: Y = idft(scatter(project(Phi . gather(dft(X))))).
// If save_modes is non-null it receives the raw gathered input modes (the
// tape the backward pass needs). shat/yhat: d half-spectra; ym: 2m^2 x d;
// sv: d.
template <class T>
void conv_forward(const ModeSet& ms, int d, const std::complex<T>* phi_pos,
                  const std::complex<T>* phi_neg, const T* X, T* Y, std::complex<T>* shat,
                  std::complex<T>* yhat, std::complex<T>* ym, std::complex<T>* sv,
                  std::complex<T>* save_modes) {
    const int h = ms.h, w = ms.w, cols = w / 2 + 1;
    const std::size_t spec = static_cast<std::size_t>(h) * cols;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t dd = static_cast<std::size_t>(d) * d;
    const std::size_t mm = static_cast<std::size_t>(ms.m) * ms.m;
    fft::forward(h, w, d, X, shat);
    for (std::size_t idx = 0; idx < 2 * mm; ++idx) {
        const auto& md = ms.modes[idx];
        const std::size_t off = static_cast<std::size_t>(md.kx) * cols + md.ky;
        for (int ch = 0; ch < d; ++ch) sv[ch] = shat[static_cast<std::size_t>(ch) * spec + off];
        if (save_modes) std::copy(sv, sv + d, save_modes + idx * d);
        std::complex<T>* yv = ym + idx * d;
        std::fill(yv, yv + d, std::complex<T>(0));
        const std::complex<T>* phi =
            idx < mm ? phi_pos + idx * dd : phi_neg + (idx - mm) * dd;
        kernels::cmatvec_acc(yv, phi, sv, static_cast<std::size_t>(d));
    }
    project_ky0(ms, d, ym);
    std::fill(yhat, yhat + static_cast<std::size_t>(d) * spec, std::complex<T>(0));
    for (std::size_t idx = 0; idx < 2 * mm; ++idx) {
        const auto& md = ms.modes[idx];
        const std::size_t off = static_cast<std::size_t>(md.kx) * cols + md.ky;
        for (int ch = 0; ch < d; ++ch) yhat[static_cast<std::size_t>(ch) * spec + off] = ym[idx * d + ch];
    }
    fft::inverse(h, w, d, yhat, Y);
    kernels::scal(Y, static_cast<T>(1.0 / static_cast<double>(plane)),
                  static_cast<std::size_t>(d) * plane);
}

// Backward core. dy holds the upstream gradient planes and is consumed
// (reused as the inverse-transform target). For each retained mode kappa with
// multiplicity c (2 off the ky=0/Nyquist columns, else 1):
//   dPhi(kappa) += (c/hw) * Ghat(kappa) . S(kappa)^H
//   T(kappa)     = Phi(kappa)^H . Ghat(kappa)
// followed by the same ky = 0 projection as the forward and the normalized
// inverse transform; the result is accumulated into dx_accum.
template <class T>
void conv_backward(const ModeSet& ms, int d, const std::complex<T>* phi_pos,
                   const std::complex<T>* phi_neg, const std::complex<T>* s_tape, T* dy,
                   T* dx_accum, std::complex<T>* gphi_pos, std::complex<T>* gphi_neg,
                   std::complex<T>* shat, std::complex<T>* yhat, std::complex<T>* tm,
                   std::complex<T>* gv) {
    const int h = ms.h, w = ms.w, cols = w / 2 + 1;
    const std::size_t spec = static_cast<std::size_t>(h) * cols;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t dd = static_cast<std::size_t>(d) * d;
    const std::size_t mm = static_cast<std::size_t>(ms.m) * ms.m;
    const double inv_hw = 1.0 / static_cast<double>(plane);
    fft::forward(h, w, d, dy, shat);
    for (std::size_t idx = 0; idx < 2 * mm; ++idx) {
        const auto& md = ms.modes[idx];
        std::complex<T>* tv = tm + idx * d;
        if (md.excluded) {
            // forward zeroed this row, so nothing flows through it
            std::fill(tv, tv + d, std::complex<T>(0));
            continue;
        }
        const std::size_t off = static_cast<std::size_t>(md.kx) * cols + md.ky;
        for (int ch = 0; ch < d; ++ch) {
            std::complex<T> g = shat[static_cast<std::size_t>(ch) * spec + off];
            // a self-conjugate slot carries a real-only degree of freedom
            if (md.self) g = std::complex<T>(g.real(), T(0));
            gv[ch] = g;
        }
        const std::complex<T>* phi =
            idx < mm ? phi_pos + idx * dd : phi_neg + (idx - mm) * dd;
        std::fill(tv, tv + d, std::complex<T>(0));
        kernels::cmatvec_adj_acc(tv, phi, gv, static_cast<std::size_t>(d));
        const T wgt = static_cast<T>((md.ky == 0 ? 1.0 : 2.0) * inv_hw);
        for (int ch = 0; ch < d; ++ch) gv[ch] *= wgt;
        std::complex<T>* gphi =
            idx < mm ? gphi_pos + idx * dd : gphi_neg + (idx - mm) * dd;
        kernels::couter_adj_acc(gphi, gv, s_tape + idx * d, static_cast<std::size_t>(d));
    }
    project_ky0(ms, d, tm);
    std::fill(yhat, yhat + static_cast<std::size_t>(d) * spec, std::complex<T>(0));
    for (std::size_t idx = 0; idx < 2 * mm; ++idx) {
        const auto& md = ms.modes[idx];
        const std::size_t off = static_cast<std::size_t>(md.kx) * cols + md.ky;
        for (int ch = 0; ch < d; ++ch) yhat[static_cast<std::size_t>(ch) * spec + off] = tm[idx * d + ch];
    }
    fft::inverse(h, w, d, yhat, dy);
    kernels::scal(dy, static_cast<T>(inv_hw), static_cast<std::size_t>(d) * plane);
    kernels::axpy(dx_accum, dy, T(1), static_cast<std::size_t>(d) * plane);
}

}  // namespace

void spectral_conv(int h, int w, int d, int m, const std::complex<double>* phi_pos,
                   const std::complex<double>* phi_neg, const double* X, double* Y) {
    if (d < 1) throw ConfigError("fno: channel count must be >= 1");
    const ModeSet ms = ModeSet::make(h, w, m);
    const std::size_t spec = static_cast<std::size_t>(h) * (w / 2 + 1);
    AVec<std::complex<double>> shat(static_cast<std::size_t>(d) * spec);
    AVec<std::complex<double>> yhat(static_cast<std::size_t>(d) * spec);
    AVec<std::complex<double>> ym(2 * static_cast<std::size_t>(m) * m * d);
    AVec<std::complex<double>> sv(static_cast<std::size_t>(d));
    conv_forward<double>(ms, d, phi_pos, phi_neg, X, Y, shat.data(), yhat.data(), ym.data(),
                         sv.data(), nullptr);
}

template <class T>
FnoNet<T>::FnoNet(const FnoConfig& cfg, int h, int w) : cfg_(cfg), h_(h), w_dim_(w) {
    cfg.validate_grid(h, w);
    cols_ = w / 2 + 1;
    plane_ = static_cast<std::size_t>(h) * w;
    layout_ = FnoLayout::make(cfg);
    mode_set_ = ModeSet::make(h, w, cfg.m);
    w_.assign(layout_.total, T(0));
}

template <class T>
void FnoNet<T>::set_params(const std::vector<double>& flat) {
    if (flat.size() != layout_.total)
        throw ConfigError("fno: got " + std::to_string(flat.size()) + " parameters, expected " +
                          std::to_string(layout_.total));
    for (std::size_t i = 0; i < flat.size(); ++i) w_[i] = static_cast<T>(flat[i]);
}

template <class T>
void FnoNet<T>::params_to_double(std::vector<double>& out) const {
    out.resize(w_.size());
    for (std::size_t i = 0; i < w_.size(); ++i) out[i] = static_cast<double>(w_[i]);
}

template <class T>
typename FnoNet<T>::Workspace FnoNet<T>::make_workspace() const {
    Workspace ws;
    const std::size_t P = plane_;
    const std::size_t d = static_cast<std::size_t>(cfg_.d);
    const std::size_t hd = static_cast<std::size_t>(cfg_.head_width);
    const std::size_t spec = static_cast<std::size_t>(h_) * cols_;
    const std::size_t nm = 2 * static_cast<std::size_t>(cfg_.m) * cfg_.m;
    ws.xin.assign(static_cast<std::size_t>(cfg_.c_in) * P, T(0));
    ws.x.resize(cfg_.L + 1);
    for (auto& v : ws.x) v.assign(d * P, T(0));
    ws.y_pre.resize(cfg_.L);
    for (auto& v : ws.y_pre) v.assign(d * P, T(0));
    ws.u1.assign(hd * P, T(0));
    ws.h1.assign(hd * P, T(0));
    ws.pred.assign(P, T(0));
    ws.shat.assign(d * spec, std::complex<T>(0));
    ws.yhat.assign(d * spec, std::complex<T>(0));
    ws.sm.resize(cfg_.L);
    for (auto& v : ws.sm) v.assign(nm * d, std::complex<T>(0));
    ws.yms.assign(nm * d, std::complex<T>(0));
    ws.sv.assign(d, std::complex<T>(0));
    ws.dx.assign(d * P, T(0));
    ws.dtmp.assign(d * P, T(0));
    ws.du1.assign(hd * P, T(0));
    ws.wt.assign(std::max(d * d, d * hd), T(0));
    ws.diff.assign(P, T(0));
    return ws;
}

template <class T>
void FnoNet<T>::spectral_forward(int block, const T* x_in, T* y_out, Workspace& ws) const {
    const auto& blk = layout_.blocks[block];
    const auto* phi_pos = reinterpret_cast<const std::complex<T>*>(w_.data() + blk.phi_pos);
    const auto* phi_neg = reinterpret_cast<const std::complex<T>*>(w_.data() + blk.phi_neg);
    conv_forward<T>(mode_set_, cfg_.d, phi_pos, phi_neg, x_in, y_out, ws.shat.data(),
                    ws.yhat.data(), ws.yms.data(), ws.sv.data(), ws.sm[block].data());
}

template <class T>
void FnoNet<T>::spectral_backward(int block, T* dy, T* dx_accum, T* grad, Workspace& ws) const {
    const auto& blk = layout_.blocks[block];
    const auto* phi_pos = reinterpret_cast<const std::complex<T>*>(w_.data() + blk.phi_pos);
    const auto* phi_neg = reinterpret_cast<const std::complex<T>*>(w_.data() + blk.phi_neg);
    auto* gphi_pos = reinterpret_cast<std::complex<T>*>(grad + blk.phi_pos);
    auto* gphi_neg = reinterpret_cast<std::complex<T>*>(grad + blk.phi_neg);
    conv_backward<T>(mode_set_, cfg_.d, phi_pos, phi_neg, ws.sm[block].data(), dy, dx_accum,
                     gphi_pos, gphi_neg, ws.shat.data(), ws.yhat.data(), ws.yms.data(),
                     ws.sv.data());
}

template <class T>
void FnoNet<T>::run_forward(const T* planes, Workspace& ws) const {
    const std::size_t P = plane_;
    const std::size_t d = static_cast<std::size_t>(cfg_.d);
    const std::size_t hd = static_cast<std::size_t>(cfg_.head_width);
    kernels::channel_mix(ws.x[0].data(), planes, w_.data() + layout_.lift_w,
                         w_.data() + layout_.lift_b, d, static_cast<std::size_t>(cfg_.c_in), P,
                         false);
    for (int l = 0; l < cfg_.L; ++l) {
        const auto& blk = layout_.blocks[l];
        spectral_forward(l, ws.x[l].data(), ws.y_pre[l].data(), ws);
        kernels::channel_mix(ws.y_pre[l].data(), ws.x[l].data(), w_.data() + blk.w,
                             w_.data() + blk.b, d, d, P, true);
        if (l + 1 < cfg_.L)
            kernels::gelu(ws.x[l + 1].data(), ws.y_pre[l].data(), d * P);
        else  // no activation after the final block
            std::copy(ws.y_pre[l].begin(), ws.y_pre[l].end(), ws.x[l + 1].begin());
    }
    kernels::channel_mix(ws.u1.data(), ws.x[cfg_.L].data(), w_.data() + layout_.head_w1,
                         w_.data() + layout_.head_b1, hd, d, P, false);
    kernels::gelu(ws.h1.data(), ws.u1.data(), hd * P);
    kernels::channel_mix(ws.pred.data(), ws.h1.data(), w_.data() + layout_.head_w2,
                         w_.data() + layout_.head_b2, 1, hd, P, false);
}

template <class T>
void FnoNet<T>::forward(const T* planes, T* out, Workspace& ws) const {
    run_forward(planes, ws);
    std::copy(ws.pred.begin(), ws.pred.end(), out);
}

template <class T>
void FnoNet<T>::forward_backward(const T* planes, const float* target, T scale, T* grad,
                                 Workspace& ws, double* sumsq) const {
    const std::size_t P = plane_;
    const std::size_t d = static_cast<std::size_t>(cfg_.d);
    const std::size_t hd = static_cast<std::size_t>(cfg_.head_width);
    run_forward(planes, ws);
    for (std::size_t i = 0; i < P; ++i) ws.diff[i] = ws.pred[i] - static_cast<T>(target[i]);
    *sumsq += static_cast<double>(kernels::sumsq(ws.diff.data(), P));
    // head
    kernels::scal(ws.diff.data(), T(2) * scale, P);  // d(loss)/d(pred)
    kernels::mix_outer_acc(grad + layout_.head_w2, ws.diff.data(), ws.h1.data(), 1, hd, P);
    kernels::row_sum_acc(grad + layout_.head_b2, ws.diff.data(), 1, P);
    kernels::channel_mix(ws.du1.data(), ws.diff.data(), w_.data() + layout_.head_w2, nullptr,
                         hd, 1, P, false);
    kernels::gelu_grad(ws.du1.data(), ws.u1.data(), ws.du1.data(), hd * P);
    kernels::mix_outer_acc(grad + layout_.head_w1, ws.du1.data(), ws.x[cfg_.L].data(), hd, d, P);
    kernels::row_sum_acc(grad + layout_.head_b1, ws.du1.data(), hd, P);
    const T* w1 = w_.data() + layout_.head_w1;
    for (std::size_t o = 0; o < hd; ++o)
        for (std::size_t i = 0; i < d; ++i) ws.wt[i * hd + o] = w1[o * d + i];
    kernels::channel_mix(ws.dx.data(), ws.du1.data(), ws.wt.data(), nullptr, d, hd, P, false);
    // blocks, in reverse
    for (int l = cfg_.L - 1; l >= 0; --l) {
        const auto& blk = layout_.blocks[l];
        if (l + 1 < cfg_.L)
            kernels::gelu_grad(ws.dx.data(), ws.y_pre[l].data(), ws.dx.data(), d * P);
        kernels::mix_outer_acc(grad + blk.w, ws.dx.data(), ws.x[l].data(), d, d, P);
        kernels::row_sum_acc(grad + blk.b, ws.dx.data(), d, P);
        const T* wl = w_.data() + blk.w;
        for (std::size_t o = 0; o < d; ++o)
            for (std::size_t i = 0; i < d; ++i) ws.wt[i * d + o] = wl[o * d + i];
        kernels::channel_mix(ws.dtmp.data(), ws.dx.data(), ws.wt.data(), nullptr, d, d, P,
                             false);
        spectral_backward(l, ws.dx.data(), ws.dtmp.data(), grad, ws);
        std::swap(ws.dx, ws.dtmp);
    }
    // lift
    kernels::mix_outer_acc(grad + layout_.lift_w, ws.dx.data(), planes, d,
                           static_cast<std::size_t>(cfg_.c_in), P);
    kernels::row_sum_acc(grad + layout_.lift_b, ws.dx.data(), d, P);
}

template class FnoNet<float>;
template class FnoNet<double>;

RealField forward_raw(const FnoParams& params, const ChannelStack& stack) {
    if (stack.c != params.config.c_in)
        throw ConfigError("fno: stack has " + std::to_string(stack.c) + " channels, expected " +
                          std::to_string(params.config.c_in));
    FnoNet<double> net(params.config, stack.h, stack.w);
    net.set_params(params.flat);
    auto ws = net.make_workspace();
    RealField out(stack.h, stack.w);
    net.forward(stack.values.data(), out.values.data(), ws);
    return out;
}

RealField forward(const FnoParams& params, const ChannelStack& stack,
                  const NormalizationReferences& refs) {
    return forward_raw(params, normalize_stack(stack, refs));
}

}  // namespace fnolab
