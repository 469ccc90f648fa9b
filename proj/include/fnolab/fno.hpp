#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "fnolab/field.hpp"
#include "fnolab/normalize.hpp"

namespace fnolab {

inline constexpr const char* kActivationId = "gelu-tanh";

struct FnoConfig {
    int c_in = kNumChannels;  // 7
    int d = 16;               // embedding dimension
    int m = 8;                // mode cutoff per axis and corner
    int L = 4;                // spectral blocks
    int head_width = 128;     // projection head hidden width
    std::string activation = kActivationId;

    void validate() const;                    // structural checks
    void validate_grid(int h, int w) const;   // Nyquist: m <= min(h/2, w/2)
    std::string model_id() const;             // "fno-d{d}-m{m}"
};

// L*(4 d^2 m^2 + d^2 + d) + (c_in*d + d) + (d*head + head) + (head + 1)
std::int64_t param_count(const FnoConfig& cfg);

// Offsets into the flat parameter vector. The traversal order here is the
// checkpoint serialization order and the init_params draw order:
// lifting W,b; per block Phi_pos, Phi_neg (modes row-major, each a d x d
// row-major complex matrix, re/im interleaved), W, b; head W1,b1,W2,b2.
struct FnoLayout {
    struct Group {
        std::string name;
        std::size_t offset = 0, count = 0;
    };
    struct Block {
        std::size_t phi_pos = 0, phi_neg = 0, w = 0, b = 0;
    };

    std::size_t total = 0;
    std::size_t lift_w = 0, lift_b = 0;
    std::vector<Block> blocks;
    std::size_t head_w1 = 0, head_b1 = 0, head_w2 = 0, head_b2 = 0;
    std::size_t phi_scalars = 0;  // per corner block: 2 * m^2 * d^2
    std::vector<Group> groups;    // traversal order, contiguous cover of [0, total)

    static FnoLayout make(const FnoConfig& cfg);
};

struct FnoParams {
    FnoConfig config;
    std::vector<double> flat;  // canonical 64-bit master copy, layout order
};

// Affine weights and biases ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)); Phi real and
// imaginary parts ~ U(0,1)/d^2. Scalars are drawn in layout order.
FnoParams init_params(const FnoConfig& cfg, std::uint64_t seed);

// Mode bookkeeping for one (h, w, m): grid coordinates of the retained corner
// modes, in tape order (Phi_pos corner row-major, then Phi_neg corner).
// ky = 0 needs care: the retained signed-kx set {-m..m-1} is asymmetric, so
// realness of the output forces a Hermitian projection of that column, and the
// kx = h-m row (whose mirror +m is not retained) must stay inert there or the
// output would leak energy outside the retained set.
struct ModeSet {
    struct Mode {
        int kx = 0, ky = 0;     // half-spectrum grid coordinates
        int pair = -1;          // index of the ky=0 conjugate partner, if any
        bool self = false;      // ky==0 && kx is its own mirror (DC or h/2)
        bool excluded = false;  // ky==0 && mirror row not retained
    };
    int h = 0, w = 0, m = 0;
    std::vector<Mode> modes;  // 2*m*m entries

    static ModeSet make(int h, int w, int m);
};

// One spectral convolution on d planes (test/reference entry point; the
// training engine uses the same core). phi_pos/phi_neg hold m*m d x d complex
// matrices in mode order. X and Y are d planes of h*w.
void spectral_conv(int h, int w, int d, int m, const std::complex<double>* phi_pos,
                   const std::complex<double>* phi_neg, const double* X, double* Y);

// Full-precision reference forward: normalize -> lift -> blocks -> head.
RealField forward(const FnoParams& params, const ChannelStack& stack,
                  const NormalizationReferences& refs);

// Raw-network probe used by tests: stack must already be normalized (or be a
// deliberate probe); c_in planes in, h x w field out.
RealField forward_raw(const FnoParams& params, const ChannelStack& stack);

// ---- training/evaluation engine ----

// Network bound to one grid and precision. Parameters live in a flat AVec<T>
// congruent with FnoLayout; gradients and Adam moments reuse the same layout.
template <class T>
class FnoNet {
public:
    FnoNet(const FnoConfig& cfg, int h, int w);

    void set_params(const std::vector<double>& flat);
    void params_to_double(std::vector<double>& out) const;  // widening copy
    AVec<T>& params() { return w_; }
    const AVec<T>& params() const { return w_; }
    const FnoLayout& layout() const { return layout_; }
    const FnoConfig& config() const { return cfg_; }
    int h() const { return h_; }
    int w() const { return w_dim_; }
    std::size_t plane() const { return plane_; }

    // All per-example scratch, reused across calls; one per worker thread.
    struct Workspace {
        AVec<T> xin;                 // c_in planes (normalized input)
        std::vector<AVec<T>> x;      // L+1 latent fields, d planes each
        std::vector<AVec<T>> y_pre;  // L pre-activations, d planes each
        AVec<T> u1, h1;              // head hidden pre/post activation
        AVec<T> pred;                // final field
        AVec<std::complex<T>> shat, yhat;       // d x h x (w/2+1) spectra
        std::vector<AVec<std::complex<T>>> sm;  // L tapes of gathered modes (2m^2*d)
        AVec<std::complex<T>> yms;              // all-mode work vector (2m^2*d)
        AVec<std::complex<T>> sv;               // single d-vector
        AVec<T> dx, dtmp, du1, wt;              // backward scratch
        AVec<T> diff;                           // pred - target
    };
    Workspace make_workspace() const;

    // planes: c_in normalized planes; out: one plane.
    void forward(const T* planes, T* out, Workspace& ws) const;

    // Accumulates dLoss/dparams into grad (layout-congruent) for the term
    // |pred - target|^2 * scale (caller passes scale = 1/(batch*plane) to
    // realize the batch-mean MSE); adds |pred - target|^2 to *sumsq.
    void forward_backward(const T* planes, const float* target, T scale, T* grad,
                          Workspace& ws, double* sumsq) const;

private:
    void run_forward(const T* planes, Workspace& ws) const;
    void spectral_forward(int block, const T* x_in, T* y_out, Workspace& ws) const;
    // dy is consumed (reused as transform scratch); the spectral input
    // gradient is accumulated into dx_accum and dPhi into grad.
    void spectral_backward(int block, T* dy, T* dx_accum, T* grad, Workspace& ws) const;

    FnoConfig cfg_;
    int h_ = 0, w_dim_ = 0, cols_ = 0;
    std::size_t plane_ = 0;
    FnoLayout layout_;
    ModeSet mode_set_;
    AVec<T> w_;
};

extern template class FnoNet<float>;
extern template class FnoNet<double>;

}  // namespace fnolab
