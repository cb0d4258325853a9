// SPDX-License-Identifier: Apache-2.0
//
// Layer modules over the autodiff graph. Modules own persistent parameters;
// operator() builds the forward computation for one batch.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "satsem/nn/graph.hpp"
#include "satsem/rng.hpp"

namespace satsem::nn {

template <typename S>
using ParamList = std::vector<Param<S>*>;

template <typename S>
void init_normal(Param<S>& p, int rows, int cols, Rng& rng, double stddev) {
    p.value.resize(rows, cols);
    for (Eigen::Index i = 0; i < p.value.rows(); ++i)
        for (Eigen::Index j = 0; j < p.value.cols(); ++j)
            p.value(i, j) = S(rng.normal(0.0, stddev));
}

template <typename S>
void init_const(Param<S>& p, int rows, int cols, S v) {
    p.value = Mat<S>::Constant(rows, cols, v);
}

template <typename S>
struct Linear {
    Param<S> w, b;
    bool has_bias = true;

    // stddev < 0 selects the Xavier/Glorot scale sqrt(2/(in+out)).
    void init(const std::string& name, int in, int out, Rng& rng, double stddev = -1.0,
              bool zero = false) {
        w.name = name + ".w";
        b.name = name + ".b";
        if (stddev < 0.0) stddev = std::sqrt(2.0 / (in + out));
        if (zero)
            init_const(w, in, out, S(0));
        else
            init_normal(w, in, out, rng, stddev);
        init_const(b, 1, out, S(0));
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x) {
        return g.linear(x, g.param(w), has_bias ? g.param(b) : nullptr);
    }

    void collect(ParamList<S>& out) {
        out.push_back(&w);
        if (has_bias) out.push_back(&b);
    }
};

template <typename S>
struct LayerNorm {
    Param<S> gain, bias;

    void init(const std::string& name, int dim) {
        gain.name = name + ".gain";
        bias.name = name + ".bias";
        init_const(gain, 1, dim, S(1));
        init_const(bias, 1, dim, S(0));
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x) {
        return g.layernorm(x, g.param(gain), g.param(bias));
    }

    void collect(ParamList<S>& out) {
        out.push_back(&gain);
        out.push_back(&bias);
    }
};

// Two-layer MLP with GELU. The output projection may be zero-initialized so a
// residual block starts as the identity.
template <typename S>
struct Mlp {
    Linear<S> fc1, fc2;

    void init(const std::string& name, int in, int hidden, int out, Rng& rng,
              bool zero_out = false) {
        fc1.init(name + ".fc1", in, hidden, rng);
        fc2.init(name + ".fc2", hidden, out, rng, -1.0, zero_out);
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x) { return fc2(g, g.gelu(fc1(g, x))); }

    void collect(ParamList<S>& out) {
        fc1.collect(out);
        fc2.collect(out);
    }
};

// ---------------------------------------------------------------------------
// Window partition plan for (shifted) window attention on a B x Hp x Wp token
// grid. Precomputes the gather permutations, the relative-position bias index
// map, and the per-window additive masks that forbid attention across
// pre-shift window boundaries.
struct WindowPlan {
    std::shared_ptr<std::vector<int>> perm;      // natural rows -> window-major rows
    std::shared_ptr<std::vector<int>> inv_perm;  // inverse gather
    std::shared_ptr<std::vector<int>> bias_index;
    int n_windows = 0;  // per image
    int p_w = 0;
};

template <typename S>
struct WindowPlanSet {
    WindowPlan plan;
    std::vector<Mat<S>> masks;  // per window class; empty matrix = no mask
};

template <typename S>
WindowPlanSet<S> make_window_plan(int batch, int hp, int wp, int wh, int ww, bool shift,
                                  S mask_value = S(-100)) {
    require(hp % wh == 0 && wp % ww == 0, "window plan: grid not divisible by window");
    const int sh = shift ? wh / 2 : 0;
    const int sw = shift ? ww / 2 : 0;
    const int nwh = hp / wh, nww = wp / ww;
    const int n_windows = nwh * nww;
    const int p_w = wh * ww;
    const int p = hp * wp;

    WindowPlanSet<S> out;
    out.plan.n_windows = n_windows;
    out.plan.p_w = p_w;
    auto perm = std::make_shared<std::vector<int>>(std::size_t(batch) * p);
    auto inv = std::make_shared<std::vector<int>>(std::size_t(batch) * p);
    for (int b = 0; b < batch; ++b)
        for (int wy = 0; wy < nwh; ++wy)
            for (int wx = 0; wx < nww; ++wx)
                for (int ly = 0; ly < wh; ++ly)
                    for (int lx = 0; lx < ww; ++lx) {
                        const int si = wy * wh + ly, sj = wx * ww + lx;      // shifted coords
                        const int oi = (si + sh) % hp, oj = (sj + sw) % wp;  // original coords
                        const int win_major =
                            ((b * n_windows + wy * nww + wx) * p_w) + ly * ww + lx;
                        const int natural = b * p + oi * wp + oj;
                        (*perm)[win_major] = natural;
                        (*inv)[natural] = win_major;
                    }
    out.plan.perm = perm;
    out.plan.inv_perm = inv;

    auto bias_index = std::make_shared<std::vector<int>>(std::size_t(p_w) * p_w);
    for (int a = 0; a < p_w; ++a)
        for (int b2 = 0; b2 < p_w; ++b2) {
            const int ai = a / ww, aj = a % ww, bi = b2 / ww, bj = b2 % ww;
            (*bias_index)[a * p_w + b2] = (ai - bi + wh - 1) * (2 * ww - 1) + (aj - bj + ww - 1);
        }
    out.plan.bias_index = bias_index;

    if (shift) {
        out.masks.resize(n_windows);
        for (int w = 0; w < n_windows; ++w) {
            const int wy = w / nww, wx = w % nww;
            std::vector<int> owner(p_w);
            bool mixed = false;
            for (int l = 0; l < p_w; ++l) {
                const int si = wy * wh + l / ww, sj = wx * ww + l % ww;
                const int oi = (si + sh) % hp, oj = (sj + sw) % wp;
                owner[l] = (oi / wh) * nww + (oj / ww);  // pre-shift window id
                if (owner[l] != owner[0]) mixed = true;
            }
            if (!mixed) continue;
            Mat<S> m = Mat<S>::Zero(p_w, p_w);
            for (int a = 0; a < p_w; ++a)
                for (int b2 = 0; b2 < p_w; ++b2)
                    if (owner[a] != owner[b2]) m(a, b2) = mask_value;
            out.masks[w] = std::move(m);
        }
    }
    return out;
}

// Relative-position bias table size for a wh x ww window.
inline int bias_table_size(int wh, int ww) { return (2 * wh - 1) * (2 * ww - 1); }

// ---------------------------------------------------------------------------
// Multi-head (shifted-)window self-attention with relative-position bias.
template <typename S>
struct WindowAttention {
    Linear<S> qkv, proj;
    Param<S> bias_table;  // heads x (2wh-1)(2ww-1), zero initialized
    int dim = 0, heads = 0, wh = 0, ww = 0;

    void init(const std::string& name, int d, int n_heads, int wh_, int ww_, Rng& rng) {
        require(d % n_heads == 0, "WindowAttention: dim not divisible by heads");
        dim = d;
        heads = n_heads;
        wh = wh_;
        ww = ww_;
        qkv.init(name + ".qkv", d, 3 * d, rng);
        proj.init(name + ".proj", d, d, rng);
        bias_table.name = name + ".bias_table";
        init_const(bias_table, n_heads, bias_table_size(wh_, ww_), S(0));
    }

    // x rows: (b, i, j) natural order. Returns the same layout.
    Node<S>* operator()(Graph<S>& g, Node<S>* x, int batch, int hp, int wp, bool shift,
                        std::vector<Mat<S>>* capture_probs = nullptr) {
        auto key = std::make_tuple(batch, hp, wp, shift);
        auto it = plans_.find(key);
        if (it == plans_.end())
            it = plans_.emplace(key, make_window_plan<S>(batch, hp, wp, wh, ww, shift)).first;
        const WindowPlanSet<S>& ps = it->second;

        Node<S>* xw = g.gather_rows(x, ps.plan.perm);
        Node<S>* qkv_out = qkv(g, xw);
        Node<S>* q = g.slice_cols(qkv_out, 0, dim);
        Node<S>* k = g.slice_cols(qkv_out, dim, dim);
        Node<S>* v = g.slice_cols(qkv_out, 2 * dim, dim);

        AttentionSpec<S> spec;
        spec.groups = batch * ps.plan.n_windows;
        spec.pq = spec.pkv = ps.plan.p_w;
        spec.heads = heads;
        spec.head_dim = dim / heads;
        spec.bias_index = ps.plan.bias_index.get();
        if (!ps.masks.empty()) {
            spec.masks = &ps.masks;
            spec.mask_period = ps.plan.n_windows;
        }
        spec.capture_probs = capture_probs;

        Node<S>* attn = g.attention(q, k, v, g.param(bias_table), spec);
        Node<S>* projected = proj(g, attn);
        return g.gather_rows(projected, ps.plan.inv_perm);
    }

    void collect(ParamList<S>& out) {
        qkv.collect(out);
        proj.collect(out);
        out.push_back(&bias_table);
    }

private:
    std::map<std::tuple<int, int, int, bool>, WindowPlanSet<S>> plans_;
};

// Bottleneck pointwise-depthwise-pointwise convolutional branch.
template <typename S>
struct ConvBranch {
    Linear<S> pw1, pw2;
    Param<S> dw_kernel, dw_bias;
    int dim = 0, reduced = 0;

    void init(const std::string& name, int d, int reduction, Rng& rng) {
        require(d % reduction == 0, "ConvBranch: dim not divisible by reduction");
        dim = d;
        reduced = d / reduction;
        pw1.init(name + ".pw1", d, reduced, rng);
        pw2.init(name + ".pw2", reduced, d, rng);
        dw_kernel.name = name + ".dw.kernel";
        dw_bias.name = name + ".dw.bias";
        init_normal(dw_kernel, 9, reduced, rng, 1.0 / 3.0);
        init_const(dw_bias, 1, reduced, S(0));
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x, int batch, int hp, int wp) {
        Node<S>* y = g.gelu(pw1(g, x));
        y = g.gelu(g.depthwise3x3(y, g.param(dw_kernel), g.param(dw_bias), batch, hp, wp));
        return pw2(g, y);
    }

    void collect(ParamList<S>& out) {
        pw1.collect(out);
        pw2.collect(out);
        out.push_back(&dw_kernel);
        out.push_back(&dw_bias);
    }
};

// Hybrid block: window attention and bottleneck CNN branches on the
// LN-normalized input, concatenated and fused into the residual, followed by
// an MLP sublayer. With the fusion and MLP output projections zero-initialized
// the block is exactly the identity.
template <typename S>
struct HstcBlock {
    LayerNorm<S> ln1, ln2;
    WindowAttention<S> attn;
    ConvBranch<S> conv;
    Linear<S> fuse;
    Mlp<S> mlp;
    bool shift = false;

    void init(const std::string& name, int d, int heads, int wh, int ww, int mlp_hidden,
              int conv_reduction, bool shift_, Rng& rng, bool identity_init = true) {
        shift = shift_;
        ln1.init(name + ".ln1", d);
        ln2.init(name + ".ln2", d);
        attn.init(name + ".attn", d, heads, wh, ww, rng);
        conv.init(name + ".conv", d, conv_reduction, rng);
        fuse.init(name + ".fuse", 2 * d, d, rng, -1.0, identity_init);
        mlp.init(name + ".mlp", d, mlp_hidden, d, rng, identity_init);
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x, int batch, int hp, int wp,
                        std::vector<Mat<S>>* capture_probs = nullptr) {
        Node<S>* xb = ln1(g, x);
        Node<S>* a = attn(g, xb, batch, hp, wp, shift, capture_probs);
        Node<S>* c = conv(g, xb, batch, hp, wp);
        Node<S>* fused = fuse(g, g.concat_cols({a, c}));
        Node<S>* mid = g.add(x, fused);
        return g.add(mid, mlp(g, ln2(g, mid)));
    }

    void collect(ParamList<S>& out) {
        ln1.collect(out);
        ln2.collect(out);
        attn.collect(out);
        conv.collect(out);
        fuse.collect(out);
        mlp.collect(out);
    }
};

// ---------------------------------------------------------------------------
// Global multi-head self-attention within consecutive row groups.
template <typename S>
struct SelfAttention {
    Linear<S> qkv, proj;
    int dim = 0, heads = 0;

    void init(const std::string& name, int d, int n_heads, Rng& rng) {
        require(d % n_heads == 0, "SelfAttention: dim not divisible by heads");
        dim = d;
        heads = n_heads;
        qkv.init(name + ".qkv", d, 3 * d, rng);
        proj.init(name + ".proj", d, d, rng);
    }

    // groups row-blocks of `tokens` rows each; full attention within a block.
    Node<S>* operator()(Graph<S>& g, Node<S>* x, int groups, int tokens,
                        std::vector<Mat<S>>* capture_probs = nullptr) {
        Node<S>* qkv_out = qkv(g, x);
        AttentionSpec<S> spec;
        spec.groups = groups;
        spec.pq = spec.pkv = tokens;
        spec.heads = heads;
        spec.head_dim = dim / heads;
        spec.capture_probs = capture_probs;
        Node<S>* attn = g.attention(g.slice_cols(qkv_out, 0, dim), g.slice_cols(qkv_out, dim, dim),
                                    g.slice_cols(qkv_out, 2 * dim, dim), nullptr, spec);
        return proj(g, attn);
    }

    void collect(ParamList<S>& out) {
        qkv.collect(out);
        proj.collect(out);
    }
};

// Post-LN Transformer block: y = LN1(x + MHSA(x)); out = LN2(y + MLP(y)).
template <typename S>
struct TransformerBlock {
    SelfAttention<S> attn;
    Mlp<S> mlp;
    LayerNorm<S> ln1, ln2;

    void init(const std::string& name, int d, int heads, int ffn, Rng& rng) {
        attn.init(name + ".attn", d, heads, rng);
        mlp.init(name + ".mlp", d, ffn, d, rng);
        ln1.init(name + ".ln1", d);
        ln2.init(name + ".ln2", d);
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x, int groups, int tokens,
                        std::vector<Mat<S>>* capture_probs = nullptr) {
        Node<S>* y = ln1(g, g.add(x, attn(g, x, groups, tokens, capture_probs)));
        return ln2(g, g.add(y, mlp(g, y)));
    }

    void collect(ParamList<S>& out) {
        attn.collect(out);
        mlp.collect(out);
        ln1.collect(out);
        ln2.collect(out);
    }
};

// Pre-LN Transformer block: x += MHSA(LN1(x)); x += FFN(LN2(x)).
template <typename S>
struct PreLnBlock {
    SelfAttention<S> attn;
    Mlp<S> mlp;
    LayerNorm<S> ln1, ln2;

    void init(const std::string& name, int d, int heads, int ffn, Rng& rng) {
        attn.init(name + ".attn", d, heads, rng);
        mlp.init(name + ".mlp", d, ffn, d, rng);
        ln1.init(name + ".ln1", d);
        ln2.init(name + ".ln2", d);
    }

    Node<S>* operator()(Graph<S>& g, Node<S>* x, int groups, int tokens) {
        Node<S>* y = g.add(x, attn(g, ln1(g, x), groups, tokens));
        return g.add(y, mlp(g, ln2(g, y)));
    }

    void collect(ParamList<S>& out) {
        attn.collect(out);
        mlp.collect(out);
        ln1.collect(out);
        ln2.collect(out);
    }
};

// Set-attention pooling with a learnable seed query:
//   u~ = MHA(q_seed, H, H); u- = LN1(q_seed + u~); u = LN2(u- + FFN(u-)).
template <typename S>
struct AttentionPool {
    Param<S> seed;  // 1 x d
    Linear<S> wq, wk, wv, proj;
    Mlp<S> ffn;
    LayerNorm<S> ln1, ln2;
    int dim = 0, heads = 0;

    void init(const std::string& name, int d, int n_heads, int ffn_width, Rng& rng) {
        dim = d;
        heads = n_heads;
        seed.name = name + ".seed";
        init_normal(seed, 1, d, rng, 0.02);
        wq.init(name + ".wq", d, d, rng);
        wk.init(name + ".wk", d, d, rng);
        wv.init(name + ".wv", d, d, rng);
        proj.init(name + ".proj", d, d, rng);
        ffn.init(name + ".ffn", d, ffn_width, d, rng);
        ln1.init(name + ".ln1", d);
        ln2.init(name + ".ln2", d);
    }

    // x: (groups*tokens) x d  ->  (groups) x d
    Node<S>* operator()(Graph<S>& g, Node<S>* x, int groups, int tokens) {
        auto idx = std::make_shared<std::vector<int>>(groups, 0);
        Node<S>* q_seed = g.gather_rows(g.param(seed), idx);  // groups x d
        AttentionSpec<S> spec;
        spec.groups = groups;
        spec.pq = 1;
        spec.pkv = tokens;
        spec.heads = heads;
        spec.head_dim = dim / heads;
        Node<S>* pooled =
            proj(g, g.attention(wq(g, q_seed), wk(g, x), wv(g, x), nullptr, spec));
        Node<S>* u = ln1(g, g.add(q_seed, pooled));
        return ln2(g, g.add(u, ffn(g, u)));
    }

    void collect(ParamList<S>& out) {
        out.push_back(&seed);
        wq.collect(out);
        wk.collect(out);
        wv.collect(out);
        proj.collect(out);
        ffn.collect(out);
        ln1.collect(out);
        ln2.collect(out);
    }
};

}  // namespace satsem::nn
