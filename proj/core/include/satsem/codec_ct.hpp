// SPDX-License-Identifier: Apache-2.0
//
// Coherent-mode semantic codec: symmetric hierarchical encoder/decoder built
// from HSTC blocks with one 2x2 patch-merging step, a power-normalized complex
// symbol head, and decoder conditioning on the equalization feature vector.
#pragma once

#include <map>

#include "satsem/codec_common.hpp"
#include "satsem/nn/modules.hpp"

namespace satsem::codec {

struct CodecConfigCT {
    int p1 = 4, p2 = 4;
    int d1 = 128, d2 = 256;
    int depth_enc1 = 4, depth_enc2 = 4, depth_dec2 = 4, depth_dec1 = 4;
    int window_h = 4, window_w = 4;
    int heads1 = 8, heads2 = 16;
    int mlp_hidden1 = 384, mlp_hidden2 = 768;
    int conv_reduction = 4;
    int image_h = 32, image_w = 32;
    int symbol_length = 128;  // L

    int grid_h() const { return image_h / p1; }
    int grid_w() const { return image_w / p2; }
    int tokens_stage1() const { return grid_h() * grid_w(); }     // P1
    int tokens_stage2() const { return tokens_stage1() / 4; }     // P2
    int head_width() const { return 2 * symbol_length / tokens_stage2(); }
    double compression_ratio() const {
        return 3.0 * image_h * image_w / double(symbol_length);
    }

    void validate() const {
        require(image_h % (p1 * 2) == 0 && image_w % (p2 * 2) == 0,
                "ct config: image dims must be divisible by 2*patch");
        require(d1 % heads1 == 0 && d2 % heads2 == 0, "ct config: dims not divisible by heads");
        require(grid_h() % window_h == 0 && grid_w() % window_w == 0,
                "ct config: stage-1 grid not divisible by window");
        require((grid_h() / 2) % window_h == 0 && (grid_w() / 2) % window_w == 0,
                "ct config: stage-2 grid not divisible by window");
        require((2 * symbol_length) % tokens_stage2() == 0,
                "ct config: 2L must be divisible by P2");
        require(tokens_stage2() % 2 == 0, "ct config: P2 must be even for complex packing");
        require(symbol_length % tokens_stage2() == 0 || head_width() % 2 == 0,
                "ct config: unsupported head width");
    }
};

template <typename S>
struct CtCodec {
    CodecConfigCT cfg;

    nn::Linear<S> embed;
    nn::LayerNorm<S> embed_ln;
    std::vector<nn::HstcBlock<S>> enc1, enc2;
    nn::LayerNorm<S> merge_ln;
    nn::Linear<S> merge_fc;
    nn::Linear<S> head;

    nn::LayerNorm<S> delta_ln;
    nn::Linear<S> dec_in;
    std::vector<nn::HstcBlock<S>> dec2, dec1;
    nn::Linear<S> expand_fc;
    nn::LayerNorm<S> expand_ln;
    nn::Linear<S> rec;

    void init(const CodecConfigCT& c, Rng& rng, bool identity_init = true) {
        cfg = c;
        cfg.validate();
        embed.init("ct.embed", 3 * cfg.p1 * cfg.p2, cfg.d1, rng);
        embed_ln.init("ct.embed_ln", cfg.d1);
        auto make_stage = [&](std::vector<nn::HstcBlock<S>>& stage, const std::string& name,
                              int depth, int d, int heads, int mlp_hidden) {
            stage.resize(depth);
            for (int i = 0; i < depth; ++i)
                stage[i].init(name + std::to_string(i), d, heads, cfg.window_h, cfg.window_w,
                              mlp_hidden, cfg.conv_reduction, i % 2 == 1, rng, identity_init);
        };
        make_stage(enc1, "ct.enc1.", cfg.depth_enc1, cfg.d1, cfg.heads1, cfg.mlp_hidden1);
        make_stage(enc2, "ct.enc2.", cfg.depth_enc2, cfg.d2, cfg.heads2, cfg.mlp_hidden2);
        merge_ln.init("ct.merge_ln", 4 * cfg.d1);
        merge_fc.init("ct.merge_fc", 4 * cfg.d1, cfg.d2, rng);
        head.init("ct.head", cfg.d2, cfg.head_width(), rng);

        delta_ln.init("ct.delta_ln", 3);
        dec_in.init("ct.dec_in", cfg.head_width() + 3, cfg.d2, rng);
        make_stage(dec2, "ct.dec2.", cfg.depth_dec2, cfg.d2, cfg.heads2, cfg.mlp_hidden2);
        make_stage(dec1, "ct.dec1.", cfg.depth_dec1, cfg.d1, cfg.heads1, cfg.mlp_hidden1);
        expand_fc.init("ct.expand_fc", cfg.d2, 4 * cfg.d1, rng);
        expand_ln.init("ct.expand_ln", cfg.d1);
        rec.init("ct.rec", cfg.d1, 3 * cfg.p1 * cfg.p2, rng);
    }

    // tokens: (B*P1) x 3*p1*p2 -> unit-power packed symbols (B*P2) x head_width.
    nn::Node<S>* encode(nn::Graph<S>& g, nn::Node<S>* tokens, int batch) {
        const int hp = cfg.grid_h(), wp = cfg.grid_w();
        nn::Node<S>* x = embed_ln(g, embed(g, tokens));
        for (auto& blk : enc1) x = blk(g, x, batch, hp, wp);
        x = g.gather_rows(x, merge_perm(batch));
        x = g.reshape(x, Eigen::Index(batch) * cfg.tokens_stage2(), 4 * cfg.d1);
        x = merge_fc(g, merge_ln(g, x));
        for (auto& blk : enc2) x = blk(g, x, batch, hp / 2, wp / 2);
        x = head(g, x);
        return g.power_normalize(x, cfg.tokens_stage2());
    }

    // equalized: (B*P2) x head_width packed symbols; delta: B x 3.
    nn::Node<S>* decode(nn::Graph<S>& g, nn::Node<S>* equalized, nn::Node<S>* delta, int batch) {
        const int hp = cfg.grid_h(), wp = cfg.grid_w();
        nn::Node<S>* dln = delta_ln(g, delta);
        nn::Node<S>* dbc = g.gather_rows(dln, repeat_idx(batch));
        nn::Node<S>* x = dec_in(g, g.concat_cols({equalized, dbc}));
        for (auto& blk : dec2) x = blk(g, x, batch, hp / 2, wp / 2);
        x = expand_fc(g, x);
        x = g.reshape(x, Eigen::Index(batch) * cfg.tokens_stage1(), cfg.d1);
        x = expand_ln(g, g.gather_rows(x, expand_perm(batch)));
        for (auto& blk : dec1) x = blk(g, x, batch, hp, wp);
        return rec(g, x);
    }

    void collect(nn::ParamList<S>& out) {
        embed.collect(out);
        embed_ln.collect(out);
        for (auto& b : enc1) b.collect(out);
        merge_ln.collect(out);
        merge_fc.collect(out);
        for (auto& b : enc2) b.collect(out);
        head.collect(out);
        delta_ln.collect(out);
        dec_in.collect(out);
        for (auto& b : dec2) b.collect(out);
        expand_fc.collect(out);
        expand_ln.collect(out);
        for (auto& b : dec1) b.collect(out);
        rec.collect(out);
    }

    nn::ParamList<S> parameters() {
        nn::ParamList<S> out;
        collect(out);
        return out;
    }

private:
    IndexVec merge_perm(int batch) {
        auto& v = merge_cache_[batch];
        if (!v) v = make_merge_perm(batch, cfg.grid_h(), cfg.grid_w());
        return v;
    }
    IndexVec expand_perm(int batch) {
        auto& v = expand_cache_[batch];
        if (!v) v = make_expand_perm(batch, cfg.grid_h(), cfg.grid_w());
        return v;
    }
    IndexVec repeat_idx(int batch) {
        auto& v = repeat_cache_[batch];
        if (!v) v = make_repeat_index(batch, cfg.tokens_stage2());
        return v;
    }

    std::map<int, IndexVec> merge_cache_, expand_cache_, repeat_cache_;
};

}  // namespace satsem::codec
