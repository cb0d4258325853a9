// SPDX-License-Identifier: Apache-2.0
//
// Non-coherent-mode codec: width-wise stream partition, a parameter-shared
// Transformer encoder with a full-image positional table, a two-stage receiver
// (stream-wise extraction with a zero-gated raw-signal branch, then
// cross-stream decoding with global attention), and a block-diagonal ablation
// switch that decodes the streams independently.
#pragma once

#include <map>

#include "satsem/codec_common.hpp"
#include "satsem/nn/modules.hpp"

namespace satsem::codec {

struct CodecConfigNCT {
    int p1 = 4, p2 = 4;
    int d1 = 128;
    int ffn_width = 512;
    int heads = 8;
    int depth_enc = 8, depth_dec_sw = 4, depth_dec_cs = 4;
    int siam_hidden = 512;
    int s_k = 2;
    int n_r = 16;
    int image_h = 32, image_w = 32;
    int symbol_length = 128;  // L per satellite

    int grid_h() const { return image_h / p1; }
    int grid_w() const { return image_w / p2; }
    int sub_width() const { return image_w / s_k; }
    int grid_w_sub() const { return grid_w() / s_k; }
    int tokens_full() const { return grid_h() * grid_w(); }      // P1
    int tokens_sub() const { return tokens_full() / s_k; }       // P_sub
    int sym_width() const { return 2 * symbol_length / tokens_sub(); }
    int rx_width() const { return 2 * n_r * symbol_length / tokens_sub(); }
    int token_width() const { return sym_width() + rx_width() + 3; }  // d_tok

    void validate() const {
        require(image_h % p1 == 0 && image_w % p2 == 0, "nct config: image dims vs patch");
        require(image_w % (s_k * p2) == 0, "nct config: width must divide into s_k*p2");
        require(d1 % heads == 0, "nct config: d1 not divisible by heads");
        require((2 * symbol_length) % tokens_sub() == 0, "nct config: 2L vs P_sub");
        require((2 * n_r * symbol_length) % tokens_sub() == 0, "nct config: 2 N_R L vs P_sub");
        require(symbol_length % tokens_sub() == 0, "nct config: L must divide into P_sub chunks");
        require(tokens_sub() % 2 == 0, "nct config: P_sub must be even for complex packing");
    }
};

template <typename S>
struct NctCodec {
    CodecConfigNCT cfg;

    nn::Linear<S> embed;
    nn::LayerNorm<S> embed_ln;
    nn::Param<S> pos_table;  // P1 x d1, shared by encoder and stage-1 extractor
    std::vector<nn::TransformerBlock<S>> enc;
    nn::Linear<S> head;

    nn::LayerNorm<S> rx_ln;  // over the patchified raw received signal
    nn::Param<S> gate;       // zero-initialized scalar on the raw branch
    nn::LayerNorm<S> delta_ln;
    nn::Mlp<S> siam;         // shared input mapper d_tok -> d1
    std::vector<nn::TransformerBlock<S>> dec_sw;
    std::vector<nn::TransformerBlock<S>> dec_cs;
    nn::Linear<S> rec;

    void init(const CodecConfigNCT& c, Rng& rng) {
        cfg = c;
        cfg.validate();
        embed.init("nct.embed", 3 * cfg.p1 * cfg.p2, cfg.d1, rng);
        embed_ln.init("nct.embed_ln", cfg.d1);
        pos_table.name = "nct.pos_table";
        nn::init_normal(pos_table, cfg.tokens_full(), cfg.d1, rng, 0.02);
        enc.resize(cfg.depth_enc);
        for (int i = 0; i < cfg.depth_enc; ++i)
            enc[i].init("nct.enc." + std::to_string(i), cfg.d1, cfg.heads, cfg.ffn_width, rng);
        head.init("nct.head", cfg.d1, cfg.sym_width(), rng);

        rx_ln.init("nct.rx_ln", cfg.rx_width());
        gate.name = "nct.gate";
        nn::init_const(gate, 1, 1, S(0));
        delta_ln.init("nct.delta_ln", 3);
        siam.init("nct.siam", cfg.token_width(), cfg.siam_hidden, cfg.d1, rng);
        dec_sw.resize(cfg.depth_dec_sw);
        for (int i = 0; i < cfg.depth_dec_sw; ++i)
            dec_sw[i].init("nct.dec_sw." + std::to_string(i), cfg.d1, cfg.heads, cfg.ffn_width,
                           rng);
        dec_cs.resize(cfg.depth_dec_cs);
        for (int i = 0; i < cfg.depth_dec_cs; ++i)
            dec_cs[i].init("nct.dec_cs." + std::to_string(i), cfg.d1, cfg.heads, cfg.ffn_width,
                           rng);
        rec.init("nct.rec", cfg.d1, 3 * cfg.p1 * cfg.p2, rng);
    }

    // Width-wise crop of one stream's sub-image from a full CHW image.
    std::vector<float> crop_stream(const float* chw, int stream) const {
        const int h = cfg.image_h, w = cfg.image_w, ws = cfg.sub_width();
        std::vector<float> out(std::size_t(3) * h * ws);
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < ws; ++j)
                    out[(std::size_t(c) * h + i) * ws + j] = chw[(c * h + i) * w + stream * ws + j];
        return out;
    }

    // Shared encoder applied to one stream's patch tokens; position rows come
    // from the full-image table via pi_s.
    nn::Node<S>* encode_stream(nn::Graph<S>& g, nn::Node<S>* sub_tokens, int stream, int batch) {
        nn::Node<S>* x = embed_ln(g, embed(g, sub_tokens));
        x = g.add(x, g.gather_rows(g.param(pos_table), pos_idx(stream, batch)));
        for (auto& blk : enc) x = blk(g, x, batch, cfg.tokens_sub());
        x = head(g, x);
        return g.power_normalize(x, cfg.tokens_sub());
    }

    // Gated raw-signal features shared by every stream's extractor.
    nn::Node<S>* gated_raw(nn::Graph<S>& g, nn::Node<S>* raw_tokens) {
        return g.gate(rx_ln(g, raw_tokens), g.param(gate));
    }

    // Stage 1: per-token concat of equalized symbols, gated raw features and
    // LN(delta), mapped by the shared Siam MLP plus position rows.
    nn::Node<S>* extract_stream(nn::Graph<S>& g, nn::Node<S>* equalized, nn::Node<S>* delta,
                                nn::Node<S>* gated_raw_tokens, int stream, int batch) {
        nn::Node<S>* dln = delta_ln(g, delta);
        nn::Node<S>* dbc = g.gather_rows(dln, repeat_idx(batch));
        nn::Node<S>* xi = g.concat_cols({equalized, gated_raw_tokens, dbc});
        nn::Node<S>* q = g.add(siam(g, xi), g.gather_rows(g.param(pos_table), pos_idx(stream, batch)));
        for (auto& blk : dec_sw) q = blk(g, q, batch, cfg.tokens_sub());
        return q;
    }

    // Token-domain merge and cross-stream decoding. With `ablate_crossstream`
    // the stage-2 blocks run per stream (block-diagonal attention), which is
    // the Direct baseline.
    nn::Node<S>* merge_and_decode(nn::Graph<S>& g, std::vector<nn::Node<S>*> streams, int batch,
                                  bool ablate_crossstream) {
        if (ablate_crossstream) {
            for (auto& q : streams)
                for (auto& blk : dec_cs) q = blk(g, q, batch, cfg.tokens_sub());
            nn::Node<S>* merged = g.gather_rows(g.concat_rows(streams), merge_idx(batch));
            return rec(g, merged);
        }
        nn::Node<S>* merged = g.gather_rows(g.concat_rows(streams), merge_idx(batch));
        for (auto& blk : dec_cs) merged = blk(g, merged, batch, cfg.tokens_full());
        return rec(g, merged);
    }

    void collect(nn::ParamList<S>& out) {
        embed.collect(out);
        embed_ln.collect(out);
        out.push_back(&pos_table);
        for (auto& b : enc) b.collect(out);
        head.collect(out);
        rx_ln.collect(out);
        out.push_back(&gate);
        delta_ln.collect(out);
        siam.collect(out);
        for (auto& b : dec_sw) b.collect(out);
        for (auto& b : dec_cs) b.collect(out);
        rec.collect(out);
    }

    nn::ParamList<S> parameters() {
        nn::ParamList<S> out;
        collect(out);
        return out;
    }

private:
    IndexVec pos_idx(int stream, int batch) {
        auto& v = pos_cache_[{stream, batch}];
        if (!v) v = make_nct_pos_index(batch, stream, cfg.grid_h(), cfg.grid_w(), cfg.grid_w_sub());
        return v;
    }
    IndexVec merge_idx(int batch) {
        auto& v = merge_cache_[batch];
        if (!v) v = make_nct_merge_perm(batch, cfg.s_k, cfg.grid_h(), cfg.grid_w());
        return v;
    }
    IndexVec repeat_idx(int batch) {
        auto& v = repeat_cache_[batch];
        if (!v) v = make_repeat_index(batch, cfg.tokens_sub());
        return v;
    }

    std::map<std::pair<int, int>, IndexVec> pos_cache_;
    std::map<int, IndexVec> merge_cache_, repeat_cache_;
};

}  // namespace satsem::codec
