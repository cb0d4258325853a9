// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/flops.hpp"

namespace satsem::harness {

namespace {

constexpr double kFlopsPerMac = 2.0;

double mf(double macs) { return kFlopsPerMac * macs / 1e6; }

// Window-attention HSTC block at P tokens, width D.
double hstc_block_macs(double p, double d, double pw, double mlp_hidden, int reduction) {
    const double qkv = p * d * 3 * d;
    const double attn = 2.0 * p * pw * d;  // scores + weighted sum over all windows/heads
    const double proj = p * d * d;
    const double dr = d / reduction;
    const double conv = p * d * dr + p * dr * 9 + p * dr * d;
    const double fuse = p * 2 * d * d;
    const double mlp = 2.0 * p * d * mlp_hidden;
    return qkv + attn + proj + conv + fuse + mlp;
}

// Global-attention Transformer block at P tokens, width D, FFN width F.
double tf_block_macs(double p, double d, double f) {
    const double qkv = p * d * 3 * d;
    const double attn = 2.0 * p * p * d;
    const double proj = p * d * d;
    const double ffn = 2.0 * p * d * f;
    return qkv + attn + proj + ffn;
}

}  // namespace

FlopCount count_flops_ct(const codec::CodecConfigCT& c) {
    const double p1 = c.tokens_stage1(), p2 = c.tokens_stage2();
    const double pw = double(c.window_h) * c.window_w;
    const double patch_feats = 3.0 * c.p1 * c.p2;

    FlopCount out;
    const double embed = p1 * patch_feats * c.d1;
    const double enc1 = c.depth_enc1 * hstc_block_macs(p1, c.d1, pw, c.mlp_hidden1, c.conv_reduction);
    const double merge = p2 * 4.0 * c.d1 * c.d2;
    const double enc2 = c.depth_enc2 * hstc_block_macs(p2, c.d2, pw, c.mlp_hidden2, c.conv_reduction);
    const double head = p2 * c.d2 * c.head_width();
    out.breakdown["tx.embed"] = mf(embed);
    out.breakdown["tx.enc1_blocks"] = mf(enc1);
    out.breakdown["tx.merge"] = mf(merge);
    out.breakdown["tx.enc2_blocks"] = mf(enc2);
    out.breakdown["tx.head"] = mf(head);
    out.tx_mflops = mf(embed + enc1 + merge + enc2 + head);

    const double dec_in = p2 * (c.head_width() + 3.0) * c.d2;
    const double dec2 = c.depth_dec2 * hstc_block_macs(p2, c.d2, pw, c.mlp_hidden2, c.conv_reduction);
    const double expand = p2 * c.d2 * 4.0 * c.d1;
    const double dec1 = c.depth_dec1 * hstc_block_macs(p1, c.d1, pw, c.mlp_hidden1, c.conv_reduction);
    const double rec = p1 * c.d1 * patch_feats;
    out.breakdown["rx.dec_in"] = mf(dec_in);
    out.breakdown["rx.dec2_blocks"] = mf(dec2);
    out.breakdown["rx.expand"] = mf(expand);
    out.breakdown["rx.dec1_blocks"] = mf(dec1);
    out.breakdown["rx.rec"] = mf(rec);
    out.rx_mflops = mf(dec_in + dec2 + expand + dec1 + rec);
    return out;
}

FlopCount count_flops_nct(const codec::CodecConfigNCT& c) {
    const double p_sub = c.tokens_sub(), p1 = c.tokens_full();
    const double patch_feats = 3.0 * c.p1 * c.p2;

    FlopCount out;
    // Per-satellite transmitter: one stream of P_sub tokens.
    const double embed = p_sub * patch_feats * c.d1;
    const double enc = c.depth_enc * tf_block_macs(p_sub, c.d1, c.ffn_width);
    const double head = p_sub * c.d1 * c.sym_width();
    out.breakdown["tx.embed"] = mf(embed);
    out.breakdown["tx.enc_blocks"] = mf(enc);
    out.breakdown["tx.head"] = mf(head);
    out.tx_mflops = mf(embed + enc + head);

    // Receiver: S_k parallel stream-wise extractors + cross-stream stage.
    const double siam =
        p_sub * (c.token_width() * double(c.siam_hidden) + double(c.siam_hidden) * c.d1);
    const double sw = c.depth_dec_sw * tf_block_macs(p_sub, c.d1, c.ffn_width);
    const double cs = c.depth_dec_cs * tf_block_macs(p1, c.d1, c.ffn_width);
    const double rec = p1 * c.d1 * patch_feats;
    out.breakdown["rx.siam"] = mf(c.s_k * siam);
    out.breakdown["rx.dec_sw_blocks"] = mf(c.s_k * sw);
    out.breakdown["rx.dec_cs_blocks"] = mf(cs);
    out.breakdown["rx.rec"] = mf(rec);
    out.rx_mflops = mf(c.s_k * (siam + sw) + cs + rec);
    return out;
}

}  // namespace satsem::harness
