// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "satsem/codec_nct.hpp"
#include "satsem/harness/pipeline.hpp"
#include "satsem/nn/optim.hpp"

using namespace satsem;
using namespace satsem::codec;

namespace {

CodecConfigNCT tiny_cfg(int L = 128, int n_r = 4) {
    CodecConfigNCT c;
    c.d1 = 16;
    c.ffn_width = 32;
    c.heads = 2;
    c.depth_enc = 2;
    c.depth_dec_sw = 1;
    c.depth_dec_cs = 1;
    c.siam_hidden = 32;
    c.s_k = 2;
    c.n_r = n_r;
    c.symbol_length = L;
    return c;
}

std::vector<float> random_image(Rng& rng, int h = 32, int w = 32) {
    std::vector<float> img(std::size_t(3) * h * w);
    for (float& v : img) v = float(rng.uniform());
    return img;
}

// Interference-free channel with no noise: equalized streams equal the inputs.
phy::EffectiveChannel ideal_channel(int s_k, int n_r, int L) {
    phy::EffectiveChannel eff;
    eff.coherent = false;
    eff.alpha = CMat::Identity(s_k, s_k);
    eff.noise = CMat::Zero(n_r, L);
    for (int s = 0; s < s_k; ++s) {
        eff.zeta.push_back(cplx(1.0, 0.0));
        eff.outage.push_back(false);
        eff.eq_noise.push_back(CVec::Zero(L));
        eff.g.push_back(CVec::Zero(n_r));
    }
    return eff;
}

std::vector<nn::Mat<float>> stream_tokens(NctCodec<float>& codec,
                                          const std::vector<const float*>& images) {
    std::vector<nn::Mat<float>> out;
    for (int s = 0; s < codec.cfg.s_k; ++s) {
        std::vector<std::vector<float>> crops(images.size());
        std::vector<const float*> ptrs(images.size());
        for (std::size_t i = 0; i < images.size(); ++i) {
            crops[i] = codec.crop_stream(images[i], s);
            ptrs[i] = crops[i].data();
        }
        out.push_back(patchify_batch<float>(ptrs, codec.cfg.image_h, codec.cfg.sub_width(),
                                            codec.cfg.p1, codec.cfg.p2));
    }
    return out;
}

}  // namespace

TEST_CASE("token-width bookkeeping matches the d_tok arithmetic") {
    auto c16 = tiny_cfg(128, 16);
    CHECK(c16.tokens_sub() == 32);
    CHECK(c16.sym_width() == 8);
    CHECK(c16.rx_width() == 128);
    CHECK(c16.token_width() == 139);  // 8 + 128 + 3
    auto c4 = tiny_cfg(256, 4);
    CHECK(c4.sym_width() == 16);
    CHECK(c4.rx_width() == 64);
    CHECK(c4.token_width() == 83);
}

TEST_CASE("width-wise distribute and reassembly are exact inverses") {
    Rng rng(3);
    NctCodec<float> codec;
    codec.init(tiny_cfg(), rng);
    const auto img = random_image(rng);
    const auto left = codec.crop_stream(img.data(), 0);
    const auto right = codec.crop_stream(img.data(), 1);
    // Every pixel appears in exactly one crop, and concatenation restores.
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j) {
                const float orig = img[(std::size_t(c) * 32 + i) * 32 + j];
                const float got = j < 16 ? left[(std::size_t(c) * 32 + i) * 16 + j]
                                         : right[(std::size_t(c) * 32 + i) * 16 + j - 16];
                CHECK(got == orig);
            }
}

TEST_CASE("single-stream partition is the identity") {
    Rng rng(5);
    auto cfg = tiny_cfg();
    cfg.s_k = 1;
    cfg.n_r = 4;
    NctCodec<float> codec;
    codec.init(cfg, rng);
    const auto img = random_image(rng);
    const auto whole = codec.crop_stream(img.data(), 0);
    CHECK(whole.size() == img.size());
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(whole[i] == img[i]);
}

TEST_CASE("per-stream encoder outputs have unit power and depend on the stream index") {
    Rng rng(7);
    NctCodec<float> codec;
    codec.init(tiny_cfg(), rng);
    // Image with identical halves: same content, different positional rows.
    auto img = random_image(rng);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 16; ++j)
                img[(std::size_t(c) * 32 + i) * 32 + 16 + j] = img[(std::size_t(c) * 32 + i) * 32 + j];
    const auto streams = stream_tokens(codec, {img.data()});
    CHECK((streams[0] - streams[1]).cwiseAbs().maxCoeff() == 0.0f);

    nn::Graph<float> g(false);
    auto* z0 = codec.encode_stream(g, g.input(streams[0]), 0, 1);
    auto* z1 = codec.encode_stream(g, g.input(streams[1]), 1, 1);
    const double p0 = z0->val.cast<double>().squaredNorm() / 128.0;
    const double p1 = z1->val.cast<double>().squaredNorm() / 128.0;
    CHECK(std::abs(p0 - 1.0) < 1e-6);
    CHECK(std::abs(p1 - 1.0) < 1e-6);
    CHECK((z0->val - z1->val).cwiseAbs().maxCoeff() > 0.0f);
}

TEST_CASE("token merge is a permutation mapping sub-grids to full-grid columns") {
    const int hp = 8, wp = 8;
    const auto perm = *make_nct_merge_perm(2, 2, hp, wp);
    std::set<int> seen(perm.begin(), perm.end());
    CHECK(int(seen.size()) == int(perm.size()));  // bijection
    // Full-grid position (i, j) originates from stream j / 4, local column j % 4.
    const int stream_rows = 2 * hp * (wp / 2);
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < hp; ++i)
            for (int j = 0; j < wp; ++j) {
                const int s = j / (wp / 2), jl = j % (wp / 2);
                const int expect = s * stream_rows + (b * hp + i) * (wp / 2) + jl;
                CHECK(perm[(b * hp + i) * wp + j] == expect);
            }
}

TEST_CASE("zero-gate initialization makes stage 1 independent of the raw signal") {
    Rng rng(11);
    NctCodec<float> codec;
    codec.init(tiny_cfg(128, 16), rng);
    REQUIRE(codec.gate.value(0, 0) == 0.0f);

    nn::Graph<float> g(false);
    nn::Mat<float> eq(32, 8), delta(1, 3), raw1(32, 128), raw2(32, 128);
    for (Eigen::Index i = 0; i < eq.size(); ++i) eq.data()[i] = float(rng.normal());
    delta << 1.0f, 0.0f, 0.01f;
    for (Eigen::Index i = 0; i < raw1.size(); ++i) {
        raw1.data()[i] = float(rng.normal());
        raw2.data()[i] = float(rng.normal());
    }
    auto* ex1 = codec.extract_stream(g, g.input(eq), g.input(delta),
                                     codec.gated_raw(g, g.input(raw1)), 0, 1);
    auto* ex2 = codec.extract_stream(g, g.input(eq), g.input(delta),
                                     codec.gated_raw(g, g.input(raw2)), 0, 1);
    CHECK((ex1->val - ex2->val).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("parameters are shared across streams (single parameter set)") {
    Rng rng(13);
    NctCodec<float> codec;
    codec.init(tiny_cfg(), rng);
    auto params = codec.parameters();
    std::set<const nn::Param<float>*> unique(params.begin(), params.end());
    CHECK(unique.size() == params.size());
    std::set<std::string> names;
    for (auto* p : params) names.insert(p->name);
    CHECK(names.size() == params.size());
    // Both streams pull gradients into the same encoder weights.
    const auto img = random_image(rng);
    const auto streams = stream_tokens(codec, {img.data()});
    nn::Graph<float> g(true);
    auto* z0 = codec.encode_stream(g, g.input(streams[0]), 0, 1);
    auto* z1 = codec.encode_stream(g, g.input(streams[1]), 1, 1);
    auto target = std::make_shared<const nn::Mat<float>>(nn::Mat<float>::Zero(64, 8));
    auto* loss = g.mse_loss(g.concat_rows({z0, z1}), target);
    for (auto* p : params) p->zero_grad();
    g.backward(loss);
    CHECK(codec.embed.w.grad.cwiseAbs().maxCoeff() > 0.0f);
}

TEST_CASE("full pipeline shape contract and cross-stream reach") {
    Rng rng(17);
    NctCodec<float> codec;
    codec.init(tiny_cfg(), rng);
    const auto eff = ideal_channel(2, 4, 128);
    const auto img = random_image(rng);
    auto streams = stream_tokens(codec, {img.data()});

    nn::Graph<float> g(false);
    auto res = harness::run_nct(g, codec, streams, {&eff}, nullptr, false);
    REQUIRE(res.recon->val.rows() == 64);
    REQUIRE(res.recon->val.cols() == 48);

    // Perturb the right-half stream; with cross-stream attention the left-half
    // output moves, with the block-diagonal ablation it must not.
    auto streams_p = streams;
    streams_p[1].row(3).array() += 0.5f;

    nn::Graph<float> g2(false);
    auto res_p = harness::run_nct(g2, codec, streams_p, {&eff}, nullptr, false);
    const auto left_tokens = [&](const nn::Mat<float>& m) {
        // Full-grid columns 0..3 are stream 0: rows i*8+j with j<4.
        float acc = 0.0f;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 4; ++j)
                acc = std::max(acc, m.row(i * 8 + j).cwiseAbs().maxCoeff());
        return acc;
    };
    nn::Mat<float> dfull = res_p.recon->val - res.recon->val;
    CHECK(left_tokens(dfull) > 0.0f);

    nn::Graph<float> g3(false), g4(false);
    auto res_a = harness::run_nct(g3, codec, streams, {&eff}, nullptr, true);
    auto res_ap = harness::run_nct(g4, codec, streams_p, {&eff}, nullptr, true);
    nn::Mat<float> dabl = res_ap.recon->val - res_a.recon->val;
    CHECK(left_tokens(dabl) == 0.0f);  // no cross-stream flow when ablated
}

TEST_CASE("training steps reduce loss through an interfering channel") {
    Rng rng(19);
    NctCodec<float> codec;
    codec.init(tiny_cfg(), rng);
    auto params = codec.parameters();
    nn::Adam<float> opt(params, 1e-3);

    auto eff = ideal_channel(2, 4, 128);
    eff.alpha(0, 1) = cplx(0.25, -0.1);  // cross-stream leakage
    eff.alpha(1, 0) = cplx(-0.15, 0.2);

    std::vector<std::vector<float>> imgs;
    std::vector<const float*> ptrs;
    for (int i = 0; i < 4; ++i) imgs.push_back(random_image(rng));
    for (const auto& im : imgs) ptrs.push_back(im.data());
    auto streams = stream_tokens(codec, ptrs);
    const auto target = patchify_batch<float>(ptrs, 32, 32, 4, 4);
    std::vector<const phy::EffectiveChannel*> effs(4, &eff);

    double first = 0.0, last = 0.0;
    for (int step = 0; step < 30; ++step) {
        nn::Graph<float> g(true);
        auto res = harness::run_nct(g, codec, streams, effs, &target, false);
        if (step == 0) first = res.loss->val(0, 0);
        last = res.loss->val(0, 0);
        opt.zero_grad();
        g.backward(res.loss);
        opt.step();
    }
    CHECK(last < 0.6 * first);
}
