// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/pipeline.hpp"

namespace satsem::harness {

CellContext make_cell(const RunConfig& cfg) {
    CellContext cell;
    cell.constellation = cfg.constellation;
    cell.sampler = cfg.sampler;
    cell.chan = cfg.channel;
    cell.chan.carrier_hz = cfg.constellation.carrier_hz;
    cell.phy_cfg = cfg.phy;
    cell.noise_var = channel::noise_power(cfg.channel.bandwidth_hz, cfg.channel.noise_figure_db);
    return cell;
}

ScenarioDraw draw_scenario(const CellContext& cell, Rng& rng) {
    const double epoch_phase = rng.uniform(0.0, 2.0 * kPi);
    const auto positions = geometry::build_constellation(cell.constellation, epoch_phase);
    ScenarioDraw d;
    d.scenario = geometry::sample_scenario(positions, cell.constellation, cell.sampler, rng);
    d.scsi = channel::sample_scsi(d.scenario, cell.chan, rng);
    return d;
}

LinkDraw draw_link(const CellContext& cell, const ScenarioDraw& sc, double power_dbm, int L,
                   bool want_ct, bool want_nct, Rng& rng) {
    const double p_t = dbm2watts(power_dbm);
    const auto real = channel::realize_channel(sc.scsi, cell.chan.arrays, rng);
    const auto precoders = phy::precode(sc.scsi, cell.chan.arrays, p_t);
    const CMat noise = phy::draw_noise(cell.chan.arrays.n_r(), L, cell.noise_var, rng);
    LinkDraw out;
    out.has_ct = want_ct;
    out.has_nct = want_nct;
    if (want_ct)
        out.ct = phy::effective_channel(sc.scsi, real, precoders, cell.chan.arrays, cell.phy_cfg,
                                        noise, cell.noise_var, true);
    if (want_nct)
        out.nct = phy::effective_channel(sc.scsi, real, precoders, cell.chan.arrays, cell.phy_cfg,
                                         noise, cell.noise_var, false);
    return out;
}

nn::Mat<float> patchify_images(const std::vector<const float*>& images, int h, int w, int p1,
                               int p2) {
    return codec::patchify_batch<float>(images, h, w, p1, p2);
}

std::vector<float> unpatch_image(const nn::Mat<float>& tokens, int image_index, int h, int w,
                                 int p1, int p2) {
    std::vector<float> out(std::size_t(3) * h * w);
    const int p = (h / p1) * (w / p2);
    codec::unpatchify(tokens, Eigen::Index(image_index) * p, h, w, p1, p2, out.data());
    return out;
}

namespace {

// sigma^2 estimate between two packed symbol blocks: mean |eq - ref|^2 over
// the L complex symbols, or over every `pilot_spacing`-th symbol.
double packed_sigma2(const nn::Mat<float>& eq, const nn::Mat<float>& ref, Eigen::Index row0,
                     int rows_per_image, int pilot_spacing) {
    const Eigen::Index c = eq.cols();
    const int L = int(rows_per_image * c) / 2;
    const float* e = eq.data() + row0 * c;
    const float* r = ref.data() + row0 * c;
    double acc = 0.0;
    int n = 0;
    const int step = pilot_spacing > 0 ? pilot_spacing : 1;
    for (int l = 0; l < L; l += step) {
        const double dre = double(e[l]) - r[l];
        const double dim = double(e[L + l]) - r[L + l];
        acc += dre * dre + dim * dim;
        ++n;
    }
    return acc / n;
}

}  // namespace

ForwardResult run_ct(nn::Graph<float>& g, codec::CtCodec<float>& codec,
                     const nn::Mat<float>& image_tokens,
                     const std::vector<const phy::EffectiveChannel*>& eff,
                     const nn::Mat<float>* target_tokens, int pilot_spacing) {
    const int b = int(eff.size());
    const auto& cfg = codec.cfg;
    const int t = cfg.tokens_stage2();
    const int width = cfg.head_width();

    nn::Node<float>* tokens = g.input(image_tokens);
    nn::Node<float>* z = codec.encode(g, tokens, b);

    // Equalized stream: z plus the constant effective noise per image.
    nn::Mat<float> noise_tokens(Eigen::Index(b) * t, width);
    for (int i = 0; i < b; ++i)
        codec::pack_symbols(eff[i]->eq_noise[0], noise_tokens, Eigen::Index(i) * t);
    nn::Node<float>* eq = g.add_const(z, noise_tokens);

    ForwardResult res;
    nn::Mat<float> delta(b, 3);
    for (int i = 0; i < b; ++i) {
        const double s2 =
            packed_sigma2(eq->val, z->val, Eigen::Index(i) * t, t, pilot_spacing);
        delta(i, 0) = float(eff[i]->zeta[0].real());
        delta(i, 1) = float(eff[i]->zeta[0].imag());
        delta(i, 2) = float(s2);
        res.delta.push_back({eff[i]->zeta[0].real(), eff[i]->zeta[0].imag(), s2});
        if (eff[i]->outage[0]) ++res.outages;
    }

    res.recon = codec.decode(g, eq, g.input(delta), b);
    if (target_tokens) {
        auto target = std::make_shared<const nn::Mat<float>>(*target_tokens);
        res.loss = g.mse_loss(res.recon, target);
    }
    return res;
}

ForwardResult run_nct(nn::Graph<float>& g, codec::NctCodec<float>& codec,
                      const std::vector<nn::Mat<float>>& stream_tokens,
                      const std::vector<const phy::EffectiveChannel*>& eff,
                      const nn::Mat<float>* target_tokens, bool ablate_crossstream,
                      int pilot_spacing) {
    const auto& cfg = codec.cfg;
    const int s_k = cfg.s_k;
    const int b = int(eff.size());
    const int t = cfg.tokens_sub();
    const int n_r = cfg.n_r;
    require(int(stream_tokens.size()) == s_k, "run_nct: stream count mismatch");

    // Shared-parameter encoders per stream.
    std::vector<nn::Node<float>*> z(s_k);
    for (int s = 0; s < s_k; ++s) z[s] = codec.encode_stream(g, g.input(stream_tokens[s]), s, b);

    // Channel mixing per output stream.
    std::vector<nn::Node<float>*> eq(s_k);
    for (int s = 0; s < s_k; ++s) {
        auto alpha = std::make_shared<std::vector<std::vector<std::complex<float>>>>(b);
        auto noise = std::make_shared<nn::Mat<float>>(Eigen::Index(b) * t, cfg.sym_width());
        for (int i = 0; i < b; ++i) {
            (*alpha)[i].resize(s_k);
            for (int j = 0; j < s_k; ++j)
                (*alpha)[i][j] = std::complex<float>(float(eff[i]->alpha(s, j).real()),
                                                     float(eff[i]->alpha(s, j).imag()));
            codec::pack_symbols(eff[i]->eq_noise[s], *noise, Eigen::Index(i) * t);
        }
        eq[s] = g.complex_mix(z, alpha, noise, t);
    }

    // Raw received-signal branch (shared across streams).
    auto g_data =
        std::make_shared<std::vector<std::vector<std::vector<std::complex<float>>>>>(b);
    auto raw_noise = std::make_shared<nn::Mat<float>>(Eigen::Index(b) * t, cfg.rx_width());
    const int lc = cfg.symbol_length / t;
    for (int i = 0; i < b; ++i) {
        (*g_data)[i].resize(s_k);
        for (int j = 0; j < s_k; ++j) {
            (*g_data)[i][j].resize(n_r);
            for (int a = 0; a < n_r; ++a)
                (*g_data)[i][j][a] = std::complex<float>(float(eff[i]->g[j](a).real()),
                                                         float(eff[i]->g[j](a).imag()));
        }
        for (int p = 0; p < t; ++p) {
            float* out = raw_noise->data() + (Eigen::Index(i) * t + p) * cfg.rx_width();
            for (int l = 0; l < lc; ++l)
                for (int a = 0; a < n_r; ++a) {
                    const cplx nv = eff[i]->noise(a, p * lc + l);
                    out[l * n_r + a] = float(nv.real());
                    out[n_r * lc + l * n_r + a] = float(nv.imag());
                }
        }
    }
    nn::Node<float>* raw = g.raw_receive(z, g_data, raw_noise, t, t, n_r);
    nn::Node<float>* gated = codec.gated_raw(g, raw);

    // Per-stream equalization features and stage-1 extraction.
    ForwardResult res;
    std::vector<nn::Node<float>*> extracted(s_k);
    for (int s = 0; s < s_k; ++s) {
        nn::Mat<float> delta(b, 3);
        for (int i = 0; i < b; ++i) {
            const double s2 =
                packed_sigma2(eq[s]->val, z[s]->val, Eigen::Index(i) * t, t, pilot_spacing);
            delta(i, 0) = float(eff[i]->zeta[s].real());
            delta(i, 1) = float(eff[i]->zeta[s].imag());
            delta(i, 2) = float(s2);
            res.delta.push_back({eff[i]->zeta[s].real(), eff[i]->zeta[s].imag(), s2});
            if (eff[i]->outage[s]) ++res.outages;
        }
        extracted[s] = codec.extract_stream(g, eq[s], g.input(delta), gated, s, b);
    }

    res.recon = codec.merge_and_decode(g, extracted, b, ablate_crossstream);
    if (target_tokens) {
        auto target = std::make_shared<const nn::Mat<float>>(*target_tokens);
        res.loss = g.mse_loss(res.recon, target);
    }
    return res;
}

}  // namespace satsem::harness
