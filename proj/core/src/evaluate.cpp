// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "satsem/harness/metrics.hpp"

namespace satsem::harness {

namespace {

struct SampleFixture {
    ScenarioDraw scenario;
    std::uint64_t link_seed = 0;
    int image_idx = 0;
    std::vector<mocm::SelectorFeature> features;
};

void append_record(std::vector<EvalRecord>& records, double power, const std::string& mode,
                   int sample, const std::vector<float>& rec, const std::vector<float>& ref,
                   int h, int w, int outages, std::uint64_t seed, int mode_used = 0) {
    EvalRecord r;
    r.power_dbm = power;
    r.mode = mode;
    r.sample = sample;
    r.psnr_db = psnr_db(rec, ref);
    r.ssim_db = ssim_to_db(ssim(rec, ref, h, w));
    r.outage = outages;
    r.scenario_seed = seed;
    r.mode_used = mode_used;
    records.push_back(std::move(r));
}

}  // namespace

SweepOutput sweep_cell(const RunConfig& cfg, const Dataset& data, const SweepInputs& inputs) {
    const CellContext cell = make_cell(cfg);
    const int L = cfg.ct.symbol_length;
    const int h = cfg.ct.image_h, w = cfg.ct.image_w;
    const int p1 = cfg.ct.p1, p2 = cfg.ct.p2;
    const bool want_ct = inputs.ct != nullptr;
    const bool want_nct = inputs.nct != nullptr || inputs.nct_direct != nullptr;

    // Per-sample fixtures are keyed by sample index only: the identical
    // scenario, fading and noise draws repeat at every power level.
    Rng root(cfg.eval.seed);
    std::vector<SampleFixture> fixtures(cfg.eval.n_test);
    for (int i = 0; i < cfg.eval.n_test; ++i) {
        Rng srng = root.split(2 * i);
        fixtures[i].scenario = draw_scenario(cell, srng);
        fixtures[i].link_seed = root.split(2 * i + 1).seed();
        fixtures[i].image_idx = i % int(data.test.size());
        if (inputs.selector)
            fixtures[i].features = mocm::featurize(fixtures[i].scenario.scsi, cell.chan.arrays);
    }

    SweepOutput out;
    const int b_max = 50;
    for (double power : cfg.eval.power_grid_dbm) {
        for (int at = 0; at < cfg.eval.n_test; at += b_max) {
            const int b = std::min(b_max, cfg.eval.n_test - at);
            std::vector<const float*> images(b);
            std::vector<LinkDraw> draws(b);
            std::vector<const phy::EffectiveChannel*> eff_ct(b), eff_nct(b);
            for (int i = 0; i < b; ++i) {
                const SampleFixture& fx = fixtures[at + i];
                images[i] = data.test[fx.image_idx].data();
                Rng lrng(fx.link_seed);
                draws[i] = draw_link(cell, fx.scenario, power, L, want_ct, want_nct, lrng);
                eff_ct[i] = &draws[i].ct;
                eff_nct[i] = &draws[i].nct;
            }

            std::vector<std::vector<float>> rec_ct(b), rec_nct(b), rec_direct(b);
            std::vector<int> outage_ct(b, 0), outage_nct(b, 0);

            if (inputs.ct) {
                nn::Graph<float> g(false);
                const auto tokens = patchify_images(images, h, w, p1, p2);
                auto fr = run_ct(g, *inputs.ct, tokens, eff_ct, nullptr, cfg.eval.pilot_spacing);
                for (int i = 0; i < b; ++i) {
                    rec_ct[i] = unpatch_image(fr.recon->val, i, h, w, p1, p2);
                    outage_ct[i] = eff_ct[i]->outage[0] ? 1 : 0;
                }
            }
            const auto run_nct_codec = [&](codec::NctCodec<float>& codec, bool ablate,
                                           std::vector<std::vector<float>>& out_rec) {
                nn::Graph<float> g(false);
                std::vector<nn::Mat<float>> streams;
                for (int s = 0; s < codec.cfg.s_k; ++s) {
                    std::vector<std::vector<float>> crops(b);
                    std::vector<const float*> ptrs(b);
                    for (int i = 0; i < b; ++i) {
                        crops[i] = codec.crop_stream(images[i], s);
                        ptrs[i] = crops[i].data();
                    }
                    streams.push_back(patchify_images(ptrs, h, codec.cfg.sub_width(), p1, p2));
                }
                auto fr = run_nct(g, codec, streams, eff_nct, nullptr, ablate,
                                  cfg.eval.pilot_spacing);
                for (int i = 0; i < b; ++i)
                    out_rec[i] = unpatch_image(fr.recon->val, i, h, w, p1, p2);
            };
            if (inputs.nct) {
                run_nct_codec(*inputs.nct, false, rec_nct);
                for (int i = 0; i < b; ++i) {
                    int c = 0;
                    for (bool o : eff_nct[i]->outage) c += o ? 1 : 0;
                    outage_nct[i] = c;
                }
            }
            if (inputs.nct_direct) run_nct_codec(*inputs.nct_direct, true, rec_direct);

            for (int i = 0; i < b; ++i) {
                const SampleFixture& fx = fixtures[at + i];
                const auto& ref = data.test[fx.image_idx];
                if (inputs.ct)
                    append_record(out.records, power, "ct", at + i, rec_ct[i], ref, h, w,
                                  outage_ct[i], fx.link_seed);
                if (inputs.nct)
                    append_record(out.records, power, "nct", at + i, rec_nct[i], ref, h, w,
                                  outage_nct[i], fx.link_seed);
                if (inputs.nct_direct)
                    append_record(out.records, power, "nct_direct", at + i, rec_direct[i], ref, h,
                                  w, outage_nct[i], fx.link_seed);
                if (inputs.selector && inputs.ct && inputs.nct) {
                    const auto d = inputs.selector->decide(fx.features, {power, cfg.eval.lambda});
                    const bool use_nct = d.mode == mocm::Mode::NCT;
                    append_record(out.records, power, "mocm", at + i,
                                  use_nct ? rec_nct[i] : rec_ct[i], ref, h, w,
                                  use_nct ? outage_nct[i] : outage_ct[i], fx.link_seed,
                                  use_nct ? 1 : 0);
                }
            }
        }
    }

    // Summaries per (power, mode).
    for (double power : cfg.eval.power_grid_dbm) {
        for (const std::string mode : {"ct", "nct", "nct_direct", "mocm"}) {
            EvalSummary s;
            s.power_dbm = power;
            s.mode = mode;
            int nct_used = 0;
            for (const auto& r : out.records) {
                if (r.mode != mode || r.power_dbm != power) continue;
                s.mean_psnr_db += r.psnr_db;
                s.mean_ssim_db += r.ssim_db;
                s.outages += r.outage;
                nct_used += r.mode_used;
                ++s.n;
            }
            if (s.n == 0) continue;
            s.mean_psnr_db /= s.n;
            s.mean_ssim_db /= s.n;
            s.nct_proportion = mode == "mocm" ? double(nct_used) / s.n : 0.0;
            out.summaries.push_back(s);
        }
    }
    return out;
}

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail("write_records_csv: cannot open " + path);
    f << "power_dbm,mode,sample,psnr_db,ssim_db,outage,scenario_seed,mode_used\n";
    char line[256];
    for (const auto& r : records) {
        std::snprintf(line, sizeof(line), "%.2f,%s,%d,%.6f,%.6f,%d,%llu,%d\n", r.power_dbm,
                      r.mode.c_str(), r.sample, r.psnr_db, r.ssim_db, r.outage,
                      static_cast<unsigned long long>(r.scenario_seed), r.mode_used);
        f << line;
    }
}

void write_summary_csv(const std::string& path, const std::vector<EvalSummary>& summaries) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail("write_summary_csv: cannot open " + path);
    f << "power_dbm,mode,mean_psnr_db,mean_ssim_db,n,outages,nct_proportion\n";
    char line[256];
    for (const auto& s : summaries) {
        std::snprintf(line, sizeof(line), "%.2f,%s,%.6f,%.6f,%d,%d,%.6f\n", s.power_dbm,
                      s.mode.c_str(), s.mean_psnr_db, s.mean_ssim_db, s.n, s.outages,
                      s.nct_proportion);
        f << line;
    }
}

}  // namespace satsem::harness
