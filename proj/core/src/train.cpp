// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/train.hpp"

#include <algorithm>
#include <cmath>

#include "satsem/harness/metrics.hpp"
#include "satsem/nn/optim.hpp"

namespace satsem::harness {

namespace {

struct ValFixture {
    std::vector<ScenarioDraw> scenarios;
    std::vector<double> powers_dbm;
    std::vector<std::uint64_t> link_seeds;
    std::vector<int> image_idx;
};

ValFixture make_val_fixture(const CellContext& cell, const TrainConfig& tc, int n_val_images,
                            Rng base) {
    ValFixture fx;
    Rng rng = base.split(0x7a1);
    for (int i = 0; i < n_val_images; ++i) {
        Rng srng = rng.split(2 * i);
        fx.scenarios.push_back(draw_scenario(cell, srng));
        fx.link_seeds.push_back(rng.split(2 * i + 1).seed());
        const double frac = n_val_images > 1 ? double(i) / (n_val_images - 1) : 0.5;
        fx.powers_dbm.push_back(tc.power_min_dbm + frac * (tc.power_max_dbm - tc.power_min_dbm));
        fx.image_idx.push_back(i);
    }
    return fx;
}

struct CodecBundle {
    codec::CtCodec<float> ct;
    codec::NctCodec<float> nct;
    bool is_ct = false;
    bool ablate = false;

    nn::ParamList<float> params() { return is_ct ? ct.parameters() : nct.parameters(); }
};

// Mean validation PSNR over the fixed fixture.
double validate(CodecBundle& bundle, const CellContext& cell, const ValFixture& fx,
                const Dataset& data, int L) {
    const int b_max = 64;
    const int n = int(fx.scenarios.size());
    double acc = 0.0;
    const auto& cfg_h = bundle.is_ct ? bundle.ct.cfg.image_h : bundle.nct.cfg.image_h;
    const auto& cfg_w = bundle.is_ct ? bundle.ct.cfg.image_w : bundle.nct.cfg.image_w;
    const int p1 = bundle.is_ct ? bundle.ct.cfg.p1 : bundle.nct.cfg.p1;
    const int p2 = bundle.is_ct ? bundle.ct.cfg.p2 : bundle.nct.cfg.p2;
    for (int at = 0; at < n; at += b_max) {
        const int b = std::min(b_max, n - at);
        std::vector<const float*> images(b);
        std::vector<LinkDraw> draws(b);
        std::vector<const phy::EffectiveChannel*> eff(b);
        for (int i = 0; i < b; ++i) {
            const auto& img = data.val[fx.image_idx[at + i] % data.val.size()];
            images[i] = img.data();
            Rng lrng(fx.link_seeds[at + i]);
            draws[i] = draw_link(cell, fx.scenarios[at + i], fx.powers_dbm[at + i], L,
                                 bundle.is_ct, !bundle.is_ct, lrng);
            eff[i] = bundle.is_ct ? &draws[i].ct : &draws[i].nct;
        }
        nn::Graph<float> g(false);
        ForwardResult fr;
        if (bundle.is_ct) {
            fr = run_ct(g, bundle.ct, patchify_images(images, cfg_h, cfg_w, p1, p2), eff, nullptr);
        } else {
            std::vector<nn::Mat<float>> streams;
            for (int s = 0; s < bundle.nct.cfg.s_k; ++s) {
                std::vector<std::vector<float>> crops(b);
                std::vector<const float*> ptrs(b);
                for (int i = 0; i < b; ++i) {
                    crops[i] = bundle.nct.crop_stream(images[i], s);
                    ptrs[i] = crops[i].data();
                }
                streams.push_back(
                    patchify_images(ptrs, cfg_h, bundle.nct.cfg.sub_width(), p1, p2));
            }
            fr = run_nct(g, bundle.nct, streams, eff, nullptr, bundle.ablate);
        }
        for (int i = 0; i < b; ++i) {
            const auto rec = unpatch_image(fr.recon->val, i, cfg_h, cfg_w, p1, p2);
            const auto& ref = data.val[fx.image_idx[at + i] % data.val.size()];
            acc += psnr_db(rec, ref);
        }
    }
    return acc / n;
}

}  // namespace

TrainResult train_codec(const RunConfig& cfg, const std::string& model, const Dataset& data,
                        const std::string& out_path, std::ostream* log) {
    require(model == "ct" || model == "nct" || model == "nct_direct",
            "train_codec: model must be ct|nct|nct_direct");
    const CellContext cell = make_cell(cfg);
    const TrainConfig& tc = cfg.training;
    const int L = cfg.ct.symbol_length;

    Rng root(tc.seed);
    Rng init_rng = root.split(1);

    CodecBundle bundle;
    bundle.is_ct = model == "ct";
    bundle.ablate = model == "nct_direct";
    if (bundle.is_ct)
        bundle.ct.init(cfg.ct, init_rng);
    else
        bundle.nct.init(cfg.nct, init_rng);
    auto params = bundle.params();
    nn::Adam<float> opt(params, tc.lr);

    const ValFixture fx = make_val_fixture(cell, tc, tc.val_images, root);

    TrainResult result;
    result.untrained_val_psnr_db = validate(bundle, cell, fx, data, L);
    double best = -1e30;
    if (log)
        (*log) << "model=" << model << " params=" << params.size()
               << " untrained_val_psnr=" << result.untrained_val_psnr_db << "\n";

    const int n_train = int(data.train.size());
    std::vector<int> order(n_train);
    for (int i = 0; i < n_train; ++i) order[i] = i;

    const auto save = [&](const std::string& path, double val_psnr) {
        nn::CheckpointInfo info;
        info.kind = model;
        info.config = cfg.to_json();
        info.seed = tc.seed;
        info.extra = {{"val_psnr_db", val_psnr},
                      {"untrained_val_psnr_db", result.untrained_val_psnr_db},
                      {"epochs_run", result.epochs_run},
                      {"dataset", data.source}};
        std::vector<nn::Param<float>*> plist(params.begin(), params.end());
        save_checkpoint(path, info, plist);
    };

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        Rng erng = root.split(0xe90c000ULL + epoch);
        // Fresh sCSI pool for this epoch.
        std::vector<ScenarioDraw> pool(tc.scenario_pool);
        for (int i = 0; i < tc.scenario_pool; ++i) {
            Rng srng = erng.split(i);
            pool[i] = draw_scenario(cell, srng);
        }
        erng.shuffle(order.begin(), order.end());

        const int steps = n_train / tc.batch;
        double epoch_loss = 0.0;
        for (int step = 0; step < steps; ++step) {
            Rng brng = erng.split(0xb000 + step);
            const double power_dbm = brng.uniform(tc.power_min_dbm, tc.power_max_dbm);
            const int b = tc.batch;
            std::vector<const float*> images(b);
            std::vector<LinkDraw> draws(b);
            std::vector<const phy::EffectiveChannel*> eff(b);
            for (int i = 0; i < b; ++i) {
                images[i] = data.train[order[step * b + i]].data();
                const auto& sc = pool[brng.uniform_index(pool.size())];
                draws[i] = draw_link(cell, sc, power_dbm, L, bundle.is_ct, !bundle.is_ct, brng);
                eff[i] = bundle.is_ct ? &draws[i].ct : &draws[i].nct;
            }

            nn::Graph<float> g(true);
            ForwardResult fr;
            if (bundle.is_ct) {
                const auto tokens =
                    patchify_images(images, cfg.ct.image_h, cfg.ct.image_w, cfg.ct.p1, cfg.ct.p2);
                fr = run_ct(g, bundle.ct, tokens, eff, &tokens);
            } else {
                std::vector<nn::Mat<float>> streams;
                for (int s = 0; s < cfg.nct.s_k; ++s) {
                    std::vector<std::vector<float>> crops(b);
                    std::vector<const float*> ptrs(b);
                    for (int i = 0; i < b; ++i) {
                        crops[i] = bundle.nct.crop_stream(images[i], s);
                        ptrs[i] = crops[i].data();
                    }
                    streams.push_back(patchify_images(ptrs, cfg.nct.image_h,
                                                      cfg.nct.sub_width(), cfg.nct.p1,
                                                      cfg.nct.p2));
                }
                const auto target = patchify_images(images, cfg.nct.image_h, cfg.nct.image_w,
                                                    cfg.nct.p1, cfg.nct.p2);
                fr = run_nct(g, bundle.nct, streams, eff, &target, bundle.ablate);
            }

            const double loss = double(fr.loss->val(0, 0));
            if (!std::isfinite(loss)) {
                save(out_path + ".diverged", -1.0);
                fail("train_codec: loss diverged (NaN/inf) at epoch " + std::to_string(epoch) +
                     " step " + std::to_string(step) + "; state dumped to " + out_path +
                     ".diverged");
            }
            epoch_loss += loss;
            opt.zero_grad();
            g.backward(fr.loss);
            opt.step();
        }
        result.epochs_run = epoch + 1;

        if ((epoch + 1) % tc.val_every == 0 || epoch + 1 == tc.epochs) {
            const double val_psnr = validate(bundle, cell, fx, data, L);
            if (log)
                (*log) << "epoch " << epoch + 1 << " loss=" << epoch_loss / std::max(1, steps)
                       << " val_psnr=" << val_psnr << "\n";
            if (val_psnr > best) {
                best = val_psnr;
                save(out_path, val_psnr);
            }
        } else if (log) {
            (*log) << "epoch " << epoch + 1 << " loss=" << epoch_loss / std::max(1, steps)
                   << "\n";
        }
    }
    if (tc.epochs == 0) save(out_path, result.untrained_val_psnr_db);
    result.best_val_psnr_db = std::max(best, result.untrained_val_psnr_db);
    result.checkpoint_path = out_path;
    return result;
}

void load_ct_codec(const std::string& path, codec::CtCodec<float>& codec, RunConfig& cfg_out) {
    const auto info = nn::peek_checkpoint(path);
    require(info.kind == "ct", "load_ct_codec: checkpoint kind is " + info.kind);
    cfg_out = RunConfig::from_json(info.config);
    Rng dummy(1);
    codec.init(cfg_out.ct, dummy);
    auto params = codec.parameters();
    std::vector<nn::Param<float>*> plist(params.begin(), params.end());
    nn::load_checkpoint(path, plist);
}

void load_nct_codec(const std::string& path, codec::NctCodec<float>& codec, RunConfig& cfg_out,
                    bool* trained_ablated) {
    const auto info = nn::peek_checkpoint(path);
    require(info.kind == "nct" || info.kind == "nct_direct",
            "load_nct_codec: checkpoint kind is " + info.kind);
    if (trained_ablated) *trained_ablated = info.kind == "nct_direct";
    cfg_out = RunConfig::from_json(info.config);
    Rng dummy(1);
    codec.init(cfg_out.nct, dummy);
    auto params = codec.parameters();
    std::vector<nn::Param<float>*> plist(params.begin(), params.end());
    nn::load_checkpoint(path, plist);
}

void load_selector(const std::string& path, mocm::SelectorNet<float>& net, RunConfig& cfg_out) {
    const auto info = nn::peek_checkpoint(path);
    require(info.kind == "selector", "load_selector: checkpoint kind is " + info.kind);
    cfg_out = RunConfig::from_json(info.config);
    Rng dummy(1);
    net.init(cfg_out.selector, dummy);
    auto params = net.parameters();
    std::vector<nn::Param<float>*> plist(params.begin(), params.end());
    nn::load_checkpoint(path, plist);
}

SelectorTrainResult train_selector(const RunConfig& cfg, const std::string& ct_ckpt,
                                   const std::string& nct_ckpt, const Dataset& data,
                                   const std::string& out_path, std::ostream* log) {
    RunConfig ct_cfg, nct_cfg;
    codec::CtCodec<float> ct;
    codec::NctCodec<float> nct;
    load_ct_codec(ct_ckpt, ct, ct_cfg);
    load_nct_codec(nct_ckpt, nct, nct_cfg);

    const CellContext cell = make_cell(cfg);
    const int L = cfg.ct.symbol_length;
    const double lambda = cfg.eval.lambda;
    Rng root(cfg.training.seed ^ 0x5e1ec70bULL);

    // Label generation: run both frozen pipelines per scenario on one image.
    struct Sample {
        std::vector<mocm::SelectorFeature> features;
        mocm::ConditionVector cond;
        int label;
    };
    std::vector<Sample> samples;
    samples.reserve(cfg.selector_scenarios);
    const int lb = 32;  // labeling batch
    for (int at = 0; at < cfg.selector_scenarios; at += lb) {
        const int b = std::min(lb, cfg.selector_scenarios - at);
        std::vector<ScenarioDraw> scen(b);
        std::vector<LinkDraw> draws(b);
        std::vector<const phy::EffectiveChannel*> eff_ct(b), eff_nct(b);
        std::vector<const float*> images(b);
        std::vector<double> powers(b);
        for (int i = 0; i < b; ++i) {
            Rng srng = root.split(2 * (at + i));
            scen[i] = draw_scenario(cell, srng);
            Rng lrng = root.split(2 * (at + i) + 1);
            powers[i] =
                lrng.uniform(cfg.training.power_min_dbm, cfg.training.power_max_dbm);
            draws[i] = draw_link(cell, scen[i], powers[i], L, true, true, lrng);
            eff_ct[i] = &draws[i].ct;
            eff_nct[i] = &draws[i].nct;
            images[i] = data.train[lrng.uniform_index(data.train.size())].data();
        }

        nn::Graph<float> gct(false), gnct(false);
        const auto tokens =
            patchify_images(images, cfg.ct.image_h, cfg.ct.image_w, cfg.ct.p1, cfg.ct.p2);
        auto fr_ct = run_ct(gct, ct, tokens, eff_ct, nullptr);
        std::vector<nn::Mat<float>> streams;
        for (int s = 0; s < cfg.nct.s_k; ++s) {
            std::vector<std::vector<float>> crops(b);
            std::vector<const float*> ptrs(b);
            for (int i = 0; i < b; ++i) {
                crops[i] = nct.crop_stream(images[i], s);
                ptrs[i] = crops[i].data();
            }
            streams.push_back(
                patchify_images(ptrs, cfg.nct.image_h, cfg.nct.sub_width(), cfg.nct.p1,
                                cfg.nct.p2));
        }
        auto fr_nct = run_nct(gnct, nct, streams, eff_nct, nullptr, false);

        for (int i = 0; i < b; ++i) {
            std::vector<float> ref(images[i], images[i] + std::size_t(3) * cfg.ct.image_h *
                                                              cfg.ct.image_w);
            const auto rec_ct =
                unpatch_image(fr_ct.recon->val, i, cfg.ct.image_h, cfg.ct.image_w, cfg.ct.p1,
                              cfg.ct.p2);
            const auto rec_nct =
                unpatch_image(fr_nct.recon->val, i, cfg.nct.image_h, cfg.nct.image_w, cfg.nct.p1,
                              cfg.nct.p2);
            Sample smp;
            smp.features = mocm::featurize(scen[i].scsi, cell.chan.arrays);
            smp.cond = {powers[i], lambda};
            smp.label =
                mocm::oracle_label(psnr_db(rec_ct, ref), psnr_db(rec_nct, ref), lambda);
            samples.push_back(std::move(smp));
        }
    }

    SelectorTrainResult out;
    int nct_labels = 0;
    for (const auto& s : samples) nct_labels += s.label;
    out.label_nct_fraction = double(nct_labels) / samples.size();
    if (log)
        (*log) << "selector labels: " << samples.size()
               << " nct_fraction=" << out.label_nct_fraction << "\n";

    // Train/val split and CE training.
    const int n_val = std::max(1, int(samples.size()) / 10);
    const int n_train = int(samples.size()) - n_val;
    Rng init_rng = root.split(0x11117);
    mocm::SelectorNet<float> net;
    net.init(cfg.selector, init_rng);
    auto params = net.parameters();
    nn::Adam<float> opt(params, cfg.selector_lr);

    const auto accuracy = [&](int begin, int end) {
        int correct = 0;
        for (int i = begin; i < end; ++i) {
            const auto d = net.decide(samples[i].features, samples[i].cond);
            correct += (int(d.mode) == samples[i].label) ? 1 : 0;
        }
        return double(correct) / std::max(1, end - begin);
    };

    std::vector<int> order(n_train);
    for (int i = 0; i < n_train; ++i) order[i] = i;
    Rng shuffle_rng = root.split(0x05);
    for (int epoch = 0; epoch < cfg.selector_epochs; ++epoch) {
        shuffle_rng.shuffle(order.begin(), order.end());
        for (int at = 0; at < n_train; at += cfg.selector_batch) {
            const int b = std::min(cfg.selector_batch, n_train - at);
            std::vector<std::vector<mocm::SelectorFeature>> feats(b);
            std::vector<mocm::ConditionVector> conds(b);
            auto labels = std::make_shared<std::vector<int>>(b);
            for (int i = 0; i < b; ++i) {
                const Sample& s = samples[order[at + i]];
                feats[i] = s.features;
                conds[i] = s.cond;
                (*labels)[i] = s.label;
            }
            nn::Graph<float> g(true);
            auto* loss = g.cross_entropy(net.forward(g, feats, conds), labels);
            if (!std::isfinite(double(loss->val(0, 0))))
                fail("train_selector: CE loss diverged");
            opt.zero_grad();
            g.backward(loss);
            opt.step();
        }
        if (log && ((epoch + 1) % 100 == 0))
            (*log) << "selector epoch " << epoch + 1 << " train_acc=" << accuracy(0, n_train)
                   << "\n";
    }

    out.train_accuracy = accuracy(0, n_train);
    out.val_accuracy = accuracy(n_train, int(samples.size()));

    nn::CheckpointInfo info;
    info.kind = "selector";
    info.config = cfg.to_json();
    info.seed = cfg.training.seed;
    info.extra = {{"ct_checkpoint_hash", nn::file_content_hash(ct_ckpt)},
                  {"nct_checkpoint_hash", nn::file_content_hash(nct_ckpt)},
                  {"train_accuracy", out.train_accuracy},
                  {"val_accuracy", out.val_accuracy},
                  {"label_nct_fraction", out.label_nct_fraction}};
    std::vector<nn::Param<float>*> plist(params.begin(), params.end());
    save_checkpoint(out_path, info, plist);
    out.checkpoint_path = out_path;
    if (log)
        (*log) << "selector train_acc=" << out.train_accuracy << " val_acc=" << out.val_accuracy
               << "\n";
    return out;
}

}  // namespace satsem::harness
