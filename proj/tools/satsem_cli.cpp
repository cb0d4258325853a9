// SPDX-License-Identifier: Apache-2.0
//
// satsem command line: train / eval / sweep / select / flops / gen-scenarios.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "satsem/harness/flops.hpp"
#include "satsem/harness/scenario_io.hpp"
#include "satsem/harness/sweep.hpp"
#include "satsem/harness/train.hpp"

using namespace satsem;
using harness::RunConfig;

namespace {

harness::Dataset load_data(const RunConfig& cfg) {
    return harness::ingest_dataset(cfg.dataset, cfg.training.train_images,
                                   cfg.training.val_images);
}

int cmd_train(const std::string& config_path, const std::string& model,
              const std::string& out_path, const std::string& ct_ckpt,
              const std::string& nct_ckpt) {
    RunConfig cfg = RunConfig::from_file(config_path);
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path().empty()
                                            ? "."
                                            : std::filesystem::path(out_path).parent_path()
                                                  .string());
    const auto data = load_data(cfg);
    if (model == "selector") {
        if (ct_ckpt.empty() || nct_ckpt.empty()) {
            std::cerr << "train selector requires --ct-checkpoint and --nct-checkpoint\n";
            return 2;
        }
        auto res = harness::train_selector(cfg, ct_ckpt, nct_ckpt, data, out_path, &std::cout);
        std::cout << "selector checkpoint: " << res.checkpoint_path
                  << " val_acc=" << res.val_accuracy << "\n";
        return 0;
    }
    auto res = harness::train_codec(cfg, model, data, out_path, &std::cout);
    std::cout << "checkpoint: " << res.checkpoint_path
              << " best_val_psnr=" << res.best_val_psnr_db
              << " untrained_val_psnr=" << res.untrained_val_psnr_db << "\n";
    return 0;
}

harness::SweepInputs load_inputs(const std::string& ct_ckpt, const std::string& nct_ckpt,
                                 const std::string& direct_ckpt,
                                 const std::string& selector_ckpt,
                                 codec::CtCodec<float>& ct, codec::NctCodec<float>& nct,
                                 codec::NctCodec<float>& direct,
                                 mocm::SelectorNet<float>& selector, RunConfig& cfg) {
    harness::SweepInputs in;
    RunConfig tmp;
    if (!ct_ckpt.empty()) {
        harness::load_ct_codec(ct_ckpt, ct, tmp);
        in.ct = &ct;
    }
    if (!nct_ckpt.empty()) {
        harness::load_nct_codec(nct_ckpt, nct, tmp);
        in.nct = &nct;
    }
    if (!direct_ckpt.empty()) {
        harness::load_nct_codec(direct_ckpt, direct, tmp);
        in.nct_direct = &direct;
    }
    if (!selector_ckpt.empty()) {
        harness::load_selector(selector_ckpt, selector, tmp);
        in.selector = &selector;
    }
    (void)cfg;
    return in;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"satsem: multi-satellite cooperative semantic transmission simulator"};
    app.require_subcommand(1);

    std::string config_path, model = "ct", out_path = "checkpoint.ckpt";
    std::string ct_ckpt, nct_ckpt, direct_ckpt, selector_ckpt;
    std::string out_dir = "runs", tag = "sweep";
    std::uint64_t scenario_seed = 1234;
    int count = 100;
    bool ablate = false;

    auto* train = app.add_subcommand("train", "Train a codec or the mode selector");
    train->add_option("--config", config_path, "Run configuration JSON")->required();
    train->add_option("--model", model, "ct | nct | nct_direct | selector");
    train->add_option("--out", out_path, "Output checkpoint path");
    train->add_option("--ct-checkpoint", ct_ckpt, "Frozen CT codec (selector training)");
    train->add_option("--nct-checkpoint", nct_ckpt, "Frozen NCT codec (selector training)");

    auto* evalc = app.add_subcommand("eval", "Evaluate checkpoints over the power grid");
    evalc->add_option("--config", config_path, "Run configuration JSON")->required();
    evalc->add_option("--ct-checkpoint", ct_ckpt, "CT codec checkpoint");
    evalc->add_option("--nct-checkpoint", nct_ckpt, "NCT codec checkpoint");
    evalc->add_option("--direct-checkpoint", direct_ckpt, "NCT Direct-ablation checkpoint");
    evalc->add_option("--selector-checkpoint", selector_ckpt, "Mode selector checkpoint");
    evalc->add_flag("--ablate-crossstream", ablate,
                    "Evaluate the NCT checkpoint with block-diagonal stage-2 attention");
    evalc->add_option("--out-dir", out_dir, "Output directory");
    evalc->add_option("--tag", tag, "Output file tag");

    auto* sweep = app.add_subcommand("sweep", "Full sweep: records, summaries, plots");
    sweep->add_option("--config", config_path, "Run configuration JSON")->required();
    sweep->add_option("--ct-checkpoint", ct_ckpt, "CT codec checkpoint");
    sweep->add_option("--nct-checkpoint", nct_ckpt, "NCT codec checkpoint");
    sweep->add_option("--direct-checkpoint", direct_ckpt, "NCT Direct-ablation checkpoint");
    sweep->add_option("--selector-checkpoint", selector_ckpt, "Mode selector checkpoint");
    sweep->add_option("--out-dir", out_dir, "Output directory");
    sweep->add_option("--tag", tag, "Output file tag");

    auto* select = app.add_subcommand("select", "Per-scenario mode decisions from sCSI");
    select->add_option("--config", config_path, "Run configuration JSON")->required();
    select->add_option("--selector-checkpoint", selector_ckpt, "Mode selector checkpoint")
        ->required();
    select->add_option("--count", count, "Number of scenarios");
    select->add_option("--scenario-seed", scenario_seed, "Scenario generator seed");
    select->add_option("--out-dir", out_dir, "Output directory");
    select->add_option("--tag", tag, "Output file tag");

    auto* flops = app.add_subcommand("flops", "Analytic per-image FLOP accounting");
    flops->add_option("--config", config_path, "Run configuration JSON")->required();

    auto* gen = app.add_subcommand("gen-scenarios", "Sample and serialize a scenario set");
    gen->add_option("--config", config_path, "Run configuration JSON")->required();
    gen->add_option("--count", count, "Number of scenarios");
    gen->add_option("--scenario-seed", scenario_seed, "Scenario generator seed");
    gen->add_option("--out", out_path, "Output JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, model, out_path, ct_ckpt, nct_ckpt);

        if (evalc->parsed() || sweep->parsed()) {
            RunConfig cfg = RunConfig::from_file(config_path);
            codec::CtCodec<float> ct;
            codec::NctCodec<float> nct, direct;
            mocm::SelectorNet<float> selector;
            auto inputs = load_inputs(ct_ckpt, nct_ckpt, direct_ckpt, selector_ckpt, ct, nct,
                                      direct, selector, cfg);
            if (ablate && inputs.nct) {
                inputs.nct_direct = inputs.nct;  // config-switch ablation of the same weights
                inputs.nct = nullptr;
            }
            const auto data = load_data(cfg);
            harness::SweepPaths paths;
            auto out = harness::run_sweep(cfg, data, inputs, out_dir, tag, &paths);
            std::cout << "wrote " << paths.records_csv << "\n" << paths.summary_csv << "\n";
            for (const auto& s : out.summaries)
                std::cout << s.mode << " @ " << s.power_dbm << " dBm: psnr=" << s.mean_psnr_db
                          << " ssim_db=" << s.mean_ssim_db
                          << (s.mode == "mocm"
                                  ? " nct_prop=" + std::to_string(s.nct_proportion)
                                  : "")
                          << "\n";
            return 0;
        }

        if (select->parsed()) {
            RunConfig cfg = RunConfig::from_file(config_path);
            mocm::SelectorNet<float> selector;
            RunConfig sel_cfg;
            harness::load_selector(selector_ckpt, selector, sel_cfg);
            const auto cell = harness::make_cell(cfg);
            Rng root(scenario_seed);
            std::filesystem::create_directories(out_dir);
            const std::string path = out_dir + "/" + tag + "_decisions.csv";
            std::ofstream f(path, std::ios::trunc);
            f << "scenario,power_dbm,logit_ct,logit_nct,mode\n";
            int nct_count = 0, total = 0;
            for (int i = 0; i < count; ++i) {
                Rng srng = root.split(i);
                const auto draw = harness::draw_scenario(cell, srng);
                const auto features = mocm::featurize(draw.scsi, cell.chan.arrays);
                for (double p : cfg.eval.power_grid_dbm) {
                    const auto d = selector.decide(features, {p, cfg.eval.lambda});
                    f << i << "," << p << "," << d.logits[0] << "," << d.logits[1] << ","
                      << (d.mode == mocm::Mode::NCT ? "nct" : "ct") << "\n";
                    nct_count += d.mode == mocm::Mode::NCT ? 1 : 0;
                    ++total;
                }
            }
            std::cout << "wrote " << path << "\nnct_proportion=" << double(nct_count) / total
                      << "\n";
            return 0;
        }

        if (flops->parsed()) {
            RunConfig cfg = RunConfig::from_file(config_path);
            const auto ct = harness::count_flops_ct(cfg.ct);
            const auto nct = harness::count_flops_nct(cfg.nct);
            std::cout << "CT  (HSTC) per-image: TX " << ct.tx_mflops << " MFLOPs, RX "
                      << ct.rx_mflops << " MFLOPs\n";
            std::cout << "NCT (TF)   per-image: TX " << nct.tx_mflops << " MFLOPs, RX "
                      << nct.rx_mflops << " MFLOPs\n";
            std::cout << "TX ratio NCT/CT: " << nct.tx_mflops / ct.tx_mflops << "\n";
            std::cout << "breakdown (MFLOPs):\n";
            for (const auto& [k, v] : ct.breakdown) std::cout << "  ct." << k << " = " << v << "\n";
            for (const auto& [k, v] : nct.breakdown)
                std::cout << "  nct." << k << " = " << v << "\n";
            return 0;
        }

        if (gen->parsed()) {
            RunConfig cfg = RunConfig::from_file(config_path);
            const auto cell = harness::make_cell(cfg);
            Rng root(scenario_seed);
            std::vector<harness::ScenarioDraw> draws;
            draws.reserve(count);
            for (int i = 0; i < count; ++i) {
                Rng srng = root.split(i);
                draws.push_back(harness::draw_scenario(cell, srng));
            }
            harness::save_scenarios(out_path, cfg, scenario_seed, draws);
            std::cout << "wrote " << out_path << " (" << draws.size() << " scenarios)\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
