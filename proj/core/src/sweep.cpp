// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/sweep.hpp"

#include <filesystem>

#include "satsem/harness/plot.hpp"

namespace satsem::harness {

SweepOutput run_sweep(const RunConfig& cfg, const Dataset& data, const SweepInputs& inputs,
                      const std::string& out_dir, const std::string& tag, SweepPaths* paths_out) {
    std::filesystem::create_directories(out_dir);
    SweepOutput out = sweep_cell(cfg, data, inputs);

    SweepPaths paths;
    paths.records_csv = out_dir + "/" + tag + "_records.csv";
    paths.summary_csv = out_dir + "/" + tag + "_summary.csv";
    write_records_csv(paths.records_csv, out.records);
    write_summary_csv(paths.summary_csv, out.summaries);

    const auto series_for = [&](const std::string& metric) {
        std::vector<PlotSeries> series;
        for (const std::string mode : {"ct", "nct", "nct_direct", "mocm"}) {
            PlotSeries s;
            s.name = mode;
            for (const auto& sm : out.summaries) {
                if (sm.mode != mode) continue;
                s.x.push_back(sm.power_dbm);
                s.y.push_back(metric == "psnr" ? sm.mean_psnr_db : sm.mean_ssim_db);
            }
            if (!s.x.empty()) series.push_back(std::move(s));
        }
        return series;
    };

    paths.psnr_svg = out_dir + "/" + tag + "_psnr.svg";
    write_line_chart(paths.psnr_svg, "Average PSNR vs transmit power (" + tag + ")",
                     "transmit power (dBm)", "PSNR (dB)", series_for("psnr"));
    paths.ssim_svg = out_dir + "/" + tag + "_ssim.svg";
    write_line_chart(paths.ssim_svg, "Average SSIM (dB) vs transmit power (" + tag + ")",
                     "transmit power (dBm)", "SSIM (dB)", series_for("ssim"));

    PlotSeries prop;
    prop.name = "nct proportion";
    for (const auto& sm : out.summaries)
        if (sm.mode == "mocm") {
            prop.x.push_back(sm.power_dbm);
            prop.y.push_back(sm.nct_proportion);
        }
    if (!prop.x.empty()) {
        paths.proportion_svg = out_dir + "/" + tag + "_nct_proportion.svg";
        write_line_chart(paths.proportion_svg, "NCT selection proportion (" + tag + ")",
                         "transmit power (dBm)", "proportion", {prop});
    }
    if (paths_out) *paths_out = paths;
    return out;
}

}  // namespace satsem::harness
