// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "satsem/harness/dataset.hpp"
#include "satsem/harness/pipeline.hpp"
#include "satsem/mocm.hpp"

namespace satsem::harness {

struct EvalRecord {
    double power_dbm = 0.0;
    std::string mode;  // "ct" | "nct" | "nct_direct" | "mocm"
    int sample = 0;
    double psnr_db = 0.0;
    double ssim_db = 0.0;
    int outage = 0;
    std::uint64_t scenario_seed = 0;
    int mode_used = 0;  // mocm: 0 = CT, 1 = NCT
};

struct EvalSummary {
    double power_dbm = 0.0;
    std::string mode;
    double mean_psnr_db = 0.0;
    double mean_ssim_db = 0.0;
    int n = 0;
    int outages = 0;
    double nct_proportion = 0.0;  // mocm only
};

struct SweepInputs {
    codec::CtCodec<float>* ct = nullptr;
    codec::NctCodec<float>* nct = nullptr;
    codec::NctCodec<float>* nct_direct = nullptr;  // separately trained ablation
    mocm::SelectorNet<float>* selector = nullptr;
};

struct SweepOutput {
    std::vector<EvalRecord> records;
    std::vector<EvalSummary> summaries;
};

// Evaluates every requested mode on identical per-sample scenario/channel/noise
// draws (seeds keyed by sample index only, so the same fixture repeats at each
// power level), computes PSNR/SSIM-dB, and dispatches the MoCM record per the
// selector decision.
SweepOutput sweep_cell(const RunConfig& cfg, const Dataset& data, const SweepInputs& inputs);

// CSV writers (schema documented in the README).
void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records);
void write_summary_csv(const std::string& path, const std::vector<EvalSummary>& summaries);

}  // namespace satsem::harness
