// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "satsem/harness/evaluate.hpp"

namespace satsem::harness {

struct SweepPaths {
    std::string records_csv;
    std::string summary_csv;
    std::string psnr_svg;
    std::string ssim_svg;
    std::string proportion_svg;  // mocm only
};

// Runs sweep_cell, then writes the CSV tables and the SVG figures under
// out_dir with the given tag. Returns the in-memory output alongside paths.
SweepOutput run_sweep(const RunConfig& cfg, const Dataset& data, const SweepInputs& inputs,
                      const std::string& out_dir, const std::string& tag, SweepPaths* paths_out);

}  // namespace satsem::harness
