// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>

#include "satsem/harness/dataset.hpp"
#include "satsem/harness/pipeline.hpp"
#include "satsem/mocm.hpp"
#include "satsem/nn/checkpoint.hpp"

namespace satsem::harness {

// "ct", "nct", or "nct_direct" (block-diagonal cross-stream ablation).
struct TrainResult {
    std::string checkpoint_path;
    double best_val_psnr_db = 0.0;
    double untrained_val_psnr_db = 0.0;
    int epochs_run = 0;
};

TrainResult train_codec(const RunConfig& cfg, const std::string& model, const Dataset& data,
                        const std::string& out_path, std::ostream* log = nullptr);

struct SelectorTrainResult {
    std::string checkpoint_path;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double label_nct_fraction = 0.0;
};

// Labels are generated online by running both frozen codec pipelines per
// scenario; the checkpoint records the content hashes of the codecs it was
// labeled against.
SelectorTrainResult train_selector(const RunConfig& cfg, const std::string& ct_ckpt,
                                   const std::string& nct_ckpt, const Dataset& data,
                                   const std::string& out_path, std::ostream* log = nullptr);

// Checkpoint loading helpers shared by eval/sweep/acceptance.
void load_ct_codec(const std::string& path, codec::CtCodec<float>& codec, RunConfig& cfg_out);
void load_nct_codec(const std::string& path, codec::NctCodec<float>& codec, RunConfig& cfg_out,
                    bool* trained_ablated = nullptr);
void load_selector(const std::string& path, mocm::SelectorNet<float>& net, RunConfig& cfg_out);

}  // namespace satsem::harness
