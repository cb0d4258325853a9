// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "satsem/harness/config.hpp"

namespace satsem::harness {

// Images are CHW float in [0, 1].
struct Dataset {
    int h = 32, w = 32;
    std::vector<std::vector<float>> train, val, test;
    std::uint64_t split_seed = 0;
    std::string source;
};

// Loads CIFAR-10 binary batches from `root` (data_batch_*.bin, test_batch.bin)
// or generates the deterministic synthetic corpus; scales pixels to [0, 1] and
// splits train/val with the recorded seed. The SATSEM_DATA_ROOT environment
// variable overrides dataset.root.
Dataset ingest_dataset(const DatasetConfig& cfg, int train_count, int val_count);

// One synthetic image (layered gradients, rectangles and disks), CHW in [0,1].
std::vector<float> synthetic_image(int h, int w, Rng& rng);

}  // namespace satsem::harness
