// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "satsem/channel.hpp"
#include "satsem/codec_ct.hpp"
#include "satsem/codec_nct.hpp"
#include "satsem/geometry.hpp"
#include "satsem/mocm.hpp"
#include "satsem/phy_link.hpp"

namespace satsem::harness {

struct TrainConfig {
    double lr = 1e-4;
    int batch = 128;
    int epochs = 100;
    int train_images = 5000;
    int val_images = 256;
    double power_min_dbm = 30.0;
    double power_max_dbm = 45.0;
    int scenario_pool = 128;  // fresh sCSI pool regenerated every epoch
    std::uint64_t seed = 1;
    int val_every = 5;
};

struct EvalConfig {
    std::vector<double> power_grid_dbm = {30, 33, 36, 39, 42, 45};
    int n_test = 500;
    std::uint64_t seed = 7;
    double lambda = 0.99;
    int pilot_spacing = 0;  // 0 = oracle noise estimate, >0 = pilot mode
};

struct DatasetConfig {
    std::string name = "synthetic";  // "cifar10" | "synthetic"
    std::string root;                // cifar10 binary batches directory
    int synthetic_count = 6000;      // generated pool before splitting
    std::uint64_t seed = 42;
    bool verify_checksum = true;
};

// Single declarative run description; every CLI subcommand reads one of these.
struct RunConfig {
    int schema_version = 1;
    geometry::ConstellationParams constellation;
    geometry::ScenarioSamplerConfig sampler;
    channel::ChannelConfig channel;
    phy::PhyConfig phy;
    double cr = 24.0;  // source samples per complex symbol, 3HW/L
    codec::CodecConfigCT ct;
    codec::CodecConfigNCT nct;
    mocm::SelectorConfig selector;
    int selector_epochs = 500;
    int selector_scenarios = 2048;
    double selector_lr = 1e-4;
    int selector_batch = 256;
    TrainConfig training;
    EvalConfig eval;
    DatasetConfig dataset;
    std::string out_dir = "runs";

    void validate() const;
    // Derived quantities (symbol length from CR, array sizes) are resolved on
    // load so the codec configs are self-consistent.
    void resolve();

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    void save(const std::string& path) const;
};

}  // namespace satsem::harness
