// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "satsem/harness/pipeline.hpp"

namespace satsem::harness {

// Schema-versioned JSON serialization of a sampled scenario set (positions,
// orientations, link angles, elevations, generator seed).
void save_scenarios(const std::string& path, const RunConfig& cfg, std::uint64_t seed,
                    const std::vector<ScenarioDraw>& draws);

struct ScenarioFile {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::vector<geometry::Scenario> scenarios;
};

ScenarioFile load_scenarios(const std::string& path);

}  // namespace satsem::harness
