// SPDX-License-Identifier: Apache-2.0
//
// Batch glue between the double-precision link simulation and the float
// codec graphs: scenario/channel draws, packed channel data, and the
// end-to-end forward builders for both transmission modes.
#pragma once

#include <cstdint>
#include <vector>

#include "satsem/codec_ct.hpp"
#include "satsem/codec_nct.hpp"
#include "satsem/harness/config.hpp"
#include "satsem/phy_link.hpp"

namespace satsem::harness {

struct CellContext {
    geometry::ConstellationParams constellation;
    geometry::ScenarioSamplerConfig sampler;
    channel::ChannelConfig chan;
    phy::PhyConfig phy_cfg;
    double noise_var = 0.0;
};

CellContext make_cell(const RunConfig& cfg);

struct ScenarioDraw {
    geometry::Scenario scenario;
    channel::SCsi scsi;
};

// One Monte-Carlo draw: epoch phase, service center, UT, cooperating set.
ScenarioDraw draw_scenario(const CellContext& cell, Rng& rng);

// Per-image channel realization; both mode views share one noise block so a
// mode switch dispatches over identical draws.
struct LinkDraw {
    phy::EffectiveChannel ct;
    phy::EffectiveChannel nct;
    bool has_ct = false, has_nct = false;
};

LinkDraw draw_link(const CellContext& cell, const ScenarioDraw& sc, double power_dbm, int L,
                   bool want_ct, bool want_nct, Rng& rng);

// ---------------------------------------------------------------------------
struct ForwardResult {
    nn::Node<float>* recon = nullptr;  // (B*P1) x 3*p1*p2 tokens, natural order
    nn::Node<float>* loss = nullptr;   // scalar, only when target given
    std::vector<std::array<double, 3>> delta;  // per image (and per stream for NCT)
    int outages = 0;
};

// CT end-to-end: encode -> scalar-equalized channel -> decode.
ForwardResult run_ct(nn::Graph<float>& g, codec::CtCodec<float>& codec,
                     const nn::Mat<float>& image_tokens,
                     const std::vector<const phy::EffectiveChannel*>& eff,
                     const nn::Mat<float>* target_tokens, int pilot_spacing = 0);

// NCT end-to-end: per-stream encode -> mixing channel -> two-stage decode.
ForwardResult run_nct(nn::Graph<float>& g, codec::NctCodec<float>& codec,
                      const std::vector<nn::Mat<float>>& stream_tokens,
                      const std::vector<const phy::EffectiveChannel*>& eff,
                      const nn::Mat<float>* target_tokens, bool ablate_crossstream,
                      int pilot_spacing = 0);

// Patchified batch helpers.
nn::Mat<float> patchify_images(const std::vector<const float*>& images, int h, int w, int p1,
                               int p2);
std::vector<float> unpatch_image(const nn::Mat<float>& tokens, int image_index, int h, int w,
                                 int p1, int p2);

}  // namespace satsem::harness
