// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "satsem/channel.hpp"

namespace satsem::phy {

using channel::ArrayConfig;
using channel::ChannelRealization;
using channel::SCsi;

// Length-L complex semantic symbols with unit average power.
struct SymbolStream {
    CVec z;
    int length() const { return static_cast<int>(z.size()); }
};

struct ReceivedBlock {
    CMat y;            // N_R x L
    double noise_var;  // linear watts
};

// Equalization feature fed to the semantic decoders.
struct EqFeature {
    double re_zeta = 0.0;
    double im_zeta = 0.0;
    double sigma2_eq = 0.0;
};

struct EqualizedStream {
    CVec symbols;
    EqFeature feat;
    bool outage = false;
};

struct PhyConfig {
    double p_t_watts = dbm2watts(40.0);
    // Outage floor on |zeta| relative to sqrt(P_T * gamma_max); flagged, not raised.
    double zeta_floor_rel = 1e-12;
};

// Steering-matched distributed beams, one per satellite: w_s = sqrt(P_T) v_s^*.
// The per-satellite power constraint gives ||w_s||^2 = P_T.
std::vector<CVec> precode(const SCsi& scsi, const ArrayConfig& arrays, double p_t_watts);

// Y = sum_s H_s w_s z_s^T + N with N entries iid CN(0, noise_var).
ReceivedBlock transmit(const ChannelRealization& real, const std::vector<CVec>& precoders,
                       const std::vector<SymbolStream>& streams, double noise_var, Rng& rng);

// Joint receive beam r = sum_s beta_s/(sum_i beta_i) u_s with
// beta_s = sqrt(gamma_s kappa_s / (kappa_s + 1)), then scalar equalization by
// zeta = r^H sum_s H_s w_s. sigma2_eq is filled from `reference` when given
// (sample mean of |equalized - reference|^2, i.e. the paper's block estimate
// divided by |zeta|^2 so it matches the stream fed to the decoder).
EqualizedStream ct_receive(const SCsi& scsi, const ChannelRealization& real,
                           const std::vector<CVec>& precoders, const ReceivedBlock& received,
                           const ArrayConfig& arrays, const PhyConfig& cfg,
                           const SymbolStream* reference = nullptr);

// Per-stream combiner r_s = u_s and equalization by zeta_s = u_s^H H_s w_s.
// The equivalent noise absorbs thermal noise and residual cross-stream leakage.
std::vector<EqualizedStream> nct_receive(const SCsi& scsi, const ChannelRealization& real,
                                         const std::vector<CVec>& precoders,
                                         const ReceivedBlock& received, const ArrayConfig& arrays,
                                         const PhyConfig& cfg,
                                         const std::vector<SymbolStream>* references = nullptr);

// Block noise estimate: mean |equalized - reference|^2, either over the whole
// block (oracle mode) or over the given pilot positions.
double estimate_eq_noise(const CVec& equalized, const CVec& reference,
                         const std::vector<int>* pilot_positions = nullptr);

// Evenly spaced pilot index set of size L / spacing.
std::vector<int> pilot_positions(int length, int spacing);

// ---------------------------------------------------------------------------
// Effective per-draw channel used by the end-to-end training/eval graphs.
// Because every beam and combiner is fixed per draw, the whole link collapses
// to equalized_s = sum_i alpha_{s,i} z_i + e_s with alpha_{s,s} = 1, which the
// codecs consume as a complex affine stream mixer.
struct EffectiveChannel {
    std::vector<CVec> g;              // H_s w_s per satellite (N_R)
    CMat alpha;                       // S x S mixing, alpha(s,i) = u_s^H g_i / zeta_s
    std::vector<CVec> eq_noise;       // per stream: r_s^H N / zeta_s (length L)
    std::vector<cplx> zeta;           // per stream
    std::vector<bool> outage;
    CMat noise;                       // raw N (N_R x L), for the raw-signal branch
    double noise_var = 0.0;

    // CT variants (single common stream): alpha has size 1x1 == 1.
    bool coherent = false;
};

// iid CN(0, var) noise block of shape n_r x length.
CMat draw_noise(int n_r, int length, double var, Rng& rng);

// Receiver-side quantities for one scenario realization. For CT the combiner
// is the joint beam; for NCT it is u_s per stream. The same noise block may be
// passed to both modes so that a mode switch dispatches over identical draws.
EffectiveChannel effective_channel(const SCsi& scsi, const ChannelRealization& real,
                                   const std::vector<CVec>& precoders, const ArrayConfig& arrays,
                                   const PhyConfig& cfg, const CMat& noise, double noise_var,
                                   bool coherent);

}  // namespace satsem::phy
