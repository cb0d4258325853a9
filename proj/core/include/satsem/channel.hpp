// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "satsem/geometry.hpp"
#include "satsem/rng.hpp"

namespace satsem::channel {

using geometry::LinkAngles;
using geometry::Scenario;

struct ArrayConfig {
    int n_tv = 16, n_th = 16;  // satellite UPA
    int n_rv = 4, n_rh = 4;    // UT UPA
    int n_t() const { return n_tv * n_th; }
    int n_r() const { return n_rv * n_rh; }
};

struct ChannelConfig {
    ArrayConfig arrays;
    double carrier_hz = 2.185e9;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 7.0;
    double sat_element_gain_dbi = 6.0;
    double ut_element_gain_dbi = 0.0;
    double shadow_db = 3.0;            // log-normal shadowing std dev
    int diffuse_rays = 12;             // NLoS ray count (L-1)
    double ray_spread_deg = 5.0;       // Laplacian angle spread around the LoS arrival
    double kappa_db_min = 8.0;
    double kappa_db_max = 15.0;
};

// Per-link slow statistics: average power gain, Rician factor, the four link
// angles, and the receive-side NLoS covariance (Hermitian PSD, unit trace).
struct LinkScsi {
    double gamma = 0.0;          // linear power gain, E{Tr(H H^H)}
    double kappa = 1.0;          // linear Rician factor
    LinkAngles angles;
    CMat sigma;                  // N_R x N_R
    CMat sigma_sqrt;             // cached PSD square root used by realize_channel
    double distance_m = 0.0;

    CVec rx_steering(const ArrayConfig& a) const {
        return geometry::steering_vector(a.n_rv, a.n_rh, angles.theta_r, angles.phi_r);
    }
    CVec tx_steering(const ArrayConfig& a) const {
        return geometry::steering_vector(a.n_tv, a.n_th, angles.theta_t, angles.phi_t);
    }
};

struct SCsi {
    std::vector<LinkScsi> links;
    int num_satellites() const { return static_cast<int>(links.size()); }
};

// One Rician draw per satellite. Every H is rank one by construction,
//   H = (a u + c u~) v^T,  a = sqrt(kappa gamma/(kappa+1)), c = sqrt(gamma/(kappa+1)),
// so only the receive- and transmit-side factors are stored.
struct LinkRealization {
    CVec rx_combined;  // a u + c u~  (N_R)
    CVec tx_steer;     // v           (N_T)

    CMat H() const { return rx_combined * tx_steer.transpose(); }
};

struct ChannelRealization {
    std::vector<LinkRealization> links;
    int num_satellites() const { return static_cast<int>(links.size()); }
};

// Large-scale linear gain: element gains, array factor 10log10(n_t n_r),
// free-space path loss at distance d, and log-normal shadowing.
double large_scale_gain(double distance_m, double carrier_hz, double g_tx_dbi, double g_rx_dbi,
                        int n_t, int n_r, double shadow_db, Rng& rng);

double fspl_db(double distance_m, double carrier_hz);

// Thermal noise power in linear watts: -174 dBm/Hz + 10log10(B) + NF.
double noise_power(double bandwidth_hz, double noise_figure_db);

// Draws per-link statistics for a scenario: gamma from the link budget,
// kappa_dB ~ U[kappa_db_min, kappa_db_max], angles from the geometry, and a
// unit-trace covariance built from `diffuse_rays` perturbed arrival rays.
SCsi sample_scsi(const Scenario& scenario, const ChannelConfig& cfg, Rng& rng);

ChannelRealization realize_channel(const SCsi& scsi, const ArrayConfig& arrays, Rng& rng);

}  // namespace satsem::channel
