// SPDX-License-Identifier: Apache-2.0
#include "satsem/channel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace satsem::channel {

double fspl_db(double distance_m, double carrier_hz) {
    require(distance_m > 0.0, "fspl_db: distance must be positive");
    const double wavelength = kSpeedOfLight / carrier_hz;
    return 20.0 * std::log10(4.0 * kPi * distance_m / wavelength);
}

double large_scale_gain(double distance_m, double carrier_hz, double g_tx_dbi, double g_rx_dbi,
                        int n_t, int n_r, double shadow_db, Rng& rng) {
    const double shadow = shadow_db > 0.0 ? rng.normal(0.0, shadow_db) : 0.0;
    const double gamma_db = g_tx_dbi + g_rx_dbi + 10.0 * std::log10(double(n_t) * double(n_r)) -
                            fspl_db(distance_m, carrier_hz) - shadow;
    return db2lin(gamma_db);
}

double noise_power(double bandwidth_hz, double noise_figure_db) {
    require(bandwidth_hz > 0.0, "noise_power: bandwidth must be positive");
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return dbm2watts(dbm);
}

namespace {

// PSD square root via eigen-decomposition. Sigma is a normalized sum of a few
// ray outer products, so it is typically rank deficient and Cholesky does not
// apply.
CMat psd_sqrt(const CMat& sigma) {
    Eigen::SelfAdjointEigenSolver<CMat> es(sigma);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

SCsi sample_scsi(const Scenario& scenario, const ChannelConfig& cfg, Rng& rng) {
    require(scenario.num_satellites() >= 1, "sample_scsi: scenario has no satellites");
    const int n_r = cfg.arrays.n_r();
    const double spread = deg2rad(cfg.ray_spread_deg);

    SCsi scsi;
    scsi.links.reserve(scenario.sat_positions.size());
    for (int s = 0; s < scenario.num_satellites(); ++s) {
        LinkScsi link;
        link.angles = scenario.link_angles[s];
        link.distance_m = (scenario.sat_positions[s] - scenario.ut_position).norm() * 1e3;
        link.gamma = large_scale_gain(link.distance_m, cfg.carrier_hz, cfg.sat_element_gain_dbi,
                                      cfg.ut_element_gain_dbi, cfg.arrays.n_t(), n_r,
                                      cfg.shadow_db, rng);
        link.kappa = db2lin(rng.uniform(cfg.kappa_db_min, cfg.kappa_db_max));

        // Receive covariance: equal-power diffuse rays around the LoS arrival.
        CMat sigma = CMat::Zero(n_r, n_r);
        for (int l = 0; l < cfg.diffuse_rays; ++l) {
            const double theta = std::clamp(link.angles.theta_r + rng.laplace(spread), 0.0, kPi);
            double phi = link.angles.phi_r + rng.laplace(spread);
            if (phi > kPi) phi -= 2.0 * kPi;
            if (phi <= -kPi) phi += 2.0 * kPi;
            const CVec u = geometry::steering_vector(cfg.arrays.n_rv, cfg.arrays.n_rh, theta, phi);
            sigma.noalias() += u * u.adjoint();
        }
        sigma /= sigma.trace().real();
        link.sigma = sigma;
        link.sigma_sqrt = psd_sqrt(sigma);
        scsi.links.push_back(std::move(link));
    }
    return scsi;
}

ChannelRealization realize_channel(const SCsi& scsi, const ArrayConfig& arrays, Rng& rng) {
    require(scsi.num_satellites() >= 1, "realize_channel: empty SCsi");
    ChannelRealization real;
    real.links.reserve(scsi.links.size());
    for (const LinkScsi& link : scsi.links) {
        const double a = std::sqrt(link.kappa * link.gamma / (link.kappa + 1.0));
        const double c = std::sqrt(link.gamma / (link.kappa + 1.0));

        CVec w(arrays.n_r());
        for (int i = 0; i < w.size(); ++i) w(i) = rng.complex_normal(1.0);

        LinkRealization lr;
        lr.rx_combined = a * link.rx_steering(arrays) + c * (link.sigma_sqrt * w);
        lr.tx_steer = link.tx_steering(arrays);
        real.links.push_back(std::move(lr));
    }
    return real;
}

}  // namespace satsem::channel
