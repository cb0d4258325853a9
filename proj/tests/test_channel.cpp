// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "satsem/channel.hpp"

using namespace satsem;
using namespace satsem::channel;

namespace {

ChannelConfig desk_chan() {
    ChannelConfig c;
    c.arrays.n_tv = 16;
    c.arrays.n_th = 16;
    c.arrays.n_rv = 4;
    c.arrays.n_rh = 4;
    return c;
}

geometry::Scenario simple_scenario(int s_k, Rng& rng) {
    geometry::ConstellationParams params;
    const auto sats = geometry::build_constellation(params, rng.uniform(0, 2 * kPi));
    geometry::ScenarioSamplerConfig cfg;
    cfg.s_k = s_k;
    return geometry::sample_scenario(sats, params, cfg, rng);
}

}  // namespace

TEST_CASE("free-space path loss at 600 km / 2.185 GHz is 154.80 dB") {
    CHECK(fspl_db(600e3, 2.185e9) == doctest::Approx(154.80).epsilon(1e-4));
}

TEST_CASE("large-scale gain composes element gains, array factor, FSPL and shadowing") {
    Rng rng(3);
    // Deterministic without shadowing.
    const double g1 = large_scale_gain(600e3, 2.185e9, 6.0, 0.0, 256, 16, 0.0, rng);
    const double g2 = large_scale_gain(600e3, 2.185e9, 6.0, 0.0, 256, 16, 0.0, rng);
    CHECK(g1 == g2);
    // 6 + 0 + 10log10(4096) - FSPL = 6 + 36.1236 - 154.7998.
    CHECK(lin2db(g1) == doctest::Approx(6.0 + 36.1236 - 154.7998).epsilon(1e-4));
    // Shadowing spreads draws around the deterministic value.
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 200; ++i) {
        const double g = lin2db(large_scale_gain(600e3, 2.185e9, 6.0, 0.0, 256, 16, 3.0, rng));
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    CHECK(lo < lin2db(g1) - 1.0);
    CHECK(hi > lin2db(g1) + 1.0);
}

TEST_CASE("thermal noise power matches the closed form") {
    CHECK(watts2dbm(noise_power(20e6, 7.0)) == doctest::Approx(-93.9897).epsilon(1e-4));
    CHECK(watts2dbm(noise_power(1.0, 0.0)) == doctest::Approx(-174.0).epsilon(1e-6));
    const double b1 = watts2dbm(noise_power(10e6, 5.0));
    const double b2 = watts2dbm(noise_power(20e6, 5.0));
    CHECK(b2 - b1 == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("sampled sCSI has unit-trace PSD covariance and kappa in [8,15] dB") {
    Rng rng(17);
    const auto cfg = desk_chan();
    for (int trial = 0; trial < 10; ++trial) {
        const auto sc = simple_scenario(2, rng);
        const auto scsi = sample_scsi(sc, cfg, rng);
        REQUIRE(scsi.num_satellites() == 2);
        for (const auto& link : scsi.links) {
            CHECK(std::abs(link.sigma.trace().real() - 1.0) < 1e-9);
            CHECK(std::abs(link.sigma.trace().imag()) < 1e-12);
            // Hermitian PSD.
            CHECK((link.sigma - link.sigma.adjoint()).norm() < 1e-12);
            Eigen::SelfAdjointEigenSolver<CMat> es(link.sigma);
            CHECK(es.eigenvalues().minCoeff() > -1e-12);
            const double kappa_db = lin2db(link.kappa);
            CHECK(kappa_db >= 8.0);
            CHECK(kappa_db <= 15.0);
            CHECK(link.gamma > 0.0);
        }
    }
}

TEST_CASE("zero angular spread collapses the covariance to the LoS outer product") {
    Rng rng(23);
    auto cfg = desk_chan();
    cfg.ray_spread_deg = 0.0;
    const auto sc = simple_scenario(1, rng);
    const auto scsi = sample_scsi(sc, cfg, rng);
    const CVec u = scsi.links[0].rx_steering(cfg.arrays);
    const CMat expected = u * u.adjoint();
    CHECK((scsi.links[0].sigma - expected).norm() < 1e-9);
}

TEST_CASE("channel realizations are rank one") {
    Rng rng(29);
    const auto cfg = desk_chan();
    const auto sc = simple_scenario(2, rng);
    const auto scsi = sample_scsi(sc, cfg, rng);
    for (int i = 0; i < 25; ++i) {
        const auto real = realize_channel(scsi, cfg.arrays, rng);
        for (const auto& link : real.links) {
            const CMat h = link.H();
            Eigen::JacobiSVD<CMat> svd(h);
            const auto& sv = svd.singularValues();
            CHECK(sv(1) < 1e-10 * sv(0));
        }
    }
}

TEST_CASE("kappa -> infinity leaves only the LoS component") {
    Rng rng(31);
    const auto cfg = desk_chan();
    const auto sc = simple_scenario(1, rng);
    auto scsi = sample_scsi(sc, cfg, rng);
    scsi.links[0].kappa = 1e18;
    const auto real = realize_channel(scsi, cfg.arrays, rng);
    const CMat expected = std::sqrt(scsi.links[0].gamma) *
                          scsi.links[0].rx_steering(cfg.arrays) *
                          scsi.links[0].tx_steering(cfg.arrays).transpose();
    CHECK((real.links[0].H() - expected).norm() / expected.norm() < 1e-8);
}

TEST_CASE("power calibration: mean Tr(H H^H) converges to gamma (3% at 1e4 draws)") {
    Rng rng(37);
    const auto cfg = desk_chan();
    const auto sc = simple_scenario(1, rng);
    const auto scsi = sample_scsi(sc, cfg, rng);
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto real = realize_channel(scsi, cfg.arrays, rng);
        // Tr(H H^H) = ||rx||^2 ||v||^2 with ||v|| = 1.
        acc += real.links[0].rx_combined.squaredNorm();
    }
    const double ratio = acc / n / scsi.links[0].gamma;
    CHECK(ratio > 0.97);
    CHECK(ratio < 1.03);
}

TEST_CASE("fixed seeds reproduce identical draws") {
    const auto cfg = desk_chan();
    Rng ra(41), rb(41);
    const auto sa = simple_scenario(2, ra);
    const auto sb = simple_scenario(2, rb);
    const auto ca = sample_scsi(sa, cfg, ra);
    const auto cb = sample_scsi(sb, cfg, rb);
    CHECK(ca.links[0].gamma == cb.links[0].gamma);
    const auto ha = realize_channel(ca, cfg.arrays, ra);
    const auto hb = realize_channel(cb, cfg.arrays, rb);
    CHECK((ha.links[1].rx_combined - hb.links[1].rx_combined).norm() == 0.0);
}
