// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "satsem/phy_link.hpp"

using namespace satsem;
using namespace satsem::channel;
using namespace satsem::phy;

namespace {

struct Fixture {
    ChannelConfig chan;
    SCsi scsi;
    ChannelRealization real;
    std::vector<CVec> precoders;
    double p_t = dbm2watts(40.0);

    explicit Fixture(int s_k, std::uint64_t seed, bool pure_los = false) {
        chan.arrays = {16, 16, 4, 4};
        Rng rng(seed);
        geometry::ConstellationParams params;
        const auto sats = geometry::build_constellation(params, rng.uniform(0, 2 * kPi));
        geometry::ScenarioSamplerConfig scfg;
        scfg.s_k = s_k;
        const auto scenario = geometry::sample_scenario(sats, params, scfg, rng);
        scsi = sample_scsi(scenario, chan, rng);
        if (pure_los)
            for (auto& link : scsi.links) link.kappa = 1e18;
        real = realize_channel(scsi, chan.arrays, rng);
        precoders = precode(scsi, chan.arrays, p_t);
    }

    SymbolStream random_stream(int L, Rng& rng) const {
        SymbolStream s;
        s.z = CVec(L);
        for (int i = 0; i < L; ++i) s.z(i) = rng.complex_normal(1.0);
        s.z *= std::sqrt(double(L)) / s.z.norm();
        return s;
    }
};

}  // namespace

TEST_CASE("precoders satisfy the per-satellite power constraint") {
    Fixture fx(2, 5);
    REQUIRE(fx.precoders.size() == 2);
    for (const auto& w : fx.precoders)
        CHECK(std::abs(w.squaredNorm() - fx.p_t) < 1e-9 * fx.p_t);
    const auto zero = precode(fx.scsi, fx.chan.arrays, 0.0);
    CHECK(zero[0].norm() == 0.0);
    CHECK((fx.precoders[0] - fx.precoders[1]).norm() > 1e-9);
}

TEST_CASE("noiseless single-satellite transmit equals H w z^T") {
    Fixture fx(1, 7);
    Rng rng(9);
    const auto s = fx.random_stream(64, rng);
    const auto rb = transmit(fx.real, fx.precoders, {s}, 0.0, rng);
    const CMat expected =
        fx.real.links[0].H() * fx.precoders[0] * s.z.transpose();
    CHECK((rb.y - expected).norm() / expected.norm() < 1e-12);
}

TEST_CASE("pure-noise block has the configured per-entry variance (5%)") {
    Fixture fx(1, 11);
    Rng rng(13);
    SymbolStream zero;
    const int L = 1024;  // N_R * L = 16384 samples
    zero.z = CVec::Zero(L);
    const double noise_var = 2.5e-13;
    const auto rb = transmit(fx.real, fx.precoders, {zero}, noise_var, rng);
    const double emp = rb.y.squaredNorm() / double(rb.y.size());
    CHECK(emp > 0.95 * noise_var);
    CHECK(emp < 1.05 * noise_var);
}

TEST_CASE("noiseless pure-LoS CT loop-back recovers the stream within 1e-6") {
    Fixture fx(2, 17, true);
    Rng rng(19);
    const auto s = fx.random_stream(128, rng);
    const auto rb = transmit(fx.real, fx.precoders, {s, s}, 0.0, rng);
    const auto eq = ct_receive(fx.scsi, fx.real, fx.precoders, rb, fx.chan.arrays, {}, &s);
    CHECK_FALSE(eq.outage);
    CHECK((eq.symbols - s.z).norm() / s.z.norm() < 1e-6);
    CHECK(eq.feat.sigma2_eq < 1e-12);
}

TEST_CASE("CT joint beam reduces to u1 for a single satellite") {
    Fixture fx(1, 23, true);
    Rng rng(29);
    const auto s = fx.random_stream(32, rng);
    const auto rb = transmit(fx.real, fx.precoders, {s}, 0.0, rng);
    const auto eq = ct_receive(fx.scsi, fx.real, fx.precoders, rb, fx.chan.arrays, {}, &s);
    // With r = u1 and pure LoS the equalization is exact.
    CHECK((eq.symbols - s.z).norm() / s.z.norm() < 1e-9);
}

TEST_CASE("NCT equalized streams satisfy the interference expansion within 1e-9") {
    Fixture fx(2, 31, true);
    Rng rng(37);
    std::vector<SymbolStream> streams = {fx.random_stream(96, rng), fx.random_stream(96, rng)};
    const auto rb = transmit(fx.real, fx.precoders, streams, 0.0, rng);
    const auto eq = nct_receive(fx.scsi, fx.real, fx.precoders, rb, fx.chan.arrays, {}, &streams);
    REQUIRE(eq.size() == 2);
    for (int s = 0; s < 2; ++s) {
        const CVec u = fx.scsi.links[s].rx_steering(fx.chan.arrays);
        const cplx zeta = u.dot(fx.real.links[s].H() * fx.precoders[s]);
        CVec expected = streams[s].z;
        for (int i = 0; i < 2; ++i) {
            if (i == s) continue;
            const cplx leak = u.dot(fx.real.links[i].H() * fx.precoders[i]) / zeta;
            expected += leak * streams[i].z;
        }
        CHECK((eq[s].symbols - expected).norm() / expected.norm() < 1e-9);
        // sigma2_eq absorbs the cross-stream leakage even without noise.
        const double leak_power =
            (eq[s].symbols - streams[s].z).squaredNorm() / double(streams[s].z.size());
        CHECK(eq[s].feat.sigma2_eq == doctest::Approx(leak_power).epsilon(1e-9));
    }
}

TEST_CASE("orthogonal receive beams remove cross-stream leakage") {
    // Synthetic two-satellite sCSI with orthogonal receive steering vectors:
    // theta_r = 0 vs theta_r chosen so that u1^H u2 = 0 for a 4x4 UPA.
    ChannelConfig chan;
    chan.arrays = {16, 16, 4, 4};
    SCsi scsi;
    for (int s = 0; s < 2; ++s) {
        LinkScsi link;
        link.gamma = 1.0;
        link.kappa = 1e18;
        link.angles.theta_t = kPi / 2;
        link.angles.phi_t = kPi / 2;
        // cos(theta_r) in {0, 1/2} gives orthogonal v_4 factors.
        link.angles.theta_r = s == 0 ? kPi / 2 : std::acos(0.5);
        link.angles.phi_r = kPi / 2;
        link.sigma = CMat::Identity(16, 16) / 16.0;
        link.sigma_sqrt = link.sigma.cwiseSqrt();
        scsi.links.push_back(link);
    }
    const CVec u0 = scsi.links[0].rx_steering(chan.arrays);
    const CVec u1 = scsi.links[1].rx_steering(chan.arrays);
    REQUIRE(std::abs(u0.dot(u1)) < 1e-12);

    Rng rng(41);
    const auto real = realize_channel(scsi, chan.arrays, rng);
    const auto precoders = precode(scsi, chan.arrays, 10.0);
    SymbolStream a, b;
    a.z = CVec(48);
    b.z = CVec(48);
    for (int i = 0; i < 48; ++i) {
        a.z(i) = rng.complex_normal(1.0);
        b.z(i) = rng.complex_normal(1.0);
    }
    std::vector<SymbolStream> streams = {a, b};
    const auto rb = transmit(real, precoders, streams, 0.0, rng);
    const auto eq = nct_receive(scsi, real, precoders, rb, chan.arrays, {}, &streams);
    CHECK((eq[0].symbols - a.z).norm() / a.z.norm() < 1e-6);
    CHECK((eq[1].symbols - b.z).norm() / b.z.norm() < 1e-6);
}

TEST_CASE("common phase rotation of the stream rotates the equalized output exactly") {
    Fixture fx(2, 43, true);
    Rng rng(47);
    const auto s = fx.random_stream(64, rng);
    const cplx rot = std::polar(1.0, 0.7);
    SymbolStream s_rot;
    s_rot.z = rot * s.z;
    Rng noise_rng_a(99), noise_rng_b(99);
    const auto ya = transmit(fx.real, fx.precoders, {s, s}, 0.0, noise_rng_a);
    const auto yb = transmit(fx.real, fx.precoders, {s_rot, s_rot}, 0.0, noise_rng_b);
    const auto ea = ct_receive(fx.scsi, fx.real, fx.precoders, ya, fx.chan.arrays, {}, &s);
    const auto eb = ct_receive(fx.scsi, fx.real, fx.precoders, yb, fx.chan.arrays, {}, &s_rot);
    CHECK((eb.symbols - rot * ea.symbols).norm() < 1e-9 * ea.symbols.norm());
}

TEST_CASE("oracle noise estimate is exact and the pilot estimate is close in expectation") {
    Rng rng(53);
    const int L = 128;
    CVec ref(L);
    for (int i = 0; i < L; ++i) ref(i) = rng.complex_normal(1.0);
    SUBCASE("identical streams give zero") {
        CHECK(estimate_eq_noise(ref, ref) == 0.0);
    }
    SUBCASE("known additive noise is recovered exactly") {
        CVec noisy = ref;
        double truth = 0.0;
        for (int i = 0; i < L; ++i) {
            const cplx n = rng.complex_normal(0.04);
            noisy(i) += n;
            truth += std::norm(n);
        }
        truth /= L;
        CHECK(estimate_eq_noise(noisy, ref) == doctest::Approx(truth).epsilon(1e-12));
    }
    SUBCASE("L/8 pilots estimate the variance within 40% relative error on average") {
        const auto pilots = pilot_positions(L, 8);
        REQUIRE(pilots.size() == 16);
        const double sigma2 = 0.02;
        double rel_acc = 0.0;
        const int trials = 1000;
        for (int t = 0; t < trials; ++t) {
            CVec noisy = ref;
            for (int i = 0; i < L; ++i) noisy(i) += rng.complex_normal(sigma2);
            const double est = estimate_eq_noise(noisy, ref, &pilots);
            rel_acc += std::abs(est - sigma2) / sigma2;
        }
        CHECK(rel_acc / trials < 0.40);
    }
}

TEST_CASE("effective channel mixing coefficients reproduce the receive chain") {
    Fixture fx(2, 59);
    Rng rng(61);
    const int L = 64;
    std::vector<SymbolStream> streams = {fx.random_stream(L, rng), fx.random_stream(L, rng)};
    const double noise_var = 1e-13;
    Rng noise_rng(77);
    const CMat noise = draw_noise(4 * 4, L, noise_var, noise_rng);

    // Manual receive: Y = sum g_i z_i^T + N, then the per-stream combiners.
    const auto eff = effective_channel(fx.scsi, fx.real, fx.precoders, fx.chan.arrays, {}, noise,
                                       noise_var, false);
    CMat y = noise;
    for (int i = 0; i < 2; ++i) y += eff.g[i] * streams[i].z.transpose();
    ReceivedBlock rb{y, noise_var};
    const auto eq = nct_receive(fx.scsi, fx.real, fx.precoders, rb, fx.chan.arrays, {}, &streams);
    for (int s = 0; s < 2; ++s) {
        CVec via_alpha = eff.eq_noise[s];
        for (int i = 0; i < 2; ++i) via_alpha += eff.alpha(s, i) * streams[i].z;
        CHECK((via_alpha - eq[s].symbols).norm() < 1e-9 * eq[s].symbols.norm());
        CHECK(std::abs(eff.alpha(s, s) - cplx(1.0, 0.0)) < 1e-12);
    }
}
