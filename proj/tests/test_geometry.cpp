// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "satsem/geometry.hpp"

using namespace satsem;
using namespace satsem::geometry;

namespace {
ConstellationParams table1_params() {
    ConstellationParams p;
    p.altitude_km = 600.0;
    p.inclination_deg = 53.0;
    p.planes = 28;
    p.sats_per_plane = 60;
    p.service_radius_km = 800.0;
    p.carrier_hz = 2.185e9;
    return p;
}
}  // namespace

TEST_CASE("walker-delta constellation has planes*sats positions at the orbit radius") {
    const auto params = table1_params();
    const auto sats = build_constellation(params, 0.37);
    CHECK(sats.size() == 28 * 60);
    const double r = params.orbit_radius_km();
    for (const auto& p : sats) CHECK(std::abs(p.norm() - r) < 1e-6);
}

TEST_CASE("degenerate single-satellite constellation sits on the equatorial circle") {
    ConstellationParams p;
    p.planes = 1;
    p.sats_per_plane = 1;
    p.inclination_deg = 0.0;
    p.altitude_km = 600.0;
    const auto sats = build_constellation(p, 0.0);
    REQUIRE(sats.size() == 1);
    CHECK(sats[0].z() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sats[0].norm() == doctest::Approx(p.orbit_radius_km()));
}

TEST_CASE("in-plane angular spacing is uniform at 2*pi/sats_per_plane") {
    ConstellationParams p;
    p.planes = 1;
    p.sats_per_plane = 15;
    const auto sats = build_constellation(p, 1.234);
    double min_sep = 10.0;
    for (std::size_t i = 0; i < sats.size(); ++i)
        for (std::size_t j = i + 1; j < sats.size(); ++j) {
            const double c = sats[i].dot(sats[j]) / (sats[i].norm() * sats[j].norm());
            min_sep = std::min(min_sep, std::acos(std::clamp(c, -1.0, 1.0)));
        }
    CHECK(min_sep == doctest::Approx(2.0 * kPi / 15).epsilon(1e-9));
}

TEST_CASE("steering vector matches the v_N(x) formula") {
    SUBCASE("broadside: theta=pi/2, phi=pi/2 gives all entries 1/sqrt(N)") {
        const auto v = steering_vector(4, 4, kPi / 2, kPi / 2);
        for (int i = 0; i < 16; ++i) {
            CHECK(v(i).real() == doctest::Approx(0.25).epsilon(1e-12));
            CHECK(std::abs(v(i).imag()) < 1e-12);
        }
    }
    SUBCASE("v_2(1) = (1/sqrt 2)[1, -1]") {
        // theta=0 makes the vertical argument cos(theta)=1 with n_h=1.
        const auto v = steering_vector(2, 1, 0.0, 0.0);
        CHECK(v(0).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(v(1).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
        CHECK(std::abs(v(1).imag()) < 1e-12);
    }
    SUBCASE("unit norm for random angles") {
        Rng rng(7);
        for (int i = 0; i < 50; ++i) {
            const auto v = steering_vector(4, 4, rng.uniform(0, kPi),
                                           rng.uniform(-kPi, kPi));
            CHECK(std::abs(v.norm() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("link angles: zenith satellite is at theta_r = 0 for an unrotated UT array") {
    const Vec3 ut(kEarthRadiusKm, 0, 0);
    const Vec3 sat = ut * (1.0 + 600.0 / kEarthRadiusKm);
    const auto a = link_angles(sat, ut, nadir_orientation(sat), zenith_orientation(ut, 0.0));
    CHECK(a.theta_r == doctest::Approx(0.0).epsilon(1e-9));
    // Departure ray at a nadir-pointing satellite is along its boresight too.
    CHECK(a.theta_t == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("swapping endpoints with reciprocal orientations swaps the angle roles") {
    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        const Vec3 a(rng.normal(), rng.normal(), rng.normal());
        const Vec3 b(rng.normal() + 3.0, rng.normal(), rng.normal());
        Orientation oa = nadir_orientation(a + Vec3(0.1, 0.2, 0.3));
        Orientation ob = nadir_orientation(b + Vec3(-0.4, 0.1, 0.2));
        const auto fwd = link_angles(a, b, oa, ob);
        const auto rev = link_angles(b, a, ob, oa);
        CHECK(fwd.theta_t == doctest::Approx(rev.theta_r).epsilon(1e-12));
        CHECK(fwd.phi_t == doctest::Approx(rev.phi_r).epsilon(1e-12));
        CHECK(fwd.theta_r == doctest::Approx(rev.theta_t).epsilon(1e-12));
        CHECK(fwd.phi_r == doctest::Approx(rev.phi_t).epsilon(1e-12));
    }
}

TEST_CASE("angle extraction round-trips the unit LoS direction within 1e-9") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const Vec3 sat(rng.normal() * 1000, rng.normal() * 1000, rng.normal() * 1000 + 7000);
        const Vec3 ut = kEarthRadiusKm * Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        const auto sat_o = nadir_orientation(sat);
        const auto ut_o = zenith_orientation(ut, rng.uniform(0, 2 * kPi));
        const auto a = link_angles(sat, ut, sat_o, ut_o);

        const Vec3 d_world = (ut - sat).normalized();
        const Vec3 dep_local = sat_o.world_to_local * d_world;
        const Vec3 arr_local = ut_o.world_to_local * (-d_world);
        CHECK((angles_to_direction(a.theta_t, a.phi_t) - dep_local).norm() < 1e-9);
        CHECK((angles_to_direction(a.theta_r, a.phi_r) - arr_local).norm() < 1e-9);
    }
}

TEST_CASE("sampled scenarios keep s_k satellites above the minimum elevation") {
    const auto params = table1_params();
    ScenarioSamplerConfig cfg;
    cfg.s_k = 2;
    cfg.min_elevation_deg = 10.0;
    Rng rng(11);
    int draws = 0;
    for (int i = 0; i < 200; ++i) {
        const auto sats = build_constellation(params, rng.uniform(0, 2 * kPi));
        const auto sc = sample_scenario(sats, params, cfg, rng);
        REQUIRE(sc.num_satellites() == 2);
        for (double el : sc.elevations_rad) CHECK(el > deg2rad(10.0));
        // Selection rule: the two largest elevations among the visible set.
        std::vector<double> all;
        for (const auto& s : sats) {
            const double el = elevation_angle(sc.ut_position, s);
            if (el > deg2rad(10.0)) all.push_back(el);
        }
        std::sort(all.rbegin(), all.rend());
        CHECK(sc.elevations_rad[0] == doctest::Approx(all[0]).epsilon(1e-12));
        CHECK(sc.elevations_rad[1] == doctest::Approx(all[1]).epsilon(1e-12));
        ++draws;
    }
    CHECK(draws == 200);
}

TEST_CASE("zenith geometry yields 90 degree elevation") {
    const Vec3 ut(0, 0, kEarthRadiusKm);
    const Vec3 sat(0, 0, kEarthRadiusKm + 600.0);
    CHECK(elevation_angle(ut, sat) == doctest::Approx(kPi / 2).epsilon(1e-9));
}

TEST_CASE("scenario sampling is deterministic under a fixed seed") {
    const auto params = table1_params();
    ScenarioSamplerConfig cfg;
    const auto sats = build_constellation(params, 0.5);
    Rng a(99), b(99);
    const auto s1 = sample_scenario(sats, params, cfg, a);
    const auto s2 = sample_scenario(sats, params, cfg, b);
    CHECK((s1.ut_position - s2.ut_position).norm() == 0.0);
    CHECK(s1.link_angles[0].theta_r == s2.link_angles[0].theta_r);
}
