// SPDX-License-Identifier: Apache-2.0
#include "satsem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace satsem::geometry {

void ConstellationParams::validate() const {
    require(altitude_km > 0.0, "altitude_km must be positive");
    require(planes >= 1, "planes must be >= 1");
    require(sats_per_plane >= 1, "sats_per_plane must be >= 1");
    require(service_radius_km > 0.0, "service_radius_km must be positive");
    require(carrier_hz > 0.0, "carrier_hz must be positive");
}

std::vector<Vec3> build_constellation(const ConstellationParams& params, double epoch_phase) {
    params.validate();
    const double r = params.orbit_radius_km();
    const double incl = deg2rad(params.inclination_deg);
    const double ci = std::cos(incl), si = std::sin(incl);

    std::vector<Vec3> positions;
    positions.reserve(static_cast<std::size_t>(params.planes) * params.sats_per_plane);
    for (int p = 0; p < params.planes; ++p) {
        const double raan = 2.0 * kPi * p / params.planes;
        const double cr = std::cos(raan), sr = std::sin(raan);
        for (int i = 0; i < params.sats_per_plane; ++i) {
            const double u = 2.0 * kPi * i / params.sats_per_plane + epoch_phase;
            // In-plane position, then rotate by inclination about x and RAAN about z.
            const double xo = r * std::cos(u);
            const double yo = r * std::sin(u);
            const Vec3 inclined(xo, yo * ci, yo * si);
            positions.emplace_back(cr * inclined.x() - sr * inclined.y(),
                                   sr * inclined.x() + cr * inclined.y(), inclined.z());
        }
    }
    return positions;
}

double elevation_angle(const Vec3& surface_point_km, const Vec3& target_km) {
    const Vec3 up = surface_point_km.normalized();
    const Vec3 los = (target_km - surface_point_km).normalized();
    return std::asin(std::clamp(up.dot(los), -1.0, 1.0));
}

namespace {

// Point on the unit sphere at great-circle distance `delta` from `start`
// along the tangent bearing `bearing` (measured in the local tangent plane).
Vec3 sphere_offset(const Vec3& start_unit, double bearing, double delta) {
    // Local tangent basis at start.
    Vec3 ref = std::abs(start_unit.z()) < 0.99 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    const Vec3 east = ref.cross(start_unit).normalized();
    const Vec3 north = start_unit.cross(east);
    const Vec3 dir = std::cos(bearing) * north + std::sin(bearing) * east;
    return std::cos(delta) * start_unit + std::sin(delta) * dir;
}

Vec3 uniform_sphere_point(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(az), s * std::sin(az), z};
}

}  // namespace

Orientation nadir_orientation(const Vec3& sat_position) {
    const Vec3 z = (-sat_position).normalized();  // boresight toward Earth center
    Vec3 ref = std::abs(z.z()) < 0.99 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    const Vec3 x = ref.cross(z).normalized();
    const Vec3 y = z.cross(x);
    Orientation o;
    o.world_to_local.row(0) = x;
    o.world_to_local.row(1) = y;
    o.world_to_local.row(2) = z;
    return o;
}

Orientation zenith_orientation(const Vec3& surface_position, double azimuth_rad) {
    const Vec3 z = surface_position.normalized();  // boresight up
    Vec3 ref = std::abs(z.z()) < 0.99 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    Vec3 x = ref.cross(z).normalized();
    Vec3 y = z.cross(x);
    const double c = std::cos(azimuth_rad), s = std::sin(azimuth_rad);
    const Vec3 xr = c * x + s * y;
    const Vec3 yr = -s * x + c * y;
    Orientation o;
    o.world_to_local.row(0) = xr;
    o.world_to_local.row(1) = yr;
    o.world_to_local.row(2) = z;
    return o;
}

Vec3 angles_to_direction(double theta, double phi) {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

LinkAngles link_angles(const Vec3& sat_position, const Vec3& ut_position,
                       const Orientation& sat_orientation, const Orientation& ut_orientation) {
    require((sat_position - ut_position).norm() > 0.0, "link_angles: coincident endpoints");
    const Vec3 d_world = (ut_position - sat_position).normalized();  // departure ray

    const Vec3 dt = sat_orientation.world_to_local * d_world;
    const Vec3 dr = ut_orientation.world_to_local * (-d_world);  // arrival ray at the UT

    LinkAngles a;
    a.theta_t = std::acos(std::clamp(dt.z(), -1.0, 1.0));
    a.phi_t = std::atan2(dt.y(), dt.x());
    a.theta_r = std::acos(std::clamp(dr.z(), -1.0, 1.0));
    a.phi_r = std::atan2(dr.y(), dr.x());
    return a;
}

CVec steering_vector(int n_v, int n_h, double theta, double phi) {
    require(n_v >= 1 && n_h >= 1, "steering_vector: array dims must be >= 1");
    const double xv = std::cos(theta);
    const double xh = std::sin(theta) * std::cos(phi);

    const auto factor = [](int n, double x) {
        CVec v(n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (int i = 0; i < n; ++i) {
            const double arg = -kPi * i * x;
            v(i) = cplx(scale * std::cos(arg), scale * std::sin(arg));
        }
        return v;
    };

    const CVec vv = factor(n_v, xv);
    const CVec vh = factor(n_h, xh);
    CVec out(n_v * n_h);
    for (int a = 0; a < n_v; ++a)
        for (int b = 0; b < n_h; ++b) out(a * n_h + b) = vv(a) * vh(b);
    return out;
}

Scenario sample_scenario(const std::vector<Vec3>& constellation,
                         const ConstellationParams& params,
                         const ScenarioSamplerConfig& cfg, Rng& rng) {
    require(cfg.s_k >= 1, "sample_scenario: s_k must be >= 1");
    require(!constellation.empty(), "sample_scenario: empty constellation");
    const double min_el = deg2rad(cfg.min_elevation_deg);

    for (int attempt = 0; attempt < cfg.max_center_resamples; ++attempt) {
        const Vec3 center_unit = uniform_sphere_point(rng);
        // Uniform in the disk: radius ~ R*sqrt(u), bearing uniform.
        const double dist_km = params.service_radius_km * std::sqrt(rng.uniform());
        const double bearing = rng.uniform(0.0, 2.0 * kPi);
        const Vec3 ut = kEarthRadiusKm * sphere_offset(center_unit, bearing, dist_km / kEarthRadiusKm);

        std::vector<std::pair<double, int>> visible;  // (elevation, index)
        for (int i = 0; i < static_cast<int>(constellation.size()); ++i) {
            const double el = elevation_angle(ut, constellation[i]);
            if (el > min_el) visible.emplace_back(el, i);
        }
        if (static_cast<int>(visible.size()) < cfg.s_k) continue;

        std::partial_sort(visible.begin(), visible.begin() + cfg.s_k, visible.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });

        Scenario sc;
        sc.ut_position = ut;
        sc.region_center = kEarthRadiusKm * center_unit;
        sc.ut_orientation = zenith_orientation(ut, rng.uniform(0.0, 2.0 * kPi));
        for (int s = 0; s < cfg.s_k; ++s) {
            const int idx = visible[s].second;
            sc.sat_positions.push_back(constellation[idx]);
            sc.sat_orientations.push_back(nadir_orientation(constellation[idx]));
            sc.elevations_rad.push_back(visible[s].first);
            sc.link_angles.push_back(link_angles(constellation[idx], ut,
                                                 sc.sat_orientations.back(), sc.ut_orientation));
        }
        return sc;
    }
    fail("sample_scenario: no scenario with " + std::to_string(cfg.s_k) +
         " visible satellites found after " + std::to_string(cfg.max_center_resamples) +
         " resamples");
}

}  // namespace satsem::geometry
