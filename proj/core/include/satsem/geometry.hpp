// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "satsem/common.hpp"
#include "satsem/rng.hpp"

namespace satsem::geometry {

// Walker-Delta constellation on circular orbits around a spherical Earth.
struct ConstellationParams {
    double altitude_km = 600.0;
    double inclination_deg = 53.0;
    int planes = 28;
    int sats_per_plane = 60;
    double service_radius_km = 800.0;
    double carrier_hz = 2.185e9;

    void validate() const;
    double orbit_radius_km() const { return kEarthRadiusKm + altitude_km; }
};

// Uniform planar array orientation, stored as the world->local rotation.
// Local frame convention: +z is the array boresight; angles are standard
// spherical coordinates of the line-of-sight direction in the local frame,
//   theta = acos(d_z)          in [0, pi]
//   phi   = atan2(d_y, d_x)    in (-pi, pi]
// so that the paper's steering arguments are cos(theta) (vertical factor)
// and sin(theta)cos(phi) (horizontal factor).
struct Orientation {
    Eigen::Matrix3d world_to_local = Eigen::Matrix3d::Identity();
};

struct LinkAngles {
    double theta_t = 0.0;  // departure elevation-like angle at the satellite
    double phi_t = 0.0;    // departure azimuth at the satellite
    double theta_r = 0.0;  // arrival angle at the UT
    double phi_r = 0.0;    // arrival azimuth at the UT
};

struct Scenario {
    Vec3 ut_position;                   // ECEF km, on the sphere surface
    Vec3 region_center;                 // sampled service-region center, km
    std::vector<Vec3> sat_positions;    // ECEF km, size S_k
    std::vector<Orientation> sat_orientations;
    Orientation ut_orientation;
    std::vector<LinkAngles> link_angles;
    std::vector<double> elevations_rad;  // per selected satellite

    int num_satellites() const { return static_cast<int>(sat_positions.size()); }
};

struct ScenarioSamplerConfig {
    int s_k = 2;
    double min_elevation_deg = 10.0;
    int max_center_resamples = 256;
};

// All satellite positions for the given constellation snapshot. The epoch
// phase advances every satellite along its orbit by the same angle.
std::vector<Vec3> build_constellation(const ConstellationParams& params, double epoch_phase);

// UT uniform in the disk of service_radius_km around a uniformly sampled
// surface center; the s_k visible satellites with highest elevation are kept.
// Throws if no valid draw is found within max_center_resamples.
Scenario sample_scenario(const std::vector<Vec3>& constellation,
                         const ConstellationParams& params,
                         const ScenarioSamplerConfig& cfg, Rng& rng);

// Elevation of `target` above the local horizon of a surface point, radians.
double elevation_angle(const Vec3& surface_point_km, const Vec3& target_km);

// UPA response v_{n_v}(cos theta) (x) v_{n_h}(sin theta cos phi) with
// v_N(x) = (1/sqrt(N)) [e^{-j pi 0 x}, ..., e^{-j pi (N-1) x}]^T.
CVec steering_vector(int n_v, int n_h, double theta, double phi);

// LoS angles of the satellite->UT ray in each array's local frame.
LinkAngles link_angles(const Vec3& sat_position, const Vec3& ut_position,
                       const Orientation& sat_orientation, const Orientation& ut_orientation);

// Inverse of the angle extraction: unit direction in the local frame.
Vec3 angles_to_direction(double theta, double phi);

// Nadir-pointing boresight for a satellite at `sat_position`.
Orientation nadir_orientation(const Vec3& sat_position);

// Zenith-pointing boresight with the given azimuth rotation about boresight.
Orientation zenith_orientation(const Vec3& surface_position, double azimuth_rad);

}  // namespace satsem::geometry
