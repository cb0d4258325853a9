// SPDX-License-Identifier: Apache-2.0
//
// satsem: multi-satellite cooperative semantic transmission simulator
#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace satsem {

using Vec3 = Eigen::Vector3d;
using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusKm = 6371.0;   // spherical Earth model
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm2watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts2dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// 64-bit FNV-1a, used to content-address checkpoints and scenario sets.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace satsem
