// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/scenario_io.hpp"

#include <fstream>

#include <json.hpp>

namespace satsem::harness {

using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

json rot_to_json(const Eigen::Matrix3d& m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return rows;
}

Eigen::Matrix3d rot_from_json(const json& j) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) m(i, k) = j.at(i).at(k);
    return m;
}

}  // namespace

void save_scenarios(const std::string& path, const RunConfig& cfg, std::uint64_t seed,
                    const std::vector<ScenarioDraw>& draws) {
    json j;
    j["schema_version"] = 1;
    j["seed"] = seed;
    j["constellation"] = cfg.to_json().at("constellation");
    j["min_elevation_deg"] = cfg.sampler.min_elevation_deg;
    json arr = json::array();
    for (const auto& d : draws) {
        const auto& sc = d.scenario;
        json e;
        e["ut"] = vec3_to_json(sc.ut_position);
        e["center"] = vec3_to_json(sc.region_center);
        e["ut_orientation"] = rot_to_json(sc.ut_orientation.world_to_local);
        json sats = json::array();
        for (int s = 0; s < sc.num_satellites(); ++s) {
            json sj;
            sj["position"] = vec3_to_json(sc.sat_positions[s]);
            sj["orientation"] = rot_to_json(sc.sat_orientations[s].world_to_local);
            sj["elevation_rad"] = sc.elevations_rad[s];
            sj["angles"] = {{"theta_t", sc.link_angles[s].theta_t},
                            {"phi_t", sc.link_angles[s].phi_t},
                            {"theta_r", sc.link_angles[s].theta_r},
                            {"phi_r", sc.link_angles[s].phi_r}};
            sats.push_back(sj);
        }
        e["satellites"] = sats;
        arr.push_back(e);
    }
    j["scenarios"] = arr;
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail("save_scenarios: cannot open " + path);
    f << j.dump(2) << "\n";
}

ScenarioFile load_scenarios(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("load_scenarios: cannot open " + path);
    json j;
    f >> j;
    require(j.at("schema_version").get<int>() == 1, "load_scenarios: unsupported schema_version");
    ScenarioFile out;
    out.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("scenarios")) {
        geometry::Scenario sc;
        sc.ut_position = vec3_from_json(e.at("ut"));
        sc.region_center = vec3_from_json(e.at("center"));
        sc.ut_orientation.world_to_local = rot_from_json(e.at("ut_orientation"));
        for (const auto& sj : e.at("satellites")) {
            sc.sat_positions.push_back(vec3_from_json(sj.at("position")));
            geometry::Orientation o;
            o.world_to_local = rot_from_json(sj.at("orientation"));
            sc.sat_orientations.push_back(o);
            sc.elevations_rad.push_back(sj.at("elevation_rad").get<double>());
            geometry::LinkAngles a;
            a.theta_t = sj.at("angles").at("theta_t").get<double>();
            a.phi_t = sj.at("angles").at("phi_t").get<double>();
            a.theta_r = sj.at("angles").at("theta_r").get<double>();
            a.phi_r = sj.at("angles").at("phi_r").get<double>();
            sc.link_angles.push_back(a);
        }
        out.scenarios.push_back(std::move(sc));
    }
    return out;
}

}  // namespace satsem::harness
