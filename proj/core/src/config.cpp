// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/config.hpp"

#include <fstream>

namespace satsem::harness {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::resolve() {
    const int hw3 = 3 * ct.image_h * ct.image_w;
    require(cr > 0.0, "config: cr must be positive");
    const double l_exact = hw3 / cr;
    const int L = int(l_exact + 0.5);
    require(std::abs(l_exact - L) < 1e-9, "config: 3HW/CR must be an integer symbol count");
    ct.symbol_length = L;
    nct.symbol_length = L;
    nct.image_h = ct.image_h;
    nct.image_w = ct.image_w;
    nct.n_r = channel.arrays.n_r();
    nct.s_k = sampler.s_k;
}

void RunConfig::validate() const {
    require(schema_version == 1, "config: unsupported schema_version");
    constellation.validate();
    ct.validate();
    nct.validate();
    require(training.power_min_dbm >= 0.0 && training.power_max_dbm <= 60.0 &&
                training.power_min_dbm <= training.power_max_dbm,
            "config: training power range must lie in [0, 60] dBm");
    for (double p : eval.power_grid_dbm)
        require(p >= 0.0 && p <= 60.0, "config: eval power grid must lie in [0, 60] dBm");
    require(eval.n_test >= 1, "config: eval.n_test must be >= 1");
    require(training.batch >= 1 && training.epochs >= 0, "config: bad training block");
    require(sampler.s_k >= 1, "config: sampler.s_k must be >= 1");
}

json RunConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["constellation"] = {{"altitude_km", constellation.altitude_km},
                          {"inclination_deg", constellation.inclination_deg},
                          {"planes", constellation.planes},
                          {"sats_per_plane", constellation.sats_per_plane},
                          {"service_radius_km", constellation.service_radius_km},
                          {"carrier_hz", constellation.carrier_hz}};
    j["sampler"] = {{"s_k", sampler.s_k},
                    {"min_elevation_deg", sampler.min_elevation_deg},
                    {"max_center_resamples", sampler.max_center_resamples}};
    j["channel"] = {{"n_tv", channel.arrays.n_tv},
                    {"n_th", channel.arrays.n_th},
                    {"n_rv", channel.arrays.n_rv},
                    {"n_rh", channel.arrays.n_rh},
                    {"carrier_hz", channel.carrier_hz},
                    {"bandwidth_hz", channel.bandwidth_hz},
                    {"noise_figure_db", channel.noise_figure_db},
                    {"sat_element_gain_dbi", channel.sat_element_gain_dbi},
                    {"ut_element_gain_dbi", channel.ut_element_gain_dbi},
                    {"shadow_db", channel.shadow_db},
                    {"diffuse_rays", channel.diffuse_rays},
                    {"ray_spread_deg", channel.ray_spread_deg},
                    {"kappa_db_min", channel.kappa_db_min},
                    {"kappa_db_max", channel.kappa_db_max}};
    j["phy"] = {{"zeta_floor_rel", phy.zeta_floor_rel}};
    j["cr"] = cr;
    j["image"] = {{"h", ct.image_h}, {"w", ct.image_w}};
    j["ct"] = {{"p1", ct.p1},
               {"p2", ct.p2},
               {"d1", ct.d1},
               {"d2", ct.d2},
               {"depth_enc1", ct.depth_enc1},
               {"depth_enc2", ct.depth_enc2},
               {"depth_dec2", ct.depth_dec2},
               {"depth_dec1", ct.depth_dec1},
               {"window_h", ct.window_h},
               {"window_w", ct.window_w},
               {"heads1", ct.heads1},
               {"heads2", ct.heads2},
               {"mlp_hidden1", ct.mlp_hidden1},
               {"mlp_hidden2", ct.mlp_hidden2},
               {"conv_reduction", ct.conv_reduction}};
    j["nct"] = {{"p1", nct.p1},
                {"p2", nct.p2},
                {"d1", nct.d1},
                {"ffn_width", nct.ffn_width},
                {"heads", nct.heads},
                {"depth_enc", nct.depth_enc},
                {"depth_dec_sw", nct.depth_dec_sw},
                {"depth_dec_cs", nct.depth_dec_cs},
                {"siam_hidden", nct.siam_hidden}};
    j["selector"] = {{"hidden", selector.hidden}, {"depth", selector.depth},
                     {"heads", selector.heads},   {"ffn", selector.ffn},
                     {"gamma_ref", selector.gamma_ref}, {"epochs", selector_epochs},
                     {"scenarios", selector_scenarios}, {"lr", selector_lr},
                     {"batch", selector_batch}};
    j["training"] = {{"lr", training.lr},
                     {"batch", training.batch},
                     {"epochs", training.epochs},
                     {"train_images", training.train_images},
                     {"val_images", training.val_images},
                     {"power_min_dbm", training.power_min_dbm},
                     {"power_max_dbm", training.power_max_dbm},
                     {"scenario_pool", training.scenario_pool},
                     {"seed", training.seed},
                     {"val_every", training.val_every}};
    j["eval"] = {{"power_grid_dbm", eval.power_grid_dbm},
                 {"n_test", eval.n_test},
                 {"seed", eval.seed},
                 {"lambda", eval.lambda},
                 {"pilot_spacing", eval.pilot_spacing}};
    j["dataset"] = {{"name", dataset.name},
                    {"root", dataset.root},
                    {"synthetic_count", dataset.synthetic_count},
                    {"seed", dataset.seed},
                    {"verify_checksum", dataset.verify_checksum}};
    j["out_dir"] = out_dir;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    require(j.contains("schema_version"), "config: missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();
    if (j.contains("constellation")) {
        const auto& k = j.at("constellation");
        get_if(k, "altitude_km", c.constellation.altitude_km);
        get_if(k, "inclination_deg", c.constellation.inclination_deg);
        get_if(k, "planes", c.constellation.planes);
        get_if(k, "sats_per_plane", c.constellation.sats_per_plane);
        get_if(k, "service_radius_km", c.constellation.service_radius_km);
        get_if(k, "carrier_hz", c.constellation.carrier_hz);
    }
    if (j.contains("sampler")) {
        const auto& k = j.at("sampler");
        get_if(k, "s_k", c.sampler.s_k);
        get_if(k, "min_elevation_deg", c.sampler.min_elevation_deg);
        get_if(k, "max_center_resamples", c.sampler.max_center_resamples);
    }
    if (j.contains("channel")) {
        const auto& k = j.at("channel");
        get_if(k, "n_tv", c.channel.arrays.n_tv);
        get_if(k, "n_th", c.channel.arrays.n_th);
        get_if(k, "n_rv", c.channel.arrays.n_rv);
        get_if(k, "n_rh", c.channel.arrays.n_rh);
        get_if(k, "carrier_hz", c.channel.carrier_hz);
        get_if(k, "bandwidth_hz", c.channel.bandwidth_hz);
        get_if(k, "noise_figure_db", c.channel.noise_figure_db);
        get_if(k, "sat_element_gain_dbi", c.channel.sat_element_gain_dbi);
        get_if(k, "ut_element_gain_dbi", c.channel.ut_element_gain_dbi);
        get_if(k, "shadow_db", c.channel.shadow_db);
        get_if(k, "diffuse_rays", c.channel.diffuse_rays);
        get_if(k, "ray_spread_deg", c.channel.ray_spread_deg);
        get_if(k, "kappa_db_min", c.channel.kappa_db_min);
        get_if(k, "kappa_db_max", c.channel.kappa_db_max);
    }
    if (j.contains("phy")) get_if(j.at("phy"), "zeta_floor_rel", c.phy.zeta_floor_rel);
    get_if(j, "cr", c.cr);
    if (j.contains("image")) {
        get_if(j.at("image"), "h", c.ct.image_h);
        get_if(j.at("image"), "w", c.ct.image_w);
    }
    if (j.contains("ct")) {
        const auto& k = j.at("ct");
        get_if(k, "p1", c.ct.p1);
        get_if(k, "p2", c.ct.p2);
        get_if(k, "d1", c.ct.d1);
        get_if(k, "d2", c.ct.d2);
        get_if(k, "depth_enc1", c.ct.depth_enc1);
        get_if(k, "depth_enc2", c.ct.depth_enc2);
        get_if(k, "depth_dec2", c.ct.depth_dec2);
        get_if(k, "depth_dec1", c.ct.depth_dec1);
        get_if(k, "window_h", c.ct.window_h);
        get_if(k, "window_w", c.ct.window_w);
        get_if(k, "heads1", c.ct.heads1);
        get_if(k, "heads2", c.ct.heads2);
        c.ct.mlp_hidden1 = 3 * c.ct.d1;
        c.ct.mlp_hidden2 = 3 * c.ct.d2;
        get_if(k, "mlp_hidden1", c.ct.mlp_hidden1);
        get_if(k, "mlp_hidden2", c.ct.mlp_hidden2);
        get_if(k, "conv_reduction", c.ct.conv_reduction);
    }
    if (j.contains("nct")) {
        const auto& k = j.at("nct");
        get_if(k, "p1", c.nct.p1);
        get_if(k, "p2", c.nct.p2);
        get_if(k, "d1", c.nct.d1);
        get_if(k, "ffn_width", c.nct.ffn_width);
        get_if(k, "heads", c.nct.heads);
        get_if(k, "depth_enc", c.nct.depth_enc);
        get_if(k, "depth_dec_sw", c.nct.depth_dec_sw);
        get_if(k, "depth_dec_cs", c.nct.depth_dec_cs);
        c.nct.siam_hidden = c.nct.ffn_width;
        get_if(k, "siam_hidden", c.nct.siam_hidden);
    }
    if (j.contains("selector")) {
        const auto& k = j.at("selector");
        get_if(k, "hidden", c.selector.hidden);
        get_if(k, "depth", c.selector.depth);
        get_if(k, "heads", c.selector.heads);
        get_if(k, "ffn", c.selector.ffn);
        get_if(k, "gamma_ref", c.selector.gamma_ref);
        get_if(k, "epochs", c.selector_epochs);
        get_if(k, "scenarios", c.selector_scenarios);
        get_if(k, "lr", c.selector_lr);
        get_if(k, "batch", c.selector_batch);
    }
    if (j.contains("training")) {
        const auto& k = j.at("training");
        get_if(k, "lr", c.training.lr);
        get_if(k, "batch", c.training.batch);
        get_if(k, "epochs", c.training.epochs);
        get_if(k, "train_images", c.training.train_images);
        get_if(k, "val_images", c.training.val_images);
        get_if(k, "power_min_dbm", c.training.power_min_dbm);
        get_if(k, "power_max_dbm", c.training.power_max_dbm);
        get_if(k, "scenario_pool", c.training.scenario_pool);
        get_if(k, "seed", c.training.seed);
        get_if(k, "val_every", c.training.val_every);
    }
    if (j.contains("eval")) {
        const auto& k = j.at("eval");
        get_if(k, "power_grid_dbm", c.eval.power_grid_dbm);
        get_if(k, "n_test", c.eval.n_test);
        get_if(k, "seed", c.eval.seed);
        get_if(k, "lambda", c.eval.lambda);
        get_if(k, "pilot_spacing", c.eval.pilot_spacing);
    }
    if (j.contains("dataset")) {
        const auto& k = j.at("dataset");
        get_if(k, "name", c.dataset.name);
        get_if(k, "root", c.dataset.root);
        get_if(k, "synthetic_count", c.dataset.synthetic_count);
        get_if(k, "seed", c.dataset.seed);
        get_if(k, "verify_checksum", c.dataset.verify_checksum);
    }
    get_if(j, "out_dir", c.out_dir);
    c.channel.carrier_hz = c.constellation.carrier_hz;
    c.resolve();
    c.validate();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("config: cannot open " + path);
    json j;
    f >> j;
    return from_json(j);
}

void RunConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) fail("config: cannot write " + path);
    f << to_json().dump(2) << "\n";
}

}  // namespace satsem::harness
