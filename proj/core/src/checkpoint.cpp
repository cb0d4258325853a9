// SPDX-License-Identifier: Apache-2.0
#include "satsem/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "satsem/common.hpp"

namespace satsem::nn {

namespace {
constexpr char kMagic[8] = {'S', 'S', 'C', 'K', 'P', 'T', '1', '\n'};
}

void save_checkpoint(const std::string& path, const CheckpointInfo& info,
                     const std::vector<Param<float>*>& params) {
    nlohmann::json header;
    header["schema_version"] = 1;
    header["kind"] = info.kind;
    header["config"] = info.config;
    header["seed"] = info.seed;
    header["extra"] = info.extra;
    auto& manifest = header["params"] = nlohmann::json::array();
    for (const auto* p : params)
        manifest.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});

    const std::string hdr = header.dump();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail("save_checkpoint: cannot open " + path);
    f.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = hdr.size();
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(hdr.data(), std::streamsize(hdr.size()));
    for (const auto* p : params)
        f.write(reinterpret_cast<const char*>(p->value.data()),
                std::streamsize(sizeof(float) * p->value.size()));
    if (!f) fail("save_checkpoint: write failed for " + path);
}

namespace {

CheckpointInfo read_header(std::ifstream& f, const std::string& path) {
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        fail("checkpoint: bad magic in " + path);
    std::uint64_t len = 0;
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string hdr(len, '\0');
    f.read(hdr.data(), std::streamsize(len));
    if (!f) fail("checkpoint: truncated header in " + path);
    nlohmann::json j = nlohmann::json::parse(hdr);
    CheckpointInfo info;
    info.kind = j.at("kind").get<std::string>();
    info.config = j.at("config");
    info.seed = j.at("seed").get<std::uint64_t>();
    info.extra = j.value("extra", nlohmann::json::object());
    info.extra["__params"] = j.at("params");
    return info;
}

}  // namespace

CheckpointInfo load_checkpoint(const std::string& path,
                               const std::vector<Param<float>*>& params) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("load_checkpoint: cannot open " + path);
    CheckpointInfo info = read_header(f, path);
    const auto& manifest = info.extra.at("__params");
    if (manifest.size() != params.size())
        fail("load_checkpoint: parameter count mismatch in " + path);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& entry = manifest[i];
        Param<float>* p = params[i];
        if (entry.at("name").get<std::string>() != p->name)
            fail("load_checkpoint: parameter name mismatch: expected " + p->name + ", found " +
                 entry.at("name").get<std::string>());
        const Eigen::Index rows = entry.at("rows").get<Eigen::Index>();
        const Eigen::Index cols = entry.at("cols").get<Eigen::Index>();
        if (rows != p->value.rows() || cols != p->value.cols())
            fail("load_checkpoint: shape mismatch for " + p->name);
        f.read(reinterpret_cast<char*>(p->value.data()),
               std::streamsize(sizeof(float) * p->value.size()));
    }
    if (!f) fail("load_checkpoint: truncated blob in " + path);
    info.extra.erase("__params");
    return info;
}

CheckpointInfo peek_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("peek_checkpoint: cannot open " + path);
    CheckpointInfo info = read_header(f, path);
    info.extra.erase("__params");
    return info;
}

std::string file_content_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("file_content_hash: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(f.gcount()), h);
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace satsem::nn
