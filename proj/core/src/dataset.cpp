// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace satsem::harness {

namespace {

constexpr int kCifarDim = 32;
constexpr std::size_t kCifarRecord = 3073;           // label + 3*32*32
constexpr std::size_t kCifarBatchBytes = 30730000;   // 10000 records

std::vector<std::vector<float>> load_cifar_file(const std::string& path, bool verify) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) fail("cifar10: cannot open " + path);
    const auto size = static_cast<std::size_t>(f.tellg());
    if (verify && size != kCifarBatchBytes)
        fail("cifar10: checksum mismatch for " + path + " (unexpected size " +
             std::to_string(size) + ")");
    f.seekg(0);
    const std::size_t records = size / kCifarRecord;
    std::vector<std::vector<float>> images;
    images.reserve(records);
    std::vector<unsigned char> rec(kCifarRecord);
    for (std::size_t r = 0; r < records; ++r) {
        f.read(reinterpret_cast<char*>(rec.data()), std::streamsize(kCifarRecord));
        if (!f) fail("cifar10: truncated record in " + path);
        if (verify && rec[0] > 9) fail("cifar10: checksum mismatch (label byte) in " + path);
        std::vector<float> img(3072);
        for (int i = 0; i < 3072; ++i) img[i] = float(rec[1 + i]) / 255.0f;
        images.push_back(std::move(img));
    }
    return images;
}

float smoothstep(float e0, float e1, float x) {
    const float t = std::clamp((x - e0) / (e1 - e0), 0.0f, 1.0f);
    return t * t * (3.0f - 2.0f * t);
}

}  // namespace

std::vector<float> synthetic_image(int h, int w, Rng& rng) {
    std::vector<float> img(std::size_t(3) * h * w);
    // Bilinear gradient background between four random corner colors.
    float corner[4][3];
    for (auto& c : corner)
        for (float& v : c) v = float(rng.uniform());
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const float fy = float(i) / float(h - 1), fx = float(j) / float(w - 1);
            for (int c = 0; c < 3; ++c) {
                const float top = corner[0][c] * (1 - fx) + corner[1][c] * fx;
                const float bot = corner[2][c] * (1 - fx) + corner[3][c] * fx;
                img[(std::size_t(c) * h + i) * w + j] = top * (1 - fy) + bot * fy;
            }
        }
    // Layered soft shapes.
    const int shapes = 2 + int(rng.uniform_index(4));
    for (int s = 0; s < shapes; ++s) {
        const bool disk = rng.uniform() < 0.5;
        const float cx = float(rng.uniform(0.1, 0.9)) * w;
        const float cy = float(rng.uniform(0.1, 0.9)) * h;
        const float rx = float(rng.uniform(0.08, 0.35)) * w;
        const float ry = disk ? rx : float(rng.uniform(0.08, 0.35)) * h;
        const float ang = float(rng.uniform(0.0, kPi));
        const float ca = std::cos(ang), sa = std::sin(ang);
        float color[3];
        for (float& v : color) v = float(rng.uniform());
        const float alpha = float(rng.uniform(0.55, 1.0));
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const float dx = (j - cx) * ca + (i - cy) * sa;
                const float dy = -(j - cx) * sa + (i - cy) * ca;
                float m;
                if (disk)
                    m = 1.0f - smoothstep(0.85f, 1.05f,
                                          std::sqrt(dx * dx / (rx * rx) + dy * dy / (ry * ry)));
                else
                    m = (1.0f - smoothstep(0.9f, 1.05f, std::abs(dx) / rx)) *
                        (1.0f - smoothstep(0.9f, 1.05f, std::abs(dy) / ry));
                if (m <= 0.0f) continue;
                for (int c = 0; c < 3; ++c) {
                    float& px = img[(std::size_t(c) * h + i) * w + j];
                    px = px * (1.0f - alpha * m) + color[c] * alpha * m;
                }
            }
    }
    return img;
}

Dataset ingest_dataset(const DatasetConfig& cfg, int train_count, int val_count) {
    Dataset ds;
    ds.split_seed = cfg.seed;
    std::string root = cfg.root;
    if (const char* env = std::getenv("SATSEM_DATA_ROOT"); env && *env) root = env;

    std::vector<std::vector<float>> pool, test_pool;
    if (cfg.name == "cifar10") {
        ds.source = "cifar10:" + root;
        for (int b = 1; b <= 5; ++b)
            for (auto& img :
                 load_cifar_file(root + "/data_batch_" + std::to_string(b) + ".bin",
                                 cfg.verify_checksum))
                pool.push_back(std::move(img));
        test_pool = load_cifar_file(root + "/test_batch.bin", cfg.verify_checksum);
        ds.h = ds.w = kCifarDim;
    } else if (cfg.name == "synthetic") {
        ds.source = "synthetic";
        ds.h = ds.w = 32;
        Rng rng(cfg.seed);
        const int total = std::max(cfg.synthetic_count, train_count + val_count);
        pool.reserve(total);
        for (int i = 0; i < total; ++i) {
            Rng item = rng.split(i);
            pool.push_back(synthetic_image(ds.h, ds.w, item));
        }
        const int n_test = std::max(total / 6, 500);
        Rng trng(cfg.seed ^ 0x7e57da7aULL);
        test_pool.reserve(n_test);
        for (int i = 0; i < n_test; ++i) {
            Rng item = trng.split(i);
            test_pool.push_back(synthetic_image(ds.h, ds.w, item));
        }
    } else {
        fail("ingest_dataset: unknown dataset '" + cfg.name + "'");
    }

    require(int(pool.size()) >= train_count + val_count,
            "ingest_dataset: pool smaller than requested train+val split");

    // Deterministic disjoint split.
    std::vector<int> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    Rng srng(cfg.seed ^ 0x5eedULL);
    srng.shuffle(order.begin(), order.end());
    ds.train.reserve(train_count);
    ds.val.reserve(val_count);
    for (int i = 0; i < train_count; ++i) ds.train.push_back(pool[order[i]]);
    for (int i = 0; i < val_count; ++i) ds.val.push_back(pool[order[train_count + i]]);
    ds.test = std::move(test_pool);
    return ds;
}

}  // namespace satsem::harness
