// SPDX-License-Identifier: Apache-2.0
//
// Shared token-layout plumbing for both codecs: patch grids, merge/expand
// permutations, width-wise stream partition, and the packed real<->complex
// symbol convention (first half real parts, second half imaginary parts).
#pragma once

#include <memory>
#include <vector>

#include "satsem/common.hpp"
#include "satsem/nn/graph.hpp"

namespace satsem::codec {

using IndexVec = std::shared_ptr<std::vector<int>>;

// Channel-wise vectorization of non-overlapping p1 x p2 patches: token order
// is row-major over the patch grid; features are (c, dy, dx) row-major.
template <typename S>
void patchify_into(const float* chw, int h, int w, int p1, int p2, nn::Mat<S>& out,
                   Eigen::Index row0) {
    const int hp = h / p1, wp = w / p2;
    for (int pi = 0; pi < hp; ++pi)
        for (int pj = 0; pj < wp; ++pj) {
            S* dst = out.data() + (row0 + pi * wp + pj) * out.cols();
            int f = 0;
            for (int c = 0; c < 3; ++c)
                for (int dy = 0; dy < p1; ++dy)
                    for (int dx = 0; dx < p2; ++dx)
                        dst[f++] = S(chw[(c * h + pi * p1 + dy) * w + pj * p2 + dx]);
        }
}

template <typename S>
nn::Mat<S> patchify_batch(const std::vector<const float*>& images, int h, int w, int p1, int p2) {
    const int p = (h / p1) * (w / p2);
    nn::Mat<S> out(Eigen::Index(images.size()) * p, Eigen::Index(3) * p1 * p2);
    for (std::size_t b = 0; b < images.size(); ++b)
        patchify_into(images[b], h, w, p1, p2, out, Eigen::Index(b) * p);
    return out;
}

template <typename S>
void unpatchify(const nn::Mat<S>& tokens, Eigen::Index row0, int h, int w, int p1, int p2,
                float* chw) {
    const int wp = w / p2;
    const int hp = h / p1;
    for (int pi = 0; pi < hp; ++pi)
        for (int pj = 0; pj < wp; ++pj) {
            const S* src = tokens.data() + (row0 + pi * wp + pj) * tokens.cols();
            int f = 0;
            for (int c = 0; c < 3; ++c)
                for (int dy = 0; dy < p1; ++dy)
                    for (int dx = 0; dx < p2; ++dx)
                        chw[(c * h + pi * p1 + dy) * w + pj * p2 + dx] = float(src[f++]);
        }
}

// Gather order that groups each 2x2 patch neighborhood into four consecutive
// rows; a row-major reshape then yields the concatenated merge input.
inline IndexVec make_merge_perm(int batch, int hp, int wp) {
    auto idx = std::make_shared<std::vector<int>>();
    idx->reserve(std::size_t(batch) * hp * wp);
    for (int b = 0; b < batch; ++b)
        for (int ci = 0; ci < hp / 2; ++ci)
            for (int cj = 0; cj < wp / 2; ++cj)
                for (int di = 0; di < 2; ++di)
                    for (int dj = 0; dj < 2; ++dj)
                        idx->push_back((b * hp + 2 * ci + di) * wp + 2 * cj + dj);
    return idx;
}

// Inverse arrangement used by Expand: natural fine-grid order gathered from
// the (coarse token, 2x2 slot) row blocks produced by the expanding linear.
inline IndexVec make_expand_perm(int batch, int hp, int wp) {
    auto idx = std::make_shared<std::vector<int>>();
    idx->reserve(std::size_t(batch) * hp * wp);
    const int cw = wp / 2;
    for (int b = 0; b < batch; ++b)
        for (int i = 0; i < hp; ++i)
            for (int j = 0; j < wp; ++j) {
                const int coarse = (b * (hp / 2) + i / 2) * cw + j / 2;
                idx->push_back(coarse * 4 + (i % 2) * 2 + (j % 2));
            }
    return idx;
}

// Broadcast map: one row per (b, token), pointing at row b of a B-row matrix.
inline IndexVec make_repeat_index(int batch, int times) {
    auto idx = std::make_shared<std::vector<int>>();
    idx->reserve(std::size_t(batch) * times);
    for (int b = 0; b < batch; ++b)
        for (int t = 0; t < times; ++t) idx->push_back(b);
    return idx;
}

// Full-image row-major token index of patch p in width-wise stream s.
inline int nct_global_position(int p, int stream, int wp_full, int wp_sub) {
    const int i = p / wp_sub, j = p % wp_sub;
    return i * wp_full + stream * wp_sub + j;
}

// Position-table gather for one stream: (b, p) -> pi_s(p), batch-replicated.
inline IndexVec make_nct_pos_index(int batch, int stream, int hp, int wp_full, int wp_sub) {
    auto idx = std::make_shared<std::vector<int>>();
    idx->reserve(std::size_t(batch) * hp * wp_sub);
    for (int b = 0; b < batch; ++b)
        for (int p = 0; p < hp * wp_sub; ++p)
            idx->push_back(nct_global_position(p, stream, wp_full, wp_sub));
    return idx;
}

// Token-domain merge: natural full-grid order gathered from the vertical
// stack [stream0 tokens; stream1 tokens; ...] of per-stream batches.
inline IndexVec make_nct_merge_perm(int batch, int s_k, int hp, int wp_full) {
    auto idx = std::make_shared<std::vector<int>>();
    idx->reserve(std::size_t(batch) * hp * wp_full);
    const int wp_sub = wp_full / s_k;
    const int stream_rows = batch * hp * wp_sub;
    for (int b = 0; b < batch; ++b)
        for (int i = 0; i < hp; ++i)
            for (int j = 0; j < wp_full; ++j) {
                const int s = j / wp_sub;
                idx->push_back(s * stream_rows + (b * hp + i) * wp_sub + j % wp_sub);
            }
    return idx;
}

// Packed symbol token block -> complex stream. Token rows (T x C) flatten
// row-major to u in R^{2L}; z = u[0:L] + j u[L:2L].
template <typename S>
CVec unpack_symbols(const nn::Mat<S>& tokens, Eigen::Index row0, int rows_per_image) {
    const Eigen::Index c = tokens.cols();
    const int L = int(rows_per_image * c) / 2;
    const S* base = tokens.data() + row0 * c;
    CVec z(L);
    for (int l = 0; l < L; ++l) z(l) = cplx(double(base[l]), double(base[L + l]));
    return z;
}

template <typename S>
void pack_symbols(const CVec& z, nn::Mat<S>& tokens, Eigen::Index row0) {
    const Eigen::Index c = tokens.cols();
    const int L = int(z.size());
    S* base = tokens.data() + row0 * c;
    for (int l = 0; l < L; ++l) {
        base[l] = S(z(l).real());
        base[L + l] = S(z(l).imag());
    }
}

}  // namespace satsem::codec
