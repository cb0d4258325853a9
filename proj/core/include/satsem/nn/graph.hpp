// SPDX-License-Identifier: Apache-2.0
//
// Minimal define-by-run autodiff on Eigen row-major matrices. Values are
// computed eagerly at node creation; backward replays the tape in reverse.
// Templated on the scalar so training runs in float while gradient checks
// instantiate double.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "satsem/common.hpp"

namespace satsem::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
struct Param {
    std::string name;
    Mat<S> value;
    Mat<S> grad;

    void zero_grad() { grad = Mat<S>::Zero(value.rows(), value.cols()); }
    Eigen::Index size() const { return value.size(); }
};

template <typename S>
struct Node {
    Mat<S> val;
    Mat<S> grad;
    bool needs_grad = false;
    std::function<void(Node<S>&)> backward;  // scatters node.grad to parents
};

// Group-structured scaled-dot-product attention descriptor. Rows of q are
// grouped into `groups` blocks of `pq` rows; k/v into blocks of `pkv` rows.
// Heads live in column blocks of width head_dim.
template <typename S>
struct AttentionSpec {
    int groups = 1;
    int pq = 1;
    int pkv = 1;
    int heads = 1;
    int head_dim = 1;
    const std::vector<int>* bias_index = nullptr;     // pq*pkv entries into the bias table
    const std::vector<Mat<S>>* masks = nullptr;       // additive, one per window class
    int mask_period = 0;                              // class = group % mask_period
    std::vector<Mat<S>>* capture_probs = nullptr;     // test hook: softmax rows per (group,head)
};

template <typename S>
class Graph {
public:
    explicit Graph(bool train = true) : train_(train) {}

    bool training() const { return train_; }

    // ---- leaves ---------------------------------------------------------
    Node<S>* input(Mat<S> v) {
        Node<S>* n = alloc();
        n->val = std::move(v);
        return n;
    }

    Node<S>* param(Param<S>& p) {
        Node<S>* n = alloc();
        n->val = p.value;
        if (train_) {
            n->needs_grad = true;
            Param<S>* pp = &p;
            n->backward = [pp](Node<S>& self) {
                if (pp->grad.size() == 0) pp->zero_grad();
                pp->grad += self.grad;
            };
        }
        return n;
    }

    // ---- elementwise / linear algebra ------------------------------------
    Node<S>* matmul(Node<S>* a, Node<S>* b) {
        Node<S>* n = alloc(a, b);
        n->val.noalias() = a->val * b->val;
        if (n->needs_grad)
            n->backward = [this, a, b](Node<S>& self) {
                if (a->needs_grad) acc(a).noalias() += self.grad * b->val.transpose();
                if (b->needs_grad) acc(b).noalias() += a->val.transpose() * self.grad;
            };
        return n;
    }

    // x: N x I, w: I x O, b: 1 x O (optional).
    Node<S>* linear(Node<S>* x, Node<S>* w, Node<S>* b = nullptr) {
        Node<S>* n = b ? alloc(x, w, b) : alloc(x, w);
        n->val.noalias() = x->val * w->val;
        if (b) n->val.rowwise() += b->val.row(0);
        if (n->needs_grad)
            n->backward = [this, x, w, b](Node<S>& self) {
                if (x->needs_grad) acc(x).noalias() += self.grad * w->val.transpose();
                if (w->needs_grad) acc(w).noalias() += x->val.transpose() * self.grad;
                if (b && b->needs_grad) acc(b).row(0) += self.grad.colwise().sum();
            };
        return n;
    }

    Node<S>* add(Node<S>* a, Node<S>* b) {
        Node<S>* n = alloc(a, b);
        n->val = a->val + b->val;
        if (n->needs_grad)
            n->backward = [this, a, b](Node<S>& self) {
                if (a->needs_grad) acc(a) += self.grad;
                if (b->needs_grad) acc(b) += self.grad;
            };
        return n;
    }

    Node<S>* add_const(Node<S>* x, const Mat<S>& c) {
        Node<S>* n = alloc(x);
        n->val = x->val + c;
        if (n->needs_grad)
            n->backward = [this, x](Node<S>& self) { acc(x) += self.grad; };
        return n;
    }

    Node<S>* scale(Node<S>* x, S c) {
        Node<S>* n = alloc(x);
        n->val = c * x->val;
        if (n->needs_grad)
            n->backward = [this, x, c](Node<S>& self) { acc(x) += c * self.grad; };
        return n;
    }

    // y = g * x with a 1x1 gate parameter node.
    Node<S>* gate(Node<S>* x, Node<S>* g) {
        Node<S>* n = alloc(x, g);
        n->val = g->val(0, 0) * x->val;
        if (n->needs_grad)
            n->backward = [this, x, g](Node<S>& self) {
                if (x->needs_grad) acc(x) += g->val(0, 0) * self.grad;
                if (g->needs_grad) acc(g)(0, 0) += (x->val.array() * self.grad.array()).sum();
            };
        return n;
    }

    Node<S>* gelu(Node<S>* x) {
        Node<S>* n = alloc(x);
        n->val = x->val.unaryExpr([](S v) {
            return S(0.5) * v * (S(1) + std::erf(v * S(0.7071067811865476)));
        });
        if (n->needs_grad)
            n->backward = [this, x](Node<S>& self) {
                acc(x) += self.grad.cwiseProduct(x->val.unaryExpr([](S v) {
                    const S cdf = S(0.5) * (S(1) + std::erf(v * S(0.7071067811865476)));
                    const S pdf = S(0.3989422804014327) * std::exp(S(-0.5) * v * v);
                    return cdf + v * pdf;
                }));
            };
        return n;
    }

    // Row-wise layer normalization with affine parameters gain/bias (1 x C).
    Node<S>* layernorm(Node<S>* x, Node<S>* gain, Node<S>* bias, S eps = S(1e-5)) {
        Node<S>* n = alloc(x, gain, bias);
        const Eigen::Index C = x->val.cols();
        Mat<S> xhat(x->val.rows(), C);
        Eigen::Matrix<S, Eigen::Dynamic, 1> inv_std(x->val.rows());
        for (Eigen::Index r = 0; r < x->val.rows(); ++r) {
            const S mu = x->val.row(r).mean();
            const S var = (x->val.row(r).array() - mu).square().sum() / S(C);
            const S is = S(1) / std::sqrt(var + eps);
            inv_std(r) = is;
            xhat.row(r) = ((x->val.row(r).array() - mu) * is).matrix();
        }
        n->val = (xhat.array().rowwise() * gain->val.row(0).array()).matrix();
        n->val.rowwise() += bias->val.row(0);
        if (n->needs_grad) {
            auto xh = std::make_shared<Mat<S>>(std::move(xhat));
            auto is = std::make_shared<Eigen::Matrix<S, Eigen::Dynamic, 1>>(std::move(inv_std));
            n->backward = [this, x, gain, bias, xh, is, C](Node<S>& self) {
                if (gain->needs_grad)
                    acc(gain).row(0) += (self.grad.array() * xh->array()).colwise().sum().matrix();
                if (bias->needs_grad) acc(bias).row(0) += self.grad.colwise().sum();
                if (!x->needs_grad) return;
                Mat<S>& gx = acc(x);
                for (Eigen::Index r = 0; r < self.grad.rows(); ++r) {
                    auto dxhat = (self.grad.row(r).array() * gain->val.row(0).array()).eval();
                    const S m1 = dxhat.mean();
                    const S m2 = (dxhat * xh->row(r).array()).mean();
                    gx.row(r).array() +=
                        (*is)(r) * (dxhat - m1 - xh->row(r).array() * m2);
                }
            };
        }
        return n;
    }

    Node<S>* softmax_rows(Node<S>* x) {
        Node<S>* n = alloc(x);
        n->val = x->val;
        for (Eigen::Index r = 0; r < n->val.rows(); ++r) {
            auto row = n->val.row(r).array();
            row -= row.maxCoeff();
            row = row.exp();
            row /= row.sum();
        }
        if (n->needs_grad)
            n->backward = [this, x](Node<S>& self) {
                Mat<S>& gx = acc(x);
                for (Eigen::Index r = 0; r < self.grad.rows(); ++r) {
                    const S dot = (self.grad.row(r).array() * self.val.row(r).array()).sum();
                    gx.row(r).array() +=
                        self.val.row(r).array() * (self.grad.row(r).array() - dot);
                }
            };
        return n;
    }

    // ---- shape plumbing ---------------------------------------------------
    Node<S>* gather_rows(Node<S>* x, std::shared_ptr<const std::vector<int>> idx) {
        Node<S>* n = alloc(x);
        n->val.resize(static_cast<Eigen::Index>(idx->size()), x->val.cols());
        for (std::size_t i = 0; i < idx->size(); ++i) n->val.row(i) = x->val.row((*idx)[i]);
        if (n->needs_grad)
            n->backward = [this, x, idx](Node<S>& self) {
                Mat<S>& gx = acc(x);
                for (std::size_t i = 0; i < idx->size(); ++i)
                    gx.row((*idx)[i]) += self.grad.row(i);
            };
        return n;
    }

    // Row-major reinterpretation, element order preserved.
    Node<S>* reshape(Node<S>* x, Eigen::Index rows, Eigen::Index cols) {
        require(rows * cols == x->val.size(), "reshape: element count mismatch");
        Node<S>* n = alloc(x);
        n->val = Eigen::Map<const Mat<S>>(x->val.data(), rows, cols);
        if (n->needs_grad)
            n->backward = [this, x](Node<S>& self) {
                acc(x) +=
                    Eigen::Map<const Mat<S>>(self.grad.data(), x->val.rows(), x->val.cols());
            };
        return n;
    }

    Node<S>* concat_cols(const std::vector<Node<S>*>& xs) {
        Eigen::Index cols = 0;
        for (auto* x : xs) cols += x->val.cols();
        Node<S>* n = alloc_multi(xs);
        n->val.resize(xs[0]->val.rows(), cols);
        Eigen::Index at = 0;
        for (auto* x : xs) {
            n->val.middleCols(at, x->val.cols()) = x->val;
            at += x->val.cols();
        }
        if (n->needs_grad) {
            auto parts = std::make_shared<std::vector<Node<S>*>>(xs);
            n->backward = [this, parts](Node<S>& self) {
                Eigen::Index at = 0;
                for (auto* x : *parts) {
                    if (x->needs_grad) acc(x) += self.grad.middleCols(at, x->val.cols());
                    at += x->val.cols();
                }
            };
        }
        return n;
    }

    Node<S>* concat_rows(const std::vector<Node<S>*>& xs) {
        Eigen::Index rows = 0;
        for (auto* x : xs) rows += x->val.rows();
        Node<S>* n = alloc_multi(xs);
        n->val.resize(rows, xs[0]->val.cols());
        Eigen::Index at = 0;
        for (auto* x : xs) {
            n->val.middleRows(at, x->val.rows()) = x->val;
            at += x->val.rows();
        }
        if (n->needs_grad) {
            auto parts = std::make_shared<std::vector<Node<S>*>>(xs);
            n->backward = [this, parts](Node<S>& self) {
                Eigen::Index at = 0;
                for (auto* x : *parts) {
                    if (x->needs_grad) acc(x) += self.grad.middleRows(at, x->val.rows());
                    at += x->val.rows();
                }
            };
        }
        return n;
    }

    Node<S>* slice_cols(Node<S>* x, Eigen::Index start, Eigen::Index count) {
        Node<S>* n = alloc(x);
        n->val = x->val.middleCols(start, count);
        if (n->needs_grad)
            n->backward = [this, x, start, count](Node<S>& self) {
                acc(x).middleCols(start, count) += self.grad;
            };
        return n;
    }

    // ---- attention ---------------------------------------------------------
    Node<S>* attention(Node<S>* q, Node<S>* k, Node<S>* v, Node<S>* bias_table,
                       const AttentionSpec<S>& spec) {
        Node<S>* n = bias_table ? alloc(q, k, v, bias_table) : alloc(q, k, v);
        const int G = spec.groups, Pq = spec.pq, Pkv = spec.pkv;
        const int H = spec.heads, Dh = spec.head_dim;
        const S inv_sqrt = S(1) / std::sqrt(S(Dh));
        n->val.resize(Eigen::Index(G) * Pq, Eigen::Index(H) * Dh);

        // Per-head bias matrices resolved from the table once per call.
        std::vector<Mat<S>> bias_mats;
        if (bias_table && spec.bias_index) {
            bias_mats.resize(H, Mat<S>(Pq, Pkv));
            for (int h = 0; h < H; ++h)
                for (int i = 0; i < Pq; ++i)
                    for (int j = 0; j < Pkv; ++j)
                        bias_mats[h](i, j) = bias_table->val(h, (*spec.bias_index)[i * Pkv + j]);
        }

        auto probs = std::make_shared<std::vector<Mat<S>>>();
        const bool keep = n->needs_grad || spec.capture_probs;
        if (keep) probs->resize(std::size_t(G) * H);

        Mat<S> e(Pq, Pkv);
        for (int g = 0; g < G; ++g) {
            const Mat<S>* mask = nullptr;
            if (spec.masks && spec.mask_period > 0) {
                const Mat<S>& m = (*spec.masks)[g % spec.mask_period];
                if (m.size() > 0) mask = &m;
            }
            for (int h = 0; h < H; ++h) {
                auto Q = q->val.block(Eigen::Index(g) * Pq, Eigen::Index(h) * Dh, Pq, Dh);
                auto K = k->val.block(Eigen::Index(g) * Pkv, Eigen::Index(h) * Dh, Pkv, Dh);
                auto V = v->val.block(Eigen::Index(g) * Pkv, Eigen::Index(h) * Dh, Pkv, Dh);
                e.noalias() = Q * K.transpose();
                e *= inv_sqrt;
                if (!bias_mats.empty()) e += bias_mats[h];
                if (mask) e += *mask;
                for (int r = 0; r < Pq; ++r) {
                    auto row = e.row(r).array();
                    row -= row.maxCoeff();
                    row = row.exp();
                    row /= row.sum();
                }
                n->val.block(Eigen::Index(g) * Pq, Eigen::Index(h) * Dh, Pq, Dh).noalias() =
                    e * V;
                if (keep) (*probs)[std::size_t(g) * H + h] = e;
            }
        }
        if (spec.capture_probs) *spec.capture_probs = *probs;

        if (n->needs_grad) {
            AttentionSpec<S> sp = spec;
            sp.capture_probs = nullptr;
            n->backward = [this, q, k, v, bias_table, sp, probs, inv_sqrt](Node<S>& self) {
                const int G = sp.groups, Pq = sp.pq, Pkv = sp.pkv, H = sp.heads, Dh = sp.head_dim;
                Mat<S>* gq = q->needs_grad ? &acc(q) : nullptr;
                Mat<S>* gk = k->needs_grad ? &acc(k) : nullptr;
                Mat<S>* gv = v->needs_grad ? &acc(v) : nullptr;
                Mat<S>* gb = (bias_table && bias_table->needs_grad) ? &acc(bias_table) : nullptr;
                Mat<S> ds(Pq, Pkv), de(Pq, Pkv);
                for (int g = 0; g < G; ++g) {
                    for (int h = 0; h < H; ++h) {
                        const Mat<S>& P = (*probs)[std::size_t(g) * H + h];
                        auto Q = q->val.block(Eigen::Index(g) * Pq, Eigen::Index(h) * Dh, Pq, Dh);
                        auto K = k->val.block(Eigen::Index(g) * Pkv, Eigen::Index(h) * Dh, Pkv, Dh);
                        auto V = v->val.block(Eigen::Index(g) * Pkv, Eigen::Index(h) * Dh, Pkv, Dh);
                        auto dO =
                            self.grad.block(Eigen::Index(g) * Pq, Eigen::Index(h) * Dh, Pq, Dh);
                        if (gv)
                            gv->block(Eigen::Index(g) * Pkv, Eigen::Index(h) * Dh, Pkv, Dh)
                                .noalias() += P.transpose() * dO;
                        ds.noalias() = dO * V.transpose();
                        for (int r = 0; r < Pq; ++r) {
                            const S dot = (ds.row(r).array() * P.row(r).array()).sum();
                            de.row(r).array() = P.row(r).array() * (ds.row(r).array() - dot);
                        }
                        if (gb && sp.bias_index)
                            for (int i = 0; i < Pq; ++i)
                                for (int j = 0; j < Pkv; ++j)
                                    (*gb)(h, (*sp.bias_index)[i * Pkv + j]) += de(i, j);
                        de *= inv_sqrt;
                        if (gq)
                            gq->block(Eigen::Index(g) * Pq, Eigen::Index(h) * Dh, Pq, Dh)
                                .noalias() += de * K;
                        if (gk)
                            gk->block(Eigen::Index(g) * Pkv, Eigen::Index(h) * Dh, Pkv, Dh)
                                .noalias() += de.transpose() * Q;
                    }
                }
            };
        }
        return n;
    }

    // ---- depthwise 3x3 convolution over a (B, H, W) token grid --------------
    // x rows are (b, i, j) in row-major order, channels in columns. Zero pad.
    Node<S>* depthwise3x3(Node<S>* x, Node<S>* kernel /*9 x C*/, Node<S>* bias /*1 x C*/, int B,
                          int H, int W) {
        Node<S>* n = alloc(x, kernel, bias);
        const Eigen::Index C = x->val.cols();
        n->val = Mat<S>::Zero(x->val.rows(), C);
        n->val.rowwise() += bias->val.row(0);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int krow = (dy + 1) * 3 + (dx + 1);
                const int i0 = std::max(0, -dy), i1 = H - std::max(0, dy);
                const int j0 = std::max(0, -dx), j1 = W - std::max(0, dx);
                if (i0 >= i1 || j0 >= j1) continue;
                for (int b = 0; b < B; ++b)
                    for (int i = i0; i < i1; ++i) {
                        const Eigen::Index dst = (Eigen::Index(b) * H + i) * W + j0;
                        const Eigen::Index src = (Eigen::Index(b) * H + i + dy) * W + j0 + dx;
                        const Eigen::Index len = j1 - j0;
                        n->val.middleRows(dst, len).array() +=
                            x->val.middleRows(src, len).array().rowwise() *
                            kernel->val.row(krow).array();
                    }
            }
        if (n->needs_grad)
            n->backward = [this, x, kernel, bias, B, H, W](Node<S>& self) {
                if (bias->needs_grad) acc(bias).row(0) += self.grad.colwise().sum();
                Mat<S>* gx = x->needs_grad ? &acc(x) : nullptr;
                Mat<S>* gk = kernel->needs_grad ? &acc(kernel) : nullptr;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int krow = (dy + 1) * 3 + (dx + 1);
                        const int i0 = std::max(0, -dy), i1 = H - std::max(0, dy);
                        const int j0 = std::max(0, -dx), j1 = W - std::max(0, dx);
                        if (i0 >= i1 || j0 >= j1) continue;
                        for (int b = 0; b < B; ++b)
                            for (int i = i0; i < i1; ++i) {
                                const Eigen::Index dst = (Eigen::Index(b) * H + i) * W + j0;
                                const Eigen::Index src =
                                    (Eigen::Index(b) * H + i + dy) * W + j0 + dx;
                                const Eigen::Index len = j1 - j0;
                                if (gx)
                                    gx->middleRows(src, len).array() +=
                                        self.grad.middleRows(dst, len).array().rowwise() *
                                        kernel->val.row(krow).array();
                                if (gk)
                                    gk->row(krow).array() += (self.grad.middleRows(dst, len).array() *
                                                              x->val.middleRows(src, len).array())
                                                                 .colwise()
                                                                 .sum();
                            }
                    }
            };
        return n;
    }

    // ---- symbol-domain ops ---------------------------------------------------
    // Scales each consecutive block of `rows_per_block` rows so that the
    // flattened block u satisfies ||u||^2 = (elements/2), i.e. the packed
    // complex stream has unit average power.
    Node<S>* power_normalize(Node<S>* x, int rows_per_block) {
        Node<S>* n = alloc(x);
        const Eigen::Index R = x->val.rows(), C = x->val.cols();
        require(R % rows_per_block == 0, "power_normalize: rows not divisible into blocks");
        const Eigen::Index blocks = R / rows_per_block;
        const double target = 0.5 * double(rows_per_block) * double(C);
        n->val.resize(R, C);
        auto scales = std::make_shared<std::vector<S>>(blocks);
        for (Eigen::Index b = 0; b < blocks; ++b) {
            auto blk = x->val.middleRows(b * rows_per_block, rows_per_block);
            const double ss = blk.template cast<double>().squaredNorm();
            const S c = ss > 0.0 ? S(std::sqrt(target / ss)) : S(0);
            (*scales)[b] = c;
            n->val.middleRows(b * rows_per_block, rows_per_block) = c * blk;
        }
        if (n->needs_grad)
            n->backward = [this, x, rows_per_block, scales](Node<S>& self) {
                Mat<S>& gx = acc(x);
                const Eigen::Index blocks = x->val.rows() / rows_per_block;
                for (Eigen::Index b = 0; b < blocks; ++b) {
                    auto xb = x->val.middleRows(b * rows_per_block, rows_per_block);
                    auto gb = self.grad.middleRows(b * rows_per_block, rows_per_block);
                    const S c = (*scales)[b];
                    if (c == S(0)) continue;
                    const S ss = xb.squaredNorm();
                    const S dot = (xb.array() * gb.array()).sum();
                    gx.middleRows(b * rows_per_block, rows_per_block) +=
                        c * (gb - (dot / ss) * xb);
                }
            };
        return n;
    }

    // Complex affine stream mixing: out = sum_i alpha_i (*) z_i + noise, where
    // each operand is a packed block matrix (per-image blocks of `rows_per_image`
    // rows; first half of each block holds real parts, second half imaginary).
    // alpha: per image, per input stream. noise: same packed layout as out.
    Node<S>* complex_mix(const std::vector<Node<S>*>& streams,
                         std::shared_ptr<const std::vector<std::vector<std::complex<S>>>> alpha,
                         std::shared_ptr<const Mat<S>> noise, int rows_per_image) {
        Node<S>* n = alloc_multi(streams);
        const Eigen::Index R = streams[0]->val.rows(), C = streams[0]->val.cols();
        const int half = rows_per_image / 2;
        require(rows_per_image % 2 == 0, "complex_mix: odd block height");
        const Eigen::Index B = R / rows_per_image;
        n->val = *noise;
        for (Eigen::Index b = 0; b < B; ++b) {
            const Eigen::Index at = b * rows_per_image;
            auto out_re = n->val.middleRows(at, half);
            auto out_im = n->val.middleRows(at + half, half);
            for (std::size_t i = 0; i < streams.size(); ++i) {
                const std::complex<S> a = (*alpha)[b][i];
                auto zre = streams[i]->val.middleRows(at, half);
                auto zim = streams[i]->val.middleRows(at + half, half);
                out_re.noalias() += a.real() * zre - a.imag() * zim;
                out_im.noalias() += a.real() * zim + a.imag() * zre;
            }
        }
        if (n->needs_grad) {
            auto parts = std::make_shared<std::vector<Node<S>*>>(streams);
            n->backward = [this, parts, alpha, rows_per_image](Node<S>& self) {
                const int half = rows_per_image / 2;
                const Eigen::Index B = self.grad.rows() / rows_per_image;
                for (std::size_t i = 0; i < parts->size(); ++i) {
                    Node<S>* z = (*parts)[i];
                    if (!z->needs_grad) continue;
                    Mat<S>& gz = acc(z);
                    for (Eigen::Index b = 0; b < B; ++b) {
                        const Eigen::Index at = b * rows_per_image;
                        const std::complex<S> a = (*alpha)[b][i];
                        auto gre = self.grad.middleRows(at, half);
                        auto gim = self.grad.middleRows(at + half, half);
                        // multiply incoming gradient by conj(alpha)
                        gz.middleRows(at, half).noalias() += a.real() * gre + a.imag() * gim;
                        gz.middleRows(at + half, half).noalias() +=
                            a.real() * gim - a.imag() * gre;
                    }
                }
            };
        }
        return n;
    }

    // Patchified raw received signal Y = sum_i g_i z_i^T + N for the gated
    // raw-signal branch. Output rows: (b, p) over p_sub tokens per image; cols:
    // [Re Y(n,l) symbol-major over the token's chunk | Im ...].
    // g: per image, per stream, length n_r. noise: packed like the output.
    Node<S>* raw_receive(const std::vector<Node<S>*>& streams,
                         std::shared_ptr<const std::vector<std::vector<std::vector<std::complex<S>>>>> g,
                         std::shared_ptr<const Mat<S>> noise, int rows_per_image, int p_sub,
                         int n_r) {
        Node<S>* n = alloc_multi(streams);
        const Eigen::Index C = streams[0]->val.cols();
        const int L = int(rows_per_image * C) / 2;  // complex symbols per image
        const int half = rows_per_image / 2;
        const Eigen::Index B = streams[0]->val.rows() / rows_per_image;
        const int lc = L / p_sub;         // symbols per token
        const int width = 2 * n_r * lc;   // output feature width
        n->val = *noise;
        for (Eigen::Index b = 0; b < B; ++b) {
            for (std::size_t i = 0; i < streams.size(); ++i) {
                const auto& gi = (*g)[b][i];
                // packed accessors for z_i of image b
                const S* zre = streams[i]->val.data() + b * rows_per_image * C;
                const S* zim = zre + Eigen::Index(half) * C;
                for (int p = 0; p < p_sub; ++p) {
                    S* out = n->val.data() + (b * p_sub + p) * width;
                    for (int l = 0; l < lc; ++l) {
                        const int sym = p * lc + l;
                        const S zr = zre[sym], zi = zim[sym];
                        for (int a = 0; a < n_r; ++a) {
                            const std::complex<S> gv = gi[a];
                            out[l * n_r + a] += gv.real() * zr - gv.imag() * zi;
                            out[n_r * lc + l * n_r + a] += gv.real() * zi + gv.imag() * zr;
                        }
                    }
                }
            }
        }
        if (n->needs_grad) {
            auto parts = std::make_shared<std::vector<Node<S>*>>(streams);
            n->backward = [this, parts, g, rows_per_image, p_sub, n_r](Node<S>& self) {
                const Eigen::Index C = (*parts)[0]->val.cols();
                const int L = int(rows_per_image * C) / 2;
                const int half = rows_per_image / 2;
                const Eigen::Index B = (*parts)[0]->val.rows() / rows_per_image;
                const int lc = L / p_sub;
                const int width = 2 * n_r * lc;
                for (std::size_t i = 0; i < parts->size(); ++i) {
                    Node<S>* z = (*parts)[i];
                    if (!z->needs_grad) continue;
                    Mat<S>& gz = acc(z);
                    for (Eigen::Index b = 0; b < B; ++b) {
                        const auto& gi = (*g)[b][i];
                        S* dre = gz.data() + b * rows_per_image * C;
                        S* dim = dre + Eigen::Index(half) * C;
                        for (int p = 0; p < p_sub; ++p) {
                            const S* gout = self.grad.data() + (b * p_sub + p) * width;
                            for (int l = 0; l < lc; ++l) {
                                const int sym = p * lc + l;
                                S accr = S(0), acci = S(0);
                                for (int a = 0; a < n_r; ++a) {
                                    const std::complex<S> gv = gi[a];
                                    const S gr = gout[l * n_r + a];
                                    const S gm = gout[n_r * lc + l * n_r + a];
                                    accr += gv.real() * gr + gv.imag() * gm;
                                    acci += gv.real() * gm - gv.imag() * gr;
                                }
                                dre[sym] += accr;
                                dim[sym] += acci;
                            }
                        }
                    }
                }
            };
        }
        return n;
    }

    // ---- losses ---------------------------------------------------------------
    Node<S>* mse_loss(Node<S>* pred, std::shared_ptr<const Mat<S>> target) {
        Node<S>* n = alloc(pred);
        const S N = S(pred->val.size());
        n->val.resize(1, 1);
        n->val(0, 0) = (pred->val - *target).squaredNorm() / N;
        if (n->needs_grad)
            n->backward = [this, pred, target, N](Node<S>& self) {
                acc(pred) += (S(2) / N) * self.grad(0, 0) * (pred->val - *target);
            };
        return n;
    }

    Node<S>* cross_entropy(Node<S>* logits, std::shared_ptr<const std::vector<int>> labels) {
        Node<S>* n = alloc(logits);
        const Eigen::Index B = logits->val.rows();
        Mat<S> probs = logits->val;
        S loss = S(0);
        for (Eigen::Index r = 0; r < B; ++r) {
            auto row = probs.row(r).array();
            row -= row.maxCoeff();
            row = row.exp();
            row /= row.sum();
            loss -= std::log(std::max(probs(r, (*labels)[r]), S(1e-30)));
        }
        n->val.resize(1, 1);
        n->val(0, 0) = loss / S(B);
        if (n->needs_grad) {
            auto pr = std::make_shared<Mat<S>>(std::move(probs));
            n->backward = [this, logits, labels, pr, B](Node<S>& self) {
                Mat<S> d = *pr;
                for (Eigen::Index r = 0; r < B; ++r) d(r, (*labels)[r]) -= S(1);
                acc(logits) += (self.grad(0, 0) / S(B)) * d;
            };
        }
        return n;
    }

    // ---- engine ---------------------------------------------------------------
    void backward(Node<S>* loss) {
        require(loss->val.size() == 1, "backward: loss must be a scalar node");
        loss->grad = Mat<S>::Ones(1, 1);
        for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
            Node<S>& node = *it;
            if (node.backward && node.grad.size() > 0) node.backward(node);
        }
    }

    std::size_t size() const { return tape_.size(); }

private:
    Node<S>* alloc() {
        tape_.emplace_back();
        return &tape_.back();
    }
    template <typename... Parents>
    Node<S>* alloc(Parents*... ps) {
        Node<S>* n = alloc();
        n->needs_grad = train_ && (ps->needs_grad || ...);
        return n;
    }
    Node<S>* alloc_multi(const std::vector<Node<S>*>& ps) {
        Node<S>* n = alloc();
        if (train_)
            for (auto* p : ps) n->needs_grad = n->needs_grad || p->needs_grad;
        return n;
    }

    // Lazily allocated gradient accumulator.
    Mat<S>& acc(Node<S>* n) {
        if (n->grad.size() == 0) n->grad = Mat<S>::Zero(n->val.rows(), n->val.cols());
        return n->grad;
    }

    std::deque<Node<S>> tape_;
    bool train_;
};

}  // namespace satsem::nn
