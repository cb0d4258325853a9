// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "satsem/nn/modules.hpp"
#include "satsem/nn/optim.hpp"

using namespace satsem;
using namespace satsem::nn;

namespace {

Mat<double> random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat<double> m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// Central-difference check of d(loss)/d(param) for every parameter coordinate.
// `build` must construct the scalar loss node from a fresh graph.
template <typename BuildFn>
void gradcheck(const std::vector<Param<double>*>& params, BuildFn build, double tol = 1e-3,
               double eps = 1e-5) {
    for (auto* p : params) p->grad = Mat<double>();
    std::vector<Mat<double>> analytic;
    {
        Graph<double> g(true);
        Node<double>* loss = build(g);
        REQUIRE(loss->val.size() == 1);
        g.backward(loss);
    }
    for (auto* p : params)
        analytic.push_back(p->grad.size() ? p->grad
                                          : Mat<double>::Zero(p->value.rows(), p->value.cols()));

    const auto eval = [&]() {
        Graph<double> g(false);
        return build(g)->val(0, 0);
    };

    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param<double>& p = *params[pi];
        for (Eigen::Index k = 0; k < p.value.size(); ++k) {
            const double keep = p.value.data()[k];
            p.value.data()[k] = keep + eps;
            const double lp = eval();
            p.value.data()[k] = keep - eps;
            const double lm = eval();
            p.value.data()[k] = keep;
            const double num = (lp - lm) / (2.0 * eps);
            const double ana = analytic[pi].data()[k];
            const double denom = std::max({std::abs(num), std::abs(ana), 1e-6});
            worst = std::max(worst, std::abs(num - ana) / denom);
        }
    }
    CHECK(worst < tol);
}

}  // namespace

TEST_CASE("core op gradients match central differences") {
    Rng rng(3);
    Param<double> x{"x", random_mat(6, 10, rng)};
    Param<double> w{"w", random_mat(10, 4, rng, 0.3)};
    Param<double> b{"b", random_mat(1, 4, rng, 0.1)};
    auto target = std::make_shared<const Mat<double>>(random_mat(6, 4, rng));

    SUBCASE("linear + gelu") {
        gradcheck({&x, &w, &b}, [&](Graph<double>& g) {
            return g.mse_loss(g.gelu(g.linear(g.param(x), g.param(w), g.param(b))), target);
        });
    }
    SUBCASE("layernorm") {
        Param<double> gain{"g", random_mat(1, 10, rng, 0.2)};
        Param<double> beta{"be", random_mat(1, 10, rng, 0.2)};
        auto t10 = std::make_shared<const Mat<double>>(random_mat(6, 10, rng));
        gradcheck({&x, &gain, &beta}, [&](Graph<double>& g) {
            return g.mse_loss(g.layernorm(g.param(x), g.param(gain), g.param(beta)), t10);
        });
    }
    SUBCASE("softmax rows") {
        auto t10 = std::make_shared<const Mat<double>>(random_mat(6, 10, rng));
        gradcheck({&x}, [&](Graph<double>& g) {
            return g.mse_loss(g.softmax_rows(g.param(x)), t10);
        });
    }
    SUBCASE("gather/reshape/concat/slice plumbing") {
        auto idx = std::make_shared<std::vector<int>>(std::vector<int>{3, 1, 1, 5, 0, 2});
        auto t = std::make_shared<const Mat<double>>(random_mat(6, 10, rng));
        gradcheck({&x}, [&](Graph<double>& g) {
            Node<double>* gx = g.gather_rows(g.param(x), idx);
            Node<double>* r = g.reshape(gx, 12, 5);
            Node<double>* back = g.reshape(r, 6, 10);
            Node<double>* cat = g.concat_cols({g.slice_cols(back, 0, 4),
                                               g.slice_cols(back, 4, 6)});
            return g.mse_loss(cat, t);
        });
    }
    SUBCASE("cross entropy") {
        auto labels = std::make_shared<std::vector<int>>(std::vector<int>{0, 1, 1, 0, 1, 0});
        Param<double> logits{"l", random_mat(6, 2, rng)};
        gradcheck({&logits}, [&](Graph<double>& g) {
            return g.cross_entropy(g.param(logits), labels);
        });
    }
}

TEST_CASE("power normalization: unit power forward, exact gradients") {
    Rng rng(5);
    Param<double> x{"x", random_mat(8, 4, rng)};
    {
        Graph<double> g(false);
        Node<double>* y = g.power_normalize(g.param(x), 4);
        // Each 4-row block packs 8 complex symbols; mean power must be 1.
        for (int b = 0; b < 2; ++b) {
            const double ss = y->val.middleRows(4 * b, 4).squaredNorm();
            CHECK(ss / 8.0 == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    auto t = std::make_shared<const Mat<double>>(random_mat(8, 4, rng));
    gradcheck({&x}, [&](Graph<double>& g) {
        return g.mse_loss(g.power_normalize(g.param(x), 4), t);
    });
}

TEST_CASE("complex mixing and raw receive: forward identities and gradients") {
    Rng rng(7);
    const int rows = 4, cols = 4;  // L = 8 complex symbols per image
    Param<double> z0{"z0", random_mat(2 * rows, cols, rng)};
    Param<double> z1{"z1", random_mat(2 * rows, cols, rng)};

    auto alpha = std::make_shared<std::vector<std::vector<std::complex<double>>>>(2);
    (*alpha)[0] = {{1.0, 0.0}, {0.3, -0.2}};
    (*alpha)[1] = {{1.0, 0.0}, {-0.1, 0.45}};
    auto noise = std::make_shared<Mat<double>>(random_mat(2 * rows, cols, rng, 0.01));

    SUBCASE("mix equals the hand-computed complex combination") {
        Graph<double> g(false);
        auto* out = g.complex_mix({g.param(z0), g.param(z1)}, alpha, noise, rows);
        const int L = rows * cols / 2;
        for (int b = 0; b < 2; ++b)
            for (int l = 0; l < L; ++l) {
                const auto at = [&](const Mat<double>& m, int half) {
                    return m.data()[b * rows * cols + half * L + l];
                };
                const std::complex<double> a0 = (*alpha)[b][0], a1 = (*alpha)[b][1];
                const std::complex<double> zz0{at(z0.value, 0), at(z0.value, 1)};
                const std::complex<double> zz1{at(z1.value, 0), at(z1.value, 1)};
                const std::complex<double> nv{at(*noise, 0), at(*noise, 1)};
                const std::complex<double> expect = a0 * zz0 + a1 * zz1 + nv;
                CHECK(at(out->val, 0) == doctest::Approx(expect.real()).epsilon(1e-12));
                CHECK(at(out->val, 1) == doctest::Approx(expect.imag()).epsilon(1e-12));
            }
    }
    SUBCASE("mix gradients") {
        auto t = std::make_shared<const Mat<double>>(random_mat(2 * rows, cols, rng));
        gradcheck({&z0, &z1}, [&](Graph<double>& g) {
            return g.mse_loss(g.complex_mix({g.param(z0), g.param(z1)}, alpha, noise, rows), t);
        });
    }
    SUBCASE("raw receive gradients") {
        const int n_r = 2, p_sub = 4;
        auto gvec = std::make_shared<
            std::vector<std::vector<std::vector<std::complex<double>>>>>(2);
        for (int b = 0; b < 2; ++b) {
            (*gvec)[b].resize(2);
            for (int i = 0; i < 2; ++i)
                for (int a = 0; a < n_r; ++a)
                    (*gvec)[b][i].push_back({rng.normal(), rng.normal()});
        }
        const int width = 2 * n_r * 2;  // lc = L/p_sub = 2
        auto rnoise = std::make_shared<Mat<double>>(random_mat(2 * p_sub, width, rng, 0.01));
        auto t = std::make_shared<const Mat<double>>(random_mat(2 * p_sub, width, rng));
        gradcheck({&z0, &z1}, [&](Graph<double>& g) {
            return g.mse_loss(
                g.raw_receive({g.param(z0), g.param(z1)}, gvec, rnoise, rows, p_sub, n_r), t);
        });
    }
}

TEST_CASE("miniature HSTC block passes the finite-difference check (D=16, 4x4 grid)") {
    Rng rng(11);
    HstcBlock<double> block;
    // Window 2x2 on a 4x4 grid exercises partitioning; identity init off so all
    // branches carry signal.
    block.init("blk", 16, 2, 2, 2, 32, 4, false, rng, false);
    Param<double> x{"x", random_mat(16, 16, rng)};
    std::vector<Param<double>*> params{&x};
    block.collect(params);
    auto t = std::make_shared<const Mat<double>>(random_mat(16, 16, rng));
    gradcheck(params, [&](Graph<double>& g) {
        return g.mse_loss(block(g, g.param(x), 1, 4, 4), t);
    });
}

TEST_CASE("miniature shifted HSTC block passes the finite-difference check") {
    Rng rng(13);
    HstcBlock<double> block;
    block.init("blk", 16, 2, 2, 2, 32, 4, true, rng, false);
    // Batch of 2 exercises batched window grouping.
    Param<double> x{"x", random_mat(32, 16, rng)};
    std::vector<Param<double>*> params{&x};
    block.collect(params);
    auto t = std::make_shared<const Mat<double>>(random_mat(32, 16, rng));
    gradcheck(params, [&](Graph<double>& g) {
        return g.mse_loss(block(g, g.param(x), 2, 4, 4), t);
    });
}

TEST_CASE("miniature Transformer blocks pass the finite-difference check (D=16, 8 tokens)") {
    Rng rng(17);
    SUBCASE("post-LN") {
        TransformerBlock<double> block;
        block.init("tf", 16, 2, 32, rng);
        Param<double> x{"x", random_mat(8, 16, rng)};
        std::vector<Param<double>*> params{&x};
        block.collect(params);
        auto t = std::make_shared<const Mat<double>>(random_mat(8, 16, rng));
        gradcheck(params, [&](Graph<double>& g) {
            return g.mse_loss(block(g, g.param(x), 2, 4), t);
        });
    }
    SUBCASE("pre-LN with attention pooling") {
        PreLnBlock<double> block;
        block.init("pre", 16, 2, 32, rng);
        AttentionPool<double> pool;
        pool.init("pool", 16, 2, 32, rng);
        Param<double> x{"x", random_mat(8, 16, rng)};
        std::vector<Param<double>*> params{&x};
        block.collect(params);
        pool.collect(params);
        auto t = std::make_shared<const Mat<double>>(random_mat(2, 16, rng));
        gradcheck(params, [&](Graph<double>& g) {
            return g.mse_loss(pool(g, block(g, g.param(x), 2, 4), 2, 4), t);
        });
    }
}

TEST_CASE("HSTC block with zero-initialized fusion and MLP output is the identity") {
    Rng rng(19);
    HstcBlock<float> block;
    block.init("blk", 16, 2, 2, 2, 32, 4, true, rng, true);
    Graph<float> g(false);
    Mat<float> xv(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) xv(i, j) = float(rng.normal());
    Node<float>* out = block(g, g.input(xv), 1, 4, 4);
    CHECK((out->val - xv).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("window attention equals full attention when one window covers the grid") {
    Rng rng(23);
    const int d = 16, heads = 2;
    WindowAttention<float> wattn;
    wattn.init("wa", d, heads, 4, 4, rng);
    Mat<float> xv(16, d);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < d; ++j) xv(i, j) = float(rng.normal());

    Graph<float> g(false);
    Node<float>* via_window = wattn(g, g.input(xv), 1, 4, 4, false);

    // Reference: same weights through grouped full attention over all tokens.
    Node<float>* qkv = g.linear(g.input(xv), g.param(wattn.qkv.w), g.param(wattn.qkv.b));
    AttentionSpec<float> spec;
    spec.groups = 1;
    spec.pq = spec.pkv = 16;
    spec.heads = heads;
    spec.head_dim = d / heads;
    Node<float>* full = g.attention(g.slice_cols(qkv, 0, d), g.slice_cols(qkv, d, d),
                                    g.slice_cols(qkv, 2 * d, d), nullptr, spec);
    full = g.linear(full, g.param(wattn.proj.w), g.param(wattn.proj.b));
    // Window perm is the identity for a single window covering the grid.
    CHECK((via_window->val - full->val).cwiseAbs().maxCoeff() < 1e-5f);
}

TEST_CASE("shifted windows: rows sum to one and cross-window attention is masked") {
    Rng rng(29);
    const int d = 16;
    WindowAttention<float> wattn;
    wattn.init("wa", d, 2, 2, 2, rng);
    Mat<float> xv(2 * 16, d);
    for (Eigen::Index i = 0; i < xv.size(); ++i) xv.data()[i] = float(rng.normal());

    Graph<float> g(false);
    std::vector<Mat<float>> probs;
    wattn(g, g.input(xv), 2, 4, 4, true, &probs);
    REQUIRE(!probs.empty());

    const auto plan = make_window_plan<float>(1, 4, 4, 2, 2, true);
    const int n_win = plan.plan.n_windows, pw = plan.plan.p_w;
    const int heads = 2;
    int masked_pairs = 0;
    for (std::size_t gi = 0; gi < probs.size(); ++gi) {
        const int window = int(gi / heads) % n_win;  // group-major, heads inner
        const Mat<float>& p = probs[gi];
        for (int r = 0; r < p.rows(); ++r)
            CHECK(std::abs(p.row(r).sum() - 1.0f) < 1e-6f);
        if (plan.masks[window].size() == 0) continue;
        for (int a = 0; a < pw; ++a)
            for (int b = 0; b < pw; ++b)
                if (plan.masks[window](a, b) != 0.0f) {
                    CHECK(p(a, b) < 1e-8f);
                    ++masked_pairs;
                }
    }
    CHECK(masked_pairs > 0);
}

TEST_CASE("relative-position bias is shared by relative offset") {
    const auto plan = make_window_plan<float>(1, 4, 4, 2, 2, false);
    const auto& idx = *plan.plan.bias_index;
    // Token pairs with the same relative displacement map to the same entry:
    // window 2x2 tokens scan as (0,0),(0,1),(1,0),(1,1).
    CHECK(idx[0 * 4 + 1] == idx[2 * 4 + 3]);
    CHECK(idx[1 * 4 + 0] == idx[3 * 4 + 2]);
    CHECK(idx[0 * 4 + 0] == idx[3 * 4 + 3]);
    CHECK(idx[0 * 4 + 1] != idx[1 * 4 + 0]);
}

TEST_CASE("Adam minimizes a quadratic and lr=0 freezes parameters") {
    Param<float> p{"p", Mat<float>::Constant(1, 4, 2.0f)};
    auto target = std::make_shared<const Mat<float>>(Mat<float>::Zero(1, 4));
    SUBCASE("descends") {
        Adam<float> opt({&p}, 0.05);
        for (int i = 0; i < 400; ++i) {
            Graph<float> g(true);
            auto* loss = g.mse_loss(g.param(p), target);
            opt.zero_grad();
            g.backward(loss);
            opt.step();
        }
        CHECK(p.value.cwiseAbs().maxCoeff() < 1e-2f);
    }
    SUBCASE("lr = 0 leaves parameters bit-identical") {
        const Mat<float> before = p.value;
        Adam<float> opt({&p}, 0.0);
        for (int i = 0; i < 3; ++i) {
            Graph<float> g(true);
            auto* loss = g.mse_loss(g.param(p), target);
            opt.zero_grad();
            g.backward(loss);
            opt.step();
        }
        CHECK((p.value - before).cwiseAbs().maxCoeff() == 0.0f);
    }
}

TEST_CASE("gate op: zero gate kills the branch, gradients flow to the gate") {
    Rng rng(37);
    Param<double> x{"x", random_mat(4, 6, rng)};
    Param<double> gate{"g", Mat<double>::Zero(1, 1)};
    {
        Graph<double> g(false);
        auto* y = g.gate(g.param(x), g.param(gate));
        CHECK(y->val.cwiseAbs().maxCoeff() == 0.0);
    }
    auto t = std::make_shared<const Mat<double>>(random_mat(4, 6, rng));
    gradcheck({&x, &gate}, [&](Graph<double>& g) {
        return g.mse_loss(g.gate(g.param(x), g.param(gate)), t);
    });
}
