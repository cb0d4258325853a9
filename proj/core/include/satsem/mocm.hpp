// SPDX-License-Identifier: Apache-2.0
//
// Mixture-of-cooperative-modes selector: scalable sCSI featurization, a
// permutation-invariant satellite-set network with attention pooling and a
// condition-vector branch, plus the oracle labeling rule.
#pragma once

#include <vector>

#include "satsem/channel.hpp"
#include "satsem/nn/modules.hpp"

namespace satsem::mocm {

enum class Mode { CT = 0, NCT = 1 };

struct ModeDecision {
    double logits[2] = {0.0, 0.0};
    Mode mode = Mode::CT;
};

struct ConditionVector {
    double p_t_dbm = 40.0;
    double lambda = 0.99;
};

// Covariance power projected onto a unit beam direction: d^H Sigma d.
double beam_projected_power(const CMat& sigma, const CVec& d);

// Per-satellite 7-vector [gamma, kappa_dB, theta_t, phi_t, theta_r, phi_r,
// log q^Sigma]; q^Sigma is clamped at `q_floor` (flagged via the return).
struct SelectorFeature {
    Eigen::Matrix<double, 7, 1> psi;
    bool q_clamped = false;
};

std::vector<SelectorFeature> featurize(const channel::SCsi& scsi,
                                       const channel::ArrayConfig& arrays,
                                       double q_floor = 1e-12);

// Oracle label: prefer NCT whenever its metric reaches lambda times CT's.
inline int oracle_label(double q_ct, double q_nct, double lambda) {
    return q_nct >= lambda * q_ct ? 1 : 0;
}

struct SelectorConfig {
    int hidden = 128;
    int depth = 2;
    int heads = 4;
    int ffn = 512;
    // Fixed input standardization (not learned): gamma scale, angle scale,
    // kappa_dB scale, log-q scale, and the transmit-power affine.
    double gamma_ref = 1e-11;
    double pt_center_dbm = 37.5;
    double pt_scale_db = 7.5;
};

template <typename S>
struct SelectorNet {
    SelectorConfig cfg;
    nn::Mlp<S> embed;  // 7 -> H -> H
    std::vector<nn::PreLnBlock<S>> blocks;
    nn::LayerNorm<S> sat_ln;
    nn::AttentionPool<S> pool;
    nn::Mlp<S> cond;  // 2 -> H -> H
    nn::LayerNorm<S> head_ln;
    nn::Mlp<S> head;  // 2H -> H -> 2

    void init(const SelectorConfig& c, Rng& rng) {
        cfg = c;
        embed.init("sel.embed", 7, cfg.hidden, cfg.hidden, rng);
        blocks.resize(cfg.depth);
        for (int i = 0; i < cfg.depth; ++i)
            blocks[i].init("sel.block." + std::to_string(i), cfg.hidden, cfg.heads, cfg.ffn, rng);
        sat_ln.init("sel.sat_ln", cfg.hidden);
        pool.init("sel.pool", cfg.hidden, cfg.heads, cfg.ffn, rng);
        cond.init("sel.cond", 2, cfg.hidden, cfg.hidden, rng);
        head_ln.init("sel.head_ln", 2 * cfg.hidden);
        head.init("sel.head", 2 * cfg.hidden, cfg.hidden, 2, rng);
    }

    // Fixed affine standardization applied ahead of the learned embedding.
    nn::Mat<S> standardize(const std::vector<std::vector<SelectorFeature>>& batch) const {
        int rows = 0;
        for (const auto& set : batch) rows += int(set.size());
        nn::Mat<S> out(rows, 7);
        int r = 0;
        for (const auto& set : batch)
            for (const auto& f : set) {
                out(r, 0) = S(f.psi(0) / cfg.gamma_ref);
                out(r, 1) = S(f.psi(1) / 10.0);
                out(r, 2) = S(f.psi(2) / kPi);
                out(r, 3) = S(f.psi(3) / kPi);
                out(r, 4) = S(f.psi(4) / kPi);
                out(r, 5) = S(f.psi(5) / kPi);
                out(r, 6) = S(f.psi(6) / 5.0);
                ++r;
            }
        return out;
    }

    nn::Mat<S> standardize_cond(const std::vector<ConditionVector>& conds) const {
        nn::Mat<S> out(Eigen::Index(conds.size()), 2);
        for (std::size_t i = 0; i < conds.size(); ++i) {
            out(Eigen::Index(i), 0) = S((conds[i].p_t_dbm - cfg.pt_center_dbm) / cfg.pt_scale_db);
            out(Eigen::Index(i), 1) = S(conds[i].lambda);
        }
        return out;
    }

    // All sets in a batch must share the same cardinality s_k.
    nn::Node<S>* forward(nn::Graph<S>& g, const std::vector<std::vector<SelectorFeature>>& batch,
                         const std::vector<ConditionVector>& conds) {
        require(!batch.empty() && !batch.front().empty(), "selector: empty feature set");
        const int s_k = int(batch.front().size());
        const int b = int(batch.size());
        for (const auto& set : batch)
            require(int(set.size()) == s_k, "selector: mixed set sizes in one batch");

        nn::Node<S>* x = g.input(standardize(batch));
        x = embed(g, x);
        for (auto& blk : blocks) x = blk(g, x, b, s_k);
        x = sat_ln(g, x);
        nn::Node<S>* pooled = pool(g, x, b, s_k);          // b x H
        nn::Node<S>* c = cond(g, g.input(standardize_cond(conds)));  // b x H
        nn::Node<S>* t = head_ln(g, g.concat_cols({pooled, c}));
        return head(g, t);  // b x 2 logits
    }

    ModeDecision decide(const std::vector<SelectorFeature>& features,
                        const ConditionVector& cond_v) {
        nn::Graph<S> g(false);
        nn::Node<S>* logits = forward(g, {features}, {cond_v});
        ModeDecision d;
        d.logits[0] = double(logits->val(0, 0));
        d.logits[1] = double(logits->val(0, 1));
        d.mode = d.logits[1] > d.logits[0] ? Mode::NCT : Mode::CT;
        return d;
    }

    void collect(nn::ParamList<S>& out) {
        embed.collect(out);
        for (auto& blk : blocks) blk.collect(out);
        sat_ln.collect(out);
        pool.collect(out);
        cond.collect(out);
        head_ln.collect(out);
        head.collect(out);
    }

    nn::ParamList<S> parameters() {
        nn::ParamList<S> out;
        collect(out);
        return out;
    }
};

}  // namespace satsem::mocm
