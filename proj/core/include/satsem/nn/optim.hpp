// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "satsem/nn/graph.hpp"

namespace satsem::nn {

template <typename S>
class Adam {
public:
    Adam(std::vector<Param<S>*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            m_[i] = Mat<S>::Zero(params_[i]->value.rows(), params_[i]->value.cols());
            v_[i] = m_[i];
        }
    }

    void zero_grad() {
        for (auto* p : params_) p->zero_grad();
    }

    void step() {
        ++t_;
        const S bc1 = S(1.0 - std::pow(beta1_, t_));
        const S bc2 = S(1.0 - std::pow(beta2_, t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Param<S>& p = *params_[i];
            if (p.grad.size() == 0) continue;
            m_[i] = S(beta1_) * m_[i] + S(1.0 - beta1_) * p.grad;
            v_[i] = (S(beta2_) * v_[i].array() + S(1.0 - beta2_) * p.grad.array().square()).matrix();
            p.value.array() -=
                S(lr_) * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + S(eps_));
        }
    }

    std::int64_t steps() const { return t_; }

private:
    std::vector<Param<S>*> params_;
    std::vector<Mat<S>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

}  // namespace satsem::nn
