// SPDX-License-Identifier: Apache-2.0
#include "satsem/mocm.hpp"

#include <cmath>

namespace satsem::mocm {

double beam_projected_power(const CMat& sigma, const CVec& d) {
    require(sigma.rows() == sigma.cols() && sigma.rows() == d.size(),
            "beam_projected_power: dimension mismatch");
    const cplx q = d.adjoint() * sigma * d;
    return q.real();
}

std::vector<SelectorFeature> featurize(const channel::SCsi& scsi,
                                       const channel::ArrayConfig& arrays, double q_floor) {
    std::vector<SelectorFeature> out;
    out.reserve(scsi.links.size());
    for (const auto& link : scsi.links) {
        // The projection beam is the normalized receive steering vector u_s.
        const CVec u = link.rx_steering(arrays);
        double q = beam_projected_power(link.sigma, u);
        SelectorFeature f;
        if (q < q_floor) {
            q = q_floor;
            f.q_clamped = true;
        }
        f.psi << link.gamma, 10.0 * std::log10(link.kappa), link.angles.theta_t,
            link.angles.phi_t, link.angles.theta_r, link.angles.phi_r, std::log(q);
        out.push_back(f);
    }
    return out;
}

}  // namespace satsem::mocm
