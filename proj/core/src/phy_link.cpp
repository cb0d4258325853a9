// SPDX-License-Identifier: Apache-2.0
#include "satsem/phy_link.hpp"

#include <cmath>

namespace satsem::phy {

std::vector<CVec> precode(const SCsi& scsi, const ArrayConfig& arrays, double p_t_watts) {
    require(p_t_watts >= 0.0, "precode: p_t_watts must be nonnegative");
    std::vector<CVec> w;
    w.reserve(scsi.links.size());
    const double scale = std::sqrt(p_t_watts);
    for (const auto& link : scsi.links) w.push_back(scale * link.tx_steering(arrays).conjugate());
    return w;
}

ReceivedBlock transmit(const ChannelRealization& real, const std::vector<CVec>& precoders,
                       const std::vector<SymbolStream>& streams, double noise_var, Rng& rng) {
    const auto s_k = real.links.size();
    require(precoders.size() == s_k && streams.size() == s_k,
            "transmit: streams/precoders must match the satellite count");
    const int L = streams.front().length();
    for (const auto& st : streams)
        require(st.length() == L, "transmit: all streams must have equal length");

    const int n_r = static_cast<int>(real.links.front().rx_combined.size());
    ReceivedBlock rb;
    rb.noise_var = noise_var;
    rb.y = CMat::Zero(n_r, L);
    for (std::size_t s = 0; s < s_k; ++s) {
        // H_s w_s = rx_combined * (v^T w); rank-one structure avoids forming H.
        const cplx tx_gain = real.links[s].tx_steer.transpose() * precoders[s];
        rb.y.noalias() += (tx_gain * real.links[s].rx_combined) * streams[s].z.transpose();
    }
    if (noise_var > 0.0) {
        for (int j = 0; j < L; ++j)
            for (int i = 0; i < n_r; ++i) rb.y(i, j) += rng.complex_normal(noise_var);
    }
    return rb;
}

namespace {

CVec joint_receive_beam(const SCsi& scsi, const ArrayConfig& arrays) {
    double beta_sum = 0.0;
    std::vector<double> beta(scsi.links.size());
    for (std::size_t s = 0; s < scsi.links.size(); ++s) {
        const auto& l = scsi.links[s];
        beta[s] = std::sqrt(l.gamma * l.kappa / (l.kappa + 1.0));
        beta_sum += beta[s];
    }
    CVec r = CVec::Zero(arrays.n_r());
    for (std::size_t s = 0; s < scsi.links.size(); ++s)
        r += (beta[s] / beta_sum) * scsi.links[s].rx_steering(arrays);
    return r;
}

double outage_floor(const SCsi& scsi, const std::vector<CVec>& precoders, const PhyConfig& cfg) {
    double gamma_max = 0.0;
    for (const auto& l : scsi.links) gamma_max = std::max(gamma_max, l.gamma);
    const double p_t = precoders.empty() ? 0.0 : precoders.front().squaredNorm();
    return cfg.zeta_floor_rel * std::sqrt(std::max(p_t * gamma_max, 0.0));
}

CVec channel_times_precoder(const ChannelRealization& real, const std::vector<CVec>& precoders,
                            std::size_t s) {
    const cplx tx_gain = real.links[s].tx_steer.transpose() * precoders[s];
    return tx_gain * real.links[s].rx_combined;
}

}  // namespace

EqualizedStream ct_receive(const SCsi& scsi, const ChannelRealization& real,
                           const std::vector<CVec>& precoders, const ReceivedBlock& received,
                           const ArrayConfig& arrays, const PhyConfig& cfg,
                           const SymbolStream* reference) {
    const CVec r = joint_receive_beam(scsi, arrays);
    CVec g_sum = CVec::Zero(arrays.n_r());
    for (std::size_t s = 0; s < real.links.size(); ++s)
        g_sum += channel_times_precoder(real, precoders, s);
    const cplx zeta = r.dot(g_sum);

    EqualizedStream out;
    out.feat.re_zeta = zeta.real();
    out.feat.im_zeta = zeta.imag();
    out.outage = std::abs(zeta) < outage_floor(scsi, precoders, cfg);
    const cplx inv_zeta = out.outage ? cplx(0.0, 0.0) : cplx(1.0, 0.0) / zeta;
    out.symbols = (inv_zeta * (r.adjoint() * received.y)).transpose();
    if (reference != nullptr) out.feat.sigma2_eq = estimate_eq_noise(out.symbols, reference->z);
    return out;
}

std::vector<EqualizedStream> nct_receive(const SCsi& scsi, const ChannelRealization& real,
                                         const std::vector<CVec>& precoders,
                                         const ReceivedBlock& received, const ArrayConfig& arrays,
                                         const PhyConfig& cfg,
                                         const std::vector<SymbolStream>* references) {
    const double floor = outage_floor(scsi, precoders, cfg);
    std::vector<EqualizedStream> out(scsi.links.size());
    for (std::size_t s = 0; s < scsi.links.size(); ++s) {
        const CVec u = scsi.links[s].rx_steering(arrays);
        const cplx zeta = u.dot(channel_times_precoder(real, precoders, s));
        auto& es = out[s];
        es.feat.re_zeta = zeta.real();
        es.feat.im_zeta = zeta.imag();
        es.outage = std::abs(zeta) < floor;
        const cplx inv_zeta = es.outage ? cplx(0.0, 0.0) : cplx(1.0, 0.0) / zeta;
        es.symbols = (inv_zeta * (u.adjoint() * received.y)).transpose();
        if (references != nullptr)
            es.feat.sigma2_eq = estimate_eq_noise(es.symbols, (*references)[s].z);
    }
    return out;
}

double estimate_eq_noise(const CVec& equalized, const CVec& reference,
                         const std::vector<int>* pilots) {
    require(equalized.size() == reference.size() && reference.size() > 0,
            "estimate_eq_noise: empty or mismatched reference");
    if (pilots == nullptr) return (equalized - reference).squaredNorm() / double(reference.size());
    require(!pilots->empty(), "estimate_eq_noise: empty pilot set");
    double acc = 0.0;
    for (int idx : *pilots) acc += std::norm(equalized(idx) - reference(idx));
    return acc / double(pilots->size());
}

std::vector<int> pilot_positions(int length, int spacing) {
    require(spacing >= 1 && spacing <= length, "pilot_positions: bad spacing");
    std::vector<int> idx;
    for (int i = 0; i < length; i += spacing) idx.push_back(i);
    return idx;
}

CMat draw_noise(int n_r, int length, double var, Rng& rng) {
    CMat n(n_r, length);
    for (int j = 0; j < length; ++j)
        for (int i = 0; i < n_r; ++i) n(i, j) = rng.complex_normal(var);
    return n;
}

EffectiveChannel effective_channel(const SCsi& scsi, const ChannelRealization& real,
                                   const std::vector<CVec>& precoders, const ArrayConfig& arrays,
                                   const PhyConfig& cfg, const CMat& noise, double noise_var,
                                   bool coherent) {
    const int s_k = scsi.num_satellites();
    const int n_r = arrays.n_r();
    EffectiveChannel eff;
    eff.coherent = coherent;
    eff.noise_var = noise_var;
    eff.noise = noise;

    eff.g.reserve(s_k);
    for (int s = 0; s < s_k; ++s) eff.g.push_back(channel_times_precoder(real, precoders, s));

    const double floor = outage_floor(scsi, precoders, cfg);
    if (coherent) {
        const CVec r = joint_receive_beam(scsi, arrays);
        CVec g_sum = CVec::Zero(n_r);
        for (const auto& g : eff.g) g_sum += g;
        const cplx zeta = r.dot(g_sum);
        eff.zeta = {zeta};
        eff.outage = {std::abs(zeta) < floor};
        const cplx inv_zeta = eff.outage[0] ? cplx(0.0, 0.0) : cplx(1.0, 0.0) / zeta;
        eff.alpha = CMat::Ones(1, 1);
        eff.eq_noise.push_back((inv_zeta * (r.adjoint() * eff.noise)).transpose());
    } else {
        eff.alpha = CMat(s_k, s_k);
        eff.zeta.resize(s_k);
        eff.outage.resize(s_k);
        for (int s = 0; s < s_k; ++s) {
            const CVec u = scsi.links[s].rx_steering(arrays);
            const cplx zeta = u.dot(eff.g[s]);
            eff.zeta[s] = zeta;
            eff.outage[s] = std::abs(zeta) < floor;
            const cplx inv_zeta = eff.outage[s] ? cplx(0.0, 0.0) : cplx(1.0, 0.0) / zeta;
            for (int i = 0; i < s_k; ++i) eff.alpha(s, i) = inv_zeta * u.dot(eff.g[i]);
            eff.eq_noise.push_back((inv_zeta * (u.adjoint() * eff.noise)).transpose());
        }
    }
    return eff;
}

}  // namespace satsem::phy
