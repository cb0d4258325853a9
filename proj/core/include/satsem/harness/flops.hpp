// SPDX-License-Identifier: Apache-2.0
//
// Analytic inference-cost accounting: multiply-accumulates of every linear
// projection, attention product, MLP and convolution, reported as
// FLOPs = 2 x MAC per image. Elementwise work (LN, GELU, softmax) is excluded.
#pragma once

#include <map>
#include <string>

#include "satsem/codec_ct.hpp"
#include "satsem/codec_nct.hpp"

namespace satsem::harness {

struct FlopCount {
    double tx_mflops = 0.0;
    double rx_mflops = 0.0;
    std::map<std::string, double> breakdown;  // MFLOPs per component
};

FlopCount count_flops_ct(const codec::CodecConfigCT& cfg);
FlopCount count_flops_nct(const codec::CodecConfigNCT& cfg);

// Table-style asymptotic orders used by the scaling checks.
inline double order_xi(double p, double d, double pw) { return p * d * d + p * pw * d; }
inline double order_eta(double p, double d) { return p * d * d + p * p * d; }
inline double order_eta_bar(double p_sub, double d) { return order_eta(p_sub, d); }
inline double order_xi_bar(double p_sub, double d, double pw) { return order_xi(p_sub, d, pw); }

}  // namespace satsem::harness
