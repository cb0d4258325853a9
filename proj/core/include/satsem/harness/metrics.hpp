// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "satsem/common.hpp"

namespace satsem::harness {

inline constexpr double kPsnrCapDb = 60.0;  // sentinel for zero-MSE reconstructions

double mse(const std::vector<float>& a, const std::vector<float>& b);

// 10 log10(1 / MSE) on [0,1] pixels, capped at kPsnrCapDb.
double psnr_db(const std::vector<float>& img, const std::vector<float>& ref);

// Mean SSIM over RGB channels, 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, dynamic range 1. Valid-region windowing.
double ssim(const std::vector<float>& img, const std::vector<float>& ref, int h, int w);

// -10 log10(1 - ssim); ssim is clamped below 1.
double ssim_to_db(double ssim_value);

}  // namespace satsem::harness
