// SPDX-License-Identifier: Apache-2.0
#include "satsem/harness/metrics.hpp"

#include <cmath>

namespace satsem::harness {

double mse(const std::vector<float>& a, const std::vector<float>& b) {
    require(a.size() == b.size() && !a.empty(), "mse: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc / double(a.size());
}

double psnr_db(const std::vector<float>& img, const std::vector<float>& ref) {
    const double m = mse(img, ref);
    if (m <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / m));
}

namespace {

// 11-tap Gaussian, sigma = 1.5, normalized.
const std::vector<double>& gaussian11() {
    static const std::vector<double> k = [] {
        std::vector<double> v(11);
        double sum = 0.0;
        for (int i = 0; i < 11; ++i) {
            const double x = i - 5.0;
            v[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
            sum += v[i];
        }
        for (double& x : v) x /= sum;
        return v;
    }();
    return k;
}

// Separable valid-region convolution of an h x w plane with the 11-tap kernel.
std::vector<double> conv_valid(const std::vector<double>& plane, int h, int w, int& oh, int& ow) {
    const auto& k = gaussian11();
    const int t = 11;
    oh = h - t + 1;
    ow = w - t + 1;
    std::vector<double> tmp(std::size_t(h) * ow, 0.0);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < ow; ++j) {
            double acc = 0.0;
            for (int u = 0; u < t; ++u) acc += k[u] * plane[std::size_t(i) * w + j + u];
            tmp[std::size_t(i) * ow + j] = acc;
        }
    std::vector<double> out(std::size_t(oh) * ow, 0.0);
    for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
            double acc = 0.0;
            for (int u = 0; u < t; ++u) acc += k[u] * tmp[std::size_t(i + u) * ow + j];
            out[std::size_t(i) * ow + j] = acc;
        }
    return out;
}

double ssim_plane(const float* x, const float* y, int h, int w) {
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const std::size_t n = std::size_t(h) * w;
    std::vector<double> xs(n), ys(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[i];
        ys[i] = y[i];
        xx[i] = double(x[i]) * x[i];
        yy[i] = double(y[i]) * y[i];
        xy[i] = double(x[i]) * y[i];
    }
    int oh = 0, ow = 0;
    const auto mx = conv_valid(xs, h, w, oh, ow);
    const auto my = conv_valid(ys, h, w, oh, ow);
    const auto mxx = conv_valid(xx, h, w, oh, ow);
    const auto myy = conv_valid(yy, h, w, oh, ow);
    const auto mxy = conv_valid(xy, h, w, oh, ow);
    double acc = 0.0;
    const std::size_t m = std::size_t(oh) * ow;
    for (std::size_t i = 0; i < m; ++i) {
        const double vx = mxx[i] - mx[i] * mx[i];
        const double vy = myy[i] - my[i] * my[i];
        const double cxy = mxy[i] - mx[i] * my[i];
        acc += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return acc / double(m);
}

}  // namespace

double ssim(const std::vector<float>& img, const std::vector<float>& ref, int h, int w) {
    require(img.size() == ref.size() && int(img.size()) == 3 * h * w, "ssim: bad shapes");
    require(h >= 11 && w >= 11, "ssim: image smaller than the 11x11 window");
    double acc = 0.0;
    for (int c = 0; c < 3; ++c)
        acc += ssim_plane(img.data() + std::size_t(c) * h * w, ref.data() + std::size_t(c) * h * w,
                          h, w);
    return acc / 3.0;
}

double ssim_to_db(double s) {
    s = std::min(s, 1.0 - 1e-12);
    return -10.0 * std::log10(1.0 - s);
}

}  // namespace satsem::harness
