#pragma once

// Straightforward reference implementations and fixtures shared by the unit
// and acceptance tests. Everything here is written loop-by-loop on purpose
// and must not call the optimised library routines it is compared against.

#include "gmind/descriptor.hpp"
#include "gmind/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline double clamped(const gmind::Image &img, int x, int y) {
    x = std::clamp(x, 0, img.width() - 1);
    y = std::clamp(y, 0, img.height() - 1);
    return img(x, y);
}

inline double patch_distance(const gmind::Image &img, int x1, int y1, int x2, int y2, int p) {
    double sum = 0.0;
    for (int dy = -p; dy <= p; ++dy) {
        for (int dx = -p; dx <= p; ++dx) {
            const double d = clamped(img, x1 + dx, y1 + dy) - clamped(img, x2 + dx, y2 + dy);
            sum += d * d;
        }
    }
    return sum;
}

inline double variance(const gmind::Image &img, int x, int y, int p) {
    return 0.25 * (patch_distance(img, x, y, x - 1, y, p) + patch_distance(img, x, y, x + 1, y, p) +
                   patch_distance(img, x, y, x, y - 1, p) + patch_distance(img, x, y, x, y + 1, p));
}

/// values[(y*w + x)*C + c], normalised by dividing by the per-pixel maximum.
inline std::vector<double> mind(const gmind::Image &img, const gmind::DescriptorConfig &cfg) {
    const int w = img.width();
    const int h = img.height();
    const int p = cfg.patch_radius;
    std::vector<double> var(static_cast<size_t>(w * h));
    double mean = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            var[static_cast<size_t>(y * w + x)] = variance(img, x, y, p);
            mean += var[static_cast<size_t>(y * w + x)];
        }
    }
    mean /= w * h;
    const size_t c_count = cfg.search_region.size();
    std::vector<double> out(static_cast<size_t>(w * h) * c_count);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = var[static_cast<size_t>(y * w + x)];
            v = std::min(std::max(v, cfg.variance_low * mean), cfg.variance_high * mean);
            std::vector<double> raw(c_count);
            double mx = 0.0;
            for (size_t c = 0; c < c_count; ++c) {
                const auto r = cfg.search_region[c];
                const double d = patch_distance(img, x, y, x + r.dx, y + r.dy, p);
                raw[c] = d == 0.0 ? 1.0 : std::exp(-d / v);
                mx = std::max(mx, raw[c]);
            }
            for (size_t c = 0; c < c_count; ++c) {
                out[static_cast<size_t>(y * w + x) * c_count + c] = raw[c] / mx;
            }
        }
    }
    return out;
}

inline gmind::Image random_image(int w, int h, uint64_t seed, double lo = 0.0, double hi = 255.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    gmind::Image img(w, h);
    for (auto &v : img.data()) {
        v = u(rng);
    }
    return img;
}

/// Sum of seeded Gaussian blobs on a flat background: smooth and textured
/// everywhere, so every region carries registration signal.
inline gmind::Image blob_image(int w, int h, uint64_t seed, int count = 20) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    gmind::Image img(w, h, 100.0);
    for (int k = 0; k < count; ++k) {
        const double cx = u(rng) * w;
        const double cy = u(rng) * h;
        const double s = 6.0 + 8.0 * u(rng);
        const double a = (2.0 * u(rng) - 1.0) * 80.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                img(x, y) += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * s * s));
            }
        }
    }
    return img;
}

/// Mean |U - (tx, ty)| over the central 50% of the field.
inline double central_error(const gmind::DisplacementField &f, double tx, double ty) {
    const int x0 = f.width() / 4;
    const int y0 = f.height() / 4;
    double sum = 0.0;
    int n = 0;
    for (int y = y0; y < f.height() - y0; ++y) {
        for (int x = x0; x < f.width() - x0; ++x) {
            sum += std::hypot(f.ux(x, y) - tx, f.uy(x, y) - ty);
            ++n;
        }
    }
    return sum / n;
}

inline double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double m = a.size() == b.size() ? 0.0 : INFINITY;
    for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("gmind_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace oracle
