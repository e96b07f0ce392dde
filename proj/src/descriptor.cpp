#include "gmind/descriptor.hpp"
#include "gmind/error.hpp"
#include "gmind/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace gmind {

namespace {

constexpr std::array<Offset, 4> kVarianceNeighbours{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

void check_inside(const Image &img, Pixel p, const char *what) {
    if (p.x < 0 || p.y < 0 || p.x >= img.width() || p.y >= img.height()) {
        throw Error(ErrorCode::out_of_bounds, std::string(what) + " (" + std::to_string(p.x) + "," +
                                                  std::to_string(p.y) + ") outside " +
                                                  shape_string(img.width(), img.height()));
    }
}

double patch_distance_unchecked(const Image &img, Pixel a, Pixel b, int radius) {
    double sum = 0.0;
    for (int py = -radius; py <= radius; ++py) {
        for (int px = -radius; px <= radius; ++px) {
            const double d = img.at_clamped(a.x + px, a.y + py) - img.at_clamped(b.x + px, b.y + py);
            sum += d * d;
        }
    }
    return sum;
}

} // namespace

std::vector<Offset> DescriptorConfig::four_neighbourhood() {
    return {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};
}

std::vector<Offset> DescriptorConfig::eight_neighbourhood() {
    return {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
}

void DescriptorConfig::validate() const {
    if (patch_radius < 0) {
        throw Error(ErrorCode::invalid_argument, "patch radius must be >= 0");
    }
    if (search_region.empty()) {
        throw Error(ErrorCode::invalid_argument, "search region must not be empty");
    }
    for (size_t i = 0; i < search_region.size(); ++i) {
        if (search_region[i] == Offset{0, 0}) {
            throw Error(ErrorCode::invalid_argument, "search region must not contain (0,0)");
        }
        for (size_t j = i + 1; j < search_region.size(); ++j) {
            if (search_region[i] == search_region[j]) {
                throw Error(ErrorCode::invalid_argument, "search region offsets must be distinct");
            }
        }
    }
    if (!(variance_low > 0.0 && variance_low <= 1.0 && variance_high >= 1.0 && std::isfinite(variance_high))) {
        throw Error(ErrorCode::invalid_argument, "variance clamp needs 0 < low <= 1 <= high");
    }
}

DescriptorField::DescriptorField(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels),
      values_(static_cast<size_t>(width) * static_cast<size_t>(height) * static_cast<size_t>(channels), 0.0) {
    if (width < 1 || height < 1 || channels < 1) {
        throw Error(ErrorCode::invalid_argument, "descriptor field dimensions must be positive");
    }
}

double patch_distance(const Image &img, Pixel a, Pixel b, int patch_radius) {
    check_inside(img, a, "patch centre");
    check_inside(img, b, "patch centre");
    if (patch_radius < 0) {
        throw Error(ErrorCode::invalid_argument, "patch radius must be >= 0");
    }
    return patch_distance_unchecked(img, a, b, patch_radius);
}

double variance(const Image &img, Pixel xc, int patch_radius) {
    check_inside(img, xc, "variance centre");
    if (patch_radius < 0) {
        throw Error(ErrorCode::invalid_argument, "patch radius must be >= 0");
    }
    double sum = 0.0;
    for (const auto k : kVarianceNeighbours) {
        sum += patch_distance_unchecked(img, xc, {xc.x + k.dx, xc.y + k.dy}, patch_radius);
    }
    return 0.25 * sum;
}

std::vector<double> patch_distance_map(const Image &img, Offset offset, int patch_radius) {
    const int w = img.width();
    const int h = img.height();
    const int r = patch_radius;
    const int ew = w + 2 * r;
    const int eh = h + 2 * r;

    // Squared differences over the padded grid, then a separable box sum.
    std::vector<double> sq(static_cast<size_t>(ew) * static_cast<size_t>(eh));
    for (int ey = 0; ey < eh; ++ey) {
        const int y = ey - r;
        for (int ex = 0; ex < ew; ++ex) {
            const int x = ex - r;
            const double d = img.at_clamped(x, y) - img.at_clamped(x + offset.dx, y + offset.dy);
            sq[static_cast<size_t>(ey) * ew + ex] = d * d;
        }
    }
    std::vector<double> rows(static_cast<size_t>(w) * static_cast<size_t>(eh));
    for (int ey = 0; ey < eh; ++ey) {
        const double *src = &sq[static_cast<size_t>(ey) * ew];
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = 0; k <= 2 * r; ++k) {
                s += src[x + k];
            }
            rows[static_cast<size_t>(ey) * w + x] = s;
        }
    }
    std::vector<double> out(static_cast<size_t>(w) * static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = 0; k <= 2 * r; ++k) {
                s += rows[static_cast<size_t>(y + k) * w + x];
            }
            out[static_cast<size_t>(y) * w + x] = s;
        }
    }
    return out;
}

std::vector<double> variance_map(const Image &img, int patch_radius) {
    std::vector<double> v(img.size(), 0.0);
    for (const auto k : kVarianceNeighbours) {
        const auto d = patch_distance_map(img, k, patch_radius);
        for (size_t i = 0; i < v.size(); ++i) {
            v[i] += d[i];
        }
    }
    for (auto &x : v) {
        x *= 0.25;
    }
    return v;
}

DescriptorField mind_descriptor(const Image &img, const DescriptorConfig &cfg) {
    cfg.validate();
    const int min_side = 2 * cfg.patch_radius + 2;
    if (img.width() < min_side || img.height() < min_side) {
        throw Error(ErrorCode::invalid_argument, "image " + shape_string(img.width(), img.height()) +
                                                     " too small for patch radius " +
                                                     std::to_string(cfg.patch_radius));
    }

    const auto n = img.size();
    auto var = variance_map(img, cfg.patch_radius);
    double mean_var = 0.0;
    for (double v : var) {
        mean_var += v;
    }
    mean_var /= static_cast<double>(n);
    const double lo = cfg.variance_low * mean_var;
    const double hi = cfg.variance_high * mean_var;
    for (auto &v : var) {
        v = std::min(std::max(v, lo), hi);
    }

    const int channels = static_cast<int>(cfg.search_region.size());
    std::vector<std::vector<double>> dist;
    dist.reserve(cfg.search_region.size());
    for (const auto r : cfg.search_region) {
        dist.push_back(patch_distance_map(img, r, cfg.patch_radius));
    }

    DescriptorField out(img.width(), img.height(), channels);
    auto values = out.values();
    std::vector<double> ratio(static_cast<size_t>(channels));
    for (size_t i = 0; i < n; ++i) {
        double min_ratio = std::numeric_limits<double>::infinity();
        for (int c = 0; c < channels; ++c) {
            const double d = dist[static_cast<size_t>(c)][i];
            // A zero clamped variance only occurs on a constant image, where
            // every distance is zero as well.
            ratio[static_cast<size_t>(c)] = d == 0.0 ? 0.0 : d / var[i];
            min_ratio = std::min(min_ratio, ratio[static_cast<size_t>(c)]);
        }
        // exp(-ratio) / max_c exp(-ratio_c), evaluated without underflowing the max.
        for (int c = 0; c < channels; ++c) {
            const double v = std::exp(-(ratio[static_cast<size_t>(c)] - min_ratio));
            values[i * static_cast<size_t>(channels) + static_cast<size_t>(c)] =
                std::max(v, std::numeric_limits<double>::min());
        }
    }
    return out;
}

} // namespace gmind
