#include "gmind/imaging.hpp"
#include "gmind/error.hpp"
#include "gmind/parallel.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>

namespace gmind {

std::string shape_string(int width, int height) {
    return std::to_string(width) + "x" + std::to_string(height);
}

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::invalid_argument, "image dimensions must be positive, got " + shape_string(width, height));
    }
}

bool finite_range(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
    check_dims(width, height);
    if (!std::isfinite(fill)) {
        throw Error(ErrorCode::invalid_argument, "image fill value must be finite");
    }
    data_.assign(static_cast<size_t>(width) * static_cast<size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<size_t>(width) * static_cast<size_t>(height)) {
        throw Error(ErrorCode::dimension_mismatch, "image data length " + std::to_string(data_.size()) +
                                                       " does not match " + shape_string(width, height));
    }
    if (!finite_range(data_)) {
        throw Error(ErrorCode::invalid_argument, "image intensities must be finite");
    }
}

double Image::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return data_[index(x, y)];
}

DisplacementField::DisplacementField(int width, int height) : width_(width), height_(height) {
    check_dims(width, height);
    const auto n = static_cast<size_t>(width) * static_cast<size_t>(height);
    ux_.assign(n, 0.0);
    uy_.assign(n, 0.0);
}

DisplacementField::DisplacementField(int width, int height, std::vector<double> ux, std::vector<double> uy)
    : width_(width), height_(height), ux_(std::move(ux)), uy_(std::move(uy)) {
    check_dims(width, height);
    const auto n = static_cast<size_t>(width) * static_cast<size_t>(height);
    if (ux_.size() != n || uy_.size() != n) {
        throw Error(ErrorCode::dimension_mismatch, "displacement planes do not match " + shape_string(width, height));
    }
    if (!all_finite()) {
        throw Error(ErrorCode::invalid_argument, "displacement components must be finite");
    }
}

DisplacementField DisplacementField::constant(int width, int height, double ux, double uy) {
    const auto n = static_cast<size_t>(width) * static_cast<size_t>(height);
    return {width, height, std::vector<double>(n, ux), std::vector<double>(n, uy)};
}

bool DisplacementField::all_finite() const noexcept {
    return finite_range(ux_) && finite_range(uy_);
}

double sample(const Image &img, double x, double y) {
    const double maxx = img.width() - 1;
    const double maxy = img.height() - 1;
    // NaN coordinates fall through clamp unchanged; treat them as the origin.
    x = std::isnan(x) ? 0.0 : std::clamp(x, 0.0, maxx);
    y = std::isnan(y) ? 0.0 : std::clamp(y, 0.0, maxy);
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img(x0, y0) + fx * (img(x1, y0) - img(x0, y0));
    const double bottom = img(x0, y1) + fx * (img(x1, y1) - img(x0, y1));
    return top + fy * (bottom - top);
}

Image warp(const Image &img, const DisplacementField &field) {
    if (!field.same_shape(img)) {
        throw Error(ErrorCode::dimension_mismatch, "warp: field " + shape_string(field.width(), field.height()) +
                                                       " vs image " + shape_string(img.width(), img.height()));
    }
    Image out(img.width(), img.height());
    parallel_rows(img.height(), [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < img.width(); ++x) {
                out(x, y) = sample(img, x + field.ux(x, y), y + field.uy(x, y));
            }
        }
    });
    return out;
}

GradientPair gradient(const Image &img, GradientScheme scheme) {
    if (img.width() < 2 || img.height() < 2) {
        throw Error(ErrorCode::invalid_argument,
                    "gradient needs at least 2x2 pixels, got " + shape_string(img.width(), img.height()));
    }
    switch (scheme) {
    case GradientScheme::central_difference:
        break;
    }
    const int w = img.width();
    const int h = img.height();
    GradientPair g{Image(w, h), Image(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x == 0) {
                g.gx(x, y) = img(1, y) - img(0, y);
            } else if (x == w - 1) {
                g.gx(x, y) = img(x, y) - img(x - 1, y);
            } else {
                g.gx(x, y) = 0.5 * (img(x + 1, y) - img(x - 1, y));
            }
            if (y == 0) {
                g.gy(x, y) = img(x, 1) - img(x, 0);
            } else if (y == h - 1) {
                g.gy(x, y) = img(x, y) - img(x, y - 1);
            } else {
                g.gy(x, y) = 0.5 * (img(x, y + 1) - img(x, y - 1));
            }
        }
    }
    return g;
}

Image gaussian_blur(const Image &img, double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::invalid_argument, "blur sigma must be finite and >= 0");
    }
    if (sigma == 0.0) {
        return img;
    }
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel[static_cast<size_t>(k + radius)] = v;
        total += v;
    }
    for (auto &v : kernel) {
        v /= total;
    }
    Image tmp(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                s += kernel[static_cast<size_t>(k + radius)] * img.at_clamped(x + k, y);
            }
            tmp(x, y) = s;
        }
    }
    Image out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                s += kernel[static_cast<size_t>(k + radius)] * tmp.at_clamped(x, y + k);
            }
            out(x, y) = s;
        }
    }
    return out;
}

Image downsample(const Image &img) {
    const int w = (img.width() + 1) / 2;
    const int h = (img.height() + 1) / 2;
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out(x, y) = 0.25 * (img.at_clamped(2 * x, 2 * y) + img.at_clamped(2 * x + 1, 2 * y) +
                                img.at_clamped(2 * x, 2 * y + 1) + img.at_clamped(2 * x + 1, 2 * y + 1));
        }
    }
    return out;
}

DisplacementField upsample(const DisplacementField &coarse, int width, int height) {
    Image cx(coarse.width(), coarse.height(), std::vector<double>(coarse.ux_plane().begin(), coarse.ux_plane().end()));
    Image cy(coarse.width(), coarse.height(), std::vector<double>(coarse.uy_plane().begin(), coarse.uy_plane().end()));
    DisplacementField fine(width, height);
    for (int y = 0; y < height; ++y) {
        // Coarse pixel i is the mean of fine pixels 2i and 2i+1, so its centre
        // sits at fine coordinate 2i + 0.5.
        const double sy = (y - 0.5) / 2.0;
        for (int x = 0; x < width; ++x) {
            const double sx = (x - 0.5) / 2.0;
            fine.ux(x, y) = 2.0 * sample(cx, sx, sy);
            fine.uy(x, y) = 2.0 * sample(cy, sx, sy);
        }
    }
    return fine;
}

DisplacementField combine(const DisplacementField &lhs, double a, const DisplacementField &rhs, double b) {
    if (!lhs.same_shape(rhs)) {
        throw Error(ErrorCode::dimension_mismatch, "cannot combine fields " + shape_string(lhs.width(), lhs.height()) +
                                                       " and " + shape_string(rhs.width(), rhs.height()));
    }
    DisplacementField out(lhs.width(), lhs.height());
    for (size_t i = 0; i < lhs.size(); ++i) {
        out.ux_plane()[i] = a * lhs.ux_plane()[i] + b * rhs.ux_plane()[i];
        out.uy_plane()[i] = a * lhs.uy_plane()[i] + b * rhs.uy_plane()[i];
    }
    return out;
}

void write_gmdf(const DisplacementField &field, const std::filesystem::path &path) {
    detail::write_planes(path, "GMDF", static_cast<uint32_t>(field.width()), static_cast<uint32_t>(field.height()),
                         {field.ux_plane(), field.uy_plane()});
}

DisplacementField read_gmdf(const std::filesystem::path &path) {
    auto f = detail::read_planes(path, "GMDF", 2);
    return {static_cast<int>(f.width), static_cast<int>(f.height), std::move(f.planes[0]), std::move(f.planes[1])};
}

} // namespace gmind
