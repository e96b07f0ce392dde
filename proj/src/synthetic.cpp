#include "gmind/synthetic.hpp"
#include "gmind/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gmind {

void AffineTransform::validate() const {
    for (double v : {a11, a12, a21, a22, tx, ty}) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::invalid_argument, "affine coefficients must be finite");
        }
    }
    if (std::abs(determinant()) <= 1e-6) {
        throw Error(ErrorCode::invalid_argument, "affine transform is not invertible (|det| <= 1e-6)");
    }
}

AffineTransform AffineTransform::inverse() const {
    validate();
    const double det = determinant();
    AffineTransform inv;
    inv.a11 = a22 / det;
    inv.a12 = -a12 / det;
    inv.a21 = -a21 / det;
    inv.a22 = a11 / det;
    inv.tx = -(inv.a11 * tx + inv.a12 * ty);
    inv.ty = -(inv.a21 * tx + inv.a22 * ty);
    return inv;
}

AffineTransform AffineTransform::compose(const AffineTransform &o) const {
    AffineTransform r;
    r.a11 = a11 * o.a11 + a12 * o.a21;
    r.a12 = a11 * o.a12 + a12 * o.a22;
    r.a21 = a21 * o.a11 + a22 * o.a21;
    r.a22 = a21 * o.a12 + a22 * o.a22;
    r.tx = a11 * o.tx + a12 * o.ty + tx;
    r.ty = a21 * o.tx + a22 * o.ty + ty;
    return r;
}

std::pair<double, double> AffineTransform::apply(double x, double y, double cx, double cy) const {
    const double dx = x - cx;
    const double dy = y - cy;
    return {a11 * dx + a12 * dy + cx + tx, a21 * dx + a22 * dy + cy + ty};
}

AffineTransform AffineTransform::translation(double tx, double ty) {
    return {1.0, 0.0, 0.0, 1.0, tx, ty};
}

AffineTransform AffineTransform::similarity(double angle_deg, double scale, double tx, double ty) {
    const double a = angle_deg * std::numbers::pi / 180.0;
    return {scale * std::cos(a), -scale * std::sin(a), scale * std::sin(a), scale * std::cos(a), tx, ty};
}

bool Segment::contains(double px, double py) const {
    if (kind == ShapeKind::rectangle) {
        return px >= x && px < x + width && py >= y && py < y + height;
    }
    const double u = (px - x) / width;
    const double v = (py - y) / height;
    return u * u + v * v <= 1.0;
}

void SyntheticSpec::validate() const {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::invalid_argument, "synthetic spec dimensions must be positive");
    }
    auto in_range = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 255.0; };
    if (!in_range(background)) {
        throw Error(ErrorCode::invalid_argument, "background intensity must be in [0, 255]");
    }
    for (size_t k = 0; k < segments.size(); ++k) {
        const auto &s = segments[k];
        const std::string id = "segment " + std::to_string(k);
        if (!in_range(s.intensity)) {
            throw Error(ErrorCode::invalid_argument, id + ": intensity must be in [0, 255]");
        }
        if (!(s.width > 0.0) || !(s.height > 0.0)) {
            throw Error(ErrorCode::invalid_argument, id + ": extent must be positive");
        }
        double x0 = s.x, y0 = s.y, x1 = s.x + s.width, y1 = s.y + s.height;
        if (s.kind == ShapeKind::ellipse) {
            x0 = s.x - s.width;
            y0 = s.y - s.height;
        }
        if (x0 < 0.0 || y0 < 0.0 || x1 > width || y1 > height) {
            throw Error(ErrorCode::invalid_argument, id + ": outside the " + shape_string(width, height) + " canvas");
        }
    }
    for (const auto &range : {blur_sigma, noise_sigma}) {
        if (!(range[0] >= 0.0) || !(range[1] >= range[0]) || !std::isfinite(range[1])) {
            throw Error(ErrorCode::invalid_argument, "sigma ranges must satisfy 0 <= lo <= hi");
        }
    }
}

SyntheticSpec SyntheticSpec::default_spec(int width, int height) {
    SyntheticSpec spec;
    spec.width = width;
    spec.height = height;
    spec.background = 20.0;
    const double w = width;
    const double h = height;
    auto rect = [&](double x, double y, double rw, double rh, double v) {
        return Segment{ShapeKind::rectangle, x * w, y * h, rw * w, rh * h, v};
    };
    auto ellipse = [&](double cx, double cy, double rx, double ry, double v) {
        return Segment{ShapeKind::ellipse, cx * w, cy * h, rx * w, ry * h, v};
    };
    spec.segments = {
        rect(0.08, 0.10, 0.40, 0.30, 90.0),      ellipse(0.70, 0.30, 0.18, 0.14, 200.0),
        rect(0.55, 0.55, 0.35, 0.30, 150.0),     ellipse(0.30, 0.68, 0.20, 0.16, 60.0),
        ellipse(0.30, 0.68, 0.08, 0.07, 230.0),  rect(0.15, 0.42, 0.12, 0.12, 180.0),
        ellipse(0.75, 0.72, 0.08, 0.10, 40.0),   rect(0.20, 0.18, 0.15, 0.10, 240.0),
    };
    spec.blur_sigma = {0.5, 2.0};
    spec.noise_sigma = {1.0, 6.0};
    spec.seed = 2024;
    return spec;
}

std::vector<int> segment_labels(const SyntheticSpec &spec) {
    std::vector<int> labels(static_cast<size_t>(spec.width) * static_cast<size_t>(spec.height), 0);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            for (size_t k = 0; k < spec.segments.size(); ++k) {
                if (spec.segments[k].contains(x, y)) {
                    labels[static_cast<size_t>(y) * spec.width + x] = static_cast<int>(k) + 1;
                }
            }
        }
    }
    return labels;
}

Image underlying_image(const SyntheticSpec &spec) {
    spec.validate();
    const auto labels = segment_labels(spec);
    Image img(spec.width, spec.height);
    auto data = img.data();
    for (size_t i = 0; i < labels.size(); ++i) {
        data[i] = labels[i] == 0 ? spec.background : spec.segments[static_cast<size_t>(labels[i] - 1)].intensity;
    }
    return img;
}

std::vector<Image> generate_dataset(const SyntheticSpec &spec, int count) {
    if (count < 1) {
        throw Error(ErrorCode::invalid_argument, "dataset count must be >= 1");
    }
    spec.validate();
    const Image base = underlying_image(spec);
    const auto labels = segment_labels(spec);
    const size_t regions = spec.segments.size() + 1;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> blur_dist(spec.blur_sigma[0], spec.blur_sigma[1]);
    std::uniform_real_distribution<double> noise_dist(spec.noise_sigma[0], spec.noise_sigma[1]);
    std::normal_distribution<double> unit_normal(0.0, 1.0);

    std::vector<Image> images;
    images.reserve(static_cast<size_t>(count));
    for (int n = 0; n < count; ++n) {
        std::vector<double> blur(regions);
        std::vector<double> noise(regions);
        for (size_t r = 0; r < regions; ++r) {
            blur[r] = blur_dist(rng);
            noise[r] = noise_dist(rng);
        }
        std::vector<Image> blurred;
        blurred.reserve(regions);
        for (size_t r = 0; r < regions; ++r) {
            blurred.push_back(gaussian_blur(base, blur[r]));
        }
        Image img(spec.width, spec.height);
        auto data = img.data();
        for (size_t i = 0; i < data.size(); ++i) {
            const auto r = static_cast<size_t>(labels[i]);
            data[i] = blurred[r].data()[i] + noise[r] * unit_normal(rng);
        }
        images.push_back(std::move(img));
    }
    return images;
}

DisplacementField affine_to_field(const AffineTransform &t, int width, int height) {
    t.validate();
    DisplacementField field(width, height);
    const double cx = 0.5 * (width - 1);
    const double cy = 0.5 * (height - 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto [tx, ty] = t.apply(x, y, cx, cy);
            field.ux(x, y) = tx - x;
            field.uy(x, y) = ty - y;
        }
    }
    return field;
}

DistortedImage apply_affine(const Image &img, const AffineTransform &t) {
    const auto inverse_field = affine_to_field(t.inverse(), img.width(), img.height());
    return {warp(img, inverse_field), affine_to_field(t, img.width(), img.height())};
}

AffineTransform DistortionSampler::operator()(std::mt19937_64 &rng) const {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double angle = max_rotation_deg * unit(rng);
    const double scale = 1.0 + max_scale_delta * unit(rng);
    const double tx = max_translation * unit(rng);
    const double ty = max_translation * unit(rng);
    return AffineTransform::similarity(angle, scale, tx, ty);
}

} // namespace gmind
