#include "gmind/similarity.hpp"
#include "gmind/error.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>

namespace gmind {

ScalarField::ScalarField(int width, int height, double fill)
    : width_(width), height_(height), values_(static_cast<size_t>(width) * static_cast<size_t>(height), fill) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::invalid_argument, "scalar field dimensions must be positive");
    }
}

ScalarField::ScalarField(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::invalid_argument, "scalar field dimensions must be positive");
    }
    if (values_.size() != static_cast<size_t>(width) * static_cast<size_t>(height)) {
        throw Error(ErrorCode::dimension_mismatch, "scalar field length does not match " + shape_string(width, height));
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorCode::invalid_argument, "scalar field values must be finite and non-negative");
        }
    }
}

double ScalarField::mean() const {
    if (values_.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double v : values_) {
        s += v;
    }
    return s / static_cast<double>(values_.size());
}

ScalarField similarity_map(const DescriptorField &a, const DescriptorField &b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::dimension_mismatch,
                    "descriptor fields differ: " + shape_string(a.width(), a.height()) + "x" +
                        std::to_string(a.channels()) + " vs " + shape_string(b.width(), b.height()) + "x" +
                        std::to_string(b.channels()));
    }
    const auto channels = static_cast<size_t>(a.channels());
    ScalarField out(a.width(), a.height());
    const auto av = a.values();
    const auto bv = b.values();
    auto ov = out.values();
    for (size_t i = 0; i < ov.size(); ++i) {
        double s = 0.0;
        for (size_t c = 0; c < channels; ++c) {
            s += std::abs(av[i * channels + c] - bv[i * channels + c]);
        }
        ov[i] = s / static_cast<double>(channels);
    }
    return out;
}

std::pair<ScalarField, ScalarField> directional_similarity(const GradientPair &i_grad, const GradientPair &j_grad,
                                                           const DescriptorConfig &cfg) {
    if (!i_grad.gx.same_shape(i_grad.gy) || !i_grad.gx.same_shape(j_grad.gx) || !i_grad.gx.same_shape(j_grad.gy)) {
        throw Error(ErrorCode::dimension_mismatch,
                    "gradient images differ in size: " + shape_string(i_grad.gx.width(), i_grad.gx.height()) +
                        " vs " + shape_string(j_grad.gx.width(), j_grad.gx.height()));
    }
    return {similarity_map(mind_descriptor(i_grad.gx, cfg), mind_descriptor(j_grad.gx, cfg)),
            similarity_map(mind_descriptor(i_grad.gy, cfg), mind_descriptor(j_grad.gy, cfg))};
}

void save_scalar_image(const ScalarField &field, const std::filesystem::path &path) {
    const auto v = field.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi - *lo;
    std::vector<double> scaled(v.size(), 0.0);
    if (span > 0.0) {
        for (size_t i = 0; i < v.size(); ++i) {
            scaled[i] = 255.0 * (v[i] - *lo) / span;
        }
    }
    save_image(Image(field.width(), field.height(), std::move(scaled)), path);
}

void write_gmsf(const ScalarField &field, const std::filesystem::path &path) {
    detail::write_planes(path, "GMSF", static_cast<uint32_t>(field.width()), static_cast<uint32_t>(field.height()),
                         {field.values()});
}

ScalarField read_gmsf(const std::filesystem::path &path) {
    auto f = detail::read_planes(path, "GMSF", 1);
    return {static_cast<int>(f.width), static_cast<int>(f.height), std::move(f.planes[0])};
}

} // namespace gmind
