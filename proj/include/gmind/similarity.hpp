#pragma once

#include "gmind/descriptor.hpp"
#include "gmind/imaging.hpp"

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace gmind {

/// Non-negative per-pixel scalar map (similarity maps, error maps).
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int width, int height, double fill = 0.0);
    ScalarField(int width, int height, std::vector<double> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    size_t size() const noexcept { return values_.size(); }

    double operator()(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }
    double &operator()(int x, int y) { return values_[static_cast<size_t>(y) * width_ + x]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double mean() const;

    friend bool operator==(const ScalarField &, const ScalarField &) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// S(X) = mean over channels of |a(X,r) - b(X,r)|.
ScalarField similarity_map(const DescriptorField &a, const DescriptorField &b);

/// Per-direction maps (S_x, S_y) between the MIND descriptors of two
/// gradient pairs.
std::pair<ScalarField, ScalarField> directional_similarity(const GradientPair &i_grad, const GradientPair &j_grad,
                                                           const DescriptorConfig &cfg = {});

/// Linear rescale of [min, max] to [0, 255]; a constant map writes zeros.
void save_scalar_image(const ScalarField &field, const std::filesystem::path &path);

// GMSF: "GMSF", 0x01, u32 LE width, u32 LE height, one row-major f32 LE plane.
void write_gmsf(const ScalarField &field, const std::filesystem::path &path);
ScalarField read_gmsf(const std::filesystem::path &path);

} // namespace gmind
