#pragma once

#include "gmind/imaging.hpp"

#include <span>
#include <vector>

namespace gmind {

struct Offset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Offset &, const Offset &) = default;
};

struct DescriptorConfig {
    /// Patch half-width; patches are (2P+1) x (2P+1).
    int patch_radius = 1;
    /// Self-similarity offsets. Must be non-empty, distinct, and exclude (0,0).
    std::vector<Offset> search_region = eight_neighbourhood();
    /// The local variance is clamped to [low, high] * (image-mean variance).
    double variance_low = 0.001;
    double variance_high = 1000.0;

    /// Throws gmind::Error on any violated invariant.
    void validate() const;

    static std::vector<Offset> four_neighbourhood();
    static std::vector<Offset> eight_neighbourhood();
};

/// One |R|-channel self-similarity vector per pixel. Values are stored
/// pixel-major: values[(y*width + x)*channels + c].
class DescriptorField {
public:
    DescriptorField() = default;
    DescriptorField(int width, int height, int channels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }

    double operator()(int x, int y, int c) const { return values_[index(x, y, c)]; }
    double &operator()(int x, int y, int c) { return values_[index(x, y, c)]; }

    std::span<const double> pixel(int x, int y) const {
        return std::span<const double>(values_).subspan(index(x, y, 0), static_cast<size_t>(channels_));
    }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool same_shape(const DescriptorField &other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

private:
    size_t index(int x, int y, int c) const noexcept {
        return (static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)) *
                   static_cast<size_t>(channels_) +
               static_cast<size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> values_;
};

/// Sum of squared differences between the (2P+1)^2 patches centred on a and b.
/// Both centres must lie inside the image; patch pixels that fall outside are
/// read with replicate padding.
double patch_distance(const Image &img, Pixel a, Pixel b, int patch_radius);

/// Mean patch distance between xc and its four 4-neighbours (unclamped).
double variance(const Image &img, Pixel xc, int patch_radius);

/// Patch distance from every pixel to the pixel at the given offset, computed
/// for the whole image with a separable box sum. Row-major, same size as img.
std::vector<double> patch_distance_map(const Image &img, Offset offset, int patch_radius);

/// Unclamped local variance for every pixel.
std::vector<double> variance_map(const Image &img, int patch_radius);

DescriptorField mind_descriptor(const Image &img, const DescriptorConfig &cfg = {});

} // namespace gmind
