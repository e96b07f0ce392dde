#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gmind {

/// Integer pixel position, x is the column and y the row.
struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel &, const Pixel &) = default;
};

/// 2D grayscale raster, row-major, real-valued intensities.
///
/// Intensities keep whatever units the caller uses (0-255 for 8-bit files,
/// 0-65535 for 16-bit PGM); nothing is rescaled on load.
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0);
    /// Throws if data.size() != width*height or any value is not finite.
    Image(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(int x, int y) const { return data_[index(x, y)]; }
    double &operator()(int x, int y) { return data_[index(x, y)]; }

    /// Replicate-padded read: coordinates are clamped onto the grid.
    double at_clamped(int x, int y) const;

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool same_shape(const Image &other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Image &, const Image &) = default;

private:
    size_t index(int x, int y) const noexcept {
        return static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Per-pixel displacement U = (u_x, u_y) in pixels. warp() reads the source
/// image at X + U(X).
class DisplacementField {
public:
    DisplacementField() = default;
    DisplacementField(int width, int height);
    DisplacementField(int width, int height, std::vector<double> ux, std::vector<double> uy);

    static DisplacementField constant(int width, int height, double ux, double uy);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    size_t size() const noexcept { return ux_.size(); }

    double ux(int x, int y) const { return ux_[index(x, y)]; }
    double uy(int x, int y) const { return uy_[index(x, y)]; }
    double &ux(int x, int y) { return ux_[index(x, y)]; }
    double &uy(int x, int y) { return uy_[index(x, y)]; }

    std::span<const double> ux_plane() const noexcept { return ux_; }
    std::span<const double> uy_plane() const noexcept { return uy_; }
    std::span<double> ux_plane() noexcept { return ux_; }
    std::span<double> uy_plane() noexcept { return uy_; }

    bool all_finite() const noexcept;

    template <class T>
    bool same_shape(const T &other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const DisplacementField &, const DisplacementField &) = default;

private:
    size_t index(int x, int y) const noexcept {
        return static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> ux_;
    std::vector<double> uy_;
};

struct GradientPair {
    Image gx;
    Image gy;
};

enum class GradientScheme {
    central_difference, // central inside, one-sided on the border
};

Image load_image(const std::filesystem::path &path);
/// Writes 8-bit PGM or PNG depending on the extension. Values are clamped to
/// [0, 255] and rounded half-to-even.
void save_image(const Image &img, const std::filesystem::path &path);

/// Bilinear interpolation with clamp-to-edge outside the grid.
double sample(const Image &img, double x, double y);

/// output(X) = sample(img, X + U(X)).
Image warp(const Image &img, const DisplacementField &field);

GradientPair gradient(const Image &img, GradientScheme scheme = GradientScheme::central_difference);

/// 2x2 block average; odd trailing rows/columns are averaged with themselves.
Image downsample(const Image &img);

/// Separable Gaussian blur truncated at 3 sigma, replicate borders. sigma = 0
/// returns the input.
Image gaussian_blur(const Image &img, double sigma);

/// Bilinear resample of a coarse field onto a (width x height) grid twice as
/// fine, with displacements doubled.
DisplacementField upsample(const DisplacementField &coarse, int width, int height);

/// Componentwise a*lhs + b*rhs.
DisplacementField combine(const DisplacementField &lhs, double a, const DisplacementField &rhs, double b);

// GMDF: "GMDF", 0x01, u32 LE width, u32 LE height, u_x plane then u_y plane
// as row-major f32 LE.
void write_gmdf(const DisplacementField &field, const std::filesystem::path &path);
DisplacementField read_gmdf(const std::filesystem::path &path);

std::string shape_string(int width, int height);

} // namespace gmind
