#pragma once

#include "gmind/imaging.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace gmind {

/// Affine map acting about the image centre c = ((w-1)/2, (h-1)/2):
/// T(X) = A (X - c) + c + t.
struct AffineTransform {
    double a11 = 1.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 1.0;
    double tx = 0.0;
    double ty = 0.0;

    double determinant() const { return a11 * a22 - a12 * a21; }
    /// Throws when |det| <= 1e-6.
    void validate() const;

    AffineTransform inverse() const;
    /// (this o other)(X) = this(other(X)).
    AffineTransform compose(const AffineTransform &other) const;
    std::pair<double, double> apply(double x, double y, double cx, double cy) const;

    static AffineTransform translation(double tx, double ty);
    /// Rotation by angle_deg (counter-clockwise in x-right / y-down pixel
    /// coordinates reads clockwise on screen), isotropic scale, translation.
    static AffineTransform similarity(double angle_deg, double scale, double tx, double ty);
};

enum class ShapeKind { rectangle, ellipse };

struct Segment {
    ShapeKind kind = ShapeKind::rectangle;
    // rectangle: [x, x + width) x [y, y + height)
    // ellipse: centre (x, y), radii (width, height)
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
    double intensity = 0.0;

    bool contains(double px, double py) const;
};

struct SyntheticSpec {
    int width = 128;
    int height = 128;
    double background = 20.0;
    /// Later segments are painted over earlier ones.
    std::vector<Segment> segments;
    std::array<double, 2> blur_sigma{0.0, 0.0};
    std::array<double, 2> noise_sigma{0.0, 0.0};
    uint64_t seed = 0;

    void validate() const;
    /// Built-in dataset used by the experiment when no spec file is given.
    static SyntheticSpec default_spec(int width = 128, int height = 128);
};

/// Label per pixel: 0 is background, k is segments[k-1] (topmost wins).
std::vector<int> segment_labels(const SyntheticSpec &spec);

/// Noise- and blur-free segment image shared by every dataset member.
Image underlying_image(const SyntheticSpec &spec);

/// count images of the same underlying segments; every segment of every
/// image gets its own blur and noise level.
std::vector<Image> generate_dataset(const SyntheticSpec &spec, int count);

/// U(X) = T(X) - X about the image centre.
DisplacementField affine_to_field(const AffineTransform &t, int width, int height);

struct DistortedImage {
    Image image;
    /// affine_to_field(t); warp(image, distortion) recovers the input.
    DisplacementField distortion;
};

/// image(X) = input(T^-1(X)).
DistortedImage apply_affine(const Image &img, const AffineTransform &t);

/// Small random similarity transform: rotation in +-max_rotation_deg, scale in
/// [1 - max_scale_delta, 1 + max_scale_delta], translation in +-max_translation.
struct DistortionSampler {
    double max_rotation_deg = 5.0;
    double max_scale_delta = 0.05;
    double max_translation = 5.0;

    AffineTransform operator()(std::mt19937_64 &rng) const;
};

} // namespace gmind
