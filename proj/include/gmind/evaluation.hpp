#pragma once

#include "gmind/imaging.hpp"
#include "gmind/similarity.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gmind {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Ordered landmarks; the index is the correspondence key between sets.
struct LandmarkSet {
    std::vector<Point2> points;
    std::optional<double> mm_per_pixel;
};

enum class Unit { pixels, mm };

struct ErrorSummary {
    double mean = 0.0;
    double std = 0.0; // population convention (divide by n)
    Unit unit = Unit::pixels;
    size_t n = 0;
};

ErrorSummary summarize(std::span<const double> values, Unit unit = Unit::pixels);

/// "mean ± std" with two decimals, e.g. "1.01 ± 2.76".
std::string format_summary(const ErrorSummary &s);

/// error(X) = |U_registration(X) + U_distortion(X)|_2.
ScalarField registration_error_map(const DisplacementField &u_reg, const DisplacementField &u_dist);

struct TreResult {
    std::vector<double> per_landmark_px;
    ErrorSummary pixels;
    std::optional<std::vector<double>> per_landmark_mm;
    std::optional<ErrorSummary> mm;
};

/// TRE_k = |X1_k + U(X1_k) - X2_k| with U sampled bilinearly at X1_k. The mm
/// scale comes from fixed.mm_per_pixel, falling back to moving's.
TreResult tre(const LandmarkSet &fixed, const LandmarkSet &moving, const DisplacementField &field);

/// Row-major boolean mask.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> values;

    bool operator()(int x, int y) const { return values[static_cast<size_t>(y) * width + x] != 0; }
    size_t count() const;
};

/// Pixels whose gradient magnitude strictly exceeds the given percentile of
/// the image's own magnitude distribution, dilated by one pixel (3x3).
Mask edge_mask(const Image &img, double percentile);

/// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct);

ErrorSummary masked_error_stats(const ScalarField &errmap, const Mask &mask);

/// One "x,y" pair per line; blank lines and lines starting with '#' are
/// skipped, as is a leading "x,y" header.
LandmarkSet read_landmarks_csv(const std::filesystem::path &path);
void write_landmarks_csv(const LandmarkSet &set, const std::filesystem::path &path);

} // namespace gmind
