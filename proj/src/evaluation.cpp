#include "gmind/evaluation.hpp"
#include "gmind/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gmind {

ErrorSummary summarize(std::span<const double> values, Unit unit) {
    if (values.empty()) {
        throw Error(ErrorCode::invalid_argument, "cannot summarise an empty set");
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        sq += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(sq / static_cast<double>(values.size())), unit, values.size()};
}

std::string format_summary(const ErrorSummary &s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", s.mean, s.std);
    return buf;
}

ScalarField registration_error_map(const DisplacementField &u_reg, const DisplacementField &u_dist) {
    if (!u_reg.same_shape(u_dist)) {
        throw Error(ErrorCode::dimension_mismatch,
                    "error map: registration field " + shape_string(u_reg.width(), u_reg.height()) +
                        " vs distortion field " + shape_string(u_dist.width(), u_dist.height()));
    }
    std::vector<double> err(u_reg.size());
    for (size_t i = 0; i < err.size(); ++i) {
        err[i] = std::hypot(u_reg.ux_plane()[i] + u_dist.ux_plane()[i], u_reg.uy_plane()[i] + u_dist.uy_plane()[i]);
    }
    return {u_reg.width(), u_reg.height(), std::move(err)};
}

TreResult tre(const LandmarkSet &fixed, const LandmarkSet &moving, const DisplacementField &field) {
    if (fixed.points.size() != moving.points.size()) {
        throw Error(ErrorCode::dimension_mismatch, "landmark count mismatch: " + std::to_string(fixed.points.size()) +
                                                       " vs " + std::to_string(moving.points.size()));
    }
    if (fixed.points.empty()) {
        throw Error(ErrorCode::invalid_argument, "landmark sets are empty");
    }
    auto outside = [&](const Point2 &p) {
        return !(p.x >= 0.0 && p.y >= 0.0 && p.x <= field.width() - 1 && p.y <= field.height() - 1);
    };
    for (size_t k = 0; k < fixed.points.size(); ++k) {
        for (const auto *p : {&fixed.points[k], &moving.points[k]}) {
            if (outside(*p)) {
                throw Error(ErrorCode::out_of_bounds, "landmark " + std::to_string(k) + " lies outside the " +
                                                          shape_string(field.width(), field.height()) + " field");
            }
        }
    }

    const Image ux(field.width(), field.height(), std::vector<double>(field.ux_plane().begin(), field.ux_plane().end()));
    const Image uy(field.width(), field.height(), std::vector<double>(field.uy_plane().begin(), field.uy_plane().end()));
    TreResult result;
    result.per_landmark_px.reserve(fixed.points.size());
    for (size_t k = 0; k < fixed.points.size(); ++k) {
        const auto &p1 = fixed.points[k];
        const auto &p2 = moving.points[k];
        const double dx = p1.x + sample(ux, p1.x, p1.y) - p2.x;
        const double dy = p1.y + sample(uy, p1.x, p1.y) - p2.y;
        result.per_landmark_px.push_back(std::sqrt(dx * dx + dy * dy));
    }
    result.pixels = summarize(result.per_landmark_px, Unit::pixels);

    const auto scale = fixed.mm_per_pixel ? fixed.mm_per_pixel : moving.mm_per_pixel;
    if (scale) {
        if (!(*scale > 0.0) || !std::isfinite(*scale)) {
            throw Error(ErrorCode::invalid_argument, "mm per pixel must be > 0");
        }
        std::vector<double> mm;
        mm.reserve(result.per_landmark_px.size());
        for (double v : result.per_landmark_px) {
            mm.push_back(v * *scale);
        }
        result.mm = summarize(mm, Unit::mm);
        result.per_landmark_mm = std::move(mm);
    }
    return result;
}

size_t Mask::count() const {
    return static_cast<size_t>(std::count(values.begin(), values.end(), uint8_t{1}));
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) {
        throw Error(ErrorCode::invalid_argument, "percentile of an empty set");
    }
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Mask edge_mask(const Image &img, double pct) {
    if (!(pct > 0.0 && pct < 100.0)) {
        throw Error(ErrorCode::invalid_argument, "edge percentile must be in (0, 100)");
    }
    if (img.width() < 2 || img.height() < 2) {
        throw Error(ErrorCode::invalid_argument, "edge mask needs at least a 2x2 image");
    }
    const auto g = gradient(img);
    std::vector<double> mag(img.size());
    for (size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(g.gx.data()[i], g.gy.data()[i]);
    }
    const double threshold = percentile(mag, pct);

    const int w = img.width();
    const int h = img.height();
    Mask mask{w, h, std::vector<uint8_t>(img.size(), 0)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mag[static_cast<size_t>(y) * w + x] <= threshold) {
                continue;
            }
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < w && yy < h) {
                        mask.values[static_cast<size_t>(yy) * w + xx] = 1;
                    }
                }
            }
        }
    }
    return mask;
}

ErrorSummary masked_error_stats(const ScalarField &errmap, const Mask &mask) {
    if (errmap.width() != mask.width || errmap.height() != mask.height) {
        throw Error(ErrorCode::dimension_mismatch,
                    "mask " + shape_string(mask.width, mask.height) + " vs error map " +
                        shape_string(errmap.width(), errmap.height()));
    }
    std::vector<double> selected;
    for (size_t i = 0; i < errmap.size(); ++i) {
        if (mask.values[i] != 0) {
            selected.push_back(errmap.values()[i]);
        }
    }
    if (selected.empty()) {
        throw Error(ErrorCode::invalid_argument, "mask selects no pixels");
    }
    return summarize(selected, Unit::pixels);
}

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool parse_double(const std::string &text, double &out) {
    const std::string t = trim(text);
    if (t.empty()) {
        return false;
    }
    // std::from_chars for double is missing from older libstdc++; strtod is
    // locale-sensitive but the CLI never changes the C locale.
    char *end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

} // namespace

LandmarkSet read_landmarks_csv(const std::filesystem::path &path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::missing_file, "no such landmark file: " + path.string());
    }
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    }
    LandmarkSet set;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto comma = line.find(',');
        Point2 p;
        if (comma == std::string::npos || !parse_double(line.substr(0, comma), p.x) ||
            !parse_double(line.substr(comma + 1), p.y)) {
            if (set.points.empty() && line_no == 1 && trim(line.substr(0, comma)) == "x") {
                continue;
            }
            throw Error(ErrorCode::unsupported_format,
                        path.string() + ":" + std::to_string(line_no) + ": expected \"x,y\"");
        }
        set.points.push_back(p);
    }
    return set;
}

void write_landmarks_csv(const LandmarkSet &set, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
    }
    out.precision(17);
    for (const auto &p : set.points) {
        out << p.x << ',' << p.y << '\n';
    }
}

} // namespace gmind
