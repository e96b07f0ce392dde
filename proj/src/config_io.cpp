#include "gmind/config_io.hpp"
#include "gmind/error.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace gmind {

namespace {

using nlohmann::json;

std::string slurp(const std::filesystem::path &path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::missing_file, "no such file: " + path.string());
    }
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json parse_object(const std::string &text, const char *what) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::unsupported_format, std::string("invalid ") + what + " JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw Error(ErrorCode::unsupported_format, std::string(what) + " JSON must be an object");
    }
    return j;
}

double number(const json &j, const char *key, const char *what) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
        throw Error(ErrorCode::invalid_argument, std::string(what) + ": missing numeric field '" + key + "'");
    }
    return it->get<double>();
}

std::array<double, 2> range(const json &j, const char *key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw Error(ErrorCode::invalid_argument, std::string("synthetic spec: '") + key + "' must be [lo, hi]");
    }
    return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

} // namespace

SyntheticSpec parse_synthetic_spec(const std::string &json_text) {
    const json j = parse_object(json_text, "synthetic spec");
    SyntheticSpec spec;
    spec.width = static_cast<int>(number(j, "width", "synthetic spec"));
    spec.height = static_cast<int>(number(j, "height", "synthetic spec"));
    spec.background = j.contains("background") ? number(j, "background", "synthetic spec") : 20.0;
    spec.blur_sigma = range(j, "blur_sigma");
    spec.noise_sigma = range(j, "noise_sigma");
    const auto seed = j.find("seed");
    if (seed == j.end() || !seed->is_number_unsigned()) {
        throw Error(ErrorCode::invalid_argument, "synthetic spec: 'seed' must be a non-negative integer");
    }
    spec.seed = seed->get<uint64_t>();
    const auto segs = j.find("segments");
    if (segs == j.end() || !segs->is_array()) {
        throw Error(ErrorCode::invalid_argument, "synthetic spec: 'segments' must be an array");
    }
    for (const auto &s : *segs) {
        if (!s.is_object()) {
            throw Error(ErrorCode::invalid_argument, "synthetic spec: segments must be objects");
        }
        const std::string shape = s.value("shape", "");
        Segment seg;
        if (shape == "rectangle") {
            seg = {ShapeKind::rectangle, number(s, "x", "rectangle"), number(s, "y", "rectangle"),
                   number(s, "width", "rectangle"), number(s, "height", "rectangle"), 0.0};
        } else if (shape == "ellipse") {
            seg = {ShapeKind::ellipse, number(s, "cx", "ellipse"), number(s, "cy", "ellipse"), number(s, "rx", "ellipse"),
                   number(s, "ry", "ellipse"), 0.0};
        } else {
            throw Error(ErrorCode::invalid_argument, "synthetic spec: unknown shape '" + shape + "'");
        }
        seg.intensity = number(s, "intensity", "segment");
        spec.segments.push_back(seg);
    }
    spec.validate();
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path &path) {
    return parse_synthetic_spec(slurp(path));
}

std::string synthetic_spec_to_json(const SyntheticSpec &spec) {
    nlohmann::ordered_json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["background"] = spec.background;
    auto segs = nlohmann::ordered_json::array();
    for (const auto &s : spec.segments) {
        if (s.kind == ShapeKind::rectangle) {
            segs.push_back({{"shape", "rectangle"}, {"x", s.x}, {"y", s.y}, {"width", s.width},
                            {"height", s.height}, {"intensity", s.intensity}});
        } else {
            segs.push_back({{"shape", "ellipse"}, {"cx", s.x}, {"cy", s.y}, {"rx", s.width},
                            {"ry", s.height}, {"intensity", s.intensity}});
        }
    }
    j["segments"] = std::move(segs);
    j["blur_sigma"] = spec.blur_sigma;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

AffineTransform parse_transform(const std::string &json_text) {
    const json j = parse_object(json_text, "transform");
    AffineTransform t{number(j, "a11", "transform"), number(j, "a12", "transform"), number(j, "a21", "transform"),
                      number(j, "a22", "transform"), number(j, "tx", "transform"),  number(j, "ty", "transform")};
    t.validate();
    return t;
}

AffineTransform load_transform(const std::filesystem::path &path) {
    return parse_transform(slurp(path));
}

std::string transform_to_json(const AffineTransform &t) {
    return detail::affine_json(t).dump(2) + "\n";
}

} // namespace gmind
