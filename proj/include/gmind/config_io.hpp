#pragma once

#include "gmind/synthetic.hpp"

#include <filesystem>
#include <string>

namespace gmind {

// Synthetic spec JSON:
//   {"width": 128, "height": 128, "background": 20,
//    "segments": [{"shape": "rectangle", "x":..,"y":..,"width":..,"height":..,"intensity":..},
//                 {"shape": "ellipse", "cx":..,"cy":..,"rx":..,"ry":..,"intensity":..}],
//    "blur_sigma": [lo, hi], "noise_sigma": [lo, hi], "seed": 7}
// "background" is optional (default 20).
SyntheticSpec parse_synthetic_spec(const std::string &json_text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path &path);
std::string synthetic_spec_to_json(const SyntheticSpec &spec);

// Transform JSON: {"a11":..,"a12":..,"a21":..,"a22":..,"tx":..,"ty":..}
AffineTransform parse_transform(const std::string &json_text);
AffineTransform load_transform(const std::filesystem::path &path);
std::string transform_to_json(const AffineTransform &t);

} // namespace gmind
