#pragma once

#include "gmind/evaluation.hpp"
#include "gmind/synthetic.hpp"

#include <json.hpp>

namespace gmind::detail {

inline nlohmann::ordered_json affine_json(const AffineTransform &t) {
    return {{"a11", t.a11}, {"a12", t.a12}, {"a21", t.a21}, {"a22", t.a22}, {"tx", t.tx}, {"ty", t.ty}};
}

inline nlohmann::ordered_json summary_json(const ErrorSummary &s) {
    return {{"mean", s.mean}, {"std", s.std}, {"unit", s.unit == Unit::mm ? "mm" : "pixels"}, {"n", s.n}};
}

} // namespace gmind::detail
