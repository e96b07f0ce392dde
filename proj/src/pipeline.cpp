#include "gmind/pipeline.hpp"
#include "gmind/error.hpp"
#include "gmind/similarity.hpp"

namespace gmind {

std::string_view to_string(Method m) {
    return m == Method::mind ? "mind" : "gmind";
}

Method parse_method(std::string_view name) {
    if (name == "mind") {
        return Method::mind;
    }
    if (name == "gmind") {
        return Method::gmind;
    }
    throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "' (expected mind or gmind)");
}

namespace {

void require_same_shape(const Image &i, const Image &j) {
    if (!i.same_shape(j)) {
        throw Error(ErrorCode::dimension_mismatch, "image size mismatch: " + shape_string(i.width(), i.height()) +
                                                       " vs " + shape_string(j.width(), j.height()));
    }
}

} // namespace

DisplacementField average_fields(const DisplacementField &a, const DisplacementField &b) {
    return combine(a, 0.5, b, 0.5);
}

DirectionalEstimate estimate_mind(const Image &fixed, const Image &moving, const OptimizerConfig &cfg) {
    auto run = gauss_newton_register(fixed, moving, cfg);
    return {std::move(run.field), {std::move(run.trace)}};
}

DirectionalEstimate estimate_gmind(const Image &fixed, const Image &moving, const OptimizerConfig &cfg) {
    require_same_shape(fixed, moving);
    if (fixed.width() < 3 || fixed.height() < 3) {
        throw Error(ErrorCode::invalid_argument,
                    "G-MIND needs images of at least 3x3, got " + shape_string(fixed.width(), fixed.height()));
    }
    const auto gf = gradient(fixed);
    const auto gm = gradient(moving);
    auto run_x = gauss_newton_register(gf.gx, gm.gx, cfg);
    auto run_y = gauss_newton_register(gf.gy, gm.gy, cfg);
    return {average_fields(run_x.field, run_y.field), {std::move(run_x.trace), std::move(run_y.trace)}};
}

RegistrationResult register_mind(const Image &i, const Image &j, const OptimizerConfig &cfg) {
    return register_images(Method::mind, i, j, cfg);
}

RegistrationResult register_gmind(const Image &i, const Image &j, const OptimizerConfig &cfg) {
    return register_images(Method::gmind, i, j, cfg);
}

RegistrationResult register_images(Method method, const Image &i, const Image &j, const OptimizerConfig &cfg) {
    require_same_shape(i, j);
    const auto estimate = method == Method::mind ? estimate_mind : estimate_gmind;
    auto forward = estimate(j, i, cfg);
    auto backward = estimate(i, j, cfg);
    RegistrationResult result;
    result.method = method;
    result.u_forward = std::move(forward.field);
    result.u_backward = std::move(backward.field);
    for (auto *part : {&forward.traces, &backward.traces}) {
        for (auto &t : *part) {
            result.traces.push_back(std::move(t));
        }
    }
    return result;
}

Image fuse(const Image &i, const Image &j, const RegistrationResult &result, FusionFrame frame) {
    require_same_shape(i, j);
    const bool into_j = frame == FusionFrame::frame_j;
    const Image &anchor = into_j ? j : i;
    const auto &field = into_j ? result.u_forward : result.u_backward;
    if (!field.same_shape(anchor)) {
        throw Error(ErrorCode::dimension_mismatch, "fuse: field " + shape_string(field.width(), field.height()) +
                                                       " vs images " + shape_string(i.width(), i.height()));
    }
    const Image warped = warp(into_j ? i : j, field);
    Image out(anchor.width(), anchor.height());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out(x, y) = 0.5 * (warped(x, y) + anchor(x, y));
        }
    }
    return out;
}

double final_sad(Method method, const Image &fixed, const Image &moving, const DisplacementField &field,
                 const DescriptorConfig &cfg) {
    require_same_shape(fixed, moving);
    const Image warped = warp(moving, field);
    if (method == Method::mind) {
        return similarity_map(mind_descriptor(fixed, cfg), mind_descriptor(warped, cfg)).mean();
    }
    const auto [sx, sy] = directional_similarity(gradient(fixed), gradient(warped), cfg);
    return 0.5 * (sx.mean() + sy.mean());
}

} // namespace gmind
