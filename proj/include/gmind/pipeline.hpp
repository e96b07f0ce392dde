#pragma once

#include "gmind/imaging.hpp"
#include "gmind/optimizer.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gmind {

enum class Method { mind, gmind };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

enum class FusionFrame { frame_i, frame_j };

/// Bidirectional registration of I and J.
///
/// u_forward lives on J's grid and pulls I onto it: warp(I, u_forward) ~ J.
/// u_backward lives on I's grid: warp(J, u_backward) ~ I.
/// Traces: mind -> {forward, backward};
///         gmind -> {forward x, forward y, backward x, backward y}.
struct RegistrationResult {
    DisplacementField u_forward;
    DisplacementField u_backward;
    Method method = Method::mind;
    std::vector<IterationTrace> traces;
};

/// One-directional estimate used by both pipelines.
struct DirectionalEstimate {
    DisplacementField field;
    std::vector<IterationTrace> traces;
};

DirectionalEstimate estimate_mind(const Image &fixed, const Image &moving, const OptimizerConfig &cfg);

/// Registers the x-gradient pair and the y-gradient pair separately and
/// averages the two fields.
DirectionalEstimate estimate_gmind(const Image &fixed, const Image &moving, const OptimizerConfig &cfg);

/// 0.5 * a + 0.5 * b.
DisplacementField average_fields(const DisplacementField &a, const DisplacementField &b);

RegistrationResult register_mind(const Image &i, const Image &j, const OptimizerConfig &cfg = {});
RegistrationResult register_gmind(const Image &i, const Image &j, const OptimizerConfig &cfg = {});
RegistrationResult register_images(Method method, const Image &i, const Image &j, const OptimizerConfig &cfg = {});

/// frame_j: (warp(I, u_forward) + J) / 2; frame_i: (I + warp(J, u_backward)) / 2.
Image fuse(const Image &i, const Image &j, const RegistrationResult &result, FusionFrame frame);

/// Mean SAD (the MIND metric for mind, the mean of both directional metrics
/// for gmind) between fixed and warp(moving, field).
double final_sad(Method method, const Image &fixed, const Image &moving, const DisplacementField &field,
                 const DescriptorConfig &cfg);

} // namespace gmind
