#pragma once

#include "gmind/descriptor.hpp"
#include "gmind/imaging.hpp"

#include <string>
#include <utility>
#include <vector>

namespace gmind {

/// Defaults are the ones the CLI documents in its help text.
struct OptimizerConfig {
    int pyramid_levels = 3;
    /// 0 is allowed and returns the zero field.
    int max_iters_per_level = 30;
    /// Weight of the diffusion penalty sum |grad U|^2.
    double regularization_weight = 0.1;
    /// A level stops once the mean accepted update (pixels) drops below this.
    double step_tolerance = 1e-3;
    /// A level stops once |delta SAD| / SAD drops below this.
    double metric_tolerance = 1e-5;
    /// Forward finite-difference step (pixels) for the descriptor Jacobian.
    double jacobian_step = 0.5;
    /// Per-pixel cap on the update norm within one iteration.
    double max_update = 1.0;
    int max_halvings = 8;
    /// Conjugate-gradient iterations on the coupled normal equations per
    /// Gauss-Newton step (0 = zero update). The update is then averaged over
    /// a 3x3 window.
    int cg_iterations = 200;
    DescriptorConfig descriptor;

    void validate() const;
};

struct IterationRecord {
    int level = 0;     // 0 is full resolution
    int iteration = 0; // index within the level
    double sad_metric = 0.0;
    double mean_step = 0.0;
    double objective = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> records;

    /// Header "level,iter,sad_metric,mean_step".
    std::string to_csv() const;
    /// True when the objective never increases between consecutive records of
    /// the same level.
    bool objective_monotone() const;
};

/// Linearisation of the descriptor residuals around a field U.
///
/// residual(X, k) = MIND(warp(moving, U))(X, k) - fixed(X, k); jac_x / jac_y
/// hold its derivative with respect to a shift of U, pixel-major like the
/// residuals.
struct ResidualSystem {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> residuals;
    std::vector<double> jac_x;
    std::vector<double> jac_y;
    DescriptorField warped; // descriptor of warp(moving, U)

    /// Per-pixel J^T r, as (x component, y component) planes.
    std::pair<std::vector<double>, std::vector<double>> gradient_rhs() const;
    double sum_squared_residuals() const;
};

ResidualSystem descriptor_residuals(const DescriptorField &fixed_desc, const Image &moving,
                                    const DisplacementField &field, const DescriptorConfig &cfg,
                                    double jacobian_step = 0.5);

/// sum over edges of |U(X) - U(X')|^2 for 4-neighbours, both components.
double smoothness_energy(const DisplacementField &field);

/// Sum of squared descriptor differences plus alpha * smoothness_energy.
double registration_objective(const DescriptorField &fixed_desc, const DescriptorField &warped_desc,
                              const DisplacementField &field, double alpha);

struct RegistrationRun {
    DisplacementField field;
    IterationTrace trace;
};

/// Estimates U such that warp(moving, U) matches fixed under the MIND metric.
/// U lives on the fixed grid and points into the moving image.
RegistrationRun gauss_newton_register(const Image &fixed, const Image &moving, const OptimizerConfig &cfg = {});

} // namespace gmind
