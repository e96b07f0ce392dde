#include "gmind/optimizer.hpp"
#include "gmind/error.hpp"
#include "gmind/parallel.hpp"
#include "gmind/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gmind {

void OptimizerConfig::validate() const {
    if (pyramid_levels < 1) {
        throw Error(ErrorCode::invalid_argument, "pyramid levels must be >= 1");
    }
    if (max_iters_per_level < 0) {
        throw Error(ErrorCode::invalid_argument, "iterations per level must be >= 0");
    }
    if (!(regularization_weight > 0.0) || !std::isfinite(regularization_weight)) {
        throw Error(ErrorCode::invalid_argument, "regularization weight must be > 0");
    }
    if (!(step_tolerance > 0.0) || !(metric_tolerance > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "tolerances must be > 0");
    }
    if (!(jacobian_step > 0.0) || !(max_update > 0.0) || max_halvings < 0 || cg_iterations < 0) {
        throw Error(ErrorCode::invalid_argument, "invalid step control parameters");
    }
    descriptor.validate();
}

std::string IterationTrace::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "level,iter,sad_metric,mean_step\n";
    for (const auto &r : records) {
        os << r.level << ',' << r.iteration << ',' << r.sad_metric << ',' << r.mean_step << '\n';
    }
    return os.str();
}

bool IterationTrace::objective_monotone() const {
    for (size_t i = 1; i < records.size(); ++i) {
        if (records[i].level == records[i - 1].level && records[i].objective > records[i - 1].objective) {
            return false;
        }
    }
    return true;
}

std::pair<std::vector<double>, std::vector<double>> ResidualSystem::gradient_rhs() const {
    const auto n = static_cast<size_t>(width) * static_cast<size_t>(height);
    const auto c = static_cast<size_t>(channels);
    std::vector<double> gx(n, 0.0);
    std::vector<double> gy(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t k = 0; k < c; ++k) {
            gx[i] += jac_x[i * c + k] * residuals[i * c + k];
            gy[i] += jac_y[i * c + k] * residuals[i * c + k];
        }
    }
    return {std::move(gx), std::move(gy)};
}

double ResidualSystem::sum_squared_residuals() const {
    double s = 0.0;
    for (double r : residuals) {
        s += r * r;
    }
    return s;
}

namespace {

DescriptorField warped_descriptor(const Image &moving, const DisplacementField &field, const DescriptorConfig &cfg) {
    return mind_descriptor(warp(moving, field), cfg);
}

DisplacementField shifted(const DisplacementField &field, double dx, double dy) {
    DisplacementField out = field;
    for (auto &v : out.ux_plane()) {
        v += dx;
    }
    for (auto &v : out.uy_plane()) {
        v += dy;
    }
    return out;
}

ResidualSystem linearise(const DescriptorField &fixed_desc, const Image &moving, const DisplacementField &field,
                         DescriptorField warped, const DescriptorConfig &cfg, double h) {
    ResidualSystem sys;
    sys.width = fixed_desc.width();
    sys.height = fixed_desc.height();
    sys.channels = fixed_desc.channels();
    const auto step_x = warped_descriptor(moving, shifted(field, h, 0.0), cfg);
    const auto step_y = warped_descriptor(moving, shifted(field, 0.0, h), cfg);
    const auto base = warped.values();
    const auto fixed = fixed_desc.values();
    const auto sx = step_x.values();
    const auto sy = step_y.values();
    sys.residuals.resize(base.size());
    sys.jac_x.resize(base.size());
    sys.jac_y.resize(base.size());
    for (size_t i = 0; i < base.size(); ++i) {
        sys.residuals[i] = base[i] - fixed[i];
        sys.jac_x[i] = (sx[i] - base[i]) / h;
        sys.jac_y[i] = (sy[i] - base[i]) / h;
    }
    sys.warped = std::move(warped);
    return sys;
}

// Gauss-Newton normal equations with the diffusion term:
//   (J^T J + alpha L) dU = -(J^T r + alpha L U)
DisplacementField solve_update(const ResidualSystem &sys, const DisplacementField &field, double alpha,
                               int iterations) {
    const int w = sys.width;
    const int h = sys.height;
    const auto c = static_cast<size_t>(sys.channels);
    const auto n = static_cast<size_t>(w) * static_cast<size_t>(h);
    std::vector<double> a11(n), a12(n), a22(n), bx(n), by(n);

    auto for_each_neighbour = [w, h](int x, int y, auto &&fn) {
        if (x > 0) fn(x - 1, y);
        if (x + 1 < w) fn(x + 1, y);
        if (y > 0) fn(x, y - 1);
        if (y + 1 < h) fn(x, y + 1);
    };

    parallel_rows(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                double m11 = 0.0, m12 = 0.0, m22 = 0.0, gx = 0.0, gy = 0.0;
                for (size_t k = 0; k < c; ++k) {
                    const double jx = sys.jac_x[i * c + k];
                    const double jy = sys.jac_y[i * c + k];
                    const double r = sys.residuals[i * c + k];
                    m11 += jx * jx;
                    m12 += jx * jy;
                    m22 += jy * jy;
                    gx += jx * r;
                    gy += jy * r;
                }
                int neighbours = 0;
                double lap_x = 0.0;
                double lap_y = 0.0;
                for_each_neighbour(x, y, [&](int xn, int yn) {
                    ++neighbours;
                    lap_x += field.ux(x, y) - field.ux(xn, yn);
                    lap_y += field.uy(x, y) - field.uy(xn, yn);
                });
                const double diag = alpha * neighbours + 1e-12;
                a11[i] = m11 + diag;
                a12[i] = m12;
                a22[i] = m22 + diag;
                bx[i] = gx + alpha * lap_x;
                by[i] = gy + alpha * lap_y;
            }
        }
    });

    // Preconditioned conjugate gradients on the SPD system
    //   (H + alpha L) d = -b,  H = blockdiag(J^T J),  L = graph Laplacian.
    // The 2x2 diagonal blocks of the full matrix serve as preconditioner.
    const auto apply = [&](const std::vector<double> &vx, const std::vector<double> &vy, std::vector<double> &ox,
                           std::vector<double> &oy) {
        parallel_rows(h, [&](int y0, int y1) {
            for (int y = y0; y < y1; ++y) {
                for (int x = 0; x < w; ++x) {
                    const size_t i = static_cast<size_t>(y) * w + x;
                    double sx = 0.0;
                    double sy = 0.0;
                    for_each_neighbour(x, y, [&](int xn, int yn) {
                        const size_t j = static_cast<size_t>(yn) * w + xn;
                        sx += vx[j];
                        sy += vy[j];
                    });
                    ox[i] = a11[i] * vx[i] + a12[i] * vy[i] - alpha * sx;
                    oy[i] = a12[i] * vx[i] + a22[i] * vy[i] - alpha * sy;
                }
            }
        });
    };
    const auto precondition = [&](const std::vector<double> &rx, const std::vector<double> &ry,
                                  std::vector<double> &zx, std::vector<double> &zy) {
        for (size_t i = 0; i < n; ++i) {
            const double det = a11[i] * a22[i] - a12[i] * a12[i];
            zx[i] = (a22[i] * rx[i] - a12[i] * ry[i]) / det;
            zy[i] = (a11[i] * ry[i] - a12[i] * rx[i]) / det;
        }
    };
    const auto dot = [n](const std::vector<double> &ax, const std::vector<double> &ay, const std::vector<double> &bx_,
                         const std::vector<double> &by_) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            s += ax[i] * bx_[i] + ay[i] * by_[i];
        }
        return s;
    };

    std::vector<double> dx(n, 0.0), dy(n, 0.0);
    std::vector<double> rx(n), ry(n), zx(n), zy(n), px(n), py(n), qx(n), qy(n);
    for (size_t i = 0; i < n; ++i) {
        rx[i] = -bx[i];
        ry[i] = -by[i];
    }
    precondition(rx, ry, zx, zy);
    px = zx;
    py = zy;
    double rz = dot(rx, ry, zx, zy);
    const double stop = 1e-12 * dot(rx, ry, rx, ry);
    for (int it = 0; it < iterations && rz > 0.0; ++it) {
        apply(px, py, qx, qy);
        const double pq = dot(px, py, qx, qy);
        if (!(pq > 0.0)) {
            break;
        }
        const double step = rz / pq;
        for (size_t i = 0; i < n; ++i) {
            dx[i] += step * px[i];
            dy[i] += step * py[i];
            rx[i] -= step * qx[i];
            ry[i] -= step * qy[i];
        }
        if (dot(rx, ry, rx, ry) <= stop) {
            break;
        }
        precondition(rx, ry, zx, zy);
        const double rz_next = dot(rx, ry, zx, zy);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (size_t i = 0; i < n; ++i) {
            px[i] = zx[i] + beta * px[i];
            py[i] = zy[i] + beta * py[i];
        }
    }
    return DisplacementField(w, h, std::move(dx), std::move(dy));
}

DisplacementField box_smooth(const DisplacementField &f) {
    const int w = f.width();
    const int h = f.height();
    DisplacementField out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0;
            double sy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    sx += f.ux(xx, yy);
                    sy += f.uy(xx, yy);
                }
            }
            out.ux(x, y) = sx / 9.0;
            out.uy(x, y) = sy / 9.0;
        }
    }
    return out;
}

void cap_norm(DisplacementField &f, double limit) {
    auto ux = f.ux_plane();
    auto uy = f.uy_plane();
    for (size_t i = 0; i < ux.size(); ++i) {
        const double n = std::hypot(ux[i], uy[i]);
        if (n > limit) {
            ux[i] *= limit / n;
            uy[i] *= limit / n;
        }
    }
}

double mean_norm(const DisplacementField &f, double scale) {
    double s = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        s += std::hypot(f.ux_plane()[i], f.uy_plane()[i]);
    }
    return scale * s / static_cast<double>(f.size());
}

struct LevelState {
    DisplacementField field;
    DescriptorField warped;
    double objective = 0.0;
};

void run_level(const Image &fixed, const Image &moving, const OptimizerConfig &cfg, int level, LevelState &state,
               IterationTrace &trace) {
    const auto fixed_desc = mind_descriptor(fixed, cfg.descriptor);
    const double alpha = cfg.regularization_weight;
    state.warped = warped_descriptor(moving, state.field, cfg.descriptor);
    state.objective = registration_objective(fixed_desc, state.warped, state.field, alpha);
    double previous_sad = similarity_map(fixed_desc, state.warped).mean();

    for (int iter = 0; iter < cfg.max_iters_per_level; ++iter) {
        const auto sys = linearise(fixed_desc, moving, state.field, state.warped, cfg.descriptor, cfg.jacobian_step);
        auto delta = box_smooth(solve_update(sys, state.field, alpha, cfg.cg_iterations));
        cap_norm(delta, cfg.max_update);

        bool accepted = false;
        double scale = 1.0;
        for (int halving = 0; halving <= cfg.max_halvings; ++halving, scale *= 0.5) {
            auto candidate = combine(state.field, 1.0, delta, scale);
            if (!candidate.all_finite()) {
                throw InternalError("non-finite displacement produced by Gauss-Newton update");
            }
            auto warped = warped_descriptor(moving, candidate, cfg.descriptor);
            const double objective = registration_objective(fixed_desc, warped, candidate, alpha);
            if (!std::isfinite(objective)) {
                throw InternalError("non-finite objective in Gauss-Newton iteration");
            }
            if (objective <= state.objective) {
                if (!trace.records.empty() && trace.records.back().level == level &&
                    objective > trace.records.back().objective) {
                    throw InternalError("objective increased within pyramid level " + std::to_string(level));
                }
                state.field = std::move(candidate);
                state.warped = std::move(warped);
                state.objective = objective;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }

        const double sad = similarity_map(fixed_desc, state.warped).mean();
        const double step = mean_norm(delta, scale);
        trace.records.push_back({level, iter, sad, step, state.objective});

        const double relative_change = previous_sad > 0.0 ? std::abs(previous_sad - sad) / previous_sad : 0.0;
        if (step < cfg.step_tolerance || (iter > 0 && relative_change < cfg.metric_tolerance)) {
            break;
        }
        previous_sad = sad;
    }
}

} // namespace

ResidualSystem descriptor_residuals(const DescriptorField &fixed_desc, const Image &moving,
                                    const DisplacementField &field, const DescriptorConfig &cfg,
                                    double jacobian_step) {
    if (!field.same_shape(moving) || fixed_desc.width() != moving.width() || fixed_desc.height() != moving.height()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "residuals: descriptor " + shape_string(fixed_desc.width(), fixed_desc.height()) + ", moving " +
                        shape_string(moving.width(), moving.height()) + ", field " +
                        shape_string(field.width(), field.height()));
    }
    if (static_cast<size_t>(fixed_desc.channels()) != cfg.search_region.size()) {
        throw Error(ErrorCode::dimension_mismatch, "descriptor channel count does not match the search region");
    }
    if (!(jacobian_step > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "jacobian step must be > 0");
    }
    return linearise(fixed_desc, moving, field, warped_descriptor(moving, field, cfg), cfg, jacobian_step);
}

double smoothness_energy(const DisplacementField &f) {
    double e = 0.0;
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            if (x + 1 < f.width()) {
                const double dx = f.ux(x + 1, y) - f.ux(x, y);
                const double dy = f.uy(x + 1, y) - f.uy(x, y);
                e += dx * dx + dy * dy;
            }
            if (y + 1 < f.height()) {
                const double dx = f.ux(x, y + 1) - f.ux(x, y);
                const double dy = f.uy(x, y + 1) - f.uy(x, y);
                e += dx * dx + dy * dy;
            }
        }
    }
    return e;
}

double registration_objective(const DescriptorField &fixed_desc, const DescriptorField &warped_desc,
                              const DisplacementField &field, double alpha) {
    if (!fixed_desc.same_shape(warped_desc)) {
        throw Error(ErrorCode::dimension_mismatch, "objective: descriptor fields differ in shape");
    }
    double data = 0.0;
    const auto a = fixed_desc.values();
    const auto b = warped_desc.values();
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        data += d * d;
    }
    return data + alpha * smoothness_energy(field);
}

RegistrationRun gauss_newton_register(const Image &fixed, const Image &moving, const OptimizerConfig &cfg) {
    cfg.validate();
    if (!fixed.same_shape(moving)) {
        throw Error(ErrorCode::dimension_mismatch, "image size mismatch: fixed " +
                                                       shape_string(fixed.width(), fixed.height()) + " vs moving " +
                                                       shape_string(moving.width(), moving.height()));
    }
    const long min_side = (1L << (cfg.pyramid_levels - 1)) * (2L * cfg.descriptor.patch_radius + 2);
    if (cfg.pyramid_levels > 24 || fixed.width() < min_side || fixed.height() < min_side) {
        throw Error(ErrorCode::invalid_argument,
                    "image " + shape_string(fixed.width(), fixed.height()) + " too small for " +
                        std::to_string(cfg.pyramid_levels) + " pyramid levels (need " + std::to_string(min_side) +
                        " px per side)");
    }

    std::vector<Image> fixed_pyr{fixed};
    std::vector<Image> moving_pyr{moving};
    for (int l = 1; l < cfg.pyramid_levels; ++l) {
        // Pre-smoothing keeps sharp edges from aliasing into the coarse levels.
        fixed_pyr.push_back(downsample(gaussian_blur(fixed_pyr.back(), 1.0)));
        moving_pyr.push_back(downsample(gaussian_blur(moving_pyr.back(), 1.0)));
    }

    RegistrationRun run;
    LevelState state;
    const auto &coarsest = fixed_pyr.back();
    state.field = DisplacementField(coarsest.width(), coarsest.height());
    for (int level = cfg.pyramid_levels - 1; level >= 0; --level) {
        const auto &f = fixed_pyr[static_cast<size_t>(level)];
        if (!state.field.same_shape(f)) {
            state.field = upsample(state.field, f.width(), f.height());
        }
        if (cfg.max_iters_per_level > 0) {
            run_level(f, moving_pyr[static_cast<size_t>(level)], cfg, level, state, run.trace);
        }
    }
    if (!state.field.all_finite()) {
        throw InternalError("registration produced a non-finite displacement field");
    }
    run.field = std::move(state.field);
    return run;
}

} // namespace gmind
