#include "gmind/error.hpp"
#include "gmind/optimizer.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace gmind;

namespace {

OptimizerConfig fast_config() {
    OptimizerConfig cfg;
    cfg.pyramid_levels = 2;
    cfg.max_iters_per_level = 15;
    return cfg;
}

double field_spread(const DisplacementField &f) {
    double lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
    for (double v : f.ux_plane()) {
        lo_x = std::min(lo_x, v);
        hi_x = std::max(hi_x, v);
    }
    for (double v : f.uy_plane()) {
        lo_y = std::min(lo_y, v);
        hi_y = std::max(hi_y, v);
    }
    return std::max(hi_x - lo_x, hi_y - lo_y);
}

} // namespace

TEST_SUITE("optimizer") {

TEST_CASE("config validation") {
    OptimizerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.pyramid_levels = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.max_iters_per_level = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.regularization_weight = -0.1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.jacobian_step = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("smoothness energy") {
    CHECK(smoothness_energy(DisplacementField::constant(5, 4, 1.5, -2.0)) == 0.0);
    DisplacementField f(2, 2);
    f.ux(1, 0) = 1.0;
    // edges (0,0)-(1,0) and (1,0)-(1,1) each differ by 1 in u_x
    CHECK(smoothness_energy(f) == 2.0);
}

TEST_CASE("objective of a perfect match is the smoothness term") {
    const Image img = oracle::blob_image(16, 16, 2);
    const auto d = mind_descriptor(img);
    DisplacementField f(16, 16);
    f.ux(3, 3) = 1.0;
    CHECK(registration_objective(d, d, f, 0.5) == doctest::Approx(0.5 * smoothness_energy(f)));
}

TEST_CASE("finite-difference Jacobian matches a central difference") {
    const Image fixed = oracle::blob_image(8, 8, 11, 4);
    const Image moving = oracle::blob_image(8, 8, 12, 4);
    const DescriptorConfig cfg;
    const auto fd = mind_descriptor(fixed, cfg);
    const auto base = DisplacementField::constant(8, 8, 0.3, 0.2);
    const auto sys = descriptor_residuals(fd, moving, base, cfg, 1e-5);

    const double h = 1e-3;
    const auto px = descriptor_residuals(fd, moving, DisplacementField::constant(8, 8, 0.3 + h, 0.2), cfg, 1e-5);
    const auto mx = descriptor_residuals(fd, moving, DisplacementField::constant(8, 8, 0.3 - h, 0.2), cfg, 1e-5);
    const auto py = descriptor_residuals(fd, moving, DisplacementField::constant(8, 8, 0.3, 0.2 + h), cfg, 1e-5);
    const auto my = descriptor_residuals(fd, moving, DisplacementField::constant(8, 8, 0.3, 0.2 - h), cfg, 1e-5);
    double err = 0.0, norm = 0.0;
    for (size_t i = 0; i < sys.residuals.size(); ++i) {
        const double cx = (px.residuals[i] - mx.residuals[i]) / (2 * h);
        const double cy = (py.residuals[i] - my.residuals[i]) / (2 * h);
        err += (sys.jac_x[i] - cx) * (sys.jac_x[i] - cx) + (sys.jac_y[i] - cy) * (sys.jac_y[i] - cy);
        norm += cx * cx + cy * cy;
    }
    REQUIRE(norm > 0.0);
    CHECK(std::sqrt(err / norm) < 0.05);
}

TEST_CASE("residuals are warped minus fixed and J^T r is linear in r") {
    const Image fixed = oracle::blob_image(10, 10, 3, 5);
    const Image moving = oracle::blob_image(10, 10, 4, 5);
    const DescriptorConfig cfg;
    const auto fd = mind_descriptor(fixed, cfg);
    const DisplacementField zero(10, 10);
    auto sys = descriptor_residuals(fd, moving, zero, cfg);
    const auto md = mind_descriptor(moving, cfg);
    for (size_t i = 0; i < sys.residuals.size(); ++i) {
        CHECK(sys.residuals[i] == doctest::Approx(md.values()[i] - fd.values()[i]));
    }
    CHECK(sys.sum_squared_residuals() > 0.0);
    const auto [gx, gy] = sys.gradient_rhs();
    for (auto &r : sys.residuals) r *= 2.0;
    const auto [gx2, gy2] = sys.gradient_rhs();
    for (size_t i = 0; i < gx.size(); ++i) {
        CHECK(gx2[i] == doctest::Approx(2.0 * gx[i]));
        CHECK(gy2[i] == doctest::Approx(2.0 * gy[i]));
    }
    CHECK_THROWS_AS(descriptor_residuals(fd, Image(9, 10), DisplacementField(9, 10), cfg), Error);
    CHECK_THROWS_AS(descriptor_residuals(fd, moving, zero, cfg, 0.0), Error);
}

TEST_CASE("self-registration stays at zero") {
    const Image img = oracle::blob_image(32, 32, 5);
    const auto run = gauss_newton_register(img, img, fast_config());
    double worst = 0.0;
    for (size_t i = 0; i < run.field.size(); ++i) {
        worst = std::max({worst, std::abs(run.field.ux_plane()[i]), std::abs(run.field.uy_plane()[i])});
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("zero iterations return the zero field") {
    const Image a = oracle::blob_image(24, 24, 6);
    const Image b = oracle::blob_image(24, 24, 7);
    OptimizerConfig cfg;
    cfg.max_iters_per_level = 0;
    const auto run = gauss_newton_register(a, b, cfg);
    CHECK(run.field == DisplacementField(24, 24));
    CHECK(run.trace.records.empty());
}

TEST_CASE("translation is recovered with a monotone objective") {
    const Image fixed = oracle::blob_image(48, 48, 8);
    const Image moving = warp(fixed, DisplacementField::constant(48, 48, -1.5, 1.0));
    // warp(moving, U) = fixed needs U = (1.5, -1.0)
    OptimizerConfig cfg;
    const auto run = gauss_newton_register(fixed, moving, cfg);
    CHECK(oracle::central_error(run.field, 1.5, -1.0) < 0.5);
    CHECK(run.trace.objective_monotone());
    REQUIRE_FALSE(run.trace.records.empty());
    CHECK(run.trace.records.front().level == cfg.pyramid_levels - 1);
    CHECK(run.trace.records.back().level == 0);
    CHECK(run.trace.to_csv().rfind("level,iter,sad_metric,mean_step\n", 0) == 0);
}

TEST_CASE("huge regularisation gives a near-constant field") {
    const Image fixed = oracle::blob_image(32, 32, 9);
    const Image moving = oracle::blob_image(32, 32, 10);
    OptimizerConfig cfg = fast_config();
    cfg.regularization_weight = 1e6;
    const auto run = gauss_newton_register(fixed, moving, cfg);
    CHECK(field_spread(run.field) < 1e-2);
}

TEST_CASE("size mismatch and tiny images") {
    CHECK_THROWS_AS(gauss_newton_register(Image(16, 16), Image(16, 17)), Error);
    OptimizerConfig cfg;
    cfg.pyramid_levels = 4;
    // 16 -> 8 -> 4 -> 2: the coarsest level is smaller than a descriptor patch
    CHECK_THROWS_AS(gauss_newton_register(Image(16, 16, 1.0), Image(16, 16, 1.0), cfg), Error);
}

} // TEST_SUITE
