#include "gmind/config_io.hpp"
#include "gmind/error.hpp"
#include "gmind/evaluation.hpp"
#include "gmind/experiments.hpp"
#include "gmind/parallel.hpp"
#include "gmind/pipeline.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

gmind::Image to_image(const Array &a) {
    if (a.ndim() != 2) {
        throw gmind::Error(gmind::ErrorCode::invalid_argument, "expected a 2D array (height, width)");
    }
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return gmind::Image(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array plane(std::span<const double> values, int width, int height) {
    Array out({height, width});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

Array from_image(const gmind::Image &img) {
    return plane(img.data(), img.width(), img.height());
}

py::tuple from_field(const gmind::DisplacementField &f) {
    return py::make_tuple(plane(f.ux_plane(), f.width(), f.height()), plane(f.uy_plane(), f.width(), f.height()));
}

gmind::DisplacementField to_field(const Array &ux, const Array &uy) {
    if (ux.ndim() != 2 || uy.ndim() != 2 || ux.shape(0) != uy.shape(0) || ux.shape(1) != uy.shape(1)) {
        throw gmind::Error(gmind::ErrorCode::dimension_mismatch, "ux and uy must be 2D arrays of the same shape");
    }
    const auto h = static_cast<int>(ux.shape(0));
    const auto w = static_cast<int>(ux.shape(1));
    return gmind::DisplacementField(w, h, std::vector<double>(ux.data(), ux.data() + ux.size()),
                                    std::vector<double>(uy.data(), uy.data() + uy.size()));
}

gmind::DescriptorConfig descriptor_config(int patch_radius, int search) {
    gmind::DescriptorConfig cfg;
    cfg.patch_radius = patch_radius;
    if (search == 4) {
        cfg.search_region = gmind::DescriptorConfig::four_neighbourhood();
    } else if (search != 8) {
        throw gmind::Error(gmind::ErrorCode::invalid_argument, "search must be 4 or 8");
    }
    cfg.validate();
    return cfg;
}

gmind::OptimizerConfig optimizer_config(int levels, int iters, double alpha, int patch_radius, int search) {
    gmind::OptimizerConfig cfg;
    cfg.pyramid_levels = levels;
    cfg.max_iters_per_level = iters;
    cfg.regularization_weight = alpha;
    cfg.descriptor = descriptor_config(patch_radius, search);
    cfg.validate();
    return cfg;
}

py::list traces_list(const std::vector<gmind::IterationTrace> &traces) {
    py::list out;
    for (const auto &t : traces) {
        py::list records;
        for (const auto &r : t.records) {
            records.append(py::dict("level"_a = r.level, "iter"_a = r.iteration, "sad_metric"_a = r.sad_metric,
                                    "mean_step"_a = r.mean_step, "objective"_a = r.objective));
        }
        out.append(records);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_gmind, m) {
    m.doc() = "MIND / G-MIND deformable registration";

    py::register_exception<gmind::Error>(m, "GmindError", PyExc_ValueError);
    py::register_exception<gmind::InternalError>(m, "InternalError", PyExc_RuntimeError);

    m.def("set_num_threads", &gmind::set_num_threads, "n"_a);

    m.def("mind_descriptor",
          [](const Array &img, int patch_radius, int search) {
              const auto d = gmind::mind_descriptor(to_image(img), descriptor_config(patch_radius, search));
              Array out({d.height(), d.width(), d.channels()});
              std::copy(d.values().begin(), d.values().end(), out.mutable_data());
              return out;
          },
          "image"_a, "patch_radius"_a = 1, "search"_a = 8, "MIND descriptor, shape (height, width, channels)");

    m.def("similarity_map",
          [](const Array &a, const Array &b, int patch_radius, int search) {
              const auto cfg = descriptor_config(patch_radius, search);
              const auto s = gmind::similarity_map(gmind::mind_descriptor(to_image(a), cfg),
                                                   gmind::mind_descriptor(to_image(b), cfg));
              return plane(s.values(), s.width(), s.height());
          },
          "a"_a, "b"_a, "patch_radius"_a = 1, "search"_a = 8);

    m.def("gradient",
          [](const Array &img) {
              const auto g = gmind::gradient(to_image(img));
              return py::make_tuple(from_image(g.gx), from_image(g.gy));
          },
          "image"_a);

    m.def("warp",
          [](const Array &img, const Array &ux, const Array &uy) {
              return from_image(gmind::warp(to_image(img), to_field(ux, uy)));
          },
          "image"_a, "ux"_a, "uy"_a, "backward warp: out(X) = image(X + U(X))");

    m.def("register",
          [](const Array &fixed, const Array &moving, const std::string &method, int levels, int iters, double alpha,
             int patch_radius, int search) {
              const auto cfg = optimizer_config(levels, iters, alpha, patch_radius, search);
              const auto m_ = gmind::parse_method(method);
              gmind::RegistrationResult r;
              {
                  py::gil_scoped_release release;
                  r = gmind::register_images(m_, to_image(moving), to_image(fixed), cfg);
              }
              return py::dict("forward"_a = from_field(r.u_forward), "backward"_a = from_field(r.u_backward),
                              "method"_a = std::string(gmind::to_string(r.method)),
                              "traces"_a = traces_list(r.traces));
          },
          "fixed"_a, "moving"_a, "method"_a = "mind", "levels"_a = 3, "iters"_a = 30, "alpha"_a = 0.1,
          "patch_radius"_a = 1, "search"_a = 8,
          "bidirectional registration; 'forward' lives on the fixed grid: warp(moving, forward) ~ fixed");

    m.def("generate_dataset",
          [](const std::string &spec_json, int count) {
              py::list out;
              for (const auto &img : gmind::generate_dataset(gmind::parse_synthetic_spec(spec_json), count)) {
                  out.append(from_image(img));
              }
              return out;
          },
          "spec_json"_a, "count"_a);

    m.def("default_spec_json", []() { return gmind::synthetic_spec_to_json(gmind::SyntheticSpec::default_spec()); });

    m.def("apply_affine",
          [](const Array &img, double a11, double a12, double a21, double a22, double tx, double ty) {
              const auto d = gmind::apply_affine(to_image(img), {a11, a12, a21, a22, tx, ty});
              return py::make_tuple(from_image(d.image), from_field(d.distortion));
          },
          "image"_a, "a11"_a = 1.0, "a12"_a = 0.0, "a21"_a = 0.0, "a22"_a = 1.0, "tx"_a = 0.0, "ty"_a = 0.0,
          "returns (distorted image, (ux, uy) distortion field)");

    m.def("registration_error_map",
          [](const Array &reg_ux, const Array &reg_uy, const Array &dist_ux, const Array &dist_uy) {
              const auto e = gmind::registration_error_map(to_field(reg_ux, reg_uy), to_field(dist_ux, dist_uy));
              return plane(e.values(), e.width(), e.height());
          },
          "reg_ux"_a, "reg_uy"_a, "dist_ux"_a, "dist_uy"_a, "|U_reg + U_dist| per pixel");

    m.def("edge_mask",
          [](const Array &img, double percentile) {
              const auto mask = gmind::edge_mask(to_image(img), percentile);
              py::array_t<bool> out({mask.height, mask.width});
              std::transform(mask.values.begin(), mask.values.end(), out.mutable_data(),
                             [](uint8_t v) { return v != 0; });
              return out;
          },
          "image"_a, "percentile"_a = 90.0);

    m.def("tre",
          [](const std::vector<std::pair<double, double>> &fixed, const std::vector<std::pair<double, double>> &moving,
             const Array &ux, const Array &uy) {
              gmind::LandmarkSet a;
              gmind::LandmarkSet b;
              for (const auto &[x, y] : fixed) {
                  a.points.push_back({x, y});
              }
              for (const auto &[x, y] : moving) {
                  b.points.push_back({x, y});
              }
              return gmind::tre(a, b, to_field(ux, uy)).per_landmark_px;
          },
          "fixed"_a, "moving"_a, "ux"_a, "uy"_a, "per-landmark TRE in pixels");

    m.def("read_gmdf", [](const std::string &path) { return from_field(gmind::read_gmdf(path)); }, "path"_a);
    m.def("write_gmdf",
          [](const Array &ux, const Array &uy, const std::string &path) { gmind::write_gmdf(to_field(ux, uy), path); },
          "ux"_a, "uy"_a, "path"_a);
    m.def("load_image", [](const std::string &path) { return from_image(gmind::load_image(path)); }, "path"_a);
    m.def("save_image", [](const Array &img, const std::string &path) { gmind::save_image(to_image(img), path); },
          "image"_a, "path"_a);
}
