#include "gmind/cli.hpp"
#include "gmind/config_io.hpp"
#include "gmind/error.hpp"
#include "gmind/evaluation.hpp"
#include "gmind/experiments.hpp"
#include "gmind/parallel.hpp"
#include "gmind/pipeline.hpp"

#include "json_util.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace gmind::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Defaults shared by register and experiment.
struct OptimizerFlags {
    int levels = 3;
    int iters = 30;
    double alpha = 0.1;
    int patch = 1;
    int search = 8;
    int threads = 0;

    void add_to(CLI::App &cmd) {
        cmd.add_option("--levels", levels, "pyramid levels")->capture_default_str()->check(CLI::PositiveNumber);
        cmd.add_option("--iters", iters, "Gauss-Newton iterations per level")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        cmd.add_option("--alpha", alpha, "diffusion regularization weight")->capture_default_str();
        cmd.add_option("--patch", patch, "patch radius P")->capture_default_str()->check(CLI::PositiveNumber);
        cmd.add_option("--search", search, "search region (4 or 8 neighbours)")
            ->capture_default_str()
            ->check(CLI::IsMember({4, 8}));
        cmd.add_option("--threads", threads, "worker threads (0 = auto)")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
    }

    OptimizerConfig config() const {
        OptimizerConfig cfg;
        cfg.pyramid_levels = levels;
        cfg.max_iters_per_level = iters;
        cfg.regularization_weight = alpha;
        cfg.descriptor.patch_radius = patch;
        cfg.descriptor.search_region =
            search == 4 ? DescriptorConfig::four_neighbourhood() : DescriptorConfig::eight_neighbourhood();
        cfg.validate();
        return cfg;
    }
};

ordered_json optimizer_json(const OptimizerConfig &cfg) {
    return {{"pyramid_levels", cfg.pyramid_levels},
            {"max_iters_per_level", cfg.max_iters_per_level},
            {"regularization_weight", cfg.regularization_weight},
            {"step_tolerance", cfg.step_tolerance},
            {"metric_tolerance", cfg.metric_tolerance},
            {"jacobian_step", cfg.jacobian_step},
            {"max_update", cfg.max_update},
            {"max_halvings", cfg.max_halvings},
            {"cg_iterations", cfg.cg_iterations},
            {"patch_radius", cfg.descriptor.patch_radius},
            {"search_region", cfg.descriptor.search_region.size()},
            {"variance_low", cfg.descriptor.variance_low},
            {"variance_high", cfg.descriptor.variance_high}};
}

ordered_json trace_json(const std::string &name, const IterationTrace &trace) {
    ordered_json records = ordered_json::array();
    for (const auto &r : trace.records) {
        records.push_back({{"level", r.level},
                           {"iter", r.iteration},
                           {"sad_metric", r.sad_metric},
                           {"mean_step", r.mean_step},
                           {"objective", r.objective}});
    }
    return {{"name", name}, {"records", std::move(records)}};
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::io_error, "write failed: " + path.string());
    }
}

void write_json(const fs::path &path, const ordered_json &j) {
    write_text(path, j.dump(2) + "\n");
}

ordered_json opt_json(const std::optional<std::string> &s) {
    return s ? ordered_json(*s) : ordered_json(nullptr);
}

void prepare_output(const std::string &path) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
}

// ---- register --------------------------------------------------------------

struct RegisterFlags {
    std::string fixed;
    std::string moving;
    std::string method;
    std::string out_disp;
    std::optional<std::string> out_back;
    std::optional<std::string> out_fused;
    std::string frame = "j";
    OptimizerFlags opt;
};

int cmd_register(const RegisterFlags &f, std::ostream &out) {
    const Method method = parse_method(f.method);
    const OptimizerConfig cfg = f.opt.config();
    set_num_threads(f.opt.threads);

    const Image fixed = load_image(f.fixed);
    const Image moving = load_image(f.moving);
    if (!fixed.same_shape(moving)) {
        throw Error(ErrorCode::dimension_mismatch, "image size mismatch: fixed " +
                                                       shape_string(fixed.width(), fixed.height()) + " vs moving " +
                                                       shape_string(moving.width(), moving.height()));
    }

    // I = moving, J = fixed: the forward field lives on the fixed grid.
    const auto result = register_images(method, moving, fixed, cfg);
    prepare_output(f.out_disp);
    write_gmdf(result.u_forward, f.out_disp);
    if (f.out_back) {
        prepare_output(*f.out_back);
        write_gmdf(result.u_backward, *f.out_back);
    }
    if (f.out_fused) {
        const FusionFrame frame = f.frame == "i" ? FusionFrame::frame_i : FusionFrame::frame_j;
        prepare_output(*f.out_fused);
        save_image(fuse(moving, fixed, result, frame), *f.out_fused);
    }

    ordered_json j;
    j["command"] = "register";
    j["config"] = {{"fixed", f.fixed},
                   {"moving", f.moving},
                   {"method", f.method},
                   {"out_disp", f.out_disp},
                   {"out_back", opt_json(f.out_back)},
                   {"out_fused", opt_json(f.out_fused)},
                   {"frame", f.frame},
                   {"levels", f.opt.levels},
                   {"iters", f.opt.iters},
                   {"alpha", f.opt.alpha},
                   {"patch", f.opt.patch},
                   {"search", f.opt.search},
                   {"threads", f.opt.threads},
                   {"optimizer", optimizer_json(cfg)}};
    j["method"] = to_string(method);
    j["size"] = {{"width", fixed.width()}, {"height", fixed.height()}};
    j["final_sad"] = {{"forward", final_sad(method, fixed, moving, result.u_forward, cfg.descriptor)},
                      {"backward", final_sad(method, moving, fixed, result.u_backward, cfg.descriptor)}};
    static const char *mind_names[] = {"forward", "backward"};
    static const char *gmind_names[] = {"forward_x", "forward_y", "backward_x", "backward_y"};
    ordered_json traces = ordered_json::array();
    for (size_t k = 0; k < result.traces.size(); ++k) {
        traces.push_back(trace_json(method == Method::mind ? mind_names[k] : gmind_names[k], result.traces[k]));
    }
    j["traces"] = std::move(traces);
    write_json(f.out_disp + ".json", j);
    out << "wrote " << f.out_disp << '\n';
    return ok;
}

// ---- synth -----------------------------------------------------------------

struct SynthFlags {
    std::string spec;
    int count = 10;
    std::string out_dir;
    std::optional<std::string> distort;
    std::optional<std::string> out_truth;
    std::optional<int> test_index;
    std::string format = "pgm";
};

std::string image_name(int k, const std::string &ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "image_%03d.%s", k, ext.c_str());
    return buf;
}

int cmd_synth(const SynthFlags &f, std::ostream &out) {
    if (f.distort.has_value() != f.out_truth.has_value()) {
        throw Error(ErrorCode::invalid_argument, "--distort and --out-truth must be given together");
    }
    const SyntheticSpec spec = load_synthetic_spec(f.spec);
    const int test_index = f.test_index.value_or(f.count > 1 ? 1 : 0);
    if (test_index < 0 || test_index >= f.count) {
        throw Error(ErrorCode::invalid_argument,
                    "--test-index " + std::to_string(test_index) + " outside [0, " + std::to_string(f.count) + ")");
    }
    std::optional<AffineTransform> transform;
    if (f.distort) {
        transform = load_transform(*f.distort);
        transform->validate();
    }

    const auto images = generate_dataset(spec, f.count);
    const fs::path dir(f.out_dir);
    fs::create_directories(dir);
    ordered_json files = ordered_json::array();
    for (int k = 0; k < f.count; ++k) {
        const auto name = image_name(k, f.format);
        save_image(images[static_cast<size_t>(k)], dir / name);
        files.push_back(name);
    }
    ordered_json distorted = nullptr;
    if (transform) {
        const auto d = apply_affine(images[static_cast<size_t>(test_index)], *transform);
        const std::string name = "distorted." + f.format;
        save_image(d.image, dir / name);
        prepare_output(*f.out_truth);
        write_gmdf(d.distortion, *f.out_truth);
        distorted = {{"image", name}, {"truth", *f.out_truth}, {"test_index", test_index}};
    }

    ordered_json j;
    j["command"] = "synth";
    j["config"] = {{"spec", f.spec},
                   {"count", f.count},
                   {"out_dir", f.out_dir},
                   {"distort", opt_json(f.distort)},
                   {"out_truth", opt_json(f.out_truth)},
                   {"test_index", test_index},
                   {"format", f.format},
                   {"synthetic_spec", ordered_json::parse(synthetic_spec_to_json(spec))},
                   {"transform", transform ? detail::affine_json(*transform) : ordered_json(nullptr)}};
    j["images"] = std::move(files);
    j["distorted"] = std::move(distorted);
    write_json(dir / "synth.json", j);
    out << "wrote " << f.count << " images to " << f.out_dir << '\n';
    return ok;
}

// ---- eval-error ------------------------------------------------------------

struct EvalErrorFlags {
    std::string reg;
    std::string truth;
    std::optional<std::string> edge_ref;
    double edge_pct = 90.0;
    bool negate_reg = false;
    std::string out_json;
    std::optional<std::string> out_map;
};

int cmd_eval_error(const EvalErrorFlags &f, std::ostream &out) {
    auto reg = read_gmdf(f.reg);
    const auto truth = read_gmdf(f.truth);
    if (f.negate_reg) {
        reg = combine(reg, -1.0, reg, 0.0);
    }
    const auto errmap = registration_error_map(reg, truth);
    const std::vector<double> values(errmap.values().begin(), errmap.values().end());
    const auto full = summarize(values);

    ordered_json edge = nullptr;
    if (f.edge_ref) {
        const Image ref = load_image(*f.edge_ref);
        if (ref.width() != errmap.width() || ref.height() != errmap.height()) {
            throw Error(ErrorCode::dimension_mismatch, "edge reference " + shape_string(ref.width(), ref.height()) +
                                                           " vs fields " +
                                                           shape_string(errmap.width(), errmap.height()));
        }
        const Mask mask = edge_mask(ref, f.edge_pct);
        edge = detail::summary_json(masked_error_stats(errmap, mask));
        edge["mask_pixels"] = mask.count();
        edge["formatted"] = format_summary(masked_error_stats(errmap, mask));
    }
    if (f.out_map) {
        prepare_output(*f.out_map);
        if (fs::path(*f.out_map).extension() == ".gmsf") {
            write_gmsf(errmap, *f.out_map);
        } else {
            save_scalar_image(errmap, *f.out_map);
        }
    }

    ordered_json j;
    j["command"] = "eval-error";
    j["config"] = {{"reg", f.reg},
                   {"truth", f.truth},
                   {"edge_ref", opt_json(f.edge_ref)},
                   {"edge_pct", f.edge_pct},
                   {"negate_reg", f.negate_reg},
                   {"out_json", f.out_json},
                   {"out_map", opt_json(f.out_map)}};
    j["size"] = {{"width", errmap.width()}, {"height", errmap.height()}};
    j["full"] = detail::summary_json(full);
    j["full"]["formatted"] = format_summary(full);
    j["edge"] = std::move(edge);
    write_json(f.out_json, j);
    out << "mean error " << format_summary(full) << " px\n";
    return ok;
}

// ---- eval-tre --------------------------------------------------------------

struct EvalTreFlags {
    std::string fixed;
    std::string moving;
    std::string disp;
    std::optional<double> mm_per_px;
    std::optional<std::string> method;
    std::string out_json;
    std::optional<std::string> out_csv;
};

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

int cmd_eval_tre(const EvalTreFlags &f, std::ostream &out) {
    LandmarkSet fixed = read_landmarks_csv(f.fixed);
    const LandmarkSet moving = read_landmarks_csv(f.moving);
    const auto field = read_gmdf(f.disp);
    if (f.mm_per_px) {
        fixed.mm_per_pixel = *f.mm_per_px;
    }
    const auto result = tre(fixed, moving, field);

    if (f.out_csv) {
        std::string csv = result.mm ? "index,tre_px,tre_mm\n" : "index,tre_px\n";
        for (size_t k = 0; k < result.per_landmark_px.size(); ++k) {
            csv += std::to_string(k) + ',' + fixed6(result.per_landmark_px[k]);
            if (result.per_landmark_mm) {
                csv += ',' + fixed6((*result.per_landmark_mm)[k]);
            }
            csv += '\n';
        }
        write_text(*f.out_csv, csv);
    }

    ordered_json j;
    j["command"] = "eval-tre";
    j["config"] = {{"landmarks_fixed", f.fixed},
                   {"landmarks_moving", f.moving},
                   {"disp", f.disp},
                   {"mm_per_px", f.mm_per_px ? ordered_json(*f.mm_per_px) : ordered_json(nullptr)},
                   {"method", opt_json(f.method)},
                   {"out_json", f.out_json},
                   {"out_csv", opt_json(f.out_csv)}};
    j["summary"] = {{"method", opt_json(f.method)},
                    {"mean_px", result.pixels.mean},
                    {"std_px", result.pixels.std},
                    {"mean_mm", result.mm ? ordered_json(result.mm->mean) : ordered_json(nullptr)},
                    {"std_mm", result.mm ? ordered_json(result.mm->std) : ordered_json(nullptr)},
                    {"n", result.pixels.n}};
    j["tre_px"] = detail::summary_json(result.pixels);
    j["tre_px"]["formatted"] = format_summary(result.pixels);
    j["tre_mm"] = nullptr;
    if (result.mm) {
        j["tre_mm"] = detail::summary_json(*result.mm);
        j["tre_mm"]["formatted"] = format_summary(*result.mm);
    }
    j["per_landmark_px"] = result.per_landmark_px;
    write_json(f.out_json, j);
    out << "TRE " << format_summary(result.pixels) << " px\n";
    return ok;
}

// ---- experiment synthetic --------------------------------------------------

struct ExperimentFlags {
    std::string spec;
    int pairs = 15;
    uint64_t seed = 0;
    std::string out_dir;
    int count = 10;
    double edge_pct = 90.0;
    OptimizerFlags opt;
};

int cmd_experiment_synthetic(const ExperimentFlags &f, std::ostream &out) {
    const SyntheticSpec spec = load_synthetic_spec(f.spec);
    ExperimentOptions opts;
    opts.n_pairs = f.pairs;
    opts.seed = f.seed;
    opts.dataset_count = f.count;
    opts.edge_percentile = f.edge_pct;
    opts.optimizer = f.opt.config();
    set_num_threads(f.opt.threads);

    const auto report = run_synthetic_experiment(spec, opts);

    ordered_json j;
    j["command"] = "experiment synthetic";
    j["config"] = {{"spec", f.spec},
                   {"pairs", f.pairs},
                   {"seed", f.seed},
                   {"out_dir", f.out_dir},
                   {"count", f.count},
                   {"edge_pct", f.edge_pct},
                   {"levels", f.opt.levels},
                   {"iters", f.opt.iters},
                   {"alpha", f.opt.alpha},
                   {"patch", f.opt.patch},
                   {"search", f.opt.search},
                   {"threads", f.opt.threads},
                   {"optimizer", optimizer_json(opts.optimizer)},
                   {"sampler",
                    {{"max_rotation_deg", opts.sampler.max_rotation_deg},
                     {"max_scale_delta", opts.sampler.max_scale_delta},
                     {"max_translation", opts.sampler.max_translation}}},
                   {"synthetic_spec", ordered_json::parse(synthetic_spec_to_json(spec))}};
    const ordered_json report_json = ordered_json::parse(report.to_json());
    for (const auto &[key, value] : report_json.items()) {
        j[key] = value;
    }
    const fs::path dir(f.out_dir);
    fs::create_directories(dir);
    write_json(dir / "report.json", j);
    write_text(dir / "report.csv", report.to_csv());

    for (const auto &a : report.aggregates) {
        out << to_string(a.method) << ": edge " << format_summary(a.edge) << " px, full " << format_summary(a.full)
            << " px, wins " << a.edge_wins << '\n';
    }
    out << "gmind edge error <= mind on " << report.gmind_edge_not_worse() << " of " << f.pairs << " pairs\n";
    return ok;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"MIND / G-MIND deformable registration toolkit", "gmind"};
    app.require_subcommand(1);

    RegisterFlags reg;
    auto *c_reg = app.add_subcommand("register", "register a moving image onto a fixed image");
    c_reg->add_option("--fixed", reg.fixed, "fixed image (PGM/PNG)")->required();
    c_reg->add_option("--moving", reg.moving, "moving image (PGM/PNG)")->required();
    c_reg->add_option("--method", reg.method, "mind or gmind")->required()->check(CLI::IsMember({"mind", "gmind"}));
    c_reg->add_option("--out-disp", reg.out_disp, "forward field (GMDF), on the fixed grid")->required();
    c_reg->add_option("--out-back", reg.out_back, "backward field (GMDF), on the moving grid");
    auto *o_fused = c_reg->add_option("--out-fused", reg.out_fused, "fused image");
    c_reg->add_option("--frame", reg.frame, "fusion frame: i (moving) or j (fixed)")
        ->capture_default_str()
        ->check(CLI::IsMember({"i", "j"}))
        ->needs(o_fused);
    reg.opt.add_to(*c_reg);

    SynthFlags syn;
    auto *c_syn = app.add_subcommand("synth", "generate a synthetic dataset");
    c_syn->add_option("--spec", syn.spec, "synthetic spec JSON")->required();
    c_syn->add_option("--count", syn.count, "number of images")->capture_default_str()->check(CLI::PositiveNumber);
    c_syn->add_option("--out-dir", syn.out_dir, "output directory")->required();
    c_syn->add_option("--distort", syn.distort, "affine transform JSON applied to the test image");
    c_syn->add_option("--out-truth", syn.out_truth, "ground-truth distortion field (GMDF)");
    c_syn->add_option("--test-index", syn.test_index, "image to distort (default 1, or 0 for a single image)");
    c_syn->add_option("--format", syn.format, "image format")->capture_default_str()->check(
        CLI::IsMember({"pgm", "png"}));

    EvalErrorFlags ee;
    auto *c_ee = app.add_subcommand("eval-error", "per-pixel registration error against a known distortion");
    c_ee->add_option("--reg", ee.reg, "registration field (GMDF)")->required();
    c_ee->add_option("--truth", ee.truth, "distortion field (GMDF)")->required();
    auto *o_edge = c_ee->add_option("--edge-ref", ee.edge_ref, "image whose edges define the edge mask");
    c_ee->add_option("--edge-pct", ee.edge_pct, "edge percentile")->capture_default_str()->needs(o_edge);
    c_ee->add_flag("--negate-reg", ee.negate_reg, "score -reg (for a pull field from register --out-disp)");
    c_ee->add_option("--out-json", ee.out_json, "summary JSON")->required();
    c_ee->add_option("--out-map", ee.out_map, "error map (.gmsf, or an image rescaled to 0-255)");

    EvalTreFlags et;
    auto *c_et = app.add_subcommand("eval-tre", "target registration error over landmark pairs");
    c_et->add_option("--landmarks-fixed", et.fixed, "fixed landmarks CSV (x,y)")->required();
    c_et->add_option("--landmarks-moving", et.moving, "moving landmarks CSV (x,y)")->required();
    c_et->add_option("--disp", et.disp, "displacement field (GMDF) on the fixed grid")->required();
    c_et->add_option("--mm-per-px", et.mm_per_px, "pixel spacing in mm")->check(CLI::PositiveNumber);
    c_et->add_option("--method", et.method, "method label echoed in the summary");
    c_et->add_option("--out-json", et.out_json, "summary JSON")->required();
    c_et->add_option("--out-csv", et.out_csv, "per-landmark CSV");

    ExperimentFlags ex;
    auto *c_ex = app.add_subcommand("experiment", "scripted experiments");
    c_ex->require_subcommand(1);
    auto *c_exs = c_ex->add_subcommand("synthetic", "distortion/compensation experiment on synthetic pairs");
    c_exs->add_option("--spec", ex.spec, "synthetic spec JSON")->required();
    c_exs->add_option("--pairs", ex.pairs, "number of pairs")->capture_default_str()->check(CLI::PositiveNumber);
    c_exs->add_option("--seed", ex.seed, "pair and distortion seed")->required();
    c_exs->add_option("--out-dir", ex.out_dir, "output directory")->required();
    c_exs->add_option("--count", ex.count, "dataset size")->capture_default_str()->check(CLI::PositiveNumber);
    c_exs->add_option("--edge-pct", ex.edge_pct, "edge percentile")->capture_default_str();
    ex.opt.add_to(*c_exs);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return ok;
        }
        err << "gmind: " << e.what() << '\n';
        return user_error;
    }

    try {
        if (c_reg->parsed()) {
            return cmd_register(reg, out);
        }
        if (c_syn->parsed()) {
            return cmd_synth(syn, out);
        }
        if (c_ee->parsed()) {
            return cmd_eval_error(ee, out);
        }
        if (c_et->parsed()) {
            return cmd_eval_tre(et, out);
        }
        if (c_exs->parsed()) {
            return cmd_experiment_synthetic(ex, out);
        }
        throw InternalError("no subcommand dispatched");
    } catch (const Error &e) {
        err << "gmind: " << e.what() << '\n';
        return user_error;
    } catch (const fs::filesystem_error &e) {
        err << "gmind: " << e.what() << '\n';
        return user_error;
    } catch (const InternalError &e) {
        err << "gmind: internal error: " << e.what() << '\n';
        return internal_error;
    } catch (const std::exception &e) {
        err << "gmind: internal error: " << e.what() << '\n';
        return internal_error;
    }
}

int main(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace gmind::cli
