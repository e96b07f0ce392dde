#include "gmind/experiments.hpp"
#include "gmind/error.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace gmind {

int ExperimentReport::gmind_edge_not_worse() const {
    int count = 0;
    for (size_t i = 0; i + 1 < rows.size(); i += 2) {
        if (rows[i + 1].edge_mean_error <= rows[i].edge_mean_error) {
            ++count;
        }
    }
    return count;
}

std::vector<MethodAggregate> aggregate_rows(const std::vector<ExperimentRow> &rows, int &edge_ties) {
    std::vector<MethodAggregate> out;
    edge_ties = 0;
    for (const Method m : {Method::mind, Method::gmind}) {
        std::vector<double> full;
        std::vector<double> edge;
        for (const auto &r : rows) {
            if (r.method == m) {
                full.push_back(r.mean_error);
                edge.push_back(r.edge_mean_error);
            }
        }
        if (full.empty()) {
            continue;
        }
        out.push_back({m, summarize(full), summarize(edge), 0});
    }
    for (size_t i = 0; i + 1 < rows.size(); i += 2) {
        const double mind = rows[i].edge_mean_error;
        const double gmind = rows[i + 1].edge_mean_error;
        if (mind < gmind) {
            ++out[0].edge_wins;
        } else if (gmind < mind) {
            ++out[1].edge_wins;
        } else {
            ++edge_ties;
        }
    }
    return out;
}

std::vector<std::pair<int, int>> sample_pairs(int count, int n_pairs, uint64_t seed) {
    std::vector<std::pair<int, int>> all;
    for (int a = 0; a < count; ++a) {
        for (int b = a + 1; b < count; ++b) {
            all.emplace_back(a, b);
        }
    }
    if (n_pairs < 1 || static_cast<size_t>(n_pairs) > all.size()) {
        throw Error(ErrorCode::invalid_argument, "cannot draw " + std::to_string(n_pairs) + " pairs from " +
                                                     std::to_string(count) + " images");
    }
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<size_t>(n_pairs));
    return all;
}

ExperimentReport run_synthetic_experiment(const SyntheticSpec &spec, const ExperimentOptions &opts) {
    spec.validate();
    opts.optimizer.validate();
    const auto images = generate_dataset(spec, opts.dataset_count);
    const auto pairs = sample_pairs(opts.dataset_count, opts.n_pairs, opts.seed);
    // Distortions come from their own stream so that the pair draw and the
    // transform draw do not depend on each other.
    std::mt19937_64 rng(opts.seed ^ 0x9E3779B97F4A7C15ULL);

    ExperimentReport report;
    for (size_t p = 0; p < pairs.size(); ++p) {
        const auto [ref_idx, test_idx] = pairs[p];
        const AffineTransform t = opts.identity_distortion ? AffineTransform{} : opts.sampler(rng);
        const Image &reference = images[static_cast<size_t>(ref_idx)];
        const auto distorted = apply_affine(images[static_cast<size_t>(test_idx)], t);
        const Mask edges = edge_mask(reference, opts.edge_percentile);

        for (const Method m : {Method::mind, Method::gmind}) {
            const auto estimate = m == Method::mind ? estimate_mind(reference, distorted.image, opts.optimizer)
                                                    : estimate_gmind(reference, distorted.image, opts.optimizer);
            // The estimate pulls the reference grid into the distorted image,
            // i.e. it reproduces the distortion; the compensating
            // displacement is its negative.
            const auto compensation = combine(estimate.field, -1.0, estimate.field, 0.0);
            const auto errmap = registration_error_map(compensation, distorted.distortion);

            ExperimentRow row;
            row.pair = static_cast<int>(p);
            row.reference = ref_idx;
            row.test = test_idx;
            row.method = m;
            row.distortion = t;
            row.mean_error = errmap.mean();
            row.edge_mean_error = masked_error_stats(errmap, edges).mean;
            row.final_sad = final_sad(m, reference, distorted.image, estimate.field, opts.optimizer.descriptor);
            for (const auto &trace : estimate.traces) {
                row.iterations += static_cast<int>(trace.records.size());
            }
            report.rows.push_back(row);
        }
    }
    report.aggregates = aggregate_rows(report.rows, report.edge_ties);
    return report;
}

std::string ExperimentReport::to_json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    ordered_json rows_json = ordered_json::array();
    for (const auto &r : rows) {
        rows_json.push_back({{"pair", r.pair},
                             {"reference", r.reference},
                             {"test", r.test},
                             {"method", to_string(r.method)},
                             {"distortion", detail::affine_json(r.distortion)},
                             {"mean_error_px", r.mean_error},
                             {"edge_mean_error_px", r.edge_mean_error},
                             {"final_sad", r.final_sad},
                             {"iterations", r.iterations}});
    }
    ordered_json agg = ordered_json::array();
    for (const auto &a : aggregates) {
        agg.push_back({{"method", to_string(a.method)},
                       {"mean_error_px", detail::summary_json(a.full)},
                       {"edge_mean_error_px", detail::summary_json(a.edge)},
                       {"edge_wins", a.edge_wins}});
    }
    j["rows"] = std::move(rows_json);
    j["aggregates"] = std::move(agg);
    j["edge_ties"] = edge_ties;
    j["gmind_edge_not_worse"] = gmind_edge_not_worse();
    return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "pair,reference,test,method,mean_error_px,edge_mean_error_px,final_sad,iterations\n";
    for (const auto &r : rows) {
        os << r.pair << ',' << r.reference << ',' << r.test << ',' << to_string(r.method) << ',' << r.mean_error
           << ',' << r.edge_mean_error << ',' << r.final_sad << ',' << r.iterations << '\n';
    }
    return os.str();
}

} // namespace gmind
