#pragma once

#include "gmind/evaluation.hpp"
#include "gmind/optimizer.hpp"
#include "gmind/pipeline.hpp"
#include "gmind/synthetic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gmind {

struct ExperimentOptions {
    int n_pairs = 15;
    uint64_t seed = 0;
    int dataset_count = 10;
    double edge_percentile = 90.0;
    /// Skip the random distortion (every pair gets the identity).
    bool identity_distortion = false;
    DistortionSampler sampler;
    OptimizerConfig optimizer;
};

struct ExperimentRow {
    int pair = 0;
    int reference = 0;
    int test = 0;
    Method method = Method::mind;
    AffineTransform distortion;
    double mean_error = 0.0;      // whole image, pixels
    double edge_mean_error = 0.0; // reference edge mask, pixels
    double final_sad = 0.0;
    int iterations = 0;
};

struct MethodAggregate {
    Method method = Method::mind;
    ErrorSummary full;
    ErrorSummary edge;
    /// Pairs where this method's edge error is strictly lower than the other's.
    int edge_wins = 0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows; // pair-major, mind before gmind
    std::vector<MethodAggregate> aggregates;
    int edge_ties = 0;

    /// Pairs on which G-MIND's edge error is <= MIND's.
    int gmind_edge_not_worse() const;
    std::string to_json() const;
    std::string to_csv() const;
};

/// Aggregates recomputed from per-pair rows.
std::vector<MethodAggregate> aggregate_rows(const std::vector<ExperimentRow> &rows, int &edge_ties);

/// Draws n_pairs (reference, test) index pairs without replacement from the
/// C(count, 2) unordered pairs; the lower index is the reference.
std::vector<std::pair<int, int>> sample_pairs(int count, int n_pairs, uint64_t seed);

/// Distortion/compensation experiment on a synthetic dataset: each test image
/// is distorted by a known affine, registered back onto its reference with
/// both methods, and scored with the per-pixel compensation error.
ExperimentReport run_synthetic_experiment(const SyntheticSpec &spec, const ExperimentOptions &opts);

} // namespace gmind
