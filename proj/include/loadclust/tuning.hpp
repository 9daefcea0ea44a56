#pragma once

#include "loadclust/clusterers.hpp"
#include "loadclust/dimreduce.hpp"
#include "loadclust/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace loadclust {

struct TuningResult {
    std::string method;
    double best_value = 0.0;
    Curve curve;
    std::map<std::string, std::vector<double>> details;
    bool weak_elbow = false;
    bool fallback = false;
};

/// Clustering procedure used inside the gap statistic: returns hard labels
/// in [0, k) for the rows of x.
using Labeler = std::function<std::vector<int>(const Matrix& x, int k, std::uint64_t seed)>;

Labeler kmeans_labeler(int restarts = 10, int max_iter = 300, double tol = 1e-6);
Labeler spectral_labeler(int knn = 0);

/// Pooled within-cluster sum of squared distances to cluster centroids.
double within_dispersion(const Matrix& x, std::span<const int> labels);

struct GapOptions {
    int k_max = kMaxClusters;
    int n_refs = 20;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Gap statistic over k = 1..k_max with uniform bounding-box references.
/// best_value is the plain argmax of gap(k), ties to the smaller k.
TuningResult gap_statistic(const Matrix& x, const Labeler& labeler, const GapOptions& options);

/// (1/n) * sum of squared memberships.
double partition_coefficient(const Matrix& memberships);

struct FpcOptions {
    double m = 2.0;
    int k_min = 2;
    int k_max = kMaxClusters;
    int max_iter = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

TuningResult fpc_sweep(const Matrix& x, const FpcOptions& options);

/// Coefficient of variation of {d_ij^(2/(m-1))} over distinct-point pairs.
double fuzzifier_criterion(const Matrix& x, double m);

/// Fuzzifier from the coefficient-of-variation rule: the m in (1, 10] where
/// fuzzifier_criterion(x, m) falls to 0.03 * dims, found by bisection.
TuningResult estimate_fuzzifier(const Matrix& x);

/// Remaining-clusters vs merge-cost curve of Ward agglomeration, with the
/// elbow k as best_value.
TuningResult elbow_k_for_ac(const Matrix& x, int k_max);

/// Elbow of the CEVR curve over d' = 1..d.
TuningResult tune_pca_dims(const Matrix& x);

/// Elbow of the merge-cost curve of feature agglomeration over d' = d-1..1.
TuningResult tune_fa_dims(const Matrix& x);

void to_json(nlohmann::json& j, const TuningResult& result);

}  // namespace loadclust
