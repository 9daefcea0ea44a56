#pragma once

#include "loadclust/types.hpp"
#include "loadclust/ward.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace loadclust {

enum class Method { KMC, SC, AC, FCM };

const char* to_string(Method method);
Method method_from_string(std::string_view name);

struct ClusteringResult {
    Method method = Method::KMC;
    int k = 0;
    /// Hard labels in [0, k). For FCM these are the hardened memberships.
    std::vector<int> labels;
    /// k x d centers in the feature space used for fitting.
    Matrix centers;
    /// n x k fuzzy memberships (FCM only).
    std::optional<Matrix> memberships;
    std::optional<double> fuzzifier;
    double objective = 0.0;
    bool converged = true;
    int iterations = 0;
    /// Agglomerative merge trace down to the final partition.
    std::vector<MergeStep> merge_trace;
    std::vector<std::string> warnings;
};

struct KMeansOptions {
    int k = 2;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` runs by SSE.
ClusteringResult kmeans(const Matrix& x, const KMeansOptions& options);

struct SpectralOptions {
    int k = 2;
    /// Neighbours per point; 0 selects default_knn(n).
    int knn = 0;
    int restarts = 10;
    std::uint64_t seed = 0;
};

/// max(2, floor(ln n) + 1)
int default_knn(int n);

/// Unnormalized-Laplacian spectral clustering on a union-symmetrized binary
/// kNN graph. Centers are the centroids of the input rows per label.
ClusteringResult spectral(const Matrix& x, const SpectralOptions& options);

using AgglomerativeTarget = std::variant<ClusterCount, MergeThreshold>;

/// Ward agglomerative clustering of the rows of `x`.
ClusteringResult agglomerative(const Matrix& x, const AgglomerativeTarget& target);

struct FcmOptions {
    int k = 2;
    double m = 2.0;
    int max_iter = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

/// Fuzzy c-means from seeded random memberships.
ClusteringResult fcm(const Matrix& x, const FcmOptions& options);

/// Argmax of each membership row (ties to the lower index), or the hard
/// labels unchanged when no memberships are present.
std::vector<int> hardened_labels(const ClusteringResult& result);

/// Row i is the mean of rows of `x` labelled i. Throws on an empty cluster.
Matrix centroids_from_labels(const Matrix& x, std::span<const int> labels, int k);

/// Index of the nearest row of `centers` to `point`, ties to the lower index.
int nearest_center(const Eigen::Ref<const Vector>& point, const Matrix& centers);

void to_json(nlohmann::json& j, const ClusteringResult& result);
ClusteringResult clustering_from_json(const nlohmann::json& j);

}  // namespace loadclust
