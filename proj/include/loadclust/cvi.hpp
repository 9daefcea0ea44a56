#pragma once

#include "loadclust/clusterers.hpp"
#include "loadclust/types.hpp"

#include <nlohmann/json.hpp>

#include <span>

namespace loadclust {

// Clustering validity indices over Euclidean distances.
//
// Labels may be any non-negative integers; the distinct values present
// define the clusters. Degenerate denominators return +infinity instead of
// throwing so a framework comparison never aborts.

double silhouette(const Matrix& x, std::span<const int> labels);
double calinski_harabasz(const Matrix& x, std::span<const int> labels);
double dunn_index(const Matrix& x, std::span<const int> labels);
double davies_bouldin(const Matrix& x, std::span<const int> labels);

double xie_beni_hard(const Matrix& x, std::span<const int> labels);
/// Fuzzy Xie-Beni; centers are the u^m-weighted means of the rows of x.
double xie_beni_fuzzy(const Matrix& x, const Matrix& memberships, double m);
/// Fuzzy path when the result carries memberships, hard path otherwise.
double xie_beni(const Matrix& x, const ClusteringResult& result);

enum class FeatureSpace { Reduced, Original };

const char* to_string(FeatureSpace space);

struct CviScores {
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double dunn = 0.0;
    double davies_bouldin = 0.0;
    double xie_beni = 0.0;
    FeatureSpace feature_space = FeatureSpace::Reduced;

    bool any_infinite() const;
    bool operator==(const CviScores&) const = default;
};

CviScores all_indices(const Matrix& x, const ClusteringResult& result, FeatureSpace space);

void to_json(nlohmann::json& j, const CviScores& scores);

}  // namespace loadclust
