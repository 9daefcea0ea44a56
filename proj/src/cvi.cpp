#include "loadclust/cvi.hpp"

#include "loadclust/format.hpp"
#include "loadclust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace loadclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Partition {
    std::vector<int> labels;  // compacted to [0, k)
    std::vector<int> sizes;
    int k = 0;
};

Partition compact(const Matrix& x, std::span<const int> labels)
{
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
        throw ArgumentError("labels and rows differ in length");
    }
    require_finite(x, "CVI input");
    std::map<int, int> index;
    for (int l : labels) {
        index.emplace(l, 0);
    }
    int next = 0;
    for (auto& [label, compacted] : index) {
        compacted = next++;
    }
    Partition p;
    p.k = next;
    p.sizes.assign(static_cast<std::size_t>(p.k), 0);
    p.labels.reserve(labels.size());
    for (int l : labels) {
        const int c = index.at(l);
        p.labels.push_back(c);
        ++p.sizes[static_cast<std::size_t>(c)];
    }
    return p;
}

Partition compact_at_least_two(const Matrix& x, std::span<const int> labels, const char* index_name)
{
    auto p = compact(x, labels);
    if (p.k < 2) {
        throw ArgumentError(std::string(index_name) + " needs at least 2 clusters");
    }
    return p;
}

Matrix centroids(const Matrix& x, const Partition& p)
{
    return centroids_from_labels(x, p.labels, p.k);
}

}  // namespace

double silhouette(const Matrix& x, std::span<const int> labels)
{
    const auto p = compact_at_least_two(x, labels, "silhouette");
    const Matrix dist = pairwise_distances(x);
    const Eigen::Index n = x.rows();
    std::vector<double> sums(static_cast<std::size_t>(p.k));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = p.labels[static_cast<std::size_t>(i)];
        if (p.sizes[static_cast<std::size_t>(own)] == 1) {
            continue;
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            sums[static_cast<std::size_t>(p.labels[static_cast<std::size_t>(j)])] += dist(i, j);
        }
        const double a = sums[static_cast<std::size_t>(own)] / (p.sizes[static_cast<std::size_t>(own)] - 1);
        double b = kInf;
        for (int c = 0; c < p.k; ++c) {
            if (c != own) {
                b = std::min(b, sums[static_cast<std::size_t>(c)] / p.sizes[static_cast<std::size_t>(c)]);
            }
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double calinski_harabasz(const Matrix& x, std::span<const int> labels)
{
    const auto p = compact_at_least_two(x, labels, "Calinski-Harabasz");
    const Eigen::Index n = x.rows();
    if (p.k >= n) {
        throw ArgumentError("Calinski-Harabasz needs fewer clusters than points");
    }
    const Matrix centers = centroids(x, p);
    const Vector mean = x.colwise().mean().transpose();
    double between = 0.0;
    for (int c = 0; c < p.k; ++c) {
        between += p.sizes[static_cast<std::size_t>(c)] * (centers.row(c).transpose() - mean).squaredNorm();
    }
    double within = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        within += (x.row(i) - centers.row(p.labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    if (!(within > 0.0)) {
        return kInf;
    }
    return (between / (p.k - 1)) / (within / static_cast<double>(n - p.k));
}

double dunn_index(const Matrix& x, std::span<const int> labels)
{
    const auto p = compact_at_least_two(x, labels, "Dunn index");
    const Eigen::Index n = x.rows();
    double min_between = kInf;
    double max_diameter = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (x.row(i) - x.row(j)).norm();
            if (p.labels[static_cast<std::size_t>(i)] == p.labels[static_cast<std::size_t>(j)]) {
                max_diameter = std::max(max_diameter, d);
            } else {
                min_between = std::min(min_between, d);
            }
        }
    }
    if (!(max_diameter > 0.0)) {
        return kInf;
    }
    return min_between / max_diameter;
}

double davies_bouldin(const Matrix& x, std::span<const int> labels)
{
    const auto p = compact_at_least_two(x, labels, "Davies-Bouldin");
    const Matrix centers = centroids(x, p);
    std::vector<double> scatter(static_cast<std::size_t>(p.k), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int c = p.labels[static_cast<std::size_t>(i)];
        scatter[static_cast<std::size_t>(c)] += (x.row(i) - centers.row(c)).norm();
    }
    for (int c = 0; c < p.k; ++c) {
        scatter[static_cast<std::size_t>(c)] /= p.sizes[static_cast<std::size_t>(c)];
    }
    double total = 0.0;
    for (int i = 0; i < p.k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < p.k; ++j) {
            if (i == j) {
                continue;
            }
            const double spread = scatter[static_cast<std::size_t>(i)] + scatter[static_cast<std::size_t>(j)];
            const double separation = (centers.row(i) - centers.row(j)).norm();
            double similarity = 0.0;
            if (separation > 0.0) {
                similarity = spread / separation;
            } else if (spread > 0.0) {
                similarity = kInf;
            }
            worst = std::max(worst, similarity);
        }
        total += worst;
    }
    return total / p.k;
}

namespace {

double min_center_separation_sq(const Matrix& centers)
{
    double best = kInf;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < centers.rows(); ++j) {
            best = std::min(best, (centers.row(i) - centers.row(j)).squaredNorm());
        }
    }
    return best;
}

}  // namespace

double xie_beni_hard(const Matrix& x, std::span<const int> labels)
{
    const auto p = compact_at_least_two(x, labels, "Xie-Beni");
    const Matrix centers = centroids(x, p);
    double compactness = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        compactness += (x.row(i) - centers.row(p.labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    compactness /= static_cast<double>(x.rows());
    const double separation = min_center_separation_sq(centers);
    return separation > 0.0 ? compactness / separation : kInf;
}

double xie_beni_fuzzy(const Matrix& x, const Matrix& memberships, double m)
{
    if (!(m > 1.0)) {
        throw ArgumentError("fuzzy Xie-Beni needs m > 1");
    }
    if (memberships.rows() != x.rows()) {
        throw ArgumentError("memberships and rows differ in length");
    }
    require_finite(x, "CVI input");
    const Matrix w = memberships.array().pow(m).matrix();
    std::vector<Eigen::Index> used;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (w.col(c).sum() > 0.0) {
            used.push_back(c);
        }
    }
    if (used.size() < 2) {
        throw ArgumentError("Xie-Beni needs at least 2 clusters");
    }
    Matrix centers(static_cast<Eigen::Index>(used.size()), x.cols());
    for (std::size_t c = 0; c < used.size(); ++c) {
        centers.row(static_cast<Eigen::Index>(c)) = (w.col(used[c]).transpose() * x) / w.col(used[c]).sum();
    }
    double compactness = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (std::size_t c = 0; c < used.size(); ++c) {
            compactness += w(i, used[c]) * (x.row(i) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
        }
    }
    compactness /= static_cast<double>(x.rows());
    const double separation = min_center_separation_sq(centers);
    return separation > 0.0 ? compactness / separation : kInf;
}

double xie_beni(const Matrix& x, const ClusteringResult& result)
{
    if (result.k < 2) {
        throw ArgumentError("Xie-Beni needs at least 2 clusters");
    }
    if (result.memberships) {
        if (!result.fuzzifier) {
            throw ArgumentError("fuzzy memberships given without a fuzzifier m");
        }
        return xie_beni_fuzzy(x, *result.memberships, *result.fuzzifier);
    }
    return xie_beni_hard(x, result.labels);
}

const char* to_string(FeatureSpace space)
{
    return space == FeatureSpace::Reduced ? "reduced" : "original";
}

bool CviScores::any_infinite() const
{
    return std::isinf(silhouette) || std::isinf(calinski_harabasz) || std::isinf(dunn) ||
           std::isinf(davies_bouldin) || std::isinf(xie_beni);
}

CviScores all_indices(const Matrix& x, const ClusteringResult& result, FeatureSpace space)
{
    const auto labels = hardened_labels(result);
    CviScores s;
    s.feature_space = space;
    s.silhouette = silhouette(x, labels);
    s.calinski_harabasz = calinski_harabasz(x, labels);
    s.dunn = dunn_index(x, labels);
    s.davies_bouldin = davies_bouldin(x, labels);
    s.xie_beni = xie_beni(x, result);
    return s;
}

namespace {

nlohmann::json number_or_sentinel(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return format_double(v);
}

}  // namespace

void to_json(nlohmann::json& j, const CviScores& scores)
{
    j = nlohmann::json{{"feature_space", to_string(scores.feature_space)},
                       {"SH", number_or_sentinel(scores.silhouette)},
                       {"CH", number_or_sentinel(scores.calinski_harabasz)},
                       {"DI", number_or_sentinel(scores.dunn)},
                       {"DB", number_or_sentinel(scores.davies_bouldin)},
                       {"XB", number_or_sentinel(scores.xie_beni)}};
}

}  // namespace loadclust
