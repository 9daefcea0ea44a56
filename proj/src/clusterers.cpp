#include "loadclust/clusterers.hpp"

#include "loadclust/linalg.hpp"
#include "loadclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace loadclust {

const char* to_string(Method method)
{
    switch (method) {
    case Method::KMC:
        return "kmc";
    case Method::SC:
        return "sc";
    case Method::AC:
        return "ac";
    case Method::FCM:
        return "fcm";
    }
    return "unknown";
}

Method method_from_string(std::string_view name)
{
    if (name == "kmc" || name == "kmeans") {
        return Method::KMC;
    }
    if (name == "sc" || name == "spectral") {
        return Method::SC;
    }
    if (name == "ac" || name == "agglomerative") {
        return Method::AC;
    }
    if (name == "fcm") {
        return Method::FCM;
    }
    throw ConfigError("unknown clustering method '" + std::string(name) + "'");
}

namespace {

void check_k(int k, Eigen::Index n)
{
    if (k < 2 || k > kMaxClusters) {
        throw ArgumentError("k = " + std::to_string(k) + " outside [2, " + std::to_string(kMaxClusters) + "]");
    }
    if (k > n) {
        throw ArgumentError("k = " + std::to_string(k) + " exceeds the number of points " + std::to_string(n));
    }
}

std::vector<int> assign_nearest(const Matrix& x, const Matrix& centers)
{
    std::vector<int> labels(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        labels[static_cast<std::size_t>(i)] = nearest_center(x.row(i).transpose(), centers);
    }
    return labels;
}

/// Gives every empty cluster the point lying farthest from its own center,
/// taken from a cluster that can spare it.
void repair_empty(const Matrix& x, std::vector<int>& labels, Matrix& centers)
{
    const int k = static_cast<int>(centers.rows());
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        ++sizes[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) {
            continue;
        }
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const int l = labels[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(l)] < 2) {
                continue;
            }
            const double d = (x.row(i) - centers.row(l)).squaredNorm();
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) {
            continue;
        }
        --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = c;
        sizes[static_cast<std::size_t>(c)] = 1;
        centers.row(c) = x.row(far);
    }
}

Matrix centroids_or_keep(const Matrix& x, const std::vector<int>& labels, const Matrix& previous)
{
    Matrix sums = Matrix::Zero(previous.rows(), previous.cols());
    std::vector<int> counts(static_cast<std::size_t>(previous.rows()), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        sums.row(l) += x.row(i);
        ++counts[static_cast<std::size_t>(l)];
    }
    Matrix out = previous;
    for (Eigen::Index c = 0; c < previous.rows(); ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            out.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
    }
    return out;
}

Matrix kmeans_plus_plus(const Matrix& x, int k, Rng& rng)
{
    const Eigen::Index n = x.rows();
    Matrix centers(k, x.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    const auto first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    centers.row(0) = x.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;

    Vector d2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i) = (x.row(i) - centers.row(0)).squaredNorm();
    }
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (d2(i) <= 0.0) {
                    continue;
                }
                cumulative += d2(i);
                pick = i;
                if (cumulative > target) {
                    break;
                }
            }
        } else {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = x.row(pick);
        chosen[static_cast<std::size_t>(pick)] = 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            d2(i) = std::min(d2(i), (x.row(i) - centers.row(c)).squaredNorm());
        }
    }
    return centers;
}

struct LloydRun {
    std::vector<int> labels;
    Matrix centers;
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;
};

double sum_squared_error(const Matrix& x, const std::vector<int>& labels, const Matrix& centers)
{
    double sse = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        sse += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return sse;
}

LloydRun lloyd(const Matrix& x, int k, int max_iter, double tol, Rng& rng)
{
    LloydRun run;
    run.centers = kmeans_plus_plus(x, k, rng);
    for (run.iterations = 0; run.iterations < max_iter;) {
        ++run.iterations;
        run.labels = assign_nearest(x, run.centers);
        repair_empty(x, run.labels, run.centers);
        Matrix next = centroids_or_keep(x, run.labels, run.centers);
        const double move = (next - run.centers).rowwise().norm().maxCoeff();
        run.centers = std::move(next);
        if (move < tol) {
            run.converged = true;
            break;
        }
    }
    // Settle the assignment against the final centers so every point ends
    // at its nearest center.
    for (int pass = 0; pass < max_iter; ++pass) {
        auto labels = assign_nearest(x, run.centers);
        repair_empty(x, labels, run.centers);
        if (labels == run.labels) {
            break;
        }
        run.labels = std::move(labels);
        run.centers = centroids_or_keep(x, run.labels, run.centers);
    }
    run.centers = centroids_or_keep(x, run.labels, run.centers);
    run.sse = sum_squared_error(x, run.labels, run.centers);
    return run;
}

}  // namespace

int nearest_center(const Eigen::Ref<const Vector>& point, const Matrix& centers)
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d = (centers.row(c).transpose() - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

Matrix centroids_from_labels(const Matrix& x, std::span<const int> labels, int k)
{
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
        throw ArgumentError("labels and rows differ in length");
    }
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        if (l < 0 || l >= k) {
            throw ArgumentError("label " + std::to_string(l) + " outside [0, " + std::to_string(k) + ")");
        }
        sums.row(l) += x.row(static_cast<Eigen::Index>(i));
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw ArgumentError("cluster " + std::to_string(c) + " is empty");
        }
        sums.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    return sums;
}

ClusteringResult kmeans(const Matrix& x, const KMeansOptions& options)
{
    check_k(options.k, x.rows());
    if (options.restarts < 1 || options.max_iter < 1) {
        throw ArgumentError("kmeans needs restarts >= 1 and max_iter >= 1");
    }
    require_finite(x, "kmeans input");

    std::optional<LloydRun> best;
    for (int r = 0; r < options.restarts; ++r) {
        Rng rng = Rng::substream(options.seed, {static_cast<std::uint64_t>(r)});
        LloydRun run = lloyd(x, options.k, options.max_iter, options.tol, rng);
        if (!best || run.sse < best->sse) {
            best = std::move(run);
        }
    }

    ClusteringResult result;
    result.method = Method::KMC;
    result.k = options.k;
    result.labels = std::move(best->labels);
    result.centers = std::move(best->centers);
    result.objective = best->sse;
    result.converged = best->converged;
    result.iterations = best->iterations;
    return result;
}

int default_knn(int n)
{
    return std::max(2, static_cast<int>(std::floor(std::log(static_cast<double>(n)))) + 1);
}

ClusteringResult spectral(const Matrix& x, const SpectralOptions& options)
{
    const auto n = static_cast<int>(x.rows());
    check_k(options.k, n);
    require_finite(x, "spectral input");
    const int knn = options.knn > 0 ? options.knn : std::min(default_knn(n), n - 1);
    if (knn < 1 || knn >= n) {
        throw ArgumentError("knn = " + std::to_string(knn) + " outside [1, " + std::to_string(n - 1) + "]");
    }

    const Matrix dist = pairwise_distances(x);
    if (!(dist.maxCoeff() > 0.0)) {
        throw DegenerateError("degenerate geometry: all points coincide");
    }

    Matrix adjacency = Matrix::Zero(n, n);
    std::vector<int> others(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (int j = 0; j < n; ++j) {
            if (j != i) {
                others[w++] = j;
            }
        }
        std::partial_sort(others.begin(), others.begin() + knn, others.end(), [&](int a, int b) {
            return dist(i, a) < dist(i, b) || (dist(i, a) == dist(i, b) && a < b);
        });
        for (int t = 0; t < knn; ++t) {
            adjacency(i, others[static_cast<std::size_t>(t)]) = 1.0;
            adjacency(others[static_cast<std::size_t>(t)], i) = 1.0;
        }
    }

    ClusteringResult result;
    result.method = Method::SC;
    result.k = options.k;

    // Connected components of the kNN graph.
    std::vector<int> component(static_cast<std::size_t>(n), -1);
    int components = 0;
    for (int s = 0; s < n; ++s) {
        if (component[static_cast<std::size_t>(s)] >= 0) {
            continue;
        }
        std::deque<int> queue{s};
        component[static_cast<std::size_t>(s)] = components;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v = 0; v < n; ++v) {
                if (adjacency(u, v) != 0.0 && component[static_cast<std::size_t>(v)] < 0) {
                    component[static_cast<std::size_t>(v)] = components;
                    queue.push_back(v);
                }
            }
        }
        ++components;
    }
    if (components > options.k) {
        result.warnings.push_back("kNN graph has " + std::to_string(components) +
                                  " connected components, more than k = " + std::to_string(options.k) +
                                  "; eigen-gap is degenerate");
    }

    const Matrix degree = adjacency.rowwise().sum().asDiagonal();
    const Matrix laplacian = degree - adjacency;
    const auto eig = jacobi_eigen(laplacian);
    const Matrix embedding = eig.vectors.leftCols(options.k);

    KMeansOptions km;
    km.k = options.k;
    km.restarts = std::max(options.restarts, 10);
    km.seed = Rng::derive(options.seed, {0x5c});
    auto inner = kmeans(embedding, km);

    result.labels = std::move(inner.labels);
    result.centers = centroids_from_labels(x, result.labels, options.k);
    result.objective = inner.objective;
    result.converged = inner.converged;
    result.iterations = inner.iterations;
    return result;
}

ClusteringResult agglomerative(const Matrix& x, const AgglomerativeTarget& target)
{
    if (x.rows() < 2) {
        throw ArgumentError("agglomerative clustering needs at least 2 points");
    }
    if (const auto* count = std::get_if<ClusterCount>(&target)) {
        check_k(count->value, x.rows());
    } else if (!(std::get<MergeThreshold>(target).value >= 0.0)) {
        throw ArgumentError("merge threshold must be non-negative");
    }
    require_finite(x, "agglomerative input");

    auto ward = ward_agglomerate(x, std::visit([](auto t) -> WardTarget { return t; }, target));
    const int k = static_cast<int>(ward.groups.size());
    if (k < 2 || k > kMaxClusters) {
        throw ArgumentError("merge threshold yields " + std::to_string(k) + " clusters, outside [2, " +
                            std::to_string(kMaxClusters) + "]");
    }

    ClusteringResult result;
    result.method = Method::AC;
    result.k = k;
    result.labels.assign(static_cast<std::size_t>(x.rows()), 0);
    for (int g = 0; g < k; ++g) {
        for (int member : ward.groups[static_cast<std::size_t>(g)]) {
            result.labels[static_cast<std::size_t>(member)] = g;
        }
    }
    result.centers = centroids_from_labels(x, result.labels, k);
    for (auto it = ward.trace.rbegin(); it != ward.trace.rend(); ++it) {
        if (it->accepted) {
            result.objective = it->cost;
            break;
        }
    }
    result.iterations = static_cast<int>(ward.trace.size());
    result.merge_trace = std::move(ward.trace);
    return result;
}

namespace {

Matrix fuzzy_centers(const Matrix& x, const Matrix& u, double m, const Matrix& previous)
{
    const Matrix w = u.array().pow(m).matrix();
    Matrix centers = previous;
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        const double total = w.col(c).sum();
        if (total > 0.0) {
            centers.row(c) = (w.col(c).transpose() * x) / total;
        }
    }
    return centers;
}

Matrix fuzzy_memberships(const Matrix& x, const Matrix& centers, double m)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index k = centers.rows();
    Matrix u = Matrix::Zero(n, k);
    Vector d2(k);
    Vector a(k);
    const double exponent = 1.0 / (m - 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        int coincident = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            d2(c) = (x.row(i) - centers.row(c)).squaredNorm();
            coincident += d2(c) == 0.0 ? 1 : 0;
        }
        if (coincident > 0) {
            // A point sitting on centers belongs to them alone, shared equally.
            for (Eigen::Index c = 0; c < k; ++c) {
                u(i, c) = d2(c) == 0.0 ? 1.0 / coincident : 0.0;
            }
            continue;
        }
        // u_ic is proportional to d_ic^(-2/(m-1)); evaluate in log space.
        for (Eigen::Index c = 0; c < k; ++c) {
            a(c) = -exponent * std::log(d2(c));
        }
        const double top = a.maxCoeff();
        double total = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) {
            u(i, c) = std::exp(a(c) - top);
            total += u(i, c);
        }
        u.row(i) /= total;
    }
    return u;
}

}  // namespace

ClusteringResult fcm(const Matrix& x, const FcmOptions& options)
{
    if (!(options.m > 1.0) || !std::isfinite(options.m)) {
        throw ArgumentError("fuzzifier m must be > 1");
    }
    check_k(options.k, x.rows());
    if (options.max_iter < 1) {
        throw ArgumentError("fcm needs max_iter >= 1");
    }
    require_finite(x, "fcm input");

    const Eigen::Index n = x.rows();
    const int k = options.k;
    Rng rng(options.seed);
    Matrix u(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < k; ++c) {
            u(i, c) = rng.uniform() + 1e-12;
        }
        u.row(i) /= u.row(i).sum();
    }

    Matrix centers = x.colwise().mean().replicate(k, 1);
    ClusteringResult result;
    result.method = Method::FCM;
    result.k = k;
    result.converged = false;
    for (result.iterations = 0; result.iterations < options.max_iter;) {
        ++result.iterations;
        centers = fuzzy_centers(x, u, options.m, centers);
        Matrix next = fuzzy_memberships(x, centers, options.m);
        const double delta = (next - u).cwiseAbs().maxCoeff();
        u = std::move(next);
        if (delta < options.tol) {
            result.converged = true;
            break;
        }
    }
    centers = fuzzy_centers(x, u, options.m, centers);

    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < k; ++c) {
            objective += std::pow(u(i, c), options.m) * (x.row(i) - centers.row(c)).squaredNorm();
        }
    }
    result.objective = objective;
    result.centers = std::move(centers);
    result.memberships = std::move(u);
    result.fuzzifier = options.m;
    result.labels = hardened_labels(result);
    if (!result.converged) {
        result.warnings.push_back("fcm did not converge in " + std::to_string(options.max_iter) + " iterations");
    }
    return result;
}

std::vector<int> hardened_labels(const ClusteringResult& result)
{
    if (!result.memberships) {
        return result.labels;
    }
    const Matrix& u = *result.memberships;
    std::vector<int> labels(static_cast<std::size_t>(u.rows()));
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < u.cols(); ++c) {
            if (u(i, c) > u(i, best)) {
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

namespace {

nlohmann::json row_major(const Matrix& m)
{
    auto out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out.push_back(m(r, c));
        }
    }
    return out;
}

Matrix from_row_major(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols)
{
    const auto values = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw FormatError("matrix has wrong number of entries");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
        }
    }
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const ClusteringResult& result)
{
    j = nlohmann::json::object();
    j["method"] = to_string(result.method);
    j["k"] = result.k;
    j["labels"] = result.labels;
    j["dims"] = result.centers.cols();
    j["centers"] = row_major(result.centers);
    j["memberships"] = result.memberships ? row_major(*result.memberships) : nlohmann::json(nullptr);
    j["m"] = result.fuzzifier ? nlohmann::json(*result.fuzzifier) : nlohmann::json(nullptr);
    j["objective"] = result.objective;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["warnings"] = result.warnings;
}

ClusteringResult clustering_from_json(const nlohmann::json& j)
{
    ClusteringResult r;
    r.method = method_from_string(j.at("method").get<std::string>());
    r.k = j.at("k").get<int>();
    r.labels = j.at("labels").get<std::vector<int>>();
    const auto dims = j.at("dims").get<Eigen::Index>();
    r.centers = from_row_major(j.at("centers"), r.k, dims);
    if (!j.at("memberships").is_null()) {
        r.memberships = from_row_major(j["memberships"], static_cast<Eigen::Index>(r.labels.size()), r.k);
    }
    if (!j.at("m").is_null()) {
        r.fuzzifier = j["m"].get<double>();
    }
    r.objective = j.at("objective").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.value("iterations", 0);
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
}

}  // namespace loadclust
