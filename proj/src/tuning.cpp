#include "loadclust/tuning.hpp"

#include "loadclust/linalg.hpp"
#include "loadclust/parallel.hpp"
#include "loadclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace loadclust {

Labeler kmeans_labeler(int restarts, int max_iter, double tol)
{
    return [=](const Matrix& x, int k, std::uint64_t seed) {
        return kmeans(x, KMeansOptions{k, restarts, max_iter, tol, seed}).labels;
    };
}

Labeler spectral_labeler(int knn)
{
    return [=](const Matrix& x, int k, std::uint64_t seed) {
        SpectralOptions options;
        options.k = k;
        options.knn = knn;
        options.seed = seed;
        return spectral(x, options).labels;
    };
}

double within_dispersion(const Matrix& x, std::span<const int> labels)
{
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
        throw ArgumentError("labels and rows differ in length");
    }
    std::map<int, std::pair<Vector, int>> sums;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = sums.try_emplace(labels[i], Vector::Zero(x.cols()), 0);
        it->second.first += x.row(static_cast<Eigen::Index>(i)).transpose();
        ++it->second.second;
    }
    double w = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& [sum, count] = sums.at(labels[i]);
        w += (x.row(static_cast<Eigen::Index>(i)).transpose() - sum / count).squaredNorm();
    }
    return w;
}

namespace {

double total_dispersion(const Matrix& x)
{
    const Vector mean = x.colwise().mean().transpose();
    return (x.rowwise() - mean.transpose()).squaredNorm();
}

// log W with W floored relative to the k = 1 dispersion; an exact fit
// (W = 0) would otherwise give an infinite gap.
double floored_log(double w, double w1)
{
    return std::log(std::max({w, w1 * 1e-12, std::numeric_limits<double>::min()}));
}

std::vector<double> log_dispersions(const Matrix& x, const Labeler& labeler, int k_max, std::uint64_t seed,
                                    std::uint64_t stream)
{
    std::vector<double> out(static_cast<std::size_t>(k_max));
    const double w1 = total_dispersion(x);
    out[0] = floored_log(w1, w1);
    for (int k = 2; k <= k_max; ++k) {
        const auto labels = labeler(x, k, Rng::derive(seed, {static_cast<std::uint64_t>(k), stream}));
        out[static_cast<std::size_t>(k - 1)] = floored_log(within_dispersion(x, labels), w1);
    }
    return out;
}

}  // namespace

TuningResult gap_statistic(const Matrix& x, const Labeler& labeler, const GapOptions& options)
{
    const int n = static_cast<int>(x.rows());
    if (options.k_max < 2 || options.k_max > kMaxClusters) {
        throw ArgumentError("gap k_max must lie in [2, " + std::to_string(kMaxClusters) + "]");
    }
    if (options.k_max > n) {
        throw ArgumentError("gap k_max = " + std::to_string(options.k_max) + " exceeds n = " + std::to_string(n));
    }
    if (options.n_refs < 1) {
        throw ArgumentError("gap statistic needs n_refs >= 1");
    }
    require_finite(x, "gap statistic input");
    if (!(total_dispersion(x) > 0.0)) {
        throw DegenerateError("gap statistic undefined: all points coincide");
    }

    const auto observed = log_dispersions(x, labeler, options.k_max, options.seed, 0);

    const Vector lo = x.colwise().minCoeff().transpose();
    const Vector hi = x.colwise().maxCoeff().transpose();
    std::vector<std::vector<double>> reference(static_cast<std::size_t>(options.n_refs));
    parallel_for(reference.size(), options.threads, [&](std::size_t b) {
        Rng rng = Rng::substream(options.seed, {0x7265665fULL, b});
        Matrix ref(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < ref.rows(); ++i) {
            for (Eigen::Index c = 0; c < ref.cols(); ++c) {
                ref(i, c) = rng.uniform(lo(c), hi(c));
            }
        }
        reference[b] = log_dispersions(ref, labeler, options.k_max, options.seed, b + 1);
    });

    TuningResult result;
    result.method = "gap_statistic";
    auto& sd = result.details["sd"];
    auto& se = result.details["s_k"];
    auto& ref_mean = result.details["log_w_ref"];
    result.details["log_w"] = observed;
    const double b = options.n_refs;
    for (int k = 1; k <= options.k_max; ++k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        double mean = 0.0;
        for (const auto& r : reference) {
            mean += r[idx];
        }
        mean /= b;
        double var = 0.0;
        for (const auto& r : reference) {
            var += (r[idx] - mean) * (r[idx] - mean);
        }
        const double s = std::sqrt(var / b);
        ref_mean.push_back(mean);
        sd.push_back(s);
        se.push_back(s * std::sqrt(1.0 + 1.0 / b));
        result.curve.xs.push_back(k);
        result.curve.ys.push_back(mean - observed[idx]);
    }
    const auto best = std::max_element(result.curve.ys.begin(), result.curve.ys.end());
    result.best_value = result.curve.xs[static_cast<std::size_t>(best - result.curve.ys.begin())];
    return result;
}

double partition_coefficient(const Matrix& memberships)
{
    if (memberships.rows() == 0) {
        throw ArgumentError("empty membership matrix");
    }
    return memberships.squaredNorm() / static_cast<double>(memberships.rows());
}

TuningResult fpc_sweep(const Matrix& x, const FpcOptions& options)
{
    if (!(options.m > 1.0)) {
        throw ArgumentError("fuzzifier m must be > 1");
    }
    if (options.k_min < 2 || options.k_max > kMaxClusters || options.k_min > options.k_max) {
        throw ArgumentError("FPC k range must lie within [2, " + std::to_string(kMaxClusters) + "]");
    }
    TuningResult result;
    result.method = "fpc_sweep";
    auto& converged = result.details["converged"];
    for (int k = options.k_min; k <= options.k_max; ++k) {
        FcmOptions fo;
        fo.k = k;
        fo.m = options.m;
        fo.max_iter = options.max_iter;
        fo.tol = options.tol;
        fo.seed = Rng::derive(options.seed, {static_cast<std::uint64_t>(k)});
        const auto fit = fcm(x, fo);
        result.curve.xs.push_back(k);
        result.curve.ys.push_back(partition_coefficient(*fit.memberships));
        converged.push_back(fit.converged ? 1.0 : 0.0);
    }
    const auto best = std::max_element(result.curve.ys.begin(), result.curve.ys.end());
    result.best_value = result.curve.xs[static_cast<std::size_t>(best - result.curve.ys.begin())];
    return result;
}

namespace {

std::vector<double> log_pair_distances(const Matrix& x)
{
    std::vector<double> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
            const double d = (x.row(i) - x.row(j)).norm();
            if (d > 0.0) {
                out.push_back(std::log(d));
            }
        }
    }
    return out;
}

double cv_of_powered(const std::vector<double>& log_d, double m)
{
    if (log_d.empty()) {
        return 0.0;
    }
    const double t = 2.0 / (m - 1.0);
    const double top = *std::max_element(log_d.begin(), log_d.end());
    // The coefficient of variation is scale-free, so rescale by the largest
    // distance to keep the powers in range.
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double ld : log_d) {
        const double y = std::exp(t * (ld - top));
        sum += y;
        sum_sq += y * y;
    }
    const double n = static_cast<double>(log_d.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return std::sqrt(var) / mean;
}

constexpr double kFuzzifierLow = 1.0 + 1e-6;
constexpr double kFuzzifierHigh = 10.0;
constexpr double kFuzzifierTol = 1e-4;
constexpr double kFuzzifierFallback = 2.0;

}  // namespace

double fuzzifier_criterion(const Matrix& x, double m)
{
    if (!(m > 1.0)) {
        throw ArgumentError("fuzzifier m must be > 1");
    }
    return cv_of_powered(log_pair_distances(x), m);
}

TuningResult estimate_fuzzifier(const Matrix& x)
{
    if (x.rows() < 3) {
        throw ArgumentError("fuzzifier estimation needs at least 3 points");
    }
    require_finite(x, "fuzzifier input");
    const auto log_d = log_pair_distances(x);
    const double target = 0.03 * static_cast<double>(x.cols());

    TuningResult result;
    result.method = "fuzzifier";
    result.details["target_cv"] = {target};
    for (int i = 1; i <= 90; ++i) {
        const double m = 1.0 + 0.1 * i;
        result.curve.xs.push_back(m);
        result.curve.ys.push_back(cv_of_powered(log_d, m));
    }

    double lo = kFuzzifierLow;
    double hi = kFuzzifierHigh;
    if (cv_of_powered(log_d, lo) <= target || cv_of_powered(log_d, hi) > target) {
        result.best_value = kFuzzifierFallback;
        result.fallback = true;
        return result;
    }
    // Invariant: criterion(lo) > target >= criterion(hi).
    while (hi - lo > kFuzzifierTol) {
        const double mid = 0.5 * (lo + hi);
        if (cv_of_powered(log_d, mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.best_value = hi;
    result.details["criterion_at_best"] = {cv_of_powered(log_d, hi)};
    return result;
}

TuningResult elbow_k_for_ac(const Matrix& x, int k_max)
{
    const int n = static_cast<int>(x.rows());
    if (k_max < 2 || k_max > std::min(n, kMaxClusters)) {
        throw ArgumentError("AC k_max must lie in [2, min(n, " + std::to_string(kMaxClusters) + ")]");
    }
    require_finite(x, "AC elbow input");
    const auto ward = ward_agglomerate(x, ClusterCount{1});

    TuningResult result;
    result.method = "ac_elbow";
    for (int k = 1; k <= k_max; ++k) {
        double cost = 0.0;
        for (const auto& step : ward.trace) {
            if (step.clusters_after == k) {
                cost = step.cost;
                break;
            }
        }
        result.curve.xs.push_back(k);
        result.curve.ys.push_back(cost);
    }
    if (k_max == 2) {
        result.best_value = 2;
        result.weak_elbow = true;
        return result;
    }
    const auto elbow = detect_elbow(result.curve);
    result.best_value = elbow.x;
    result.weak_elbow = elbow.weak;
    result.details["chord_distance"] = {elbow.distance};
    return result;
}

TuningResult tune_pca_dims(const Matrix& x)
{
    const int d = static_cast<int>(x.cols());
    if (d < 3) {
        throw ArgumentError("PCA dimension tuning needs at least 3 input dimensions");
    }
    const auto full = pca_fit(x, OutputDims{d});
    TuningResult result;
    result.method = "pca_cevr_elbow";
    for (int i = 0; i < d; ++i) {
        result.curve.xs.push_back(i + 1);
        result.curve.ys.push_back(full.pca()->cevr(i));
    }
    const auto elbow = detect_elbow(result.curve);
    result.best_value = elbow.x;
    result.weak_elbow = elbow.weak;
    const auto& ev = full.pca()->eigenvalues;
    result.details["eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
    result.details["cevr_at_best"] = {full.pca()->cevr(static_cast<Eigen::Index>(elbow.index))};
    return result;
}

TuningResult tune_fa_dims(const Matrix& x)
{
    const int d = static_cast<int>(x.cols());
    if (d < 4) {
        throw ArgumentError("FA dimension tuning needs at least 4 input dimensions");
    }
    const auto full = fa_fit(x, OutputDims{1});
    TuningResult result;
    result.method = "fa_cost_elbow";
    for (const auto& step : full.fa()->merge_trace) {
        result.curve.xs.push_back(step.clusters_after);
        result.curve.ys.push_back(step.cost);
    }
    const auto elbow = detect_elbow(result.curve);
    result.best_value = elbow.x;
    result.weak_elbow = elbow.weak;
    result.details["threshold"] = {result.curve.ys[elbow.index]};
    return result;
}

void to_json(nlohmann::json& j, const TuningResult& result)
{
    j = nlohmann::json{{"method", result.method},
                       {"best_value", result.best_value},
                       {"curve", {{"x", result.curve.xs}, {"y", result.curve.ys}}},
                       {"details", result.details},
                       {"weak_elbow", result.weak_elbow},
                       {"fallback", result.fallback}};
}

}  // namespace loadclust
