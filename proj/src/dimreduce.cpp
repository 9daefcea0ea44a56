#include "loadclust/dimreduce.hpp"

#include "loadclust/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace loadclust {

const char* to_string(ReducerKind kind)
{
    switch (kind) {
    case ReducerKind::Identity:
        return "identity";
    case ReducerKind::PCA:
        return "pca";
    case ReducerKind::FA:
        return "fa";
    }
    return "unknown";
}

ReducerKind reducer_kind_from_string(std::string_view name)
{
    if (name == "identity" || name == "none") {
        return ReducerKind::Identity;
    }
    if (name == "pca") {
        return ReducerKind::PCA;
    }
    if (name == "fa") {
        return ReducerKind::FA;
    }
    throw ConfigError("unknown reducer '" + std::string(name) + "'");
}

FittedReducer FittedReducer::identity(int dims)
{
    if (dims < 1) {
        throw ArgumentError("identity reducer needs at least one dimension");
    }
    FittedReducer r;
    r.kind_ = ReducerKind::Identity;
    r.d_in_ = dims;
    r.d_out_ = dims;
    return r;
}

FittedReducer FittedReducer::from_pca(PcaState state)
{
    FittedReducer r;
    r.kind_ = ReducerKind::PCA;
    r.d_in_ = static_cast<int>(state.components.rows());
    r.d_out_ = static_cast<int>(state.components.cols());
    if (r.d_out_ < 1 || r.d_out_ > r.d_in_ || state.mean.size() != r.d_in_) {
        throw ArgumentError("inconsistent PCA state");
    }
    r.pca_ = std::move(state);
    return r;
}

FittedReducer FittedReducer::from_fa(int d_in, FaState state)
{
    std::vector<char> seen(static_cast<std::size_t>(std::max(d_in, 0)), 0);
    for (const auto& g : state.groups) {
        if (g.empty()) {
            throw ArgumentError("empty feature group");
        }
        for (int f : g) {
            if (f < 0 || f >= d_in || seen[static_cast<std::size_t>(f)]) {
                throw ArgumentError("feature groups must partition the input columns");
            }
            seen[static_cast<std::size_t>(f)] = 1;
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw ArgumentError("feature groups must cover every input column");
    }
    FittedReducer r;
    r.kind_ = ReducerKind::FA;
    r.d_in_ = d_in;
    r.d_out_ = static_cast<int>(state.groups.size());
    std::sort(state.groups.begin(), state.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    r.fa_ = std::move(state);
    return r;
}

Matrix FittedReducer::transform(const Matrix& x) const
{
    if (x.cols() != d_in_) {
        throw ArgumentError("transform expects " + std::to_string(d_in_) + " columns, got " +
                            std::to_string(x.cols()));
    }
    switch (kind_) {
    case ReducerKind::Identity:
        return x;
    case ReducerKind::PCA:
        return (x.rowwise() - pca_->mean.transpose()) * pca_->components;
    case ReducerKind::FA: {
        Matrix out(x.rows(), d_out_);
        for (int g = 0; g < d_out_; ++g) {
            const auto& members = fa_->groups[static_cast<std::size_t>(g)];
            Vector sum = Vector::Zero(x.rows());
            for (int f : members) {
                sum += x.col(f);
            }
            out.col(g) = sum / static_cast<double>(members.size());
        }
        return out;
    }
    }
    return x;
}

Matrix transform(const FittedReducer& reducer, const Matrix& x)
{
    return reducer.transform(x);
}

FittedReducer pca_fit(const Matrix& x, const PcaTarget& target)
{
    if (x.rows() < 2) {
        throw PreconditionError("PCA needs at least 2 rows");
    }
    require_finite(x, "PCA input");
    const int d = static_cast<int>(x.cols());

    PcaState state;
    state.mean = x.colwise().mean().transpose();
    const auto eig = jacobi_eigen(sample_covariance(x, state.mean));

    // Jacobi returns ascending order; walk it backwards.
    state.eigenvalues.resize(d);
    Matrix vectors(d, d);
    for (int i = 0; i < d; ++i) {
        state.eigenvalues(i) = eig.values(d - 1 - i);
        vectors.col(i) = eig.vectors.col(d - 1 - i);
    }
    const double total = state.eigenvalues.sum();
    if (!(total > 0.0)) {
        throw DegenerateError("PCA input has zero total variance");
    }
    state.cevr.resize(d);
    double running = 0.0;
    for (int i = 0; i < d; ++i) {
        running += state.eigenvalues(i);
        state.cevr(i) = running / total;
    }

    int d_out = 0;
    if (const auto* dims = std::get_if<OutputDims>(&target)) {
        if (dims->value < 1 || dims->value > d) {
            throw ArgumentError("PCA d_out " + std::to_string(dims->value) + " outside [1, " + std::to_string(d) + "]");
        }
        d_out = dims->value;
    } else {
        const double threshold = std::get<CevrThreshold>(target).value;
        if (!(threshold > 0.0 && threshold <= 1.0)) {
            throw ArgumentError("CEVR threshold must lie in (0, 1]");
        }
        d_out = d;
        for (int i = 0; i < d; ++i) {
            if (state.cevr(i) >= threshold) {
                d_out = i + 1;
                break;
            }
        }
    }

    for (int c = 0; c < d; ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < d; ++r) {
            if (std::abs(vectors(r, c)) > best) {
                best = std::abs(vectors(r, c));
                arg = r;
            }
        }
        if (vectors(arg, c) < 0.0) {
            vectors.col(c) = -vectors.col(c);
        }
    }
    state.components = vectors.leftCols(d_out);
    return FittedReducer::from_pca(std::move(state));
}

FittedReducer fa_fit(const Matrix& x, const FaTarget& target)
{
    if (x.rows() < 2) {
        throw PreconditionError("feature agglomeration needs at least 2 rows");
    }
    require_finite(x, "feature agglomeration input");
    const int d = static_cast<int>(x.cols());

    WardTarget ward_target = ClusterCount{1};
    FaState state;
    if (const auto* dims = std::get_if<OutputDims>(&target)) {
        if (dims->value < 1 || dims->value > d) {
            throw ArgumentError("FA d_out " + std::to_string(dims->value) + " outside [1, " + std::to_string(d) + "]");
        }
        ward_target = ClusterCount{dims->value};
    } else {
        const double threshold = std::get<MergeThreshold>(target).value;
        if (!(threshold >= 0.0)) {
            throw ArgumentError("FA threshold must be non-negative");
        }
        state.threshold = threshold;
        ward_target = MergeThreshold{threshold};
    }

    auto ward = ward_agglomerate(x.transpose(), ward_target);
    state.groups = std::move(ward.groups);
    state.merge_trace = std::move(ward.trace);
    state.stop = ward.stop;
    return FittedReducer::from_fa(d, std::move(state));
}

Elbow detect_elbow(const Curve& curve, double weak_tol)
{
    const std::size_t n = curve.xs.size();
    if (n != curve.ys.size()) {
        throw ArgumentError("curve xs and ys differ in length");
    }
    if (n < 3) {
        throw ArgumentError("elbow detection needs at least 3 points");
    }
    const bool increasing = curve.xs[1] > curve.xs[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(curve.xs[i]) || !std::isfinite(curve.ys[i])) {
            throw ValueError("curve contains non-finite values");
        }
        if (i > 0 && ((curve.xs[i] > curve.xs[i - 1]) != increasing || curve.xs[i] == curve.xs[i - 1])) {
            throw ArgumentError("curve xs must be strictly monotone");
        }
    }

    // Visit points in increasing-x order so strict improvement keeps the smaller x on ties.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = increasing ? i : n - 1 - i;
    }
    const double x0 = curve.xs[order.front()];
    const double x1 = curve.xs[order.back()];
    const auto [ymin_it, ymax_it] = std::minmax_element(curve.ys.begin(), curve.ys.end());
    const double y_span = *ymax_it - *ymin_it;

    auto sx = [&](std::size_t i) { return (curve.xs[i] - x0) / (x1 - x0); };
    auto sy = [&](std::size_t i) { return y_span > 0.0 ? (curve.ys[i] - *ymin_it) / y_span : 0.0; };

    const double ya = sy(order.front());
    const double yb = sy(order.back());
    const double dy = yb - ya;
    const double chord = std::sqrt(1.0 + dy * dy);

    Elbow best;
    best.distance = -1.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const std::size_t i = order[k];
        const double dist = std::abs(dy * sx(i) - (sy(i) - ya)) / chord;
        if (dist > best.distance) {
            best.distance = dist;
            best.index = i;
        }
    }
    if (best.distance < weak_tol) {
        best.index = order[1];
        best.weak = true;
    }
    best.x = curve.xs[best.index];
    return best;
}

namespace {

nlohmann::json matrix_row_major(const Matrix& m)
{
    auto out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out.push_back(m(r, c));
        }
    }
    return out;
}

nlohmann::json vector_json(const Vector& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const FittedReducer& reducer)
{
    j = nlohmann::json::object();
    j["kind"] = to_string(reducer.kind());
    j["d_in"] = reducer.d_in();
    j["d_out"] = reducer.d_out();
    if (const auto& pca = reducer.pca()) {
        j["mean"] = vector_json(pca->mean);
        j["W"] = matrix_row_major(pca->components);
        j["eigenvalues"] = vector_json(pca->eigenvalues);
        j["cevr"] = vector_json(pca->cevr);
    }
    if (const auto& fa = reducer.fa()) {
        j["groups"] = fa->groups;
        j["threshold"] = fa->threshold >= 0.0 ? nlohmann::json(fa->threshold) : nlohmann::json(nullptr);
        j["stop"] = to_string(fa->stop);
        auto trace = nlohmann::json::array();
        for (const auto& step : fa->merge_trace) {
            trace.push_back({{"cost", step.cost},
                             {"left", step.left},
                             {"right", step.right},
                             {"clusters_after", step.clusters_after},
                             {"accepted", step.accepted}});
        }
        j["merge_trace"] = std::move(trace);
    }
}

FittedReducer reducer_from_json(const nlohmann::json& j)
{
    const auto kind = reducer_kind_from_string(j.at("kind").get<std::string>());
    const int d_in = j.at("d_in").get<int>();
    const int d_out = j.at("d_out").get<int>();
    switch (kind) {
    case ReducerKind::Identity:
        return FittedReducer::identity(d_in);
    case ReducerKind::PCA: {
        PcaState state;
        state.mean = vector_from_json(j.at("mean"));
        state.eigenvalues = vector_from_json(j.at("eigenvalues"));
        state.cevr = vector_from_json(j.at("cevr"));
        const auto w = j.at("W").get<std::vector<double>>();
        if (w.size() != static_cast<std::size_t>(d_in) * static_cast<std::size_t>(d_out)) {
            throw FormatError("PCA W has wrong size");
        }
        state.components.resize(d_in, d_out);
        for (int r = 0; r < d_in; ++r) {
            for (int c = 0; c < d_out; ++c) {
                state.components(r, c) = w[static_cast<std::size_t>(r * d_out + c)];
            }
        }
        return FittedReducer::from_pca(std::move(state));
    }
    case ReducerKind::FA: {
        FaState state;
        state.groups = j.at("groups").get<std::vector<std::vector<int>>>();
        if (j.contains("threshold") && !j["threshold"].is_null()) {
            state.threshold = j["threshold"].get<double>();
        }
        return FittedReducer::from_fa(d_in, std::move(state));
    }
    }
    throw FormatError("unknown reducer kind");
}

}  // namespace loadclust
