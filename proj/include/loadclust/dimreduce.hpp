#pragma once

#include "loadclust/profiles.hpp"
#include "loadclust/types.hpp"
#include "loadclust/ward.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <variant>
#include <vector>

namespace loadclust {

enum class ReducerKind { Identity, PCA, FA };

const char* to_string(ReducerKind kind);
ReducerKind reducer_kind_from_string(std::string_view name);

struct PcaState {
    Vector mean;
    /// d_in x d_out, orthonormal columns.
    Matrix components;
    /// All d_in eigenvalues, descending.
    Vector eigenvalues;
    /// Cumulative explained variance ratio, cevr[i] covers the first i + 1 eigenvalues.
    Vector cevr;
};

struct FaState {
    std::vector<std::vector<int>> groups;
    std::vector<MergeStep> merge_trace;
    /// Threshold used to stop merging; negative when a target count was given.
    double threshold = -1.0;
    StopReason stop = StopReason::TargetCount;
};

/// Immutable fitted dimensionality reduction.
class FittedReducer {
public:
    static FittedReducer identity(int dims);
    static FittedReducer from_pca(PcaState state);
    static FittedReducer from_fa(int d_in, FaState state);

    ReducerKind kind() const { return kind_; }
    int d_in() const { return d_in_; }
    int d_out() const { return d_out_; }
    const std::optional<PcaState>& pca() const { return pca_; }
    const std::optional<FaState>& fa() const { return fa_; }

    /// Maps rows of `x` (m x d_in) to the reduced space (m x d_out).
    Matrix transform(const Matrix& x) const;

private:
    ReducerKind kind_ = ReducerKind::Identity;
    int d_in_ = 0;
    int d_out_ = 0;
    std::optional<PcaState> pca_;
    std::optional<FaState> fa_;
};

using PcaTarget = std::variant<CevrThreshold, OutputDims>;
using FaTarget = std::variant<MergeThreshold, OutputDims>;

/// Principal component analysis of mean-centered rows.
///
/// Eigenpairs of the sample covariance come from the Jacobi solver, sorted
/// by descending eigenvalue, each eigenvector signed so its largest-magnitude
/// entry is positive. A CEVR target keeps the smallest number of components
/// whose cumulative ratio reaches it.
FittedReducer pca_fit(const Matrix& x, const PcaTarget& target);
inline FittedReducer pca_fit(const ProfileMatrix& p, const PcaTarget& target) { return pca_fit(p.data, target); }

/// Feature agglomeration: Ward merging of columns, pooled by arithmetic mean.
FittedReducer fa_fit(const Matrix& x, const FaTarget& target);
inline FittedReducer fa_fit(const ProfileMatrix& p, const FaTarget& target) { return fa_fit(p.data, target); }

Matrix transform(const FittedReducer& reducer, const Matrix& x);

struct Curve {
    std::vector<double> xs;
    std::vector<double> ys;
};

struct Elbow {
    std::size_t index = 0;
    double x = 0.0;
    /// Scaled perpendicular distance from the chord at the chosen point.
    double distance = 0.0;
    /// Set when no point lies measurably off the chord.
    bool weak = false;
};

/// Knee of a curve: the point farthest from the chord between its endpoints
/// after min-max scaling both axes to [0, 1]. Ties go to the smaller x. When
/// every distance is below `weak_tol` the smallest-x interior point is
/// returned with weak = true.
Elbow detect_elbow(const Curve& curve, double weak_tol = 1e-9);

void to_json(nlohmann::json& j, const FittedReducer& reducer);
FittedReducer reducer_from_json(const nlohmann::json& j);

}  // namespace loadclust
