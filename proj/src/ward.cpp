#include "loadclust/ward.hpp"

#include <algorithm>
#include <limits>

namespace loadclust {

const char* to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::TargetCount:
        return "target_count";
    case StopReason::Threshold:
        return "threshold";
    case StopReason::Exhausted:
        return "exhausted";
    }
    return "unknown";
}

WardResult ward_agglomerate(const Matrix& points, const WardTarget& target)
{
    const int n = static_cast<int>(points.rows());
    if (n < 1) {
        throw ArgumentError("ward agglomeration needs at least one point");
    }
    require_finite(points, "ward input");

    int target_count = 1;
    double threshold = std::numeric_limits<double>::infinity();
    bool by_threshold = false;
    if (const auto* count = std::get_if<ClusterCount>(&target)) {
        if (count->value < 1 || count->value > n) {
            throw ArgumentError("cluster count " + std::to_string(count->value) + " outside [1, " +
                                std::to_string(n) + "]");
        }
        target_count = count->value;
    } else {
        threshold = std::get<MergeThreshold>(target).value;
        if (!(threshold >= 0.0)) {
            throw ArgumentError("merge threshold must be non-negative");
        }
        by_threshold = true;
    }

    Matrix centroids = points;
    std::vector<int> sizes(static_cast<std::size_t>(n), 1);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(n));
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(i)] = {i};
    }

    auto pair_cost = [&](int a, int b) {
        const double sa = sizes[static_cast<std::size_t>(a)];
        const double sb = sizes[static_cast<std::size_t>(b)];
        return (sa * sb / (sa + sb)) * (centroids.row(a) - centroids.row(b)).squaredNorm();
    };

    // Upper triangle holds the cost of merging slot i with slot j (i < j).
    // A merged group keeps the lower slot, so a slot index is always the
    // smallest member of its group.
    Matrix cost = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            cost(i, j) = pair_cost(i, j);
        }
    }

    WardResult result;
    int remaining = n;
    for (;;) {
        if (!by_threshold && remaining == target_count) {
            result.stop = StopReason::TargetCount;
            break;
        }
        if (remaining == 1) {
            result.stop = StopReason::Exhausted;
            break;
        }
        int best_i = -1;
        int best_j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (!active[static_cast<std::size_t>(i)]) {
                continue;
            }
            for (int j = i + 1; j < n; ++j) {
                if (active[static_cast<std::size_t>(j)] && cost(i, j) < best) {
                    best = cost(i, j);
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (by_threshold && best > threshold) {
            result.trace.push_back(MergeStep{best, best_i, best_j, remaining, false});
            result.stop = StopReason::Threshold;
            break;
        }

        const double si = sizes[static_cast<std::size_t>(best_i)];
        const double sj = sizes[static_cast<std::size_t>(best_j)];
        centroids.row(best_i) = (si * centroids.row(best_i) + sj * centroids.row(best_j)) / (si + sj);
        sizes[static_cast<std::size_t>(best_i)] += sizes[static_cast<std::size_t>(best_j)];
        auto& into = members[static_cast<std::size_t>(best_i)];
        auto& from = members[static_cast<std::size_t>(best_j)];
        into.insert(into.end(), from.begin(), from.end());
        std::sort(into.begin(), into.end());
        from.clear();
        active[static_cast<std::size_t>(best_j)] = 0;
        --remaining;
        result.trace.push_back(MergeStep{best, best_i, best_j, remaining, true});

        for (int k = 0; k < n; ++k) {
            if (k == best_i || !active[static_cast<std::size_t>(k)]) {
                continue;
            }
            const double c = pair_cost(best_i, k);
            if (k < best_i) {
                cost(k, best_i) = c;
            } else {
                cost(best_i, k) = c;
            }
        }
    }

    for (int i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) {
            result.groups.push_back(std::move(members[static_cast<std::size_t>(i)]));
        }
    }
    return result;
}

}  // namespace loadclust
