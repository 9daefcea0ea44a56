#pragma once

#include "loadclust/types.hpp"

#include <variant>
#include <vector>

namespace loadclust {

/// One merge considered by the Ward agglomeration.
///
/// `left` and `right` name the merging groups by their smallest member
/// index. A step with accepted == false is the candidate that broke the
/// distance threshold and was not performed.
struct MergeStep {
    double cost = 0.0;
    int left = 0;
    int right = 0;
    int clusters_after = 0;
    bool accepted = true;
};

enum class StopReason { TargetCount, Threshold, Exhausted };

const char* to_string(StopReason reason);

struct WardResult {
    /// Groups of point indices, each sorted, ordered by smallest member.
    std::vector<std::vector<int>> groups;
    std::vector<MergeStep> trace;
    StopReason stop = StopReason::Exhausted;
};

using WardTarget = std::variant<ClusterCount, MergeThreshold>;

/// Ward agglomeration over the rows of `points`.
///
/// The cost of merging groups a and b with centroids m_a, m_b and sizes
/// s_a, s_b is (s_a * s_b / (s_a + s_b)) * ||m_a - m_b||^2. The cheapest
/// pair is merged at each step (ties go to the lexicographically smallest
/// pair of representatives) until the target count remains or the next cost
/// exceeds the threshold.
WardResult ward_agglomerate(const Matrix& points, const WardTarget& target);

}  // namespace loadclust
