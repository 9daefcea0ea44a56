#pragma once

#include "loadclust/clusterers.hpp"
#include "loadclust/dimreduce.hpp"
#include "loadclust/profiles.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace loadclust {

struct ValidationOptions {
    int partitions = 2;
    int trials = 100;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct ValidationReport {
    int p = 0;
    int trials = 0;
    int households = 0;
    long n_total_cases = 0;
    /// Integer totals summed over all trials.
    long total_matches = 0;
    long total_mismatches = 0;
    double avg_matches = 0.0;
    double avg_mismatches = 0.0;
    double pct_matches = 0.0;
    double pct_mismatches = 0.0;
    /// Partitions whose median profile was the zero vector (counted as mismatches).
    long zero_median_parts = 0;
    std::map<std::string, double> per_household;
    std::uint64_t seed = 0;
};

/// Partition-stability validation of one fitted framework.
///
/// Per trial and household, the complete days are shuffled, split into p
/// near-equal parts (the first days % p parts get one extra day), each part
/// reduced to a normalized median profile, pushed through `reducer`, and
/// assigned to the nearest row of `result.centers`. A part matches when that
/// index equals the household's hardened label. Households are visited in
/// sorted-id order, which must match the row order `result` was fitted on.
ValidationReport validate_framework(const std::vector<DayMatrix>& days, const FittedReducer& reducer,
                                    const ClusteringResult& result, const ValidationOptions& options);

ValidationReport validate_framework(const RawDataset& raw, const FittedReducer& reducer,
                                    const ClusteringResult& result, const ValidationOptions& options);

/// Contiguous part sizes for splitting `days` rows into `p` parts.
std::vector<int> partition_sizes(int days, int p);

void to_json(nlohmann::json& j, const ValidationReport& report);

}  // namespace loadclust
