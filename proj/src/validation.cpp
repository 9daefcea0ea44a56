#include "loadclust/validation.hpp"

#include "loadclust/parallel.hpp"
#include "loadclust/rng.hpp"

#include <algorithm>
#include <numeric>

namespace loadclust {

std::vector<int> partition_sizes(int days, int p)
{
    if (p < 1) {
        throw ArgumentError("partition count must be positive");
    }
    std::vector<int> sizes(static_cast<std::size_t>(p), days / p);
    for (int i = 0; i < days % p; ++i) {
        ++sizes[static_cast<std::size_t>(i)];
    }
    return sizes;
}

namespace {

struct TrialCounts {
    long matches = 0;
    long zero_median = 0;
    std::vector<int> per_household;
};

}  // namespace

ValidationReport validate_framework(const std::vector<DayMatrix>& days, const FittedReducer& reducer,
                                    const ClusteringResult& result, const ValidationOptions& options)
{
    const int p = options.partitions;
    if (p < 2) {
        throw ArgumentError("validation needs p >= 2 partitions");
    }
    if (options.trials < 1) {
        throw ArgumentError("validation needs at least one trial");
    }
    if (result.centers.rows() < 2) {
        throw ArgumentError("validation needs at least 2 cluster centers");
    }
    if (result.labels.size() != days.size()) {
        throw ArgumentError("clustering result covers " + std::to_string(result.labels.size()) +
                            " households but " + std::to_string(days.size()) + " were given");
    }

    std::vector<std::size_t> order(days.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return days[a].household_id < days[b].household_id; });
    for (const auto& d : days) {
        if (d.days() < p) {
            throw PreconditionError("household " + d.household_id + " has " + std::to_string(d.days()) +
                                    " complete days, fewer than p = " + std::to_string(p));
        }
    }

    // `order` only fixes the shuffle sequence; labels stay aligned with `days`.
    const auto labels = hardened_labels(result);
    const std::size_t n = days.size();
    std::vector<TrialCounts> trials(static_cast<std::size_t>(options.trials));

    parallel_for(trials.size(), options.threads, [&](std::size_t t) {
        Rng rng = Rng::substream(options.seed, {static_cast<std::uint64_t>(t)});
        TrialCounts counts;
        counts.per_household.assign(n, 0);
        for (std::size_t h : order) {
            const DayMatrix& dm = days[h];
            std::vector<Eigen::Index> rows(static_cast<std::size_t>(dm.days()));
            std::iota(rows.begin(), rows.end(), Eigen::Index{0});
            rng.shuffle(std::span<Eigen::Index>(rows));
            std::size_t offset = 0;
            for (int size : partition_sizes(dm.days(), p)) {
                Matrix part(size, dm.rows.cols());
                for (int r = 0; r < size; ++r) {
                    part.row(r) = dm.rows.row(rows[offset + static_cast<std::size_t>(r)]);
                }
                offset += static_cast<std::size_t>(size);
                const Vector median = median_profile(part);
                if (!(median.norm() > 0.0)) {
                    ++counts.zero_median;
                    continue;
                }
                const Matrix profile = l2_normalized(median, dm.household_id).transpose();
                const Vector reduced = reducer.transform(profile).row(0).transpose();
                if (nearest_center(reduced, result.centers) == labels[h]) {
                    ++counts.matches;
                    ++counts.per_household[h];
                }
            }
        }
        trials[t] = std::move(counts);
    });

    ValidationReport report;
    report.p = p;
    report.trials = options.trials;
    report.households = static_cast<int>(n);
    report.seed = options.seed;
    report.n_total_cases = static_cast<long>(p) * static_cast<long>(n);
    std::vector<long> household_matches(n, 0);
    for (const auto& t : trials) {
        report.total_matches += t.matches;
        report.zero_median_parts += t.zero_median;
        for (std::size_t h = 0; h < n; ++h) {
            household_matches[h] += t.per_household[h];
        }
    }
    report.total_mismatches = report.n_total_cases * options.trials - report.total_matches;
    report.avg_matches = static_cast<double>(report.total_matches) / options.trials;
    report.avg_mismatches = static_cast<double>(report.n_total_cases) - report.avg_matches;
    report.pct_matches = n == 0 ? 0.0 : 100.0 * report.avg_matches / static_cast<double>(report.n_total_cases);
    report.pct_mismatches = 100.0 - report.pct_matches;
    for (std::size_t h = 0; h < n; ++h) {
        report.per_household[days[h].household_id] =
            static_cast<double>(household_matches[h]) / (static_cast<double>(p) * options.trials);
    }
    return report;
}

ValidationReport validate_framework(const RawDataset& raw, const FittedReducer& reducer,
                                    const ClusteringResult& result, const ValidationOptions& options)
{
    return validate_framework(build_day_matrices(raw), reducer, result, options);
}

void to_json(nlohmann::json& j, const ValidationReport& report)
{
    j = nlohmann::json{{"p", report.p},
                       {"trials", report.trials},
                       {"households", report.households},
                       {"n_total_cases", report.n_total_cases},
                       {"total_matches", report.total_matches},
                       {"total_mismatches", report.total_mismatches},
                       {"avg_matches", report.avg_matches},
                       {"avg_mismatches", report.avg_mismatches},
                       {"pct_matches", report.pct_matches},
                       {"pct_mismatches", report.pct_mismatches},
                       {"zero_median_parts", report.zero_median_parts},
                       {"per_household", report.per_household},
                       {"seed", report.seed}};
}

}  // namespace loadclust
