#pragma once

#include "loadclust/types.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace loadclust {

struct CivilDate {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const CivilDate&) const = default;

    /// Parses strict `YYYY-MM-DD`; throws ValueError otherwise.
    static CivilDate parse(std::string_view text);
    std::string to_string() const;
    CivilDate next() const;
};

struct Reading {
    std::string household_id;
    CivilDate date;
    int hour = 0;
    double kwh = 0.0;
};

/// Smart-meter record: one reading per (household, date, hour slot).
struct RawDataset {
    std::vector<Reading> readings;
    /// Hours per reading slot; 24 must be divisible by it.
    int resolution = 1;
    /// Archetype index per household; only populated for synthetic data.
    std::map<std::string, int> ground_truth;

    int slots_per_day() const { return 24 / resolution; }
    /// Distinct household ids, sorted.
    std::vector<std::string> household_ids() const;
};

/// Complete days of one household, one row per day in date order.
struct DayMatrix {
    std::string household_id;
    Matrix rows;
    std::vector<CivilDate> day_ids;

    int days() const { return static_cast<int>(rows.rows()); }
};

/// Row-normalized median daily profiles, rows ordered by household id.
struct ProfileMatrix {
    Matrix data;
    std::vector<std::string> household_ids;

    int households() const { return static_cast<int>(data.rows()); }
    int dims() const { return static_cast<int>(data.cols()); }
};

struct IngestResult {
    RawDataset dataset;
    std::size_t skipped_rows = 0;
};

inline constexpr std::string_view kCsvHeader = "household_id,date,hour,kwh";

IngestResult ingest_csv(const std::filesystem::path& path, int resolution);
IngestResult parse_csv(std::istream& in, int resolution);
void write_csv(const RawDataset& raw, std::ostream& out);
void write_csv(const RawDataset& raw, const std::filesystem::path& path);

/// Groups readings into per-household day matrices, sorted by household id.
/// Days with a missing slot are dropped; a household left with no complete
/// day raises PreconditionError.
std::vector<DayMatrix> build_day_matrices(const RawDataset& raw);

/// Per-column median over rows; even counts average the two central values.
Vector median_profile(const Matrix& days);

/// Returns v / ||v||_2; throws DegenerateError for a zero vector.
Vector l2_normalized(const Vector& v, std::string_view owner);

ProfileMatrix preprocess(const RawDataset& raw);
ProfileMatrix preprocess(const std::vector<DayMatrix>& days);

struct SyntheticSpec {
    int households = 27;
    int days = 90;
    int archetypes = 4;
    double noise_sigma = 0.3;
    std::uint64_t seed = 7;
};

/// Base daily shape (24 hourly kWh values) of archetype `index`.
/// Indices >= 4 reuse the four base shapes rotated by 3 hours per cycle.
std::vector<double> archetype_shape(int index);
std::string archetype_name(int index);

RawDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace loadclust
