#pragma once

#include "loadclust/clusterers.hpp"
#include "loadclust/cvi.hpp"
#include "loadclust/dimreduce.hpp"
#include "loadclust/profiles.hpp"
#include "loadclust/tuning.hpp"
#include "loadclust/validation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loadclust::cli {

using nlohmann::json;

/// Name of the environment variable that replaces the default seed.
inline constexpr const char* kSeedEnv = "LOADCLUST_SEED";

// ---- configuration ---------------------------------------------------------

/// Every recognised key with its default value. Override keys must exist here.
json default_config();

/// Sets the value at a dotted path. The text is read as JSON when it parses,
/// as a comma-separated list when the default is a list, and as a plain
/// string otherwise. Unknown paths throw ConfigError.
void apply_override(json& config, std::string_view dotted, std::string_view text);

struct ConfigSources {
    std::optional<std::filesystem::path> file;
    /// In-memory document merged right after the file, same key rules.
    std::optional<json> document;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<std::uint64_t> seed_flag;
    /// Value of the seed environment variable, if set.
    std::optional<std::string> seed_env;
};

/// defaults < seed env var < config file < dotted overrides < --seed.
json resolve_config(const ConfigSources& sources);

// ---- frameworks ------------------------------------------------------------

struct FrameworkSpec {
    ReducerKind reducer = ReducerKind::PCA;
    Method method = Method::KMC;
    /// Reduced dimension; unset means tuned by elbow (or the thresholds below).
    std::optional<int> dims;
    std::optional<double> pca_cevr;
    std::optional<double> fa_threshold;
    std::optional<int> k;
    std::optional<double> m;
    int knn = 0;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-6;
    int k_max = kMaxClusters;
    int gap_refs = 20;
    std::uint64_t seed = 0;

    /// "pca-kmc"
    std::string token() const;
    /// "PCA & KMC"
    std::string display_name() const;
};

/// Parses "pca-kmc" style tokens; "none" selects the identity reducer.
FrameworkSpec parse_framework_token(std::string_view token);

/// The framework list of a resolved config, with per-framework seeds
/// derived from the config seed unless given explicitly.
std::vector<FrameworkSpec> framework_specs(const json& config);

/// The eight reduction/clustering pairs in report order.
std::vector<std::string> default_framework_tokens();

struct FittedFramework {
    /// All hyperparameters resolved (no auto values left).
    FrameworkSpec spec;
    FittedReducer reducer;
    Matrix reduced;
    ClusteringResult result;
    std::vector<TuningResult> tuning;
};

/// Fits with every auto parameter resolved. Clusters are renumbered by first
/// appearance so equal partitions get equal labels.
FittedFramework fit_framework(const ProfileMatrix& profiles, const FrameworkSpec& spec);

/// Seed of the validation trials for one framework and partition count.
std::uint64_t validation_seed(const FrameworkSpec& spec, int p);

/// Renumbers clusters in order of first appearance among the hardened
/// labels; clusters that never win a point keep their relative order last.
ClusteringResult relabel_by_first_appearance(ClusteringResult result);

json to_json(const FrameworkSpec& spec);
FrameworkSpec framework_spec_from_json(const json& j);
json to_json(const FittedFramework& fitted);
/// Inverse of to_json(FittedFramework); `reduced` is recomputed from profiles.
FittedFramework fitted_framework_from_json(const json& j, const ProfileMatrix& profiles);

// ---- data ------------------------------------------------------------------

SyntheticSpec synthetic_spec(const json& config);
/// Synthetic dataset or CSV file, per data.source.
RawDataset load_data(const json& config);

// ---- reports ---------------------------------------------------------------

struct CompareRow {
    std::string name;
    int k = 0;
    CviScores reduced;
    CviScores original;
    std::vector<ValidationReport> validation;
};

struct TimingTable {
    std::vector<std::string> reducers;
    std::vector<std::string> methods;
    /// reducers x methods, mean milliseconds per clustering call.
    Matrix ms;
    int trials = 0;
    int k = 0;
    int n = 0;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    std::vector<FittedFramework> fits;
    std::optional<TimingTable> timing;
    json config_echo;
};

CompareReport run_compare(const json& config);

/// Clustering-only wall time for {none, pca, fa} x {kmc, sc, ac, fcm}.
TimingTable time_frameworks(const ProfileMatrix& profiles, int k, int trials, std::uint64_t seed);
TimingTable time_frameworks(const json& config);

std::string cvi_csv(const std::vector<CompareRow>& rows, FeatureSpace space);
std::string validation_csv(const std::vector<CompareRow>& rows, int p);
std::string timing_csv(const TimingTable& table);
std::string curve_csv(const Curve& curve);
std::string curve_svg(const Curve& curve, std::string_view title);
std::string profiles_csv(const ProfileMatrix& profiles);

json to_json(const CompareReport& report);
json to_json(const TimingTable& table);

/// Writes every CSV, the curves/ directory and report.json under `out`.
void write_compare(const CompareReport& report, const std::filesystem::path& out, bool svg);

}  // namespace loadclust::cli
