#include "loadclust/cli.hpp"

#include "loadclust/format.hpp"
#include "loadclust/parallel.hpp"
#include "loadclust/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace loadclust::cli {

namespace {

// Seed tags for the independent streams of one framework.
constexpr std::uint64_t kGapStream = 1;
constexpr std::uint64_t kFpcStream = 2;
constexpr std::uint64_t kFitStream = 3;
constexpr std::uint64_t kValidationStream = 4;

json::json_pointer pointer_of(std::string_view dotted)
{
    std::string ptr;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const auto dot = dotted.find('.', start);
        const auto end = dot == std::string_view::npos ? dotted.size() : dot;
        if (end == start) {
            throw ConfigError("malformed config key '" + std::string(dotted) + "'");
        }
        ptr += '/';
        ptr += dotted.substr(start, end - start);
        if (dot == std::string_view::npos) {
            break;
        }
        start = dot + 1;
    }
    return json::json_pointer(ptr);
}

const json& at(const json& config, std::string_view dotted)
{
    const auto ptr = pointer_of(dotted);
    if (!config.contains(ptr)) {
        throw ConfigError("missing config key '" + std::string(dotted) + "'");
    }
    return config.at(ptr);
}

template <typename T>
T get(const json& config, std::string_view dotted)
{
    try {
        return at(config, dotted).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + std::string(dotted) + "': " + e.what());
    }
}

bool is_auto(const json& v)
{
    return v.is_null() || (v.is_string() && v.get<std::string>() == "auto");
}

template <typename T>
std::optional<T> optional_number(const json& v, std::string_view name)
{
    if (is_auto(v)) {
        return std::nullopt;
    }
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            throw ConfigError("'" + std::string(name) + "' must be an integer or \"auto\"");
        }
    } else if (!v.is_number()) {
        throw ConfigError("'" + std::string(name) + "' must be a number or \"auto\"");
    }
    return v.get<T>();
}

std::uint64_t parse_seed(std::string_view text)
{
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError("seed '" + std::string(text) + "' is not a non-negative integer");
    }
    return value;
}

void merge_known(json& base, const json& patch, const std::string& prefix)
{
    if (!patch.is_object()) {
        throw ConfigError("config document must be an object");
    }
    for (const auto& [key, value] : patch.items()) {
        const std::string dotted = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) {
            throw ConfigError("unknown config key '" + dotted + "'");
        }
        auto& slot = base[key];
        if (slot.is_object() && value.is_object()) {
            merge_known(slot, value, dotted);
        } else {
            slot = value;
        }
    }
}

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string join_row(const std::vector<std::string>& cells)
{
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            line += ',';
        }
        line += cells[i];
    }
    line += '\n';
    return line;
}

std::string xml_escape(std::string_view text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

// ---- configuration ---------------------------------------------------------

json default_config()
{
    return json{
        {"seed", 42},
        {"threads", 1},
        {"output", "out"},
        {"data",
         {{"source", "synthetic"},
          {"path", ""},
          {"resolution", 1},
          {"synthetic", {{"households", 27}, {"days", 90}, {"archetypes", 4}, {"noise_sigma", 0.3}, {"seed", 7}}}}},
        {"frameworks", default_framework_tokens()},
        {"reducer", {{"pca", {{"dims", "auto"}, {"cevr", nullptr}}}, {"fa", {{"dims", "auto"}, {"threshold", nullptr}}}}},
        {"clusterer",
         {{"k", "auto"},
          {"m", "auto"},
          {"knn", 0},
          {"restarts", 10},
          {"max_iter", 300},
          {"tol", 1e-6},
          {"k_max", kMaxClusters},
          {"gap_refs", 20}}},
        {"validation", {{"p", {2, 3}}, {"trials", 100}}},
        {"timing", {{"enabled", false}, {"trials", 100}, {"k", 5}}},
        {"plots", {{"svg", false}}},
    };
}

void apply_override(json& config, std::string_view dotted, std::string_view text)
{
    const auto ptr = pointer_of(dotted);
    if (!config.contains(ptr)) {
        throw ConfigError("unknown config key '" + std::string(dotted) + "'");
    }
    json& slot = config.at(ptr);
    if (slot.is_object()) {
        throw ConfigError("config key '" + std::string(dotted) + "' is a section; set one of its fields");
    }
    json value = json::parse(text, nullptr, false);
    if (slot.is_array()) {
        if (value.is_discarded() || !value.is_array()) {
            json list = json::array();
            std::string_view rest = text;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                const auto item = rest.substr(0, comma);
                json parsed = json::parse(item, nullptr, false);
                list.push_back(parsed.is_discarded() ? json(std::string(item)) : parsed);
                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            }
            value = std::move(list);
        }
    } else if (value.is_discarded()) {
        value = std::string(text);
    }
    slot = std::move(value);
}

json resolve_config(const ConfigSources& sources)
{
    json config = default_config();
    if (sources.seed_env) {
        config["seed"] = parse_seed(*sources.seed_env);
    }
    if (sources.file) {
        std::ifstream in(*sources.file);
        if (!in) {
            throw ConfigError("cannot open config file " + sources.file->string());
        }
        json doc = json::parse(in, nullptr, false);
        if (doc.is_discarded()) {
            throw ConfigError("config file " + sources.file->string() + " is not valid JSON");
        }
        merge_known(config, doc, "");
    }
    if (sources.document) {
        merge_known(config, *sources.document, "");
    }
    for (const auto& [key, value] : sources.overrides) {
        apply_override(config, key, value);
    }
    if (sources.seed_flag) {
        config["seed"] = *sources.seed_flag;
    }
    if (!config["seed"].is_number_unsigned() && !config["seed"].is_number_integer()) {
        throw ConfigError("'seed' must be a non-negative integer");
    }
    if (config["seed"].is_number_integer() && config["seed"].get<long long>() < 0) {
        throw ConfigError("'seed' must be a non-negative integer");
    }
    return config;
}

// ---- frameworks ------------------------------------------------------------

std::string FrameworkSpec::token() const
{
    return std::string(reducer == ReducerKind::Identity ? "none" : to_string(reducer)) + "-" +
           std::string(to_string(method));
}

std::string FrameworkSpec::display_name() const
{
    const std::string r = reducer == ReducerKind::Identity ? "None" : upper(to_string(reducer));
    return r + " & " + upper(to_string(method));
}

FrameworkSpec parse_framework_token(std::string_view token)
{
    const auto dash = token.find('-');
    if (dash == std::string_view::npos) {
        throw ConfigError("unknown framework '" + std::string(token) + "' (expected e.g. pca-kmc)");
    }
    FrameworkSpec spec;
    spec.reducer = reducer_kind_from_string(token.substr(0, dash));
    spec.method = method_from_string(token.substr(dash + 1));
    return spec;
}

std::vector<std::string> default_framework_tokens()
{
    return {"pca-kmc", "fa-kmc", "pca-sc", "fa-sc", "pca-ac", "fa-ac", "pca-fcm", "fa-fcm"};
}

namespace {

void check_spec(const FrameworkSpec& spec)
{
    const std::string name = spec.token();
    if (spec.k && (*spec.k < 2 || *spec.k > kMaxClusters)) {
        throw ConfigError(name + ": k must lie in [2, " + std::to_string(kMaxClusters) + "]");
    }
    if (spec.m && !(*spec.m > 1.0)) {
        throw ConfigError(name + ": m must exceed 1");
    }
    if (spec.dims && *spec.dims < 1) {
        throw ConfigError(name + ": dims must be positive");
    }
    if (spec.knn < 0 || spec.restarts < 1 || spec.max_iter < 1 || !(spec.tol > 0.0)) {
        throw ConfigError(name + ": knn, restarts, max_iter and tol must be positive");
    }
    if (spec.k_max < 2 || spec.k_max > kMaxClusters || spec.gap_refs < 1) {
        throw ConfigError(name + ": k_max must lie in [2, 10] and gap_refs be positive");
    }
}

void apply_spec_fields(FrameworkSpec& spec, const json& j)
{
    try {
        if (j.contains("dims")) spec.dims = optional_number<int>(j["dims"], "dims");
        if (j.contains("cevr")) spec.pca_cevr = optional_number<double>(j["cevr"], "cevr");
        if (j.contains("threshold")) spec.fa_threshold = optional_number<double>(j["threshold"], "threshold");
        if (j.contains("k")) spec.k = optional_number<int>(j["k"], "k");
        if (j.contains("m")) spec.m = optional_number<double>(j["m"], "m");
        if (j.contains("knn")) spec.knn = j["knn"].get<int>();
        if (j.contains("restarts")) spec.restarts = j["restarts"].get<int>();
        if (j.contains("max_iter")) spec.max_iter = j["max_iter"].get<int>();
        if (j.contains("tol")) spec.tol = j["tol"].get<double>();
        if (j.contains("k_max")) spec.k_max = j["k_max"].get<int>();
        if (j.contains("gap_refs")) spec.gap_refs = j["gap_refs"].get<int>();
        if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ConfigError("framework entry: " + std::string(e.what()));
    }
}

}  // namespace

std::vector<FrameworkSpec> framework_specs(const json& config)
{
    const auto seed = get<std::uint64_t>(config, "seed");
    const json& list = at(config, "frameworks");
    if (!list.is_array() || list.empty()) {
        throw ConfigError("'frameworks' must be a non-empty list");
    }
    const json& clusterer = at(config, "clusterer");
    std::vector<FrameworkSpec> specs;
    for (const auto& entry : list) {
        std::string token;
        if (entry.is_string()) {
            token = entry.get<std::string>();
        } else if (entry.is_object() && entry.contains("framework") && entry["framework"].is_string()) {
            token = entry["framework"].get<std::string>();
        } else {
            throw ConfigError("framework entries must be tokens or objects with a 'framework' field");
        }
        FrameworkSpec spec = parse_framework_token(token);
        apply_spec_fields(spec, clusterer);
        if (spec.reducer == ReducerKind::PCA) {
            spec.dims = optional_number<int>(at(config, "reducer.pca.dims"), "reducer.pca.dims");
            spec.pca_cevr = optional_number<double>(at(config, "reducer.pca.cevr"), "reducer.pca.cevr");
        } else if (spec.reducer == ReducerKind::FA) {
            spec.dims = optional_number<int>(at(config, "reducer.fa.dims"), "reducer.fa.dims");
            spec.fa_threshold = optional_number<double>(at(config, "reducer.fa.threshold"), "reducer.fa.threshold");
        }
        spec.seed = Rng::derive(seed, {stable_hash(spec.display_name())});
        if (entry.is_object()) {
            apply_spec_fields(spec, entry);
        }
        check_spec(spec);
        specs.push_back(spec);
    }
    return specs;
}

std::uint64_t validation_seed(const FrameworkSpec& spec, int p)
{
    return Rng::derive(spec.seed, {kValidationStream, static_cast<std::uint64_t>(p)});
}

ClusteringResult relabel_by_first_appearance(ClusteringResult result)
{
    const auto hard = hardened_labels(result);
    const int k = result.k;
    std::vector<int> new_of_old(static_cast<std::size_t>(k), -1);
    int next = 0;
    for (int l : hard) {
        if (new_of_old[static_cast<std::size_t>(l)] < 0) {
            new_of_old[static_cast<std::size_t>(l)] = next++;
        }
    }
    for (auto& v : new_of_old) {
        if (v < 0) {
            v = next++;
        }
    }
    std::vector<int> labels(hard.size());
    for (std::size_t i = 0; i < hard.size(); ++i) {
        labels[i] = new_of_old[static_cast<std::size_t>(hard[i])];
    }
    Matrix centers(result.centers.rows(), result.centers.cols());
    for (int c = 0; c < k; ++c) {
        centers.row(new_of_old[static_cast<std::size_t>(c)]) = result.centers.row(c);
    }
    if (result.memberships) {
        Matrix u(result.memberships->rows(), result.memberships->cols());
        for (int c = 0; c < k; ++c) {
            u.col(new_of_old[static_cast<std::size_t>(c)]) = result.memberships->col(c);
        }
        result.memberships = std::move(u);
    }
    result.labels = std::move(labels);
    result.centers = std::move(centers);
    return result;
}

FittedFramework fit_framework(const ProfileMatrix& profiles, const FrameworkSpec& requested)
{
    check_spec(requested);
    const Matrix& x = profiles.data;
    const int n = static_cast<int>(x.rows());
    if (n < 3) {
        throw PreconditionError("framework fitting needs at least 3 households, got " + std::to_string(n));
    }
    FittedFramework out;
    FrameworkSpec spec = requested;

    switch (spec.reducer) {
    case ReducerKind::Identity:
        out.reducer = FittedReducer::identity(static_cast<int>(x.cols()));
        break;
    case ReducerKind::PCA:
        if (spec.dims) {
            out.reducer = pca_fit(x, OutputDims{*spec.dims});
        } else if (spec.pca_cevr) {
            out.reducer = pca_fit(x, CevrThreshold{*spec.pca_cevr});
        } else {
            auto tuned = tune_pca_dims(x);
            out.reducer = pca_fit(x, OutputDims{static_cast<int>(tuned.best_value)});
            out.tuning.push_back(std::move(tuned));
        }
        break;
    case ReducerKind::FA:
        if (spec.dims) {
            out.reducer = fa_fit(x, OutputDims{*spec.dims});
        } else if (spec.fa_threshold) {
            out.reducer = fa_fit(x, MergeThreshold{*spec.fa_threshold});
        } else {
            auto tuned = tune_fa_dims(x);
            out.reducer = fa_fit(x, OutputDims{static_cast<int>(tuned.best_value)});
            out.tuning.push_back(std::move(tuned));
        }
        break;
    }
    spec.dims = out.reducer.d_out();
    spec.pca_cevr.reset();
    spec.fa_threshold.reset();
    out.reduced = out.reducer.transform(x);
    const Matrix& z = out.reduced;

    const int k_max = std::min(spec.k_max, n - 1);
    std::vector<std::string> warnings;
    auto gap_k = [&](const Labeler& labeler) {
        auto tuned = gap_statistic(z, labeler, GapOptions{k_max, spec.gap_refs, Rng::derive(spec.seed, {kGapStream}), 1});
        int k = static_cast<int>(tuned.best_value);
        if (k < 2) {
            warnings.push_back("gap statistic chose k = " + std::to_string(k) + "; raised to 2");
            k = 2;
        }
        out.tuning.push_back(std::move(tuned));
        return k;
    };

    if (spec.method == Method::SC && spec.knn == 0) {
        spec.knn = std::min(default_knn(n), n - 1);
    }
    if (spec.method == Method::FCM && !spec.m) {
        auto tuned = estimate_fuzzifier(z);
        spec.m = tuned.best_value;
        if (tuned.fallback) {
            warnings.push_back("fuzzifier rule found no crossing; using m = 2");
        }
        out.tuning.push_back(std::move(tuned));
    }
    if (!spec.k) {
        switch (spec.method) {
        case Method::KMC:
            spec.k = gap_k(kmeans_labeler(spec.restarts, spec.max_iter, spec.tol));
            break;
        case Method::SC:
            spec.k = gap_k(spectral_labeler(spec.knn));
            break;
        case Method::AC: {
            auto tuned = elbow_k_for_ac(z, std::min(spec.k_max, n));
            spec.k = static_cast<int>(tuned.best_value);
            out.tuning.push_back(std::move(tuned));
            break;
        }
        case Method::FCM: {
            auto tuned = fpc_sweep(z, FpcOptions{*spec.m, 2, k_max, spec.max_iter, spec.tol,
                                                 Rng::derive(spec.seed, {kFpcStream})});
            spec.k = static_cast<int>(tuned.best_value);
            out.tuning.push_back(std::move(tuned));
            break;
        }
        }
    }

    const std::uint64_t fit_seed = Rng::derive(spec.seed, {kFitStream});
    ClusteringResult result;
    switch (spec.method) {
    case Method::KMC:
        result = kmeans(z, KMeansOptions{*spec.k, spec.restarts, spec.max_iter, spec.tol, fit_seed});
        break;
    case Method::SC:
        result = spectral(z, SpectralOptions{*spec.k, spec.knn, spec.restarts, fit_seed});
        break;
    case Method::AC:
        result = agglomerative(z, ClusterCount{*spec.k});
        break;
    case Method::FCM:
        result = fcm(z, FcmOptions{*spec.k, *spec.m, spec.max_iter, spec.tol, fit_seed});
        break;
    }
    result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
    out.result = relabel_by_first_appearance(std::move(result));
    out.spec = spec;
    return out;
}

json to_json(const FrameworkSpec& spec)
{
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    return json{{"framework", spec.token()},
                {"dims", opt(spec.dims)},
                {"cevr", opt(spec.pca_cevr)},
                {"threshold", opt(spec.fa_threshold)},
                {"k", opt(spec.k)},
                {"m", opt(spec.m)},
                {"knn", spec.knn},
                {"restarts", spec.restarts},
                {"max_iter", spec.max_iter},
                {"tol", spec.tol},
                {"k_max", spec.k_max},
                {"gap_refs", spec.gap_refs},
                {"seed", spec.seed}};
}

FrameworkSpec framework_spec_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("framework")) {
        throw ConfigError("framework spec needs a 'framework' field");
    }
    FrameworkSpec spec = parse_framework_token(j["framework"].get<std::string>());
    apply_spec_fields(spec, j);
    check_spec(spec);
    return spec;
}

json to_json(const FittedFramework& fitted)
{
    json tuning = json::array();
    for (const auto& t : fitted.tuning) {
        tuning.push_back(t);
    }
    return json{{"name", fitted.spec.display_name()},
                {"spec", to_json(fitted.spec)},
                {"reducer", fitted.reducer},
                {"clustering", fitted.result},
                {"tuning", tuning}};
}

FittedFramework fitted_framework_from_json(const json& j, const ProfileMatrix& profiles)
{
    FittedFramework out;
    try {
        out.spec = framework_spec_from_json(j.at("spec"));
        out.reducer = reducer_from_json(j.at("reducer"));
        out.result = clustering_from_json(j.at("clustering"));
    } catch (const json::exception& e) {
        throw FormatError("malformed fit document: " + std::string(e.what()));
    }
    if (out.reducer.d_in() != profiles.data.cols()) {
        throw ArgumentError("fit expects " + std::to_string(out.reducer.d_in()) + " profile columns, data has " +
                            std::to_string(profiles.data.cols()));
    }
    if (out.result.labels.size() != static_cast<std::size_t>(profiles.data.rows())) {
        throw ArgumentError("fit covers " + std::to_string(out.result.labels.size()) + " households, data has " +
                            std::to_string(profiles.data.rows()));
    }
    out.reduced = out.reducer.transform(profiles.data);
    return out;
}

// ---- data ------------------------------------------------------------------

SyntheticSpec synthetic_spec(const json& config)
{
    SyntheticSpec s;
    s.households = get<int>(config, "data.synthetic.households");
    s.days = get<int>(config, "data.synthetic.days");
    s.archetypes = get<int>(config, "data.synthetic.archetypes");
    s.noise_sigma = get<double>(config, "data.synthetic.noise_sigma");
    s.seed = get<std::uint64_t>(config, "data.synthetic.seed");
    return s;
}

RawDataset load_data(const json& config)
{
    const auto source = get<std::string>(config, "data.source");
    if (source == "synthetic") {
        return generate_synthetic(synthetic_spec(config));
    }
    if (source == "csv") {
        const auto path = get<std::string>(config, "data.path");
        if (path.empty()) {
            throw ConfigError("data.source is csv but data.path is empty");
        }
        return ingest_csv(path, get<int>(config, "data.resolution")).dataset;
    }
    throw ConfigError("unknown data.source '" + source + "' (expected synthetic or csv)");
}

// ---- reports ---------------------------------------------------------------

namespace {

std::vector<int> validation_ps(const json& config)
{
    std::vector<int> ps;
    try {
        ps = at(config, "validation.p").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw ConfigError("validation.p: " + std::string(e.what()));
    }
    for (int p : ps) {
        if (p < 2) {
            throw ConfigError("validation.p values must be at least 2");
        }
    }
    return ps;
}

}  // namespace

CompareReport run_compare(const json& config)
{
    const auto specs = framework_specs(config);
    const auto ps = validation_ps(config);
    const int trials = get<int>(config, "validation.trials");
    if (trials < 1) {
        throw ConfigError("validation.trials must be at least 1");
    }
    const int threads = std::max(1, get<int>(config, "threads"));
    const bool timing = get<bool>(config, "timing.enabled");

    const RawDataset raw = load_data(config);
    const auto days = build_day_matrices(raw);
    const ProfileMatrix profiles = preprocess(days);

    CompareReport report;
    report.fits.resize(specs.size());
    report.rows.resize(specs.size());
    parallel_for(specs.size(), threads, [&](std::size_t i) {
        FittedFramework fitted = fit_framework(profiles, specs[i]);
        CompareRow row;
        row.name = fitted.spec.display_name();
        row.k = fitted.result.k;
        row.reduced = all_indices(fitted.reduced, fitted.result, FeatureSpace::Reduced);
        row.original = all_indices(profiles.data, fitted.result, FeatureSpace::Original);
        for (int p : ps) {
            ValidationOptions opts{p, trials, validation_seed(fitted.spec, p), 1};
            row.validation.push_back(validate_framework(days, fitted.reducer, fitted.result, opts));
        }
        report.rows[i] = std::move(row);
        report.fits[i] = std::move(fitted);
    });

    if (timing) {
        report.timing = time_frameworks(profiles, get<int>(config, "timing.k"), get<int>(config, "timing.trials"),
                                        get<std::uint64_t>(config, "seed"));
    }

    // Threads and the output directory do not affect results and are left out
    // so that reports from different runs compare byte for byte.
    json echo = config;
    echo.erase("threads");
    echo.erase("output");
    json resolved = json::array();
    for (const auto& f : report.fits) {
        resolved.push_back(to_json(f.spec));
    }
    echo["frameworks"] = std::move(resolved);
    report.config_echo = std::move(echo);
    return report;
}

TimingTable time_frameworks(const ProfileMatrix& profiles, int k, int trials, std::uint64_t seed)
{
    const Matrix& x = profiles.data;
    const int n = static_cast<int>(x.rows());
    if (n < 5) {
        throw ArgumentError("timing needs at least 5 households, got " + std::to_string(n));
    }
    if (k < 2 || k > kMaxClusters || k >= n) {
        throw ArgumentError("timing k must lie in [2, min(10, n - 1)]");
    }
    if (trials < 1) {
        throw ArgumentError("timing needs at least one trial");
    }
    TimingTable table;
    table.reducers = {"No Reduction", "PCA", "FA"};
    table.methods = {"KMC", "SC", "AC", "FCM"};
    table.ms = Matrix::Zero(3, 4);
    table.trials = trials;
    table.k = k;
    table.n = n;

    const std::vector<FittedReducer> reducers = {
        FittedReducer::identity(static_cast<int>(x.cols())),
        pca_fit(x, OutputDims{static_cast<int>(tune_pca_dims(x).best_value)}),
        fa_fit(x, OutputDims{static_cast<int>(tune_fa_dims(x).best_value)}),
    };
    for (int r = 0; r < 3; ++r) {
        const Matrix z = reducers[static_cast<std::size_t>(r)].transform(x);
        for (int c = 0; c < 4; ++c) {
            const auto method = static_cast<Method>(c);
            const std::uint64_t s = Rng::derive(seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)});
            auto run = [&] {
                switch (method) {
                case Method::KMC:
                    return kmeans(z, KMeansOptions{k, 10, 300, 1e-6, s});
                case Method::SC:
                    return spectral(z, SpectralOptions{k, 0, 10, s});
                case Method::AC:
                    return agglomerative(z, ClusterCount{k});
                case Method::FCM:
                    return fcm(z, FcmOptions{k, 2.0, 300, 1e-6, s});
                }
                throw ArgumentError("unknown method");
            };
            run();  // warm-up
            double total = 0.0;
            for (int t = 0; t < trials; ++t) {
                const auto start = std::chrono::steady_clock::now();
                const auto result = run();
                const auto stop = std::chrono::steady_clock::now();
                (void)result;
                total += std::chrono::duration<double, std::milli>(stop - start).count();
            }
            table.ms(r, c) = total / trials;
        }
    }
    return table;
}

TimingTable time_frameworks(const json& config)
{
    const ProfileMatrix profiles = preprocess(load_data(config));
    return time_frameworks(profiles, get<int>(config, "timing.k"), get<int>(config, "timing.trials"),
                           get<std::uint64_t>(config, "seed"));
}

std::string cvi_csv(const std::vector<CompareRow>& rows, FeatureSpace space)
{
    std::string out = "Methods,SH,CH,DI,DB,XB\n";
    for (const auto& row : rows) {
        const CviScores& s = space == FeatureSpace::Reduced ? row.reduced : row.original;
        out += join_row({row.name, format_double(s.silhouette), format_double(s.calinski_harabasz),
                         format_double(s.dunn), format_double(s.davies_bouldin), format_double(s.xie_beni)});
    }
    return out;
}

std::string validation_csv(const std::vector<CompareRow>& rows, int p)
{
    std::string out = "Methods,#Clusters,#Total Cases,#Avg. Matches,#Avg. Mismatches,%Matches,%Mismatches\n";
    for (const auto& row : rows) {
        const auto it = std::find_if(row.validation.begin(), row.validation.end(),
                                     [p](const ValidationReport& v) { return v.p == p; });
        if (it == row.validation.end()) {
            throw ArgumentError(row.name + " has no validation for p = " + std::to_string(p));
        }
        out += join_row({row.name, std::to_string(row.k), std::to_string(it->n_total_cases),
                         format_double(it->avg_matches), format_double(it->avg_mismatches),
                         format_double(it->pct_matches), format_double(it->pct_mismatches)});
    }
    return out;
}

std::string timing_csv(const TimingTable& table)
{
    std::vector<std::string> header = {"Dimensionality Reduction"};
    header.insert(header.end(), table.methods.begin(), table.methods.end());
    std::string out = join_row(header);
    for (std::size_t r = 0; r < table.reducers.size(); ++r) {
        std::vector<std::string> cells = {table.reducers[r]};
        for (Eigen::Index c = 0; c < table.ms.cols(); ++c) {
            cells.push_back(format_double(table.ms(static_cast<Eigen::Index>(r), c)));
        }
        out += join_row(cells);
    }
    return out;
}

std::string curve_csv(const Curve& curve)
{
    std::string out = "x,y\n";
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        out += format_double(curve.xs[i]) + "," + format_double(curve.ys[i]) + "\n";
    }
    return out;
}

std::string curve_svg(const Curve& curve, std::string_view title)
{
    constexpr double width = 480.0;
    constexpr double height = 320.0;
    constexpr double margin = 40.0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        if (std::isfinite(curve.xs[i]) && std::isfinite(curve.ys[i])) {
            pts.emplace_back(curve.xs[i], curve.ys[i]);
        }
    }
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!pts.empty()) {
        const auto [xmin, xmax] = std::minmax_element(pts.begin(), pts.end());
        x0 = xmin->first;
        x1 = xmax->first;
        y0 = y1 = pts.front().second;
        for (const auto& p : pts) {
            y0 = std::min(y0, p.second);
            y1 = std::max(y1, p.second);
        }
    }
    auto sx = [&](double v) { return margin + (x1 > x0 ? (v - x0) / (x1 - x0) : 0.5) * (width - 2 * margin); };
    auto sy = [&](double v) { return height - margin - (y1 > y0 ? (v - y0) / (y1 - y0) : 0.5) * (height - 2 * margin); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) {
        svg << sx(x) << ',' << sy(y) << ' ';
    }
    svg << "\"/>\n";
    for (const auto& [x, y] : pts) {
        svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    svg << "<text x=\"" << margin << "\" y=\"" << height - 12 << "\" font-size=\"10\">" << format_double(x0)
        << "</text>\n";
    svg << "<text x=\"" << width - margin << "\" y=\"" << height - 12 << "\" font-size=\"10\" text-anchor=\"end\">"
        << format_double(x1) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << height - margin << "\" font-size=\"10\">" << format_double(y0) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << margin << "\" font-size=\"10\">" << format_double(y1) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string profiles_csv(const ProfileMatrix& profiles)
{
    std::vector<std::string> header = {"household_id"};
    const auto d = profiles.data.cols();
    const int step = d > 0 ? static_cast<int>(24 / d) : 1;
    for (Eigen::Index c = 0; c < d; ++c) {
        const int hour = static_cast<int>(c) * step;
        header.push_back(std::string("h") + (hour < 10 ? "0" : "") + std::to_string(hour));
    }
    std::string out = join_row(header);
    for (Eigen::Index r = 0; r < profiles.data.rows(); ++r) {
        std::vector<std::string> cells = {profiles.household_ids[static_cast<std::size_t>(r)]};
        for (Eigen::Index c = 0; c < d; ++c) {
            cells.push_back(format_double(profiles.data(r, c)));
        }
        out += join_row(cells);
    }
    return out;
}

json to_json(const TimingTable& table)
{
    json rows = json::object();
    for (std::size_t r = 0; r < table.reducers.size(); ++r) {
        json cells = json::object();
        for (std::size_t c = 0; c < table.methods.size(); ++c) {
            cells[table.methods[c]] = table.ms(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
        rows[table.reducers[r]] = cells;
    }
    return json{{"unit", "ms"}, {"trials", table.trials}, {"k", table.k}, {"n", table.n}, {"mean_ms", rows}};
}

json to_json(const CompareReport& report)
{
    json frameworks = json::array();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        json entry = to_json(report.fits[i]);
        entry["name"] = row.name;
        entry["k"] = row.k;
        entry["cvi_reduced"] = row.reduced;
        entry["cvi_original"] = row.original;
        json validation = json::array();
        for (const auto& v : row.validation) {
            validation.push_back(v);
        }
        entry["validation"] = validation;
        frameworks.push_back(std::move(entry));
    }
    json out{{"config_echo", report.config_echo}, {"frameworks", frameworks}};
    if (report.timing) {
        out["timing"] = to_json(*report.timing);
    }
    return out;
}

void write_compare(const CompareReport& report, const std::filesystem::path& out, bool svg)
{
    namespace fs = std::filesystem;
    fs::create_directories(out / "curves");
    write_file_atomic(out / "cvi_reduced.csv", cvi_csv(report.rows, FeatureSpace::Reduced));
    write_file_atomic(out / "cvi_original.csv", cvi_csv(report.rows, FeatureSpace::Original));
    if (!report.rows.empty()) {
        for (const auto& v : report.rows.front().validation) {
            write_file_atomic(out / ("validation_p" + std::to_string(v.p) + ".csv"), validation_csv(report.rows, v.p));
        }
    }
    for (const auto& fit : report.fits) {
        for (const auto& t : fit.tuning) {
            const std::string stem = fit.spec.token() + "_" + t.method;
            write_file_atomic(out / "curves" / (stem + ".csv"), curve_csv(t.curve));
            if (svg) {
                write_file_atomic(out / "curves" / (stem + ".svg"), curve_svg(t.curve, fit.spec.display_name() + ": " + t.method));
            }
        }
    }
    if (report.timing) {
        write_file_atomic(out / "timing.csv", timing_csv(*report.timing));
    }
    write_file_atomic(out / "report.json", to_json(report).dump(2) + "\n");
}

}  // namespace loadclust::cli
