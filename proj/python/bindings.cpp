// Python bindings. Matrices cross as float64 numpy arrays; the compare
// report goes back as JSON text and is parsed in __init__.py.

#include "loadclust/cli.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace loadclust;
using cli::json;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix as_matrix(const Eigen::Ref<const RowMatrix>& x) { return Matrix(x); }

py::dict clustering_dict(const ClusteringResult& r)
{
    py::dict d;
    d["method"] = to_string(r.method);
    d["k"] = r.k;
    d["labels"] = r.labels;
    d["centers"] = r.centers;
    d["objective"] = r.objective;
    d["converged"] = r.converged;
    d["iterations"] = r.iterations;
    d["warnings"] = r.warnings;
    if (r.memberships) {
        d["memberships"] = *r.memberships;
        d["m"] = *r.fuzzifier;
    }
    return d;
}

py::dict tuning_dict(const TuningResult& t)
{
    py::dict d;
    d["method"] = t.method;
    d["best"] = t.best_value;
    d["x"] = t.curve.xs;
    d["y"] = t.curve.ys;
    d["details"] = t.details;
    d["weak_elbow"] = t.weak_elbow;
    d["fallback"] = t.fallback;
    return d;
}

py::dict reducer_dict(const FittedReducer& r, const Matrix& x)
{
    py::dict d;
    d["kind"] = to_string(r.kind());
    d["dims"] = r.d_out();
    d["transformed"] = r.transform(x);
    if (r.pca()) {
        d["components"] = r.pca()->components;
        d["eigenvalues"] = r.pca()->eigenvalues;
        d["cevr"] = r.pca()->cevr;
        d["mean"] = r.pca()->mean;
    }
    if (r.fa()) {
        d["groups"] = r.fa()->groups;
    }
    return d;
}

py::tuple profile_tuple(const RawDataset& raw)
{
    const ProfileMatrix p = preprocess(raw);
    std::vector<int> truth;
    for (const auto& id : p.household_ids) {
        const auto it = raw.ground_truth.find(id);
        truth.push_back(it == raw.ground_truth.end() ? -1 : it->second);
    }
    return py::make_tuple(p.household_ids, p.data, truth);
}

}  // namespace

PYBIND11_MODULE(_loadclust, m)
{
    m.doc() = "Clustering frameworks for household load profiles";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
    py::register_exception<ValueError>(m, "InvalidValueError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());

    m.def(
        "synthetic_profiles",
        [](int households, int days, int archetypes, double noise_sigma, std::uint64_t seed) {
            return profile_tuple(generate_synthetic({households, days, archetypes, noise_sigma, seed}));
        },
        py::arg("households") = 27, py::arg("days") = 90, py::arg("archetypes") = 4, py::arg("noise_sigma") = 0.3,
        py::arg("seed") = 7, "(household_ids, profiles, archetype per household) of a synthetic dataset");

    m.def(
        "csv_profiles",
        [](const std::string& path, int resolution) {
            return profile_tuple(ingest_csv(path, resolution).dataset);
        },
        py::arg("path"), py::arg("resolution") = 1);

    m.def(
        "pca",
        [](const Eigen::Ref<const RowMatrix>& x, std::optional<int> dims, std::optional<double> cevr) {
            const Matrix xm = as_matrix(x);
            if (dims.has_value() == cevr.has_value()) {
                throw ArgumentError("give exactly one of dims and cevr");
            }
            return reducer_dict(dims ? pca_fit(xm, OutputDims{*dims}) : pca_fit(xm, CevrThreshold{*cevr}), xm);
        },
        py::arg("x"), py::arg("dims") = py::none(), py::arg("cevr") = py::none());

    m.def(
        "feature_agglomeration",
        [](const Eigen::Ref<const RowMatrix>& x, std::optional<int> dims, std::optional<double> threshold) {
            const Matrix xm = as_matrix(x);
            if (dims.has_value() == threshold.has_value()) {
                throw ArgumentError("give exactly one of dims and threshold");
            }
            return reducer_dict(dims ? fa_fit(xm, OutputDims{*dims}) : fa_fit(xm, MergeThreshold{*threshold}), xm);
        },
        py::arg("x"), py::arg("dims") = py::none(), py::arg("threshold") = py::none());

    m.def(
        "kmeans",
        [](const Eigen::Ref<const RowMatrix>& x, int k, int restarts, std::uint64_t seed) {
            return clustering_dict(kmeans(as_matrix(x), {k, restarts, 300, 1e-6, seed}));
        },
        py::arg("x"), py::arg("k"), py::arg("restarts") = 10, py::arg("seed") = 0);

    m.def(
        "spectral",
        [](const Eigen::Ref<const RowMatrix>& x, int k, int knn, std::uint64_t seed) {
            return clustering_dict(spectral(as_matrix(x), {k, knn, 10, seed}));
        },
        py::arg("x"), py::arg("k"), py::arg("knn") = 0, py::arg("seed") = 0);

    m.def(
        "agglomerative",
        [](const Eigen::Ref<const RowMatrix>& x, std::optional<int> k, std::optional<double> threshold) {
            if (k.has_value() == threshold.has_value()) {
                throw ArgumentError("give exactly one of k and threshold");
            }
            const Matrix xm = as_matrix(x);
            return clustering_dict(k ? agglomerative(xm, ClusterCount{*k}) : agglomerative(xm, MergeThreshold{*threshold}));
        },
        py::arg("x"), py::arg("k") = py::none(), py::arg("threshold") = py::none());

    m.def(
        "fcm",
        [](const Eigen::Ref<const RowMatrix>& x, int k, double fuzzifier, std::uint64_t seed) {
            return clustering_dict(fcm(as_matrix(x), {k, fuzzifier, 300, 1e-6, seed}));
        },
        py::arg("x"), py::arg("k"), py::arg("m") = 2.0, py::arg("seed") = 0);

    auto index = [&m](const char* name, double (*f)(const Matrix&, std::span<const int>)) {
        m.def(
            name,
            [f](const Eigen::Ref<const RowMatrix>& x, const std::vector<int>& labels) { return f(as_matrix(x), labels); },
            py::arg("x"), py::arg("labels"));
    };
    index("silhouette", silhouette);
    index("calinski_harabasz", calinski_harabasz);
    index("dunn_index", dunn_index);
    index("davies_bouldin", davies_bouldin);
    index("xie_beni", xie_beni_hard);
    m.def(
        "xie_beni_fuzzy",
        [](const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const RowMatrix>& u, double fuzzifier) {
            return xie_beni_fuzzy(as_matrix(x), as_matrix(u), fuzzifier);
        },
        py::arg("x"), py::arg("memberships"), py::arg("m"));

    m.def(
        "gap_statistic",
        [](const Eigen::Ref<const RowMatrix>& x, const std::string& method, int k_max, int n_refs, std::uint64_t seed) {
            Labeler labeler;
            if (method == "kmc") {
                labeler = kmeans_labeler();
            } else if (method == "sc") {
                labeler = spectral_labeler();
            } else {
                throw ArgumentError("gap statistic supports 'kmc' and 'sc', not '" + method + "'");
            }
            return tuning_dict(gap_statistic(as_matrix(x), labeler, {k_max, n_refs, seed, 1}));
        },
        py::arg("x"), py::arg("method") = "kmc", py::arg("k_max") = 10, py::arg("n_refs") = 20, py::arg("seed") = 0);

    m.def(
        "fpc_sweep",
        [](const Eigen::Ref<const RowMatrix>& x, double fuzzifier, int k_max, std::uint64_t seed) {
            return tuning_dict(fpc_sweep(as_matrix(x), {fuzzifier, 2, k_max, 300, 1e-6, seed}));
        },
        py::arg("x"), py::arg("m") = 2.0, py::arg("k_max") = 10, py::arg("seed") = 0);

    m.def(
        "estimate_fuzzifier",
        [](const Eigen::Ref<const RowMatrix>& x) { return tuning_dict(estimate_fuzzifier(as_matrix(x))); },
        py::arg("x"));
    m.def(
        "elbow_k_for_ac",
        [](const Eigen::Ref<const RowMatrix>& x, int k_max) { return tuning_dict(elbow_k_for_ac(as_matrix(x), k_max)); },
        py::arg("x"), py::arg("k_max") = 10);
    m.def(
        "detect_elbow",
        [](std::vector<double> xs, std::vector<double> ys) {
            const Elbow e = detect_elbow({std::move(xs), std::move(ys)});
            return py::make_tuple(e.x, e.weak);
        },
        py::arg("xs"), py::arg("ys"), "(x, weak) of the point farthest from the end-to-end chord");

    m.def(
        "_compare",
        [](const std::string& config_text, const std::string& output) {
            cli::ConfigSources sources;
            sources.document = json::parse(config_text);
            const json config = cli::resolve_config(sources);
            cli::CompareReport report;
            {
                py::gil_scoped_release release;
                report = cli::run_compare(config);
            }
            if (!output.empty()) {
                cli::write_compare(report, output, config.at("plots").at("svg").get<bool>());
            }
            return cli::to_json(report).dump();
        },
        py::arg("config_text"), py::arg("output") = "");

    m.def("_default_config", [] { return cli::default_config().dump(); });
}
