// loadclust command-line tool.
//
//   loadclust generate --out data.csv [--truth truth.csv]
//   loadclust compare --config cfg.json --output out/ --validation.trials 20
//
// Any config key can be given as a flag of the same dotted name.

#include "loadclust/cli.hpp"
#include "loadclust/format.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace loadclust;
using loadclust::cli::json;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

std::vector<std::pair<std::string, std::string>> dotted_pairs(const std::vector<std::string>& extras)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.size() == 2) {
            throw ConfigError("unexpected argument '" + arg + "'");
        }
        const auto eq = arg.find('=');
        if (eq != std::string::npos) {
            out.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
        } else if (i + 1 < extras.size()) {
            out.emplace_back(arg.substr(2), extras[++i]);
        } else {
            throw ConfigError("flag '" + arg + "' needs a value");
        }
    }
    return out;
}

json load_config(const Common& common, const CLI::App& sub)
{
    cli::ConfigSources sources;
    if (!common.config_path.empty()) {
        sources.file = common.config_path;
    }
    sources.overrides = dotted_pairs(sub.remaining());
    sources.seed_flag = common.seed;
    if (const char* env = std::getenv(cli::kSeedEnv)) {
        sources.seed_env = std::string(env);
    }
    return cli::resolve_config(sources);
}

fs::path output_dir(const json& config)
{
    return fs::path(config.at("output").get<std::string>());
}

cli::FrameworkSpec single_framework(const json& config, const std::string& token)
{
    json narrowed = config;
    narrowed["frameworks"] = json::array({token});
    return cli::framework_specs(narrowed).front();
}

void print_json(const json& j)
{
    std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Clustering frameworks for household load profiles"};
    app.require_subcommand(1);
    Common common;

    auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->allow_extras();
        sub->add_option("--config", common.config_path, "JSON config document")->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "Seed (overrides config and LOADCLUST_SEED)");
        return sub;
    };

    std::string out_file;
    std::string truth_file;
    std::string framework;
    std::string fit_file;

    auto* generate = add("generate", "Write a synthetic smart-meter CSV");
    generate->add_option("--out", out_file, "CSV path")->required();
    generate->add_option("--truth", truth_file, "Optional ground-truth CSV path");

    auto* prep = add("preprocess", "Write the normalized median profile matrix");
    prep->add_option("--out", out_file, "CSV path")->required();

    auto* tune = add("tune", "Run the tuning procedures of one framework and write its curves");
    tune->add_option("--framework", framework, "Framework token, e.g. pca-kmc")->required();

    auto* fit = add("fit", "Fit one framework and write its fitted state as JSON");
    fit->add_option("--framework", framework, "Framework token, e.g. pca-kmc")->required();
    fit->add_option("--out", out_file, "JSON path (default <output>/fit_<token>.json)");

    auto* cvi = add("cvi", "Validity indices of a fitted framework");
    cvi->add_option("--fit", fit_file, "JSON written by fit")->required()->check(CLI::ExistingFile);

    auto* validate = add("validate", "Partition validation of a fitted framework");
    validate->add_option("--fit", fit_file, "JSON written by fit")->required()->check(CLI::ExistingFile);

    auto* compare = add("compare", "Run every configured framework end to end");
    auto* time = add("time", "Clustering wall-time table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) {
            const json config = load_config(common, *generate);
            const RawDataset raw = generate_synthetic(cli::synthetic_spec(config));
            write_csv(raw, fs::path(out_file));
            if (!truth_file.empty()) {
                std::string text = "household_id,archetype,name\n";
                for (const auto& [id, label] : raw.ground_truth) {
                    text += id + "," + std::to_string(label) + "," + archetype_name(label) + "\n";
                }
                write_file_atomic(truth_file, text);
            }
            std::cerr << "wrote " << raw.readings.size() << " readings for " << raw.ground_truth.size()
                      << " households to " << out_file << '\n';
        } else if (prep->parsed()) {
            const json config = load_config(common, *prep);
            RawDataset raw;
            if (config.at("data").at("source") == "csv") {
                auto ingested = ingest_csv(config.at("data").at("path").get<std::string>(),
                                           config.at("data").at("resolution").get<int>());
                if (ingested.skipped_rows > 0) {
                    std::cerr << "skipped " << ingested.skipped_rows << " malformed rows\n";
                }
                raw = std::move(ingested.dataset);
            } else {
                raw = cli::load_data(config);
            }
            write_file_atomic(out_file, cli::profiles_csv(preprocess(raw)));
        } else if (tune->parsed()) {
            const json config = load_config(common, *tune);
            const auto spec = single_framework(config, framework);
            const auto fitted = cli::fit_framework(preprocess(cli::load_data(config)), spec);
            const fs::path dir = output_dir(config) / "curves";
            fs::create_directories(dir);
            json results = json::array();
            for (const auto& t : fitted.tuning) {
                const std::string stem = spec.token() + "_" + t.method;
                write_file_atomic(dir / (stem + ".csv"), cli::curve_csv(t.curve));
                if (config.at("plots").at("svg").get<bool>()) {
                    write_file_atomic(dir / (stem + ".svg"), cli::curve_svg(t.curve, spec.display_name() + ": " + t.method));
                }
                results.push_back(t);
            }
            print_json(json{{"framework", cli::to_json(fitted.spec)}, {"tuning", results}});
        } else if (fit->parsed()) {
            const json config = load_config(common, *fit);
            const auto spec = single_framework(config, framework);
            const auto fitted = cli::fit_framework(preprocess(cli::load_data(config)), spec);
            fs::path path = out_file.empty() ? output_dir(config) / ("fit_" + spec.token() + ".json") : fs::path(out_file);
            if (path.has_parent_path()) {
                fs::create_directories(path.parent_path());
            }
            write_file_atomic(path, cli::to_json(fitted).dump(2) + "\n");
            for (const auto& w : fitted.result.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            std::cerr << spec.display_name() << ": k = " << fitted.result.k << ", d' = " << fitted.reducer.d_out()
                      << ", wrote " << path.string() << '\n';
        } else if (cvi->parsed()) {
            const json config = load_config(common, *cvi);
            const ProfileMatrix profiles = preprocess(cli::load_data(config));
            std::ifstream in(fit_file);
            const auto fitted = cli::fitted_framework_from_json(json::parse(in), profiles);
            cli::CompareRow row;
            row.name = fitted.spec.display_name();
            row.k = fitted.result.k;
            row.reduced = all_indices(fitted.reduced, fitted.result, FeatureSpace::Reduced);
            row.original = all_indices(profiles.data, fitted.result, FeatureSpace::Original);
            std::cout << "# reduced\n" << cli::cvi_csv({row}, FeatureSpace::Reduced);
            std::cout << "# original\n" << cli::cvi_csv({row}, FeatureSpace::Original);
        } else if (validate->parsed()) {
            const json config = load_config(common, *validate);
            const RawDataset raw = cli::load_data(config);
            const auto days = build_day_matrices(raw);
            const ProfileMatrix profiles = preprocess(days);
            std::ifstream in(fit_file);
            const auto fitted = cli::fitted_framework_from_json(json::parse(in), profiles);
            cli::CompareRow row;
            row.name = fitted.spec.display_name();
            row.k = fitted.result.k;
            const auto ps = config.at("validation").at("p").get<std::vector<int>>();
            for (int p : ps) {
                ValidationOptions opts{p, config.at("validation").at("trials").get<int>(),
                                       cli::validation_seed(fitted.spec, p),
                                       config.at("threads").get<int>()};
                row.validation.push_back(validate_framework(days, fitted.reducer, fitted.result, opts));
            }
            for (int p : ps) {
                std::cout << "# p = " << p << '\n' << cli::validation_csv({row}, p);
            }
        } else if (compare->parsed()) {
            const json config = load_config(common, *compare);
            const auto report = cli::run_compare(config);
            cli::write_compare(report, output_dir(config), config.at("plots").at("svg").get<bool>());
            std::cout << cli::cvi_csv(report.rows, FeatureSpace::Reduced);
            std::cerr << "wrote " << report.rows.size() << " frameworks to " << output_dir(config).string() << '\n';
        } else if (time->parsed()) {
            const json config = load_config(common, *time);
            const auto table = cli::time_frameworks(config);
            fs::create_directories(output_dir(config));
            write_file_atomic(output_dir(config) / "timing.csv", cli::timing_csv(table));
            std::cout << cli::timing_csv(table);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
