#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "propml/csv.hpp"
#include "propml/dataset.hpp"
#include "propml/eda.hpp"
#include "propml/errors.hpp"
#include "propml/harness.hpp"
#include "propml/model_store.hpp"
#include "propml/synth.hpp"

namespace {

using namespace propml;

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
}

std::vector<RawListing> load_clean(const std::string& path) {
    auto result = ingest_csv(path, false);
    if (result.skipped_rows > 0)
        std::cerr << "warning: skipped " << result.skipped_rows << " unparseable rows\n";
    return cleanse(std::move(result.listings));
}

int cmd_generate(const std::string& profile_path, std::optional<std::uint64_t> seed,
                 const std::string& out, const std::string& dump_profile) {
    SynthProfile profile = profile_path.empty() ? default_profile() : load_profile_json(profile_path);
    if (seed) profile.seed = *seed;
    if (!dump_profile.empty()) save_profile_json(profile, dump_profile);
    const auto listings = synthesize(profile);
    emit_csv(listings, out);
    std::size_t apartments = 0;
    for (const auto& l : listings) apartments += l.asset_type == AssetType::Apartment;
    std::cout << "wrote " << listings.size() << " listings (" << apartments << " apartments, "
              << listings.size() - apartments << " villas) to " << out << "\n";
    return 0;
}

int cmd_clean(const std::string& in, const std::string& aliases, const std::string& out) {
    auto result = ingest_csv(in, false);
    if (result.skipped_rows > 0)
        std::cerr << "warning: skipped " << result.skipped_rows << " unparseable rows\n";
    AliasTable table;
    if (!aliases.empty()) table = load_alias_csv(aliases);
    auto cleaned = cleanse(std::move(result.listings), aliases.empty() ? nullptr : &table);
    const auto warnings = validate_profile(cleaned);
    for (const auto& w : warnings)
        std::cerr << "warning: listing " << w.listing_id << ": " << w.message << "\n";
    emit_csv(cleaned, out);
    std::cout << "cleansed " << cleaned.size() << " listings (" << warnings.size()
              << " profile warnings) to " << out << "\n";
    return 0;
}

int cmd_eda(const std::string& in, const std::string& out_dir) {
    const auto listings = load_clean(in);
    const auto m = encode(listings);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    // Correlations over the always-present numeric and boolean fields plus price.
    const std::vector<std::string> vars = {
        "constructed_area", "floor_area",        "num_rooms",  "num_baths", "is_penthouse",
        "is_duplex",        "has_lift",          "has_box_room", "has_swimming_pool",
        "has_garden",       "has_parking",       "price"};
    std::vector<std::string> usable;
    for (const auto& v : vars) {
        try {
            eda::correlation_matrix(m, {v, "price"});
            usable.push_back(v);
        } catch (const ZeroVariance&) {
            std::cerr << "warning: dropping constant variable " << v << " from correlations\n";
        }
    }
    const auto corr = eda::correlation_matrix(m, usable);
    {
        std::string text = "variable";
        for (const auto& name : corr.names) text += "," + name;
        text += "\n";
        for (std::size_t i = 0; i < corr.names.size(); ++i) {
            text += corr.names[i];
            for (std::size_t j = 0; j < corr.names.size(); ++j)
                text += "," + csv::format_double(corr.coefficients.at(i, j));
            text += "\n";
        }
        write_text((dir / "correlations.csv").string(), text);
    }

    {
        std::string text = "field,zone,min,q1,median,q3,max,mean\n";
        for (auto field : {eda::SummaryField::Price, eda::SummaryField::ConstructedArea}) {
            const std::string name =
                field == eda::SummaryField::Price ? "price_millions" : "constructed_area";
            for (const auto& s : eda::zone_summaries(listings, field)) {
                text += name + "," + std::to_string(s.zone) + "," + csv::format_double(s.min) +
                        "," + csv::format_double(s.q1) + "," + csv::format_double(s.median) + "," +
                        csv::format_double(s.q3) + "," + csv::format_double(s.max) + "," +
                        csv::format_double(s.mean) + "\n";
            }
        }
        write_text((dir / "zones.csv").string(), text);
    }

    {
        std::vector<double> area, price;
        for (const auto& l : listings) {
            area.push_back(l.constructed_area_sqm);
            price.push_back(l.price_eur / 1e6);
        }
        nlohmann::json fits = nlohmann::json::array();
        for (int order : {1, 2, 3}) {
            const auto fit = eda::poly_fit(area, price, order);
            fits.push_back({{"order", order}, {"coefficients", fit.coefficients}, {"r2", fit.r2}});
        }
        write_text((dir / "polyfit.json").string(), fits.dump(2) + "\n");
    }

    {
        const auto design = eda::build_ols_design(m);
        const auto fit = eda::ols(design.x, m.target, design.names);
        nlohmann::json j;
        j["names"] = fit.names;
        j["coef"] = fit.beta;
        j["se_nonrobust"] = fit.se_nonrobust;
        j["se_hc0"] = fit.se_hc0;
        j["se_hc1"] = fit.se_hc1;
        j["se_hc2"] = fit.se_hc2;
        j["se_hc3"] = fit.se_hc3;
        j["p"] = fit.p_values;
        j["stars"] = fit.stars;
        j["n"] = fit.n;
        j["k"] = fit.k;
        j["r2"] = fit.r2;
        write_text((dir / "ols.json").string(), j.dump(2) + "\n");
    }

    std::cout << "wrote correlations.csv, zones.csv, polyfit.json, ols.json to " << out_dir << "\n";
    return 0;
}

int cmd_run(const std::string& in, const std::string& grid_name, const std::string& spec_path,
            std::uint64_t seed, int workers, const std::string& out, const std::string& emit,
            bool no_timing) {
    if (grid_name.empty() == spec_path.empty())
        throw CLI::ValidationError("run", "exactly one of --grid or --spec is required");

    std::vector<GridEntry> grid;
    if (!grid_name.empty()) {
        if (grid_name == "full") grid = enumerate_grid();
        else if (grid_name == "reduced") grid = reduced_grid();
        else throw CLI::ValidationError("--grid", "expected 'full' or 'reduced'");
    } else {
        std::ifstream spec_in(spec_path);
        if (!spec_in) throw DataError("cannot open spec: " + spec_path);
        std::ostringstream buf;
        buf << spec_in.rdbuf();
        grid = grid_from_json(buf.str());
    }

    const auto data = encode(load_clean(in));
    const auto totals = grid_totals(grid);
    std::cerr << "running " << totals.total() << " experiments (svr " << totals.svr << ", knn "
              << totals.knn << ", extratrees " << totals.extratrees << ", mlp " << totals.mlp
              << ") on " << data.n_rows() << " rows with " << workers << " workers\n";

    const auto reports = run_grid(data, grid, seed, workers);
    if (emit == "csv") write_text(out, reports_to_csv(reports));
    else write_text(out, reports_to_json(reports, !no_timing));
    std::cout << "wrote " << reports.size() << " experiment reports to " << out << "\n";
    return 0;
}

int cmd_report(const std::string& in, int top) {
    std::ifstream file(in);
    if (!file) throw DataError("cannot open results: " + in);
    std::ostringstream buf;
    buf << file.rdbuf();
    auto reports = reports_from_json(buf.str());
    std::sort(reports.begin(), reports.end(),
              [](const ExperimentReport& a, const ExperimentReport& b) {
                  return a.macro_mean.mse < b.macro_mean.mse;
              });

    auto cell = [](double mean, const std::optional<double>& std_dev) {
        char buf2[64];
        if (std_dev)
            std::snprintf(buf2, sizeof(buf2), "%.4f (%.4f)", mean, *std_dev);
        else
            std::snprintf(buf2, sizeof(buf2), "%.4f (--)", mean);
        return std::string(buf2);
    };

    std::printf("%-4s %-42s %-18s %-18s %-18s %-18s %-18s\n", "#", "model", "e_var", "mae",
                "medae", "mse", "r2");
    const int limit = top > 0 ? std::min<int>(top, static_cast<int>(reports.size()))
                              : static_cast<int>(reports.size());
    for (int i = 0; i < limit; ++i) {
        const auto& r = reports[static_cast<std::size_t>(i)];
        auto dev = [&](double MetricBundle::*field) -> std::optional<double> {
            if (!r.macro_std) return std::nullopt;
            return (*r.macro_std).*field;
        };
        std::printf("%-4d %-42s %-18s %-18s %-18s %-18s %-18s\n", i + 1, r.spec.label().c_str(),
                    cell(r.macro_mean.e_var, dev(&MetricBundle::e_var)).c_str(),
                    cell(r.macro_mean.mae, dev(&MetricBundle::mae)).c_str(),
                    cell(r.macro_mean.medae, dev(&MetricBundle::medae)).c_str(),
                    cell(r.macro_mean.mse, dev(&MetricBundle::mse)).c_str(),
                    cell(r.macro_mean.r2, dev(&MetricBundle::r2)).c_str());
    }
    return 0;
}

// One timing row per (algorithm, parameter, value), averaged over every grid
// spec that uses that value.
int cmd_bench(const std::string& in, const std::string& out, std::uint64_t seed, int workers,
              const std::string& grid_name) {
    const auto data = encode(load_clean(in));
    auto grid = grid_name == "reduced" ? reduced_grid() : enumerate_grid();
    for (auto& entry : grid) entry.repetitions = 1;  // timing pass
    std::cerr << "timing " << grid.size() << " configurations on " << data.n_rows() << " rows\n";
    const auto reports = run_grid(data, grid, seed, workers);

    struct Key {
        std::string algorithm, parameter, value;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : reports) {
        std::vector<std::pair<std::string, std::string>> tags;
        const std::string algo = to_string(r.spec.algorithm);
        if (const auto* knn = std::get_if<KnnConfig>(&r.spec.config)) {
            tags = {{"n_neighbors", std::to_string(knn->k)},
                    {"metric", knn->metric == KnnMetric::Cosine ? "cosine" : "minkowski"},
                    {"weights", knn->weights == KnnWeights::Uniform ? "uniform" : "distance"}};
        } else if (const auto* xt = std::get_if<ExtraTreesConfig>(&r.spec.config)) {
            tags = {{"n_estimators", std::to_string(xt->n_estimators)},
                    {"criterion", xt->criterion == SplitCriterion::Mae ? "mae" : "mse"},
                    {"bootstrap", xt->bootstrap ? "true" : "false"}};
        } else if (const auto* mlp = std::get_if<MlpConfig>(&r.spec.config)) {
            std::string arch;
            for (std::size_t i = 0; i < mlp->hidden_layers.size(); ++i) {
                if (i) arch += "-";
                arch += std::to_string(mlp->hidden_layers[i]);
            }
            tags = {{"hidden_layer_sizes", arch}};
        } else {
            tags = {{"-", "-"}};
        }
        for (const auto& [parameter, value] : tags) {
            auto& group = groups[{algo, parameter, value}];
            for (const auto& fr : r.folds) {
                group.first.push_back(fr.train_time_s);
                group.second.push_back(fr.predict_time_s);
            }
        }
    }

    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        return std::pair<double, double>{mean, std::sqrt(var / static_cast<double>(v.size()))};
    };

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, times] : groups) {
        const auto train = mean_std(times.first);
        const auto predict = mean_std(times.second);
        rows.push_back({{"algorithm", key.algorithm},
                        {"parameter", key.parameter},
                        {"value", key.value},
                        {"train_time_s", {{"mean", train.first}, {"std", train.second}}},
                        {"predict_time_s", {{"mean", predict.first}, {"std", predict.second}}}});
    }
    write_text(out, rows.dump(2) + "\n");
    std::cout << "wrote " << rows.size() << " timing rows to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& in, const std::string& out, int estimators,
              const std::string& criterion, bool bootstrap, bool normalize, std::uint64_t seed) {
    const auto listings = load_clean(in);
    auto m = encode(listings);
    std::optional<Normalizer> norm;
    if (normalize) {
        norm = fit_normalizer(m);
        m = apply_normalizer(*norm, m);
    }
    ExtraTreesConfig cfg;
    cfg.n_estimators = estimators;
    cfg.criterion = criterion == "mse" ? SplitCriterion::Mse : SplitCriterion::Mae;
    cfg.bootstrap = bootstrap;
    cfg.seed = seed;
    const ExtraTreesModel model(m.values, m.target, cfg);
    save_extratrees(model, m.columns, norm).save(out);
    std::cout << "trained " << estimators << " trees on " << m.n_rows() << " rows, saved to "
              << out << "\n";
    return 0;
}

int cmd_flag(const std::string& in, const std::string& model_path, double tau,
             const std::string& out) {
    const auto listings = load_clean(in);
    const auto model = SavedExtraTrees::load(model_path);
    const auto predictions = model.predict_listings(listings);

    std::vector<std::string> ids;
    std::vector<double> listed;
    for (const auto& l : listings) {
        ids.push_back(l.id);
        listed.push_back(l.price_eur / 1e6);
    }
    const auto flags = flag_opportunities(ids, listed, predictions, tau);

    std::string text = "id,listed_millions,predicted_millions,discount,flagged\n";
    std::size_t flagged = 0;
    for (const auto& f : flags) {
        text += f.id + "," + csv::format_double(f.listed_millions) + "," +
                csv::format_double(f.predicted_millions) + "," + csv::format_double(f.discount) +
                "," + (f.flagged ? "true" : "false") + "\n";
        flagged += f.flagged;
    }
    write_text(out, text);
    std::cout << "flagged " << flagged << " of " << flags.size() << " listings at tau=" << tau
              << ", wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prime-segment property price modeling and investment screening"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Synthesize a schema-faithful listing CSV");
    std::string gen_profile, gen_out = "data.csv", gen_dump;
    std::optional<std::uint64_t> gen_seed;
    generate->add_option("--profile", gen_profile, "Profile JSON (defaults to the built-in one)");
    generate->add_option("--seed", gen_seed, "Override the profile seed");
    generate->add_option("--out", gen_out, "Output CSV path")->required();
    generate->add_option("--dump-profile", gen_dump, "Also write the effective profile JSON");

    // clean
    auto* clean = app.add_subcommand("clean", "Cleanse a listing CSV");
    std::string clean_in, clean_aliases, clean_out;
    clean->add_option("--in", clean_in, "Input listing CSV")->required();
    clean->add_option("--aliases", clean_aliases, "Street alias CSV (alias,canonical)");
    clean->add_option("--out", clean_out, "Output CSV path")->required();

    // eda
    auto* eda_cmd = app.add_subcommand("eda", "Exploratory statistics of a cleansed CSV");
    std::string eda_in, eda_dir;
    eda_cmd->add_option("--in", eda_in, "Cleansed listing CSV")->required();
    eda_cmd->add_option("--out-dir", eda_dir, "Output directory")->required();

    // run
    auto* run = app.add_subcommand("run", "Cross-validated experiment grid");
    std::string run_in, run_grid_name, run_spec, run_out = "results.json", run_emit = "json";
    std::uint64_t run_seed = 1;
    int run_workers = 1;
    bool run_no_timing = false;
    run->add_option("--in", run_in, "Cleansed listing CSV")->required();
    run->add_option("--grid", run_grid_name, "'full' or 'reduced'");
    run->add_option("--spec", run_spec, "Spec JSON (single object or array)");
    run->add_option("--seed", run_seed, "Base seed");
    run->add_option("--workers", run_workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out", run_out, "Output path")->required();
    run->add_option("--emit", run_emit, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    run->add_flag("--no-timing", run_no_timing,
                  "Zero the wall-time fields for byte-reproducible output");

    // report
    auto* report = app.add_subcommand("report", "Summarize results sorted by ascending mean MSE");
    std::string report_in;
    int report_top = 10;
    report->add_option("--in", report_in, "Results JSON")->required();
    report->add_option("--top", report_top, "Rows to print (0 = all)");

    // bench
    auto* bench = app.add_subcommand("bench", "Per-parameter train/predict timing table");
    std::string bench_in, bench_out = "timings.json", bench_grid = "full";
    std::uint64_t bench_seed = 1;
    int bench_workers = 1;
    bench->add_option("--in", bench_in, "Cleansed listing CSV")->required();
    bench->add_option("--out", bench_out, "Output JSON path")->required();
    bench->add_option("--seed", bench_seed, "Base seed");
    bench->add_option("--workers", bench_workers, "Worker threads")->check(CLI::PositiveNumber);
    bench->add_option("--grid", bench_grid, "'full' or 'reduced'")
        ->check(CLI::IsMember({"full", "reduced"}));

    // train
    auto* train = app.add_subcommand("train", "Train a forest for the flagging pipeline");
    std::string train_in, train_out = "forest.json", train_criterion = "mae";
    int train_estimators = 50;
    bool train_no_bootstrap = false;
    bool train_normalize = false;
    std::uint64_t train_seed = 1;
    train->add_option("--in", train_in, "Cleansed listing CSV")->required();
    train->add_option("--out", train_out, "Model JSON path")->required();
    train->add_option("--estimators", train_estimators, "Number of trees")
        ->check(CLI::PositiveNumber);
    train->add_option("--criterion", train_criterion, "mae or mse")
        ->check(CLI::IsMember({"mae", "mse"}));
    train->add_flag("--no-bootstrap", train_no_bootstrap,
                    "Grow each tree on the full sample (the default bootstraps)");
    train->add_flag("--normalize", train_normalize, "Fit and store a max normalizer");
    train->add_option("--seed", train_seed, "Forest seed");

    // flag
    auto* flag = app.add_subcommand("flag", "Screen listings for investment opportunities");
    std::string flag_in, flag_model, flag_out = "flags.csv";
    double flag_tau = 0.1;
    flag->add_option("--in", flag_in, "Listing CSV to screen")->required();
    flag->add_option("--model", flag_model, "Trained model JSON")->required();
    flag->add_option("--tau", flag_tau, "Relative discount threshold in (0,1)");
    flag->add_option("--out", flag_out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen_profile, gen_seed, gen_out, gen_dump);
        if (clean->parsed()) return cmd_clean(clean_in, clean_aliases, clean_out);
        if (eda_cmd->parsed()) return cmd_eda(eda_in, eda_dir);
        if (run->parsed())
            return cmd_run(run_in, run_grid_name, run_spec, run_seed, run_workers, run_out,
                           run_emit, run_no_timing);
        if (report->parsed()) return cmd_report(report_in, report_top);
        if (bench->parsed())
            return cmd_bench(bench_in, bench_out, bench_seed, bench_workers, bench_grid);
        if (train->parsed())
            return cmd_train(train_in, train_out, train_estimators, train_criterion,
                             !train_no_bootstrap, train_normalize, train_seed);
        if (flag->parsed()) return cmd_flag(flag_in, flag_model, flag_tau, flag_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
