#include "propml/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "propml/errors.hpp"
#include "propml/rng.hpp"

namespace propml {

using nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Svr: return "svr";
        case Algorithm::Knn: return "knn";
        case Algorithm::ExtraTrees: return "extratrees";
        case Algorithm::Mlp: return "mlp";
    }
    return "?";
}

namespace {

std::string metric_name(KnnMetric m) {
    return m == KnnMetric::Minkowski2 ? "minkowski2" : "cosine";
}
std::string weights_name(KnnWeights w) {
    return w == KnnWeights::Uniform ? "uniform" : "inverse_distance";
}
std::string criterion_name(SplitCriterion c) { return c == SplitCriterion::Mae ? "mae" : "mse"; }

std::string config_label(const AlgorithmConfig& config) {
    std::ostringstream out;
    if (const auto* svr = std::get_if<SvrConfig>(&config)) {
        out << "C=" << svr->c_penalty << " gamma=" << (svr->gamma > 0 ? std::to_string(svr->gamma) : "auto")
            << " eps=" << svr->epsilon;
    } else if (const auto* knn = std::get_if<KnnConfig>(&config)) {
        out << "k=" << knn->k << " " << metric_name(knn->metric) << " " << weights_name(knn->weights);
    } else if (const auto* xt = std::get_if<ExtraTreesConfig>(&config)) {
        out << "n=" << xt->n_estimators << " " << criterion_name(xt->criterion)
            << " bootstrap=" << (xt->bootstrap ? "on" : "off");
    } else if (const auto* mlp = std::get_if<MlpConfig>(&config)) {
        out << "layers=";
        for (std::size_t i = 0; i < mlp->hidden_layers.size(); ++i) {
            if (i) out << "-";
            out << mlp->hidden_layers[i];
        }
        if (mlp->max_epochs != MlpConfig{}.max_epochs) out << " epochs=" << mlp->max_epochs;
    }
    return out.str();
}

}  // namespace

std::string ModelSpec::label() const {
    return to_string(algorithm) + " " + config_label(config) + (normalized ? " norm=on" : " norm=off");
}

std::uint64_t ModelSpec::stable_id() const {
    const std::string l = label();
    return hash_bytes(l.data(), l.size());
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n_rows, std::uint64_t seed,
                                                 int n_folds) {
    const auto k = static_cast<std::size_t>(n_folds);
    if (n_rows < k) throw TooFewRows(n_rows, k);
    std::vector<std::size_t> order(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n_rows / k;
    const std::size_t extra = n_rows % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

std::vector<GridEntry> enumerate_grid() {
    std::vector<GridEntry> grid;
    for (bool norm : {false, true})
        grid.push_back({ModelSpec{Algorithm::Svr, SvrConfig::recommended(), norm}, 1});

    for (int k : {5, 10, 20, 50})
        for (KnnMetric metric : {KnnMetric::Minkowski2, KnnMetric::Cosine})
            for (KnnWeights weights : {KnnWeights::Uniform, KnnWeights::InverseDistance})
                for (bool norm : {false, true})
                    grid.push_back({ModelSpec{Algorithm::Knn, KnnConfig{k, metric, weights}, norm}, 1});

    for (int n : {10, 20, 50})
        for (SplitCriterion crit : {SplitCriterion::Mae, SplitCriterion::Mse})
            for (bool bootstrap : {true, false})
                for (bool norm : {false, true})
                    grid.push_back(
                        {ModelSpec{Algorithm::ExtraTrees, ExtraTreesConfig{n, crit, bootstrap, 0}, norm},
                         30});

    const std::vector<std::vector<int>> architectures = {{1024}, {256, 128}, {128, 64, 32}};
    for (const auto& arch : architectures)
        for (bool norm : {false, true}) {
            MlpConfig cfg;
            cfg.hidden_layers = arch;
            grid.push_back({ModelSpec{Algorithm::Mlp, cfg, norm}, 30});
        }
    return grid;
}

std::vector<GridEntry> reduced_grid() {
    std::vector<GridEntry> grid;
    grid.push_back({ModelSpec{Algorithm::Svr, SvrConfig::recommended(), true}, 1});
    grid.push_back({ModelSpec{Algorithm::Knn, KnnConfig::recommended(), true}, 1});
    grid.push_back(
        {ModelSpec{Algorithm::ExtraTrees, ExtraTreesConfig{50, SplitCriterion::Mse, false, 0}, true},
         5});
    MlpConfig mlp;
    mlp.hidden_layers = {128, 64, 32};
    mlp.max_epochs = 40;
    grid.push_back({ModelSpec{Algorithm::Mlp, mlp, true}, 5});
    return grid;
}

GridTotals grid_totals(const std::vector<GridEntry>& grid, int n_folds) {
    GridTotals totals;
    for (const auto& entry : grid) {
        const auto count = static_cast<std::size_t>(entry.repetitions) *
                           static_cast<std::size_t>(n_folds);
        switch (entry.spec.algorithm) {
            case Algorithm::Svr: totals.svr += count; break;
            case Algorithm::Knn: totals.knn += count; break;
            case Algorithm::ExtraTrees: totals.extratrees += count; break;
            case Algorithm::Mlp: totals.mlp += count; break;
        }
    }
    return totals;
}

struct FittedModel {
    std::variant<std::monostate, SvrModel, KnnModel, ExtraTreesModel, MlpModel> model;

    std::vector<double> predict(const Matrix& queries) const {
        return std::visit(
            [&](const auto& m) -> std::vector<double> {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, std::monostate>)
                    throw ModelError("model not fitted");
                else
                    return m.predict(queries);
            },
            model);
    }
};

namespace {

FittedModel fit_spec(const ModelSpec& spec, const Matrix& x, const std::vector<double>& y,
                     std::uint64_t seed) {
    FittedModel fitted;
    if (const auto* svr = std::get_if<SvrConfig>(&spec.config)) {
        fitted.model.emplace<SvrModel>(x, y, *svr);
    } else if (const auto* knn = std::get_if<KnnConfig>(&spec.config)) {
        fitted.model.emplace<KnnModel>(x, y, *knn);
    } else if (const auto* xt = std::get_if<ExtraTreesConfig>(&spec.config)) {
        ExtraTreesConfig cfg = *xt;
        cfg.seed = seed;
        fitted.model.emplace<ExtraTreesModel>(x, y, cfg);
    } else if (const auto* mlp = std::get_if<MlpConfig>(&spec.config)) {
        MlpConfig cfg = *mlp;
        cfg.seed = seed;
        fitted.model.emplace<MlpModel>(x, y, cfg);
    }
    return fitted;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<FoldResult> run_repetition(const FeatureMatrix& data,
                                       const std::vector<std::vector<std::size_t>>& folds,
                                       const ModelSpec& spec, int repetition,
                                       std::uint64_t base_seed) {
    std::vector<FoldResult> results;
    results.reserve(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t other = 0; other < folds.size(); ++other) {
            if (other == f) continue;
            train_idx.insert(train_idx.end(), folds[other].begin(), folds[other].end());
        }
        FeatureMatrix train = data.take_rows(train_idx);
        FeatureMatrix test = data.take_rows(folds[f]);
        if (spec.normalized) {
            const Normalizer norm = fit_normalizer(train);
            train = apply_normalizer(norm, train);
            test = apply_normalizer(norm, test);
        }

        const std::uint64_t seed =
            mix_seed(base_seed, spec.stable_id(), static_cast<std::uint64_t>(repetition),
                     static_cast<std::uint64_t>(f));

        FoldResult result;
        result.repetition = repetition;
        result.fold = static_cast<int>(f);
        try {
            auto t0 = std::chrono::steady_clock::now();
            const FittedModel model = fit_spec(spec, train.values, train.target, seed);
            result.train_time_s = seconds_since(t0);
            auto t1 = std::chrono::steady_clock::now();
            const std::vector<double> preds = model.predict(test.values);
            result.predict_time_s = seconds_since(t1);
            result.metrics = metrics::all({test.target, preds});
        } catch (const std::exception& e) {
            throw ModelError("spec '" + spec.label() + "' repetition " +
                             std::to_string(repetition) + " fold " + std::to_string(f) + ": " +
                             e.what());
        }
        results.push_back(result);
    }
    return results;
}

MetricBundle bundle_mean(const std::vector<MetricBundle>& bundles) {
    MetricBundle m;
    const auto n = static_cast<double>(bundles.size());
    for (const auto& b : bundles) {
        m.e_var += b.e_var;
        m.mae += b.mae;
        m.medae += b.medae;
        m.mse += b.mse;
        m.r2 += b.r2;
    }
    m.e_var /= n;
    m.mae /= n;
    m.medae /= n;
    m.mse /= n;
    m.r2 /= n;
    return m;
}

MetricBundle bundle_std(const std::vector<MetricBundle>& bundles, const MetricBundle& mean) {
    MetricBundle s;
    const auto n = static_cast<double>(bundles.size());
    for (const auto& b : bundles) {
        s.e_var += (b.e_var - mean.e_var) * (b.e_var - mean.e_var);
        s.mae += (b.mae - mean.mae) * (b.mae - mean.mae);
        s.medae += (b.medae - mean.medae) * (b.medae - mean.medae);
        s.mse += (b.mse - mean.mse) * (b.mse - mean.mse);
        s.r2 += (b.r2 - mean.r2) * (b.r2 - mean.r2);
    }
    s.e_var = std::sqrt(s.e_var / n);
    s.mae = std::sqrt(s.mae / n);
    s.medae = std::sqrt(s.medae / n);
    s.mse = std::sqrt(s.mse / n);
    s.r2 = std::sqrt(s.r2 / n);
    return s;
}

TimeSummary summarize_times(const std::vector<double>& times) {
    TimeSummary s;
    const auto n = static_cast<double>(times.size());
    for (double t : times) s.mean += t;
    s.mean /= n;
    for (double t : times) s.std += (t - s.mean) * (t - s.mean);
    s.std = std::sqrt(s.std / n);
    return s;
}

void aggregate_report(ExperimentReport& report, int n_folds) {
    std::vector<MetricBundle> per_rep;
    for (int rep = 0; rep < report.repetitions; ++rep) {
        std::vector<MetricBundle> fold_bundles;
        for (int f = 0; f < n_folds; ++f)
            fold_bundles.push_back(report.folds[static_cast<std::size_t>(rep * n_folds + f)].metrics);
        per_rep.push_back(bundle_mean(fold_bundles));
    }
    report.macro_mean = bundle_mean(per_rep);
    if (report.repetitions > 1) report.macro_std = bundle_std(per_rep, report.macro_mean);

    std::vector<double> train_times, predict_times;
    for (const auto& fr : report.folds) {
        train_times.push_back(fr.train_time_s);
        predict_times.push_back(fr.predict_time_s);
    }
    report.train_time = summarize_times(train_times);
    report.predict_time = summarize_times(predict_times);
}

}  // namespace

ExperimentReport run_experiment(const FeatureMatrix& data, const ModelSpec& spec,
                                const CvPlan& plan, std::uint64_t base_seed) {
    const auto folds = make_folds(data.n_rows(), plan.shuffle_seed, plan.n_folds);
    ExperimentReport report;
    report.spec = spec;
    report.repetitions = plan.repetitions;
    for (int rep = 0; rep < plan.repetitions; ++rep) {
        const auto results = run_repetition(data, folds, spec, rep, base_seed);
        report.folds.insert(report.folds.end(), results.begin(), results.end());
    }
    aggregate_report(report, plan.n_folds);
    return report;
}

std::vector<ExperimentReport> run_grid(const FeatureMatrix& data,
                                       const std::vector<GridEntry>& grid, std::uint64_t base_seed,
                                       int workers) {
    constexpr int kFolds = 5;
    const std::uint64_t fold_seed = mix_seed(base_seed, 0x666f6c6473ULL);  // one split for the grid
    const auto folds = make_folds(data.n_rows(), fold_seed, kFolds);

    struct Job {
        std::size_t entry;
        int repetition;
    };
    std::vector<Job> jobs;
    std::vector<ExperimentReport> reports(grid.size());
    for (std::size_t e = 0; e < grid.size(); ++e) {
        reports[e].spec = grid[e].spec;
        reports[e].repetitions = grid[e].repetitions;
        reports[e].folds.resize(static_cast<std::size_t>(grid[e].repetitions) * kFolds);
        for (int rep = 0; rep < grid[e].repetitions; ++rep) jobs.push_back({e, rep});
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker_fn = [&] {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size() || failed.load()) return;
            const Job job = jobs[j];
            try {
                auto results =
                    run_repetition(data, folds, grid[job.entry].spec, job.repetition, base_seed);
                for (int f = 0; f < kFolds; ++f)
                    reports[job.entry].folds[static_cast<std::size_t>(job.repetition) * kFolds +
                                             static_cast<std::size_t>(f)] = results[static_cast<std::size_t>(f)];
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed.store(true);
                return;
            }
        }
    };

    const int thread_count = std::max(1, workers);
    if (thread_count == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker_fn);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw ModelError(failure);

    for (auto& report : reports) aggregate_report(report, kFolds);
    return reports;
}

namespace {

json config_to_json(const AlgorithmConfig& config) {
    json j;
    if (const auto* svr = std::get_if<SvrConfig>(&config)) {
        j["c"] = svr->c_penalty;
        if (svr->gamma > 0) j["gamma"] = svr->gamma;
        else j["gamma"] = "auto";
        j["epsilon"] = svr->epsilon;
        j["tolerance"] = svr->tolerance;
        j["max_iterations"] = svr->max_iterations;
    } else if (const auto* knn = std::get_if<KnnConfig>(&config)) {
        j["k"] = knn->k;
        j["metric"] = metric_name(knn->metric);
        j["weights"] = weights_name(knn->weights);
    } else if (const auto* xt = std::get_if<ExtraTreesConfig>(&config)) {
        j["n_estimators"] = xt->n_estimators;
        j["criterion"] = criterion_name(xt->criterion);
        j["bootstrap"] = xt->bootstrap;
    } else if (const auto* mlp = std::get_if<MlpConfig>(&config)) {
        j["hidden_layers"] = mlp->hidden_layers;
        j["learning_rate"] = mlp->learning_rate;
        j["batch_size"] = mlp->batch_size;
        j["l2_alpha"] = mlp->l2_alpha;
        j["max_epochs"] = mlp->max_epochs;
        j["patience"] = mlp->patience;
    }
    return j;
}

AlgorithmConfig config_from_json(Algorithm algorithm, const json& j) {
    switch (algorithm) {
        case Algorithm::Svr: {
            SvrConfig cfg;
            cfg.c_penalty = j.value("c", cfg.c_penalty);
            if (j.contains("gamma") && j["gamma"].is_number()) cfg.gamma = j["gamma"];
            cfg.epsilon = j.value("epsilon", cfg.epsilon);
            cfg.tolerance = j.value("tolerance", cfg.tolerance);
            cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
            return cfg;
        }
        case Algorithm::Knn: {
            KnnConfig cfg;
            cfg.k = j.value("k", cfg.k);
            if (j.contains("metric"))
                cfg.metric = j["metric"] == "cosine" ? KnnMetric::Cosine : KnnMetric::Minkowski2;
            if (j.contains("weights"))
                cfg.weights = j["weights"] == "uniform" ? KnnWeights::Uniform
                                                        : KnnWeights::InverseDistance;
            return cfg;
        }
        case Algorithm::ExtraTrees: {
            ExtraTreesConfig cfg;
            cfg.n_estimators = j.value("n_estimators", cfg.n_estimators);
            if (j.contains("criterion"))
                cfg.criterion = j["criterion"] == "mae" ? SplitCriterion::Mae : SplitCriterion::Mse;
            cfg.bootstrap = j.value("bootstrap", cfg.bootstrap);
            return cfg;
        }
        case Algorithm::Mlp: {
            MlpConfig cfg;
            if (j.contains("hidden_layers"))
                cfg.hidden_layers = j["hidden_layers"].get<std::vector<int>>();
            cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
            cfg.batch_size = j.value("batch_size", cfg.batch_size);
            cfg.l2_alpha = j.value("l2_alpha", cfg.l2_alpha);
            cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
            cfg.patience = j.value("patience", cfg.patience);
            return cfg;
        }
    }
    throw DataError("unknown algorithm in spec JSON");
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "svr") return Algorithm::Svr;
    if (s == "knn") return Algorithm::Knn;
    if (s == "extratrees") return Algorithm::ExtraTrees;
    if (s == "mlp") return Algorithm::Mlp;
    throw DataError("unknown algorithm: " + s);
}

json bundle_to_json(const MetricBundle& b) {
    return {{"e_var", b.e_var}, {"mae", b.mae}, {"medae", b.medae}, {"mse", b.mse}, {"r2", b.r2}};
}

MetricBundle bundle_from_json(const json& j) {
    return {j.at("e_var"), j.at("mae"), j.at("medae"), j.at("mse"), j.at("r2")};
}

json spec_to_json(const ModelSpec& spec) {
    return {{"algorithm", to_string(spec.algorithm)},
            {"config", config_to_json(spec.config)},
            {"normalized", spec.normalized}};
}

ModelSpec spec_from_json(const json& j) {
    ModelSpec spec;
    spec.algorithm = algorithm_from_string(j.at("algorithm"));
    spec.config = config_from_json(spec.algorithm, j.value("config", json::object()));
    spec.normalized = j.value("normalized", false);
    return spec;
}

}  // namespace

std::string reports_to_json(const std::vector<ExperimentReport>& reports, bool with_timing) {
    json arr = json::array();
    for (const auto& r : reports) {
        json jr;
        jr["spec"] = spec_to_json(r.spec);
        jr["repetitions"] = r.repetitions;
        json folds = json::array();
        for (const auto& fr : r.folds) {
            json jf = bundle_to_json(fr.metrics);
            jf["repetition"] = fr.repetition;
            jf["fold"] = fr.fold;
            jf["train_time_s"] = with_timing ? fr.train_time_s : 0.0;
            jf["predict_time_s"] = with_timing ? fr.predict_time_s : 0.0;
            folds.push_back(std::move(jf));
        }
        jr["folds"] = std::move(folds);
        jr["macro_mean"] = bundle_to_json(r.macro_mean);
        if (r.macro_std) jr["macro_std"] = bundle_to_json(*r.macro_std);
        jr["train_time_s"] = {{"mean", with_timing ? r.train_time.mean : 0.0},
                              {"std", with_timing ? r.train_time.std : 0.0}};
        jr["predict_time_s"] = {{"mean", with_timing ? r.predict_time.mean : 0.0},
                                {"std", with_timing ? r.predict_time.std : 0.0}};
        arr.push_back(std::move(jr));
    }
    return arr.dump(2) + "\n";
}

std::vector<ExperimentReport> reports_from_json(const std::string& text) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("invalid results JSON: " + std::string(e.what()));
    }
    std::vector<ExperimentReport> reports;
    for (const auto& jr : arr) {
        ExperimentReport r;
        r.spec = spec_from_json(jr.at("spec"));
        r.repetitions = jr.value("repetitions", 1);
        for (const auto& jf : jr.at("folds")) {
            FoldResult fr;
            fr.repetition = jf.at("repetition");
            fr.fold = jf.at("fold");
            fr.metrics = bundle_from_json(jf);
            fr.train_time_s = jf.value("train_time_s", 0.0);
            fr.predict_time_s = jf.value("predict_time_s", 0.0);
            r.folds.push_back(fr);
        }
        r.macro_mean = bundle_from_json(jr.at("macro_mean"));
        if (jr.contains("macro_std")) r.macro_std = bundle_from_json(jr["macro_std"]);
        r.train_time = {jr.at("train_time_s").at("mean"), jr.at("train_time_s").at("std")};
        r.predict_time = {jr.at("predict_time_s").at("mean"), jr.at("predict_time_s").at("std")};
        reports.push_back(std::move(r));
    }
    return reports;
}

std::string reports_to_csv(const std::vector<ExperimentReport>& reports) {
    std::ostringstream out;
    out << "algorithm,config,normalized,repetition,fold,e_var,mae,medae,mse,r2,"
           "train_time_s,predict_time_s\n";
    out.precision(17);
    for (const auto& r : reports) {
        for (const auto& fr : r.folds) {
            out << to_string(r.spec.algorithm) << ",\"" << config_label(r.spec.config) << "\","
                << (r.spec.normalized ? "true" : "false") << "," << fr.repetition << "," << fr.fold
                << "," << fr.metrics.e_var << "," << fr.metrics.mae << "," << fr.metrics.medae
                << "," << fr.metrics.mse << "," << fr.metrics.r2 << "," << fr.train_time_s << ","
                << fr.predict_time_s << "\n";
        }
    }
    return out.str();
}

std::vector<GridEntry> grid_from_json(const std::string& text) {
    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("invalid spec JSON: " + std::string(e.what()));
    }
    json arr = parsed.is_array() ? parsed : json::array({parsed});
    std::vector<GridEntry> grid;
    for (const auto& j : arr) {
        GridEntry entry;
        entry.spec = spec_from_json(j);
        const bool stochastic = entry.spec.algorithm == Algorithm::ExtraTrees ||
                                entry.spec.algorithm == Algorithm::Mlp;
        entry.repetitions = j.value("repetitions", stochastic ? 30 : 1);
        grid.push_back(entry);
    }
    return grid;
}

std::vector<OpportunityFlag> flag_opportunities(const std::vector<std::string>& ids,
                                                const std::vector<double>& listed_millions,
                                                const std::vector<double>& predicted_millions,
                                                double tau) {
    if (tau <= 0.0 || tau >= 1.0) throw DataError("tau must lie in (0, 1)");
    if (ids.size() != listed_millions.size() || ids.size() != predicted_millions.size())
        throw DataError("flag inputs must have equal lengths");
    std::vector<OpportunityFlag> flags(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto& f = flags[i];
        f.id = ids[i];
        f.listed_millions = listed_millions[i];
        f.predicted_millions = predicted_millions[i];
        f.discount = f.predicted_millions != 0.0
                         ? (f.predicted_millions - f.listed_millions) / f.predicted_millions
                         : 0.0;
        f.flagged = f.discount >= tau;
    }
    std::stable_sort(flags.begin(), flags.end(),
                     [](const OpportunityFlag& a, const OpportunityFlag& b) {
                         return a.discount > b.discount;
                     });
    return flags;
}

}  // namespace propml
