#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "propml/dataset.hpp"
#include "propml/extratrees.hpp"
#include "propml/knn.hpp"
#include "propml/metrics.hpp"
#include "propml/mlp.hpp"
#include "propml/svr.hpp"

namespace propml {

enum class Algorithm { Svr, Knn, ExtraTrees, Mlp };

std::string to_string(Algorithm a);

using AlgorithmConfig = std::variant<SvrConfig, KnnConfig, ExtraTreesConfig, MlpConfig>;

struct ModelSpec {
    Algorithm algorithm = Algorithm::Svr;
    AlgorithmConfig config = SvrConfig{};
    bool normalized = false;

    std::string label() const;        // canonical one-line description
    std::uint64_t stable_id() const;  // hash of the label; order-independent seeding
};

struct CvPlan {
    int n_folds = 5;
    std::uint64_t shuffle_seed = 0;
    int repetitions = 1;
};

// Seeded shuffle, then contiguous slices; the first n%k folds carry the
// extra row. Throws TooFewRows when n < n_folds.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n_rows, std::uint64_t seed,
                                                 int n_folds = 5);

struct GridEntry {
    ModelSpec spec;
    int repetitions = 1;
};

// The full hyperparameter grid: 1 SVR, 16 k-NN, 12 extra-trees and 3 MLP
// configurations, each with and without normalization; the stochastic
// families carry 30 repetitions.
std::vector<GridEntry> enumerate_grid();

// One configuration per algorithm at desk scale (shorter MLP budget,
// 5 repetitions for the stochastic families).
std::vector<GridEntry> reduced_grid();

struct GridTotals {
    std::size_t svr = 0, knn = 0, extratrees = 0, mlp = 0;
    std::size_t total() const { return svr + knn + extratrees + mlp; }
};

// Experiment counts: per-fold runs times repetitions, per algorithm.
GridTotals grid_totals(const std::vector<GridEntry>& grid, int n_folds = 5);

struct FoldResult {
    int repetition = 0;
    int fold = 0;
    MetricBundle metrics;
    double train_time_s = 0.0;
    double predict_time_s = 0.0;
};

struct TimeSummary {
    double mean = 0.0;
    double std = 0.0;
};

struct ExperimentReport {
    ModelSpec spec;
    int repetitions = 1;
    std::vector<FoldResult> folds;  // repetition-major, fold-minor
    MetricBundle macro_mean;        // mean over folds, then over repetitions
    std::optional<MetricBundle> macro_std;  // only for repeated specs
    TimeSummary train_time;
    TimeSummary predict_time;
};

// Type-erased fitted regressor handle used by the runner.
struct FittedModel;

ExperimentReport run_experiment(const FeatureMatrix& data, const ModelSpec& spec,
                                const CvPlan& plan, std::uint64_t base_seed);

// Runs every entry using up to `workers` threads. Jobs are keyed by
// (entry, repetition) and merged by coordinate, so the output is identical
// for any worker count.
std::vector<ExperimentReport> run_grid(const FeatureMatrix& data,
                                       const std::vector<GridEntry>& grid,
                                       std::uint64_t base_seed, int workers);

std::string reports_to_json(const std::vector<ExperimentReport>& reports, bool with_timing);
std::vector<ExperimentReport> reports_from_json(const std::string& text);
std::string reports_to_csv(const std::vector<ExperimentReport>& reports);

// Parses either one spec object or an array of them.
std::vector<GridEntry> grid_from_json(const std::string& text);

struct OpportunityFlag {
    std::string id;
    double listed_millions = 0.0;
    double predicted_millions = 0.0;
    double discount = 0.0;  // (predicted - listed) / predicted
    bool flagged = false;
};

// Flags listings whose predicted value exceeds the listed price by at least
// tau (relative); sorted by descending discount.
std::vector<OpportunityFlag> flag_opportunities(const std::vector<std::string>& ids,
                                                const std::vector<double>& listed_millions,
                                                const std::vector<double>& predicted_millions,
                                                double tau);

}  // namespace propml
