#pragma once

#include <span>
#include <vector>

namespace propml {

struct PredictionSet {
    std::vector<double> y_true;
    std::vector<double> y_pred;
};

struct MetricBundle {
    double e_var = 0.0;
    double mae = 0.0;
    double medae = 0.0;
    double mse = 0.0;
    double r2 = 0.0;
};

namespace metrics {

// 1 - Var{y - yhat} / Var{y}, population variances. Throws ZeroVariance
// when the targets are constant.
double explained_variance(const PredictionSet& p);

double mean_absolute_error(const PredictionSet& p);

// Median of |y_i - yhat_i|; even counts average the two central values.
double median_absolute_error(const PredictionSet& p);

double mean_squared_error(const PredictionSet& p);

// 1 - sum (y - yhat)^2 / sum (y - ybar)^2. Throws ZeroVariance.
double r2(const PredictionSet& p);

MetricBundle all(const PredictionSet& p);

}  // namespace metrics
}  // namespace propml
