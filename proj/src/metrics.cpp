#include "propml/metrics.hpp"

#include <cmath>

#include "propml/errors.hpp"
#include "propml/stats.hpp"

namespace propml {
namespace metrics {

namespace {

void check(const PredictionSet& p) {
    if (p.y_true.empty() || p.y_true.size() != p.y_pred.size())
        throw DataError("prediction set needs equal, nonzero lengths");
}

}  // namespace

double explained_variance(const PredictionSet& p) {
    check(p);
    std::vector<double> residuals(p.y_true.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) residuals[i] = p.y_true[i] - p.y_pred[i];
    const double var_y = stats::variance(p.y_true);
    if (var_y == 0.0) throw ZeroVariance("targets are constant");
    return 1.0 - stats::variance(residuals) / var_y;
}

double mean_absolute_error(const PredictionSet& p) {
    check(p);
    double s = 0.0;
    for (std::size_t i = 0; i < p.y_true.size(); ++i) s += std::abs(p.y_true[i] - p.y_pred[i]);
    return s / static_cast<double>(p.y_true.size());
}

double median_absolute_error(const PredictionSet& p) {
    check(p);
    std::vector<double> abs_err(p.y_true.size());
    for (std::size_t i = 0; i < abs_err.size(); ++i)
        abs_err[i] = std::abs(p.y_true[i] - p.y_pred[i]);
    return stats::median(std::move(abs_err));
}

double mean_squared_error(const PredictionSet& p) {
    check(p);
    double s = 0.0;
    for (std::size_t i = 0; i < p.y_true.size(); ++i) {
        const double e = p.y_true[i] - p.y_pred[i];
        s += e * e;
    }
    return s / static_cast<double>(p.y_true.size());
}

double r2(const PredictionSet& p) {
    check(p);
    const double ybar = stats::mean(p.y_true);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < p.y_true.size(); ++i) {
        const double r = p.y_true[i] - p.y_pred[i];
        const double d = p.y_true[i] - ybar;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) throw ZeroVariance("targets are constant");
    return 1.0 - ss_res / ss_tot;
}

MetricBundle all(const PredictionSet& p) {
    return {explained_variance(p), mean_absolute_error(p), median_absolute_error(p),
            mean_squared_error(p), r2(p)};
}

}  // namespace metrics
}  // namespace propml
