#pragma once

#include <string>
#include <vector>

#include "propml/dataset.hpp"
#include "propml/listing.hpp"
#include "propml/matrix.hpp"

namespace propml {
namespace eda {

enum class CorrMethod { Pearson, PointBiserial };

struct CorrelationMatrix {
    std::vector<std::string> names;
    Matrix coefficients;          // symmetric, unit diagonal
    std::vector<CorrMethod> methods;  // row-major, parallel to coefficients

    CorrMethod method(std::size_t i, std::size_t j) const {
        return methods[i * names.size() + j];
    }
};

// Pearson between continuous pairs, point-biserial when a 0/1 column meets a
// continuous one (same algebra on the coded values). `vars` selects columns
// of m by name; the pseudo-name "price" selects the target.
CorrelationMatrix correlation_matrix(const FeatureMatrix& m, const std::vector<std::string>& vars);

struct PolyFit {
    std::vector<double> coefficients;  // coefficients[j] multiplies x^j
    double r2 = 0.0;
};

// Least-squares polynomial fit of order 1..3 on the (internally centred)
// basis, reported in the raw basis.
PolyFit poly_fit(const std::vector<double>& x, const std::vector<double>& y, int order);

struct OlsFit {
    std::vector<std::string> names;
    std::vector<double> beta;
    std::vector<double> residuals;
    std::vector<double> se_nonrobust;
    std::vector<double> se_hc0;
    std::vector<double> se_hc1;
    std::vector<double> se_hc2;
    std::vector<double> se_hc3;
    std::vector<double> p_values;  // two-sided t, nonrobust errors
    std::vector<std::string> stars;  // "***" p<0.01, "**" p<0.05, "*" p<0.1
    std::vector<double> leverage;
    std::size_t n = 0;
    std::size_t k = 0;
    double r2 = 0.0;
};

// OLS with the White-family covariance estimators. The design matrix must
// already contain the intercept and any dummy columns.
OlsFit ols(const Matrix& x, const std::vector<double>& y, std::vector<std::string> names = {});

struct OlsDesign {
    Matrix x;
    std::vector<std::string> names;
};

// Intercept + native columns + one-hot blocks with the last category of each
// block dropped; constant columns are pruned.
OlsDesign build_ols_design(const FeatureMatrix& m);

struct DistributionSummary {
    int zone = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

enum class SummaryField { Price, ConstructedArea };

// One summary per zone present in the data; price reported in millions.
std::vector<DistributionSummary> zone_summaries(const std::vector<RawListing>& listings,
                                                SummaryField field);

}  // namespace eda
}  // namespace propml
