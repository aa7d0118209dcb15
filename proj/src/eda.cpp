#include "propml/eda.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "propml/errors.hpp"
#include "propml/linalg.hpp"
#include "propml/stats.hpp"

namespace propml {
namespace eda {

CorrelationMatrix correlation_matrix(const FeatureMatrix& m, const std::vector<std::string>& vars) {
    const std::size_t v = vars.size();
    std::vector<std::vector<double>> cols(v);
    std::vector<ColumnKind> kinds(v);
    for (std::size_t a = 0; a < v; ++a) {
        if (vars[a] == "price") {
            cols[a] = m.target;
            kinds[a] = ColumnKind::Continuous;
            continue;
        }
        const int j = m.column_index(vars[a]);
        if (j < 0) throw DataError("unknown variable: " + vars[a]);
        cols[a].resize(m.n_rows());
        for (std::size_t i = 0; i < m.n_rows(); ++i)
            cols[a][i] = m.values.at(i, static_cast<std::size_t>(j));
        kinds[a] = m.columns[static_cast<std::size_t>(j)].kind;
    }
    for (std::size_t a = 0; a < v; ++a)
        if (stats::variance(cols[a]) == 0.0) throw ZeroVariance(vars[a]);

    CorrelationMatrix out;
    out.names = vars;
    out.coefficients = Matrix(v, v);
    out.methods.assign(v * v, CorrMethod::Pearson);
    for (std::size_t a = 0; a < v; ++a) {
        out.coefficients.at(a, a) = 1.0;
        for (std::size_t b = a + 1; b < v; ++b) {
            const double r = stats::pearson(cols[a], cols[b]);
            out.coefficients.at(a, b) = r;
            out.coefficients.at(b, a) = r;
            const bool biserial = (kinds[a] == ColumnKind::Binary) != (kinds[b] == ColumnKind::Binary);
            const CorrMethod method = biserial ? CorrMethod::PointBiserial : CorrMethod::Pearson;
            out.methods[a * v + b] = method;
            out.methods[b * v + a] = method;
        }
    }
    return out;
}

PolyFit poly_fit(const std::vector<double>& x, const std::vector<double>& y, int order) {
    if (order < 1 || order > 3) throw DataError("poly_fit supports orders 1..3");
    const std::size_t n = x.size();
    if (n != y.size() || n <= static_cast<std::size_t>(order) + 1)
        throw TooFewRows(n, static_cast<std::size_t>(order) + 2);
    {
        std::vector<double> distinct(x);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < static_cast<std::size_t>(order) + 1)
            throw RankDeficient("need at least order+1 distinct x values");
    }

    // Fit on centred/scaled x to keep the normal equations conditioned, then
    // expand the polynomial back to the raw basis.
    const double mx = stats::mean(x);
    double sx = std::sqrt(stats::variance(x));
    if (sx == 0.0) sx = 1.0;

    const std::size_t k = static_cast<std::size_t>(order) + 1;
    Matrix design(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (x[i] - mx) / sx;
        double pow_z = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            design.at(i, j) = pow_z;
            pow_z *= z;
        }
    }
    Matrix xtx = linalg::transpose_times_self(design);
    std::vector<double> xty = linalg::transpose_times(design, y);
    std::vector<double> a;
    try {
        a = linalg::solve(std::move(xtx), std::move(xty));
    } catch (const Singular&) {
        throw RankDeficient("normal equations are singular");
    }

    // sum_k a_k ((x - mx)/sx)^k expanded into powers of x.
    std::vector<double> coef(k, 0.0);
    for (std::size_t deg = 0; deg < k; ++deg) {
        std::vector<double> term = {1.0};  // (x - mx)^deg, built up iteratively
        for (std::size_t d = 0; d < deg; ++d) {
            std::vector<double> next(term.size() + 1, 0.0);
            for (std::size_t j = 0; j < term.size(); ++j) {
                next[j + 1] += term[j];
                next[j] += term[j] * (-mx);
            }
            term = std::move(next);
        }
        const double scale = a[deg] / std::pow(sx, static_cast<double>(deg));
        for (std::size_t j = 0; j < term.size(); ++j) coef[j] += scale * term[j];
    }

    PolyFit fit;
    fit.coefficients = std::move(coef);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    const double ybar = stats::mean(y);
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        double pow_x = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            pred += fit.coefficients[j] * pow_x;
            pow_x *= x[i];
        }
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    if (ss_tot == 0.0) throw ZeroVariance("targets are constant");
    fit.r2 = 1.0 - ss_res / ss_tot;
    return fit;
}

OlsFit ols(const Matrix& x, const std::vector<double>& y, std::vector<std::string> names) {
    const std::size_t n = x.rows;
    const std::size_t k = x.cols;
    if (n <= k) throw Underdetermined(n, k);
    if (y.size() != n) throw DataError("target length does not match design rows");

    Matrix xtx = linalg::transpose_times_self(x);
    const Matrix xtx_inv = linalg::inverse(std::move(xtx));

    OlsFit fit;
    fit.n = n;
    fit.k = k;
    fit.names = std::move(names);
    if (fit.names.empty())
        for (std::size_t j = 0; j < k; ++j) fit.names.push_back("x" + std::to_string(j));

    fit.beta = linalg::times(xtx_inv, linalg::transpose_times(x, y));

    fit.residuals.resize(n);
    const std::vector<double> fitted = linalg::times(x, fit.beta);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = y[i] - fitted[i];
        ss_res += fit.residuals[i] * fit.residuals[i];
    }
    const double ybar = stats::mean(y);
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - ybar) * (v - ybar);
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;

    // Leverages h_i = x_i (X^T X)^{-1} x_i^T.
    fit.leverage.resize(n);
    std::vector<double> tmp(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        for (std::size_t a = 0; a < k; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < k; ++b) s += xtx_inv.at(a, b) * row[b];
            tmp[a] = s;
        }
        double h = 0.0;
        for (std::size_t a = 0; a < k; ++a) h += row[a] * tmp[a];
        fit.leverage[i] = h;
    }

    const double dof = static_cast<double>(n - k);
    const double sigma2 = ss_res / dof;
    fit.se_nonrobust.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        fit.se_nonrobust[j] = std::sqrt(sigma2 * xtx_inv.at(j, j));

    // Sandwich diag(w_i) variants: HC0 w=e^2, HC2 w=e^2/(1-h), HC3 w=e^2/(1-h)^2.
    auto sandwich_se = [&](const std::vector<double>& w) {
        Matrix meat(k, k);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(i);
            for (std::size_t a = 0; a < k; ++a) {
                if (row[a] == 0.0) continue;
                const double wa = w[i] * row[a];
                for (std::size_t b = a; b < k; ++b) meat.at(a, b) += wa * row[b];
            }
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b) meat.at(a, b) = meat.at(b, a);
        const Matrix cov = linalg::multiply(linalg::multiply(xtx_inv, meat), xtx_inv);
        std::vector<double> se(k);
        for (std::size_t j = 0; j < k; ++j) se[j] = std::sqrt(cov.at(j, j));
        return se;
    };

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = fit.residuals[i] * fit.residuals[i];
    fit.se_hc0 = sandwich_se(w);

    const double hc1_scale = std::sqrt(static_cast<double>(n) / dof);
    fit.se_hc1.resize(k);
    for (std::size_t j = 0; j < k; ++j) fit.se_hc1[j] = fit.se_hc0[j] * hc1_scale;

    for (std::size_t i = 0; i < n; ++i)
        w[i] = fit.residuals[i] * fit.residuals[i] / (1.0 - fit.leverage[i]);
    fit.se_hc2 = sandwich_se(w);

    for (std::size_t i = 0; i < n; ++i) w[i] /= (1.0 - fit.leverage[i]);
    fit.se_hc3 = sandwich_se(w);

    fit.p_values.resize(k);
    fit.stars.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double t = fit.beta[j] / fit.se_nonrobust[j];
        const double p = linalg::student_t_p_value(t, dof);
        fit.p_values[j] = p;
        fit.stars[j] = p < 0.01 ? "***" : p < 0.05 ? "**" : p < 0.1 ? "*" : "";
    }
    return fit;
}

OlsDesign build_ols_design(const FeatureMatrix& m) {
    // Last category of every one-hot block is dropped so blocks that always
    // sum to one stay identified against the intercept.
    std::map<std::string, std::size_t> last_of_block;
    for (std::size_t j = 0; j < m.columns.size(); ++j)
        if (m.columns[j].is_one_hot()) last_of_block[m.columns[j].source] = j;

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
        const auto& col = m.columns[j];
        if (col.is_one_hot() && last_of_block[col.source] == j) continue;
        double first = m.values.at(0, j);
        bool constant = true;
        for (std::size_t i = 1; i < m.n_rows() && constant; ++i)
            constant = m.values.at(i, j) == first;
        if (constant) continue;
        keep.push_back(j);
    }

    OlsDesign design;
    design.names.push_back("intercept");
    for (auto j : keep) design.names.push_back(m.columns[j].name);
    design.x = Matrix(m.n_rows(), keep.size() + 1);
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        design.x.at(i, 0) = 1.0;
        for (std::size_t c = 0; c < keep.size(); ++c)
            design.x.at(i, c + 1) = m.values.at(i, keep[c]);
    }
    return design;
}

std::vector<DistributionSummary> zone_summaries(const std::vector<RawListing>& listings,
                                                SummaryField field) {
    std::map<int, std::vector<double>> groups;
    for (const auto& l : listings) {
        const double v = field == SummaryField::Price ? l.price_eur / 1e6 : l.constructed_area_sqm;
        groups[l.zone].push_back(v);
    }
    std::vector<DistributionSummary> out;
    for (auto& [zone, values] : groups) {
        std::sort(values.begin(), values.end());
        DistributionSummary s;
        s.zone = zone;
        s.min = values.front();
        s.q1 = stats::quantile_sorted(values, 0.25);
        s.median = stats::quantile_sorted(values, 0.5);
        s.q3 = stats::quantile_sorted(values, 0.75);
        s.max = values.back();
        s.mean = stats::mean(values);
        out.push_back(s);
    }
    return out;
}

}  // namespace eda
}  // namespace propml
