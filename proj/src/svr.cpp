#include "propml/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "propml/errors.hpp"

namespace propml {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct Smo {
    const Matrix& x;
    const std::vector<double>& y;
    const double c;
    const double eps;
    const double gamma;
    const std::size_t n;

    std::vector<double> beta;
    std::vector<double> grad;  // (K beta)_i, maintained incrementally
    std::vector<double> col_i, col_j;

    Smo(const Matrix& x, const std::vector<double>& y, double c, double eps, double gamma)
        : x(x), y(y), c(c), eps(eps), gamma(gamma), n(x.rows),
          beta(n, 0.0), grad(n, 0.0), col_i(n), col_j(n) {}

    void kernel_column(std::size_t i, std::vector<double>& out) const {
        const auto xi = x.row(i);
        for (std::size_t j = 0; j < n; ++j)
            out[j] = std::exp(-gamma * squared_distance(xi, x.row(j)));
    }

    // Derivative of the dual objective along +e_i (requires beta_i < C).
    double d_up(std::size_t i) const {
        return grad[i] - y[i] + (beta[i] >= 0.0 ? eps : -eps);
    }
    // Derivative along -e_j (requires beta_j > -C).
    double d_down(std::size_t j) const {
        return y[j] - grad[j] + (beta[j] > 0.0 ? -eps : eps);
    }

    // Most violating feasible pair; returns violation magnitude (<= 0 means optimal).
    double select_pair(std::size_t& out_i, std::size_t& out_j) const {
        const double bound = c * (1.0 - 1e-12);
        std::size_t up1 = n, up2 = n, dn1 = n, dn2 = n;
        double up1_v = kInf, up2_v = kInf, dn1_v = kInf, dn2_v = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (beta[i] < bound) {
                const double v = d_up(i);
                if (v < up1_v) {
                    up2_v = up1_v;
                    up2 = up1;
                    up1_v = v;
                    up1 = i;
                } else if (v < up2_v) {
                    up2_v = v;
                    up2 = i;
                }
            }
            if (beta[i] > -bound) {
                const double v = d_down(i);
                if (v < dn1_v) {
                    dn2_v = dn1_v;
                    dn2 = dn1;
                    dn1_v = v;
                    dn1 = i;
                } else if (v < dn2_v) {
                    dn2_v = v;
                    dn2 = i;
                }
            }
        }
        if (up1 == n || dn1 == n) return 0.0;
        if (up1 != dn1) {
            out_i = up1;
            out_j = dn1;
            return -(up1_v + dn1_v);
        }
        // The two argmins collided; the best pair uses a second-place entry.
        const double via_dn2 = dn2 == n ? -kInf : -(up1_v + dn2_v);
        const double via_up2 = up2 == n ? -kInf : -(up2_v + dn1_v);
        if (via_dn2 >= via_up2) {
            out_i = up1;
            out_j = dn2;
            return via_dn2;
        }
        out_i = up2;
        out_j = dn1;
        return via_up2;
    }

    // Change in the dual objective when beta_i += delta, beta_j -= delta.
    double objective_delta(std::size_t i, std::size_t j, double eta, double delta) const {
        const double linear = grad[i] - grad[j] - y[i] + y[j];
        return delta * linear + 0.5 * eta * delta * delta +
               eps * (std::abs(beta[i] + delta) - std::abs(beta[i])) +
               eps * (std::abs(beta[j] - delta) - std::abs(beta[j]));
    }

    // Exact minimizer of the piecewise-quadratic subproblem over the box.
    double solve_pair(std::size_t i, std::size_t j) {
        kernel_column(i, col_i);
        kernel_column(j, col_j);
        double eta = col_i[i] + col_j[j] - 2.0 * col_i[j];
        if (eta < 1e-12) eta = 1e-12;

        const double lo = std::max(-c - beta[i], beta[j] - c);
        const double hi = std::min(c - beta[i], beta[j] + c);

        const double linear = grad[i] - grad[j] - y[i] + y[j];
        double candidates[8];
        std::size_t n_cand = 0;
        candidates[n_cand++] = lo;
        candidates[n_cand++] = hi;
        candidates[n_cand++] = -beta[i];  // kink of |beta_i + delta|
        candidates[n_cand++] = beta[j];   // kink of |beta_j - delta|
        for (const double si : {-1.0, 1.0})
            for (const double sj : {-1.0, 1.0})
                candidates[n_cand++] = -(linear + eps * (si - sj)) / eta;

        double best_delta = 0.0;
        double best_obj = 0.0;
        for (std::size_t k = 0; k < n_cand; ++k) {
            const double delta = std::clamp(candidates[k], lo, hi);
            const double obj = objective_delta(i, j, eta, delta);
            if (obj < best_obj) {
                best_obj = obj;
                best_delta = delta;
            }
        }
        if (best_delta == 0.0) return 0.0;

        beta[i] += best_delta;
        beta[j] -= best_delta;
        for (std::size_t r = 0; r < n; ++r) grad[r] += best_delta * (col_i[r] - col_j[r]);
        return best_delta;
    }

    double compute_bias() const {
        const double tol_b = 1e-10 * c;
        double lo = -kInf;
        double hi = kInf;
        double free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double margin = y[i] - grad[i];
            if (std::abs(beta[i]) <= tol_b) {
                lo = std::max(lo, margin - eps);
                hi = std::min(hi, margin + eps);
            } else if (beta[i] >= c - tol_b) {
                hi = std::min(hi, margin - eps);
            } else if (beta[i] <= -c + tol_b) {
                lo = std::max(lo, margin + eps);
            } else if (beta[i] > 0.0) {
                free_sum += margin - eps;
                ++free_count;
            } else {
                free_sum += margin + eps;
                ++free_count;
            }
        }
        if (free_count > 0) return free_sum / static_cast<double>(free_count);
        if (lo == -kInf && hi == kInf) return 0.0;
        if (lo == -kInf) return hi;
        if (hi == kInf) return lo;
        return 0.5 * (lo + hi);
    }

    double objective() const {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            obj += 0.5 * beta[i] * grad[i] + eps * std::abs(beta[i]) - y[i] * beta[i];
        return obj;
    }
};

}  // namespace

SvrModel::SvrModel(const Matrix& train, const std::vector<double>& targets, SvrConfig cfg)
    : cfg_(cfg) {
    if (train.rows == 0 || train.cols == 0) throw EmptyTrainingSet();
    if (targets.size() != train.rows) throw DimensionMismatch(targets.size(), train.rows);
    gamma_ = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(train.cols);

    Smo smo(train, targets, cfg.c_penalty, cfg.epsilon, gamma_);
    converged_ = false;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        std::size_t i = 0;
        std::size_t j = 0;
        const double violation = smo.select_pair(i, j);
        if (violation < cfg.tolerance) {
            converged_ = true;
            break;
        }
        smo.solve_pair(i, j);
    }
    iterations_ = it;

    bias_ = smo.compute_bias();
    dual_objective_ = smo.objective();
    beta_ = smo.beta;

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < train.rows; ++i)
        if (beta_[i] != 0.0) sv.push_back(i);
    sv_rows_ = train.take_rows(sv);
    sv_beta_.reserve(sv.size());
    for (auto i : sv) sv_beta_.push_back(beta_[i]);
}

double SvrModel::predict_one(std::span<const double> row) const {
    if (row.size() != sv_rows_.cols) throw DimensionMismatch(row.size(), sv_rows_.cols);
    double f = bias_;
    for (std::size_t s = 0; s < sv_rows_.rows; ++s)
        f += sv_beta_[s] * std::exp(-gamma_ * squared_distance(sv_rows_.row(s), row));
    return f;
}

std::vector<double> SvrModel::predict(const Matrix& queries) const {
    if (queries.cols != sv_rows_.cols) throw DimensionMismatch(queries.cols, sv_rows_.cols);
    std::vector<double> out(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i) out[i] = predict_one(queries.row(i));
    return out;
}

SvrModel svr_fit(const Matrix& train, const std::vector<double>& targets, const SvrConfig& cfg) {
    return SvrModel(train, targets, cfg);
}

}  // namespace propml
