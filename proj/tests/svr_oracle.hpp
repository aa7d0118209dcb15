#pragma once

// Test-only reference solver for the epsilon-SVR dual: accelerated projected
// gradient on the smooth (alpha, alpha*) formulation, with the box/sum
// constraint handled by bisection on the projection shift. Independent of
// the production pairwise solver.

#include <algorithm>
#include <cmath>
#include <vector>

#include "propml/matrix.hpp"
#include "propml/svr.hpp"

namespace testutil {

inline propml::Matrix rbf_kernel(const propml::Matrix& x, double gamma) {
    propml::Matrix k(x.rows, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.rows; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < x.cols; ++c) {
                const double d = x.at(i, c) - x.at(j, c);
                d2 += d * d;
            }
            k.at(i, j) = std::exp(-gamma * d2);
        }
    }
    return k;
}

class SvrPgOracle {
public:
    SvrPgOracle(const propml::Matrix& kernel, const std::vector<double>& y, double c_penalty,
                double epsilon)
        : kernel_(kernel), y_(y), c_(c_penalty), eps_(epsilon), n_(y.size()),
          alpha_(n_, 0.0), alpha_star_(n_, 0.0) {}

    double solve(int iterations) {
        const double step = 1.0 / (2.0 * static_cast<double>(n_));
        std::vector<double> xa = alpha_, xs = alpha_star_;
        std::vector<double> ya = alpha_, ys = alpha_star_;
        double t = 1.0;
        double best = objective(xa, xs);
        std::vector<double> beta(n_), grad(n_);
        for (int it = 0; it < iterations; ++it) {
            for (std::size_t i = 0; i < n_; ++i) beta[i] = ya[i] - ys[i];
            for (std::size_t i = 0; i < n_; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n_; ++j) s += kernel_.at(i, j) * beta[j];
                grad[i] = s;
            }
            std::vector<double> na(n_), ns(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                na[i] = ya[i] - step * (grad[i] + eps_ - y_[i]);
                ns[i] = ys[i] - step * (-grad[i] + eps_ + y_[i]);
            }
            project(na, ns);
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double momentum = (t - 1.0) / t_next;
            for (std::size_t i = 0; i < n_; ++i) {
                ya[i] = na[i] + momentum * (na[i] - xa[i]);
                ys[i] = ns[i] + momentum * (ns[i] - xs[i]);
            }
            const double obj = objective(na, ns);
            if (obj > best) {  // restart momentum on an overshoot
                ya = na;
                ys = ns;
                t = 1.0;
            } else {
                t = t_next;
                best = obj;
            }
            xa = std::move(na);
            xs = std::move(ns);
        }
        alpha_ = xa;
        alpha_star_ = xs;
        return objective(alpha_, alpha_star_);
    }

private:
    double objective(const std::vector<double>& a, const std::vector<double>& as) const {
        std::vector<double> beta(n_);
        for (std::size_t i = 0; i < n_; ++i) beta[i] = a[i] - as[i];
        double quad = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += kernel_.at(i, j) * beta[j];
            quad += beta[i] * s;
        }
        double linear = 0.0;
        for (std::size_t i = 0; i < n_; ++i) linear += eps_ * (a[i] + as[i]) - y_[i] * beta[i];
        return 0.5 * quad + linear;
    }

    void project(std::vector<double>& a, std::vector<double>& as) const {
        double lo = -2.0 * c_ - 10.0;
        double hi = 2.0 * c_ + 10.0;
        for (double v : a) {
            lo = std::min(lo, -std::abs(v) - 1.0);
            hi = std::max(hi, std::abs(v) + 1.0);
        }
        auto gap = [&](double lambda) {
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                s += std::clamp(a[i] - lambda, 0.0, c_);
                s -= std::clamp(as[i] + lambda, 0.0, c_);
            }
            return s;
        };
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (gap(mid) > 0.0) lo = mid;
            else hi = mid;
        }
        const double lambda = 0.5 * (lo + hi);
        for (std::size_t i = 0; i < n_; ++i) {
            a[i] = std::clamp(a[i] - lambda, 0.0, c_);
            as[i] = std::clamp(as[i] + lambda, 0.0, c_);
        }
    }

    const propml::Matrix& kernel_;
    const std::vector<double>& y_;
    double c_;
    double eps_;
    std::size_t n_;
    std::vector<double> alpha_, alpha_star_;
};

// Worst KKT violation over the training set given fitted f(x) values.
inline double svr_max_kkt_residual(const propml::SvrModel& model,
                                   const std::vector<double>& fitted,
                                   const std::vector<double>& y, double c_penalty,
                                   double epsilon) {
    const double at_bound = 1e-8 * c_penalty;
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double beta = model.beta()[i];
        const double phi = y[i] - fitted[i];
        double violation = 0.0;
        if (std::abs(beta) <= at_bound) violation = std::max(0.0, std::abs(phi) - epsilon);
        else if (beta >= c_penalty - at_bound) violation = std::max(0.0, epsilon - phi);
        else if (beta <= -c_penalty + at_bound) violation = std::max(0.0, phi + epsilon);
        else if (beta > 0.0) violation = std::abs(phi - epsilon);
        else violation = std::abs(phi + epsilon);
        worst = std::max(worst, violation);
    }
    return worst;
}

}  // namespace testutil
