#include "propml/linalg.hpp"

#include <cmath>

#include "propml/errors.hpp"

namespace propml {
namespace linalg {

namespace {
constexpr double kPivotEps = 1e-12;
}

std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw Singular("solve needs a square system");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a.at(r, col)) > best) {
                best = std::abs(a.at(r, col));
                pivot = r;
            }
        }
        if (best < kPivotEps) throw Singular("pivot " + std::to_string(col) + " vanished");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a.at(pivot, c), a.at(col, c));
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) / a.at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a.at(i, c) * x[c];
        x[i] = s / a.at(i, i);
    }
    return x;
}

Matrix inverse(Matrix a) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw Singular("inverse needs a square matrix");
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv.at(i, i) = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a.at(r, col)) > best) {
                best = std::abs(a.at(r, col));
                pivot = r;
            }
        }
        if (best < kPivotEps) throw Singular("pivot " + std::to_string(col) + " vanished");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a.at(pivot, c), a.at(col, c));
                std::swap(inv.at(pivot, c), inv.at(col, c));
            }
        }
        const double d = a.at(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a.at(col, c) /= d;
            inv.at(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a.at(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a.at(r, c) -= f * a.at(col, c);
                inv.at(r, c) -= f * inv.at(col, c);
            }
        }
    }
    return inv;
}

Matrix transpose_times_self(const Matrix& x) {
    Matrix out(x.cols, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        for (std::size_t a = 0; a < x.cols; ++a) {
            if (row[a] == 0.0) continue;
            for (std::size_t b = a; b < x.cols; ++b) out.at(a, b) += row[a] * row[b];
        }
    }
    for (std::size_t a = 0; a < x.cols; ++a)
        for (std::size_t b = 0; b < a; ++b) out.at(a, b) = out.at(b, a);
    return out;
}

std::vector<double> transpose_times(const Matrix& x, const std::vector<double>& v) {
    std::vector<double> out(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        for (std::size_t c = 0; c < x.cols; ++c) out[c] += row[c] * v[i];
    }
    return out;
}

std::vector<double> times(const Matrix& x, const std::vector<double>& v) {
    std::vector<double> out(x.rows, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        double s = 0.0;
        for (std::size_t c = 0; c < x.cols; ++c) s += row[c] * v[c];
        out[i] = s;
    }
    return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double v = a.at(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += v * b.at(k, j);
        }
    }
    return out;
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_p_value(double t, double dof) {
    const double x = dof / (dof + t * t);
    return incomplete_beta(dof / 2.0, 0.5, x);
}

}  // namespace linalg
}  // namespace propml
