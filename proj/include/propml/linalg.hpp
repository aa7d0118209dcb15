#pragma once

#include <vector>

#include "propml/matrix.hpp"

namespace propml {
namespace linalg {

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws Singular when a pivot degenerates.
std::vector<double> solve(Matrix a, std::vector<double> b);

// Inverse via Gauss-Jordan with partial pivoting. Throws Singular.
Matrix inverse(Matrix a);

Matrix transpose_times_self(const Matrix& x);                       // X^T X
std::vector<double> transpose_times(const Matrix& x, const std::vector<double>& v);  // X^T v
std::vector<double> times(const Matrix& x, const std::vector<double>& v);            // X v
Matrix multiply(const Matrix& a, const Matrix& b);

// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double student_t_p_value(double t, double dof);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace linalg
}  // namespace propml
