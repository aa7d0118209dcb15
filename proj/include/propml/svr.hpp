#pragma once

#include <cstdint>
#include <vector>

#include "propml/matrix.hpp"

namespace propml {

struct SvrConfig {
    double c_penalty = 1.0;
    double gamma = 0.0;        // <= 0 means 1 / n_features
    double epsilon = 0.1;      // tube half-width, in target units
    double tolerance = 1e-3;   // stop when the worst KKT pair violation is below this
    int max_iterations = 100000;

    static SvrConfig recommended() { return {}; }
};

// Epsilon-insensitive SVR with an RBF kernel, solved in the beta = alpha -
// alpha* formulation by pairwise coordinate steps on the most violating pair.
class SvrModel {
public:
    SvrModel(const Matrix& train, const std::vector<double>& targets, SvrConfig cfg);

    std::vector<double> predict(const Matrix& queries) const;
    double predict_one(std::span<const double> row) const;

    const std::vector<double>& beta() const { return beta_; }  // full training-length vector
    double bias() const { return bias_; }
    double gamma() const { return gamma_; }
    double dual_objective() const { return dual_objective_; }
    bool converged() const { return converged_; }
    int iterations() const { return iterations_; }
    std::size_t support_vector_count() const { return sv_rows_.rows; }

private:
    Matrix sv_rows_;
    std::vector<double> sv_beta_;
    std::vector<double> beta_;
    double bias_ = 0.0;
    double gamma_ = 0.0;
    SvrConfig cfg_;
    double dual_objective_ = 0.0;
    bool converged_ = false;
    int iterations_ = 0;
};

SvrModel svr_fit(const Matrix& train, const std::vector<double>& targets, const SvrConfig& cfg);

}  // namespace propml
