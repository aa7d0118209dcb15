#pragma once

#include <cstdint>
#include <vector>

#include "propml/matrix.hpp"

namespace propml {

enum class SplitCriterion { Mae, Mse };

struct ExtraTreesConfig {
    int n_estimators = 10;
    SplitCriterion criterion = SplitCriterion::Mse;
    bool bootstrap = false;
    std::uint64_t seed = 0;

    // 50 trees, MAE splits, bootstrap sampling.
    static ExtraTreesConfig recommended() { return {50, SplitCriterion::Mae, true, 0}; }
};

// Flat node storage; a node is a leaf when feature < 0.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;        // leaf prediction
    std::int32_t samples = 0;  // training rows that reached the node
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> row) const;
};

class ExtraTreesModel {
public:
    ExtraTreesModel(const Matrix& train, const std::vector<double>& targets, ExtraTreesConfig cfg);
    // Deserialization constructor.
    ExtraTreesModel(std::vector<Tree> trees, std::size_t n_features, ExtraTreesConfig cfg);

    std::vector<double> predict(const Matrix& queries) const;
    double predict_one(std::span<const double> row) const;

    const std::vector<Tree>& trees() const { return trees_; }
    const ExtraTreesConfig& config() const { return cfg_; }
    std::size_t n_features() const { return n_features_; }

private:
    std::vector<Tree> trees_;
    std::size_t n_features_ = 0;
    ExtraTreesConfig cfg_;
};

ExtraTreesModel extratrees_fit(const Matrix& train, const std::vector<double>& targets,
                               const ExtraTreesConfig& cfg);

}  // namespace propml
