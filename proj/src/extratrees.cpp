#include "propml/extratrees.hpp"

#include <algorithm>
#include <cmath>

#include "propml/errors.hpp"
#include "propml/rng.hpp"

namespace propml {

double Tree::predict(std::span<const double> row) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const auto& n = nodes[node];
        node = row[static_cast<std::size_t>(n.feature)] < n.threshold
                   ? static_cast<std::size_t>(n.left)
                   : static_cast<std::size_t>(n.right);
    }
    return nodes[node].value;
}

namespace {

struct TreeBuilder {
    const Matrix& x;
    const std::vector<double>& y;
    SplitCriterion criterion;
    Rng rng;
    Tree tree;
    std::vector<std::size_t> idx;
    std::vector<double> left_vals, right_vals;  // mae scratch

    TreeBuilder(const Matrix& x, const std::vector<double>& y, SplitCriterion criterion,
                std::uint64_t seed)
        : x(x), y(y), criterion(criterion), rng(seed) {}

    static double sum_abs_dev(std::vector<double>& values) {
        // Mean absolute deviation needs the median, hence the sort; this is
        // what makes mae splits markedly more expensive than mse splits.
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        const double med = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        double s = 0.0;
        for (double v : values) s += std::abs(v - med);
        return s;
    }

    // Child impurity total for the partition x[f] < t, or -1 if one side is
    // empty. The parent impurity is constant per node, so minimizing this is
    // the same as maximizing the criterion's reduction.
    double split_cost(std::size_t begin, std::size_t end, std::size_t feature, double threshold) {
        if (criterion == SplitCriterion::Mse) {
            std::size_t n_left = 0;
            double sum_l = 0.0, sumsq_l = 0.0, sum_r = 0.0, sumsq_r = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const double t = y[idx[i]];
                if (x.at(idx[i], feature) < threshold) {
                    ++n_left;
                    sum_l += t;
                    sumsq_l += t * t;
                } else {
                    sum_r += t;
                    sumsq_r += t * t;
                }
            }
            const std::size_t n_right = (end - begin) - n_left;
            if (n_left == 0 || n_right == 0) return -1.0;
            return (sumsq_l - sum_l * sum_l / static_cast<double>(n_left)) +
                   (sumsq_r - sum_r * sum_r / static_cast<double>(n_right));
        }
        left_vals.clear();
        right_vals.clear();
        for (std::size_t i = begin; i < end; ++i) {
            if (x.at(idx[i], feature) < threshold) left_vals.push_back(y[idx[i]]);
            else right_vals.push_back(y[idx[i]]);
        }
        if (left_vals.empty() || right_vals.empty()) return -1.0;
        return sum_abs_dev(left_vals) + sum_abs_dev(right_vals);
    }

    std::int32_t build(std::size_t begin, std::size_t end) {
        const auto id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[id].samples = static_cast<std::int32_t>(end - begin);

        const bool constant_target = [&] {
            const double first = y[idx[begin]];
            for (std::size_t i = begin + 1; i < end; ++i)
                if (y[idx[i]] != first) return false;
            return true;
        }();
        if (end - begin < 2 || constant_target) {
            tree.nodes[id].value = leaf_value(begin, end, constant_target);
            return id;
        }

        // One uniform threshold per non-constant feature; keep the best.
        double best_cost = -1.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (std::size_t f = 0; f < x.cols; ++f) {
            double lo = x.at(idx[begin], f);
            double hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                const double v = x.at(idx[i], f);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo == hi) continue;
            const double t = lo + rng.uniform_open() * (hi - lo);
            if (!(t > lo && t < hi)) continue;  // underflowed onto a bound
            const double cost = split_cost(begin, end, f, t);
            if (cost < 0.0) continue;
            if (best_feature < 0 || cost < best_cost) {
                best_cost = cost;
                best_feature = static_cast<int>(f);
                best_threshold = t;
            }
        }
        if (best_feature < 0) {  // every feature constant
            tree.nodes[id].value = leaf_value(begin, end, false);
            return id;
        }

        const auto split_point = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                                idx.begin() + static_cast<std::ptrdiff_t>(end),
                                                [&](std::size_t row) {
                                                    return x.at(row, static_cast<std::size_t>(
                                                                         best_feature)) <
                                                           best_threshold;
                                                });
        const auto mid = static_cast<std::size_t>(split_point - idx.begin());
        tree.nodes[id].feature = best_feature;
        tree.nodes[id].threshold = best_threshold;
        const std::int32_t left = build(begin, mid);
        const std::int32_t right = build(mid, end);
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
        return id;
    }

    double leaf_value(std::size_t begin, std::size_t end, bool constant_target) {
        if (constant_target) return y[idx[begin]];
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += y[idx[i]];
        return s / static_cast<double>(end - begin);
    }
};

}  // namespace

ExtraTreesModel::ExtraTreesModel(const Matrix& train, const std::vector<double>& targets,
                                 ExtraTreesConfig cfg)
    : n_features_(train.cols), cfg_(cfg) {
    if (train.rows == 0) throw EmptyTrainingSet();
    if (cfg_.n_estimators < 1) throw ModelError("n_estimators must be >= 1");

    trees_.reserve(static_cast<std::size_t>(cfg_.n_estimators));
    for (int t = 0; t < cfg_.n_estimators; ++t) {
        // Independent stream per tree.
        TreeBuilder builder(train, targets, cfg_.criterion,
                            mix_seed(cfg_.seed, static_cast<std::uint64_t>(t)));
        builder.idx.resize(train.rows);
        if (cfg_.bootstrap) {
            for (auto& i : builder.idx) i = builder.rng.below(train.rows);
        } else {
            for (std::size_t i = 0; i < train.rows; ++i) builder.idx[i] = i;
        }
        builder.build(0, train.rows);
        trees_.push_back(std::move(builder.tree));
    }
}

ExtraTreesModel::ExtraTreesModel(std::vector<Tree> trees, std::size_t n_features,
                                 ExtraTreesConfig cfg)
    : trees_(std::move(trees)), n_features_(n_features), cfg_(cfg) {}

double ExtraTreesModel::predict_one(std::span<const double> row) const {
    if (row.size() != n_features_) throw DimensionMismatch(row.size(), n_features_);
    // Mean of tree outputs, accumulated as an offset from the first tree so
    // a forest of agreeing trees returns their common value exactly.
    const double base = trees_.front().predict(row);
    double delta = 0.0;
    for (std::size_t t = 1; t < trees_.size(); ++t) delta += trees_[t].predict(row) - base;
    return base + delta / static_cast<double>(trees_.size());
}

std::vector<double> ExtraTreesModel::predict(const Matrix& queries) const {
    if (queries.cols != n_features_) throw DimensionMismatch(queries.cols, n_features_);
    std::vector<double> out(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i) out[i] = predict_one(queries.row(i));
    return out;
}

ExtraTreesModel extratrees_fit(const Matrix& train, const std::vector<double>& targets,
                               const ExtraTreesConfig& cfg) {
    return ExtraTreesModel(train, targets, cfg);
}

}  // namespace propml
