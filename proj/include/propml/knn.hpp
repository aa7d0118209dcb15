#pragma once

#include <cstddef>
#include <vector>

#include "propml/matrix.hpp"

namespace propml {

enum class KnnMetric { Minkowski2, Cosine };
enum class KnnWeights { Uniform, InverseDistance };

struct KnnConfig {
    int k = 5;
    KnnMetric metric = KnnMetric::Minkowski2;
    KnnWeights weights = KnnWeights::Uniform;

    // The setup that wins on this problem: 50 neighbours, Euclidean
    // distance, inverse-distance weighting.
    static KnnConfig recommended() { return {50, KnnMetric::Minkowski2, KnnWeights::InverseDistance}; }
};

struct Neighbor {
    double distance = 0.0;
    std::size_t index = 0;
};

// Stored-sample regressor: training cost is the KD-tree build (Euclidean
// only; no such index exists for the cosine distance, which stays brute
// force over precomputed row norms).
class KnnModel {
public:
    KnnModel(Matrix train, std::vector<double> targets, KnnConfig cfg);

    std::vector<double> predict(const Matrix& queries) const;
    double predict_one(std::span<const double> query) const;

    // k nearest rows ordered by (distance, row index).
    std::vector<Neighbor> neighbors(std::span<const double> query) const;
    std::vector<Neighbor> neighbors_brute_force(std::span<const double> query) const;

    const KnnConfig& config() const { return cfg_; }
    std::size_t kd_node_count() const { return nodes_.size(); }

private:
    struct Node {
        // Leaf when right == 0: [begin, end) indexes into order_.
        std::size_t begin = 0, end = 0;
        std::size_t left = 0, right = 0;
        std::size_t split_dim = 0;
        double split_value = 0.0;
    };

    std::size_t build_node(std::size_t begin, std::size_t end);
    void search(std::size_t node, std::span<const double> query,
                std::vector<Neighbor>& heap) const;
    void offer(std::vector<Neighbor>& heap, double d2, std::size_t idx) const;
    double squared_distance(std::size_t row, std::span<const double> query) const;
    double cosine_distance(std::size_t row, std::span<const double> query, double query_norm) const;
    double aggregate(const std::vector<Neighbor>& picked) const;

    Matrix train_;
    std::vector<double> targets_;
    KnnConfig cfg_;
    std::vector<double> row_norms_;     // cosine only
    std::vector<std::size_t> order_;    // KD-tree permutation of row indices
    std::vector<Node> nodes_;
    static constexpr std::size_t kLeafSize = 32;
};

KnnModel knn_fit(const Matrix& train, const std::vector<double>& targets, const KnnConfig& cfg);

}  // namespace propml
