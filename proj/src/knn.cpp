#include "propml/knn.hpp"

#include <algorithm>
#include <cmath>

#include "propml/errors.hpp"

namespace propml {

namespace {

// Orders candidates by distance, then by training-row index, so equal
// distances resolve the same way on every code path.
inline bool closer(double d_a, std::size_t i_a, double d_b, std::size_t i_b) {
    if (d_a != d_b) return d_a < d_b;
    return i_a < i_b;
}

inline bool heap_less(const Neighbor& a, const Neighbor& b) {
    return closer(a.distance, a.index, b.distance, b.index);
}

}  // namespace

KnnModel::KnnModel(Matrix train, std::vector<double> targets, KnnConfig cfg)
    : train_(std::move(train)), targets_(std::move(targets)), cfg_(cfg) {
    if (train_.rows == 0) throw EmptyTrainingSet();
    if (cfg_.k < 1 || static_cast<std::size_t>(cfg_.k) > train_.rows)
        throw KTooLarge(cfg_.k, train_.rows);

    if (cfg_.metric == KnnMetric::Cosine) {
        row_norms_.resize(train_.rows);
        for (std::size_t i = 0; i < train_.rows; ++i) {
            double s = 0.0;
            for (double v : train_.row(i)) s += v * v;
            row_norms_[i] = std::sqrt(s);
        }
        return;
    }

    order_.resize(train_.rows);
    for (std::size_t i = 0; i < train_.rows; ++i) order_[i] = i;
    nodes_.reserve(2 * (train_.rows / kLeafSize + 1));
    build_node(0, train_.rows);
}

std::size_t KnnModel::build_node(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end, 0, 0, 0, 0.0});
    if (end - begin <= kLeafSize) return id;

    // Split on the widest-spread dimension at its median.
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < train_.cols; ++d) {
        double lo = train_.at(order_[begin], d);
        double hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const double v = train_.at(order_[i], d);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = d;
        }
    }
    if (best_spread <= 0.0) return id;  // all points identical: keep as leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                         return train_.at(a, best_dim) < train_.at(b, best_dim);
                     });
    nodes_[id].split_dim = best_dim;
    nodes_[id].split_value = train_.at(order_[mid], best_dim);
    const std::size_t left = build_node(begin, mid);
    const std::size_t right = build_node(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KnnModel::squared_distance(std::size_t row, std::span<const double> query) const {
    const auto r = train_.row(row);
    double s = 0.0;
    for (std::size_t d = 0; d < r.size(); ++d) {
        const double diff = r[d] - query[d];
        s += diff * diff;
    }
    return s;
}

double KnnModel::cosine_distance(std::size_t row, std::span<const double> query,
                                 double query_norm) const {
    if (query_norm == 0.0 || row_norms_[row] == 0.0) return 1.0;
    const auto r = train_.row(row);
    double dot = 0.0;
    for (std::size_t d = 0; d < r.size(); ++d) dot += r[d] * query[d];
    return std::max(0.0, 1.0 - dot / (row_norms_[row] * query_norm));
}

void KnnModel::offer(std::vector<Neighbor>& heap, double d2, std::size_t idx) const {
    const std::size_t k = static_cast<std::size_t>(cfg_.k);
    if (heap.size() < k) {
        heap.push_back({d2, idx});
        std::push_heap(heap.begin(), heap.end(), heap_less);
        return;
    }
    if (closer(d2, idx, heap.front().distance, heap.front().index)) {
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.back() = {d2, idx};
        std::push_heap(heap.begin(), heap.end(), heap_less);
    }
}

void KnnModel::search(std::size_t node_id, std::span<const double> query,
                      std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.right == 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const std::size_t row = order_[i];
            offer(heap, squared_distance(row, query), row);
        }
        return;
    }
    const double delta = query[node.split_dim] - node.split_value;
    const std::size_t near = delta < 0.0 ? node.left : node.right;
    const std::size_t far = delta < 0.0 ? node.right : node.left;
    search(near, query, heap);
    // The far side can still hold an equally distant, lower-index row, so
    // prune only on strict inequality.
    if (heap.size() < static_cast<std::size_t>(cfg_.k) || delta * delta <= heap.front().distance)
        search(far, query, heap);
}

std::vector<Neighbor> KnnModel::neighbors(std::span<const double> query) const {
    if (query.size() != train_.cols) throw DimensionMismatch(query.size(), train_.cols);
    if (cfg_.metric == KnnMetric::Cosine) return neighbors_brute_force(query);

    std::vector<Neighbor> heap;
    heap.reserve(static_cast<std::size_t>(cfg_.k) + 1);
    search(0, query, heap);
    std::sort_heap(heap.begin(), heap.end(), heap_less);
    for (auto& nb : heap) nb.distance = std::sqrt(nb.distance);
    return heap;
}

std::vector<Neighbor> KnnModel::neighbors_brute_force(std::span<const double> query) const {
    if (query.size() != train_.cols) throw DimensionMismatch(query.size(), train_.cols);
    double query_norm = 0.0;
    if (cfg_.metric == KnnMetric::Cosine) {
        for (double v : query) query_norm += v * v;
        query_norm = std::sqrt(query_norm);
    }
    std::vector<Neighbor> all(train_.rows);
    for (std::size_t i = 0; i < train_.rows; ++i) {
        const double d = cfg_.metric == KnnMetric::Cosine
                             ? cosine_distance(i, query, query_norm)
                             : squared_distance(i, query);
        all[i] = {d, i};
    }
    const auto k = static_cast<std::ptrdiff_t>(cfg_.k);
    std::partial_sort(all.begin(), all.begin() + k, all.end(), heap_less);
    all.resize(static_cast<std::size_t>(k));
    if (cfg_.metric == KnnMetric::Minkowski2)
        for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
    return all;
}

double KnnModel::aggregate(const std::vector<Neighbor>& picked) const {
    if (cfg_.weights == KnnWeights::Uniform) {
        double s = 0.0;
        for (const auto& nb : picked) s += targets_[nb.index];
        return s / static_cast<double>(picked.size());
    }
    // Inverse distance; exact hits take over and are averaged uniformly.
    bool any_zero = false;
    for (const auto& nb : picked) any_zero |= nb.distance == 0.0;
    if (any_zero) {
        double s = 0.0;
        std::size_t count = 0;
        for (const auto& nb : picked) {
            if (nb.distance == 0.0) {
                s += targets_[nb.index];
                ++count;
            }
        }
        return s / static_cast<double>(count);
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& nb : picked) {
        const double w = 1.0 / nb.distance;
        num += w * targets_[nb.index];
        den += w;
    }
    return num / den;
}

double KnnModel::predict_one(std::span<const double> query) const {
    return aggregate(neighbors(query));
}

std::vector<double> KnnModel::predict(const Matrix& queries) const {
    if (queries.cols != train_.cols) throw DimensionMismatch(queries.cols, train_.cols);
    std::vector<double> out(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i) out[i] = predict_one(queries.row(i));
    return out;
}

KnnModel knn_fit(const Matrix& train, const std::vector<double>& targets, const KnnConfig& cfg) {
    return KnnModel(train, targets, cfg);
}

}  // namespace propml
