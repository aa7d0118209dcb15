#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "propml/errors.hpp"
#include "propml/knn.hpp"
#include "propml/rng.hpp"

using namespace propml;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = 0.0,
                     double hi = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

std::vector<double> random_targets(Rng& rng, std::size_t n) {
    std::vector<double> t(n);
    for (auto& v : t) v = rng.normal(2.0, 1.0);
    return t;
}

}  // namespace

TEST_CASE("k larger than the training set is rejected") {
    Matrix train(4, 2, 1.0);
    CHECK_THROWS_AS(knn_fit(train, {1, 2, 3, 4}, KnnConfig{5, KnnMetric::Minkowski2,
                                                           KnnWeights::Uniform}),
                    KTooLarge);
}

TEST_CASE("kd-tree index covers the training rows") {
    Rng rng(1);
    const Matrix train = random_matrix(rng, 200, 5);
    const auto model = knn_fit(train, random_targets(rng, 200),
                               {5, KnnMetric::Minkowski2, KnnWeights::Uniform});
    CHECK(model.kd_node_count() >= (200 + 31) / 32);

    // No index is kept for the cosine metric.
    const auto cosine = knn_fit(train, random_targets(rng, 200),
                                {5, KnnMetric::Cosine, KnnWeights::Uniform});
    CHECK(cosine.kd_node_count() == 0);
}

TEST_CASE("inverse-distance weighting on a hand-checkable 1-D example") {
    Matrix train(2, 1);
    train.at(0, 0) = 0.0;
    train.at(1, 0) = 10.0;
    const auto model =
        knn_fit(train, {1.0, 3.0}, {2, KnnMetric::Minkowski2, KnnWeights::InverseDistance});
    Matrix query(1, 1);
    query.at(0, 0) = 2.5;
    // (1/2.5 + 3/7.5) / (1/2.5 + 1/7.5) = 1.5
    CHECK(model.predict(query)[0] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("a query equal to a training row returns that row's target") {
    Rng rng(17);
    const Matrix train = random_matrix(rng, 40, 6);
    const auto targets = random_targets(rng, 40);
    const auto model =
        knn_fit(train, targets, {7, KnnMetric::Minkowski2, KnnWeights::InverseDistance});
    Matrix query(1, 6);
    for (std::size_t d = 0; d < 6; ++d) query.at(0, d) = train.at(23, d);
    CHECK(model.predict(query)[0] == targets[23]);
}

TEST_CASE("kd-tree and brute force agree bit for bit") {
    Rng rng(777);
    const std::size_t n = 500;
    const std::size_t dims = 100;
    const Matrix train = random_matrix(rng, n, dims);
    const auto targets = random_targets(rng, n);
    const Matrix queries = random_matrix(rng, 50, dims);

    for (int k : {5, 10, 20, 50}) {
        for (KnnWeights w : {KnnWeights::Uniform, KnnWeights::InverseDistance}) {
            const auto model = knn_fit(train, targets, {k, KnnMetric::Minkowski2, w});
            for (std::size_t q = 0; q < queries.rows; ++q) {
                const auto fast = model.neighbors(queries.row(q));
                const auto slow = model.neighbors_brute_force(queries.row(q));
                REQUIRE(fast.size() == slow.size());
                for (std::size_t i = 0; i < fast.size(); ++i) {
                    CHECK(fast[i].index == slow[i].index);
                    CHECK(fast[i].distance == slow[i].distance);
                }
            }
        }
    }
}

TEST_CASE("duplicate training rows rely on the index tie-break") {
    Matrix train(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        train.at(i, 0) = i < 4 ? 1.0 : 5.0;  // four identical rows
        train.at(i, 1) = 2.0;
    }
    const auto model =
        knn_fit(train, {1, 2, 3, 4, 5, 6}, {2, KnnMetric::Minkowski2, KnnWeights::Uniform});
    Matrix query(1, 2);
    query.at(0, 0) = 1.0;
    query.at(0, 1) = 2.0;
    const auto picked = model.neighbors(query.row(0));
    CHECK(picked[0].index == 0);
    CHECK(picked[1].index == 1);
    // All four candidates tie at distance zero; uniform weights average the
    // two lowest-index ones.
    CHECK(model.predict(query)[0] == doctest::Approx(1.5));
}

TEST_CASE("uniform scaling of all features preserves predictions") {
    Rng rng(31);
    const std::size_t n = 120;
    const std::size_t dims = 8;
    const Matrix train = random_matrix(rng, n, dims, 0.0, 3.0);
    const auto targets = random_targets(rng, n);
    const Matrix queries = random_matrix(rng, 20, dims, 0.0, 3.0);

    for (double c : {4.0, 3.0}) {
        Matrix train_scaled = train;
        Matrix queries_scaled = queries;
        for (auto& v : train_scaled.data) v *= c;
        for (auto& v : queries_scaled.data) v *= c;
        for (KnnWeights w : {KnnWeights::Uniform, KnnWeights::InverseDistance}) {
            const auto base = knn_fit(train, targets, {9, KnnMetric::Minkowski2, w});
            const auto scaled = knn_fit(train_scaled, targets, {9, KnnMetric::Minkowski2, w});
            for (std::size_t q = 0; q < queries.rows; ++q) {
                const auto nb = base.neighbors(queries.row(q));
                const auto ns = scaled.neighbors(queries_scaled.row(q));
                for (std::size_t i = 0; i < nb.size(); ++i) CHECK(nb[i].index == ns[i].index);
                const double pb = base.predict_one(queries.row(q));
                const double ps = scaled.predict_one(queries_scaled.row(q));
                if (c == 4.0 || w == KnnWeights::Uniform) CHECK(pb == ps);
                else CHECK(pb == doctest::Approx(ps).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("k equal to n with uniform weights yields the global mean") {
    Rng rng(5);
    const std::size_t n = 64;
    const Matrix train = random_matrix(rng, n, 4);
    const auto targets = random_targets(rng, n);
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(n);

    const auto model = knn_fit(train, targets,
                               {static_cast<int>(n), KnnMetric::Minkowski2, KnnWeights::Uniform});
    const Matrix queries = random_matrix(rng, 10, 4);
    for (double p : model.predict(queries)) CHECK(p == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("cosine predictions ignore positive query rescaling") {
    Rng rng(8);
    const std::size_t n = 80;
    const Matrix train = random_matrix(rng, n, 5, 0.1, 2.0);
    const auto targets = random_targets(rng, n);
    const auto model = knn_fit(train, targets, {6, KnnMetric::Cosine, KnnWeights::InverseDistance});

    Matrix query = random_matrix(rng, 1, 5, 0.1, 2.0);
    Matrix query4 = query;
    for (auto& v : query4.data) v *= 4.0;  // power of two keeps the scaling exact
    CHECK(model.predict(query)[0] == model.predict(query4)[0]);
}

TEST_CASE("an all-zero row sits at cosine distance one from everything") {
    Matrix train(3, 2);
    train.at(0, 0) = 1.0;
    train.at(1, 1) = 1.0;  // row 2 stays zero
    const auto model = knn_fit(train, {10, 20, 30}, {3, KnnMetric::Cosine, KnnWeights::Uniform});
    Matrix zero_query(1, 2);
    const auto picked = model.neighbors(zero_query.row(0));
    for (const auto& nb : picked) CHECK(nb.distance == 1.0);
    CHECK(model.predict(zero_query)[0] == doctest::Approx(20.0));
}

TEST_CASE("dimension mismatches are rejected") {
    Matrix train(5, 3, 1.0);
    const auto model = knn_fit(train, {1, 2, 3, 4, 5}, {2, KnnMetric::Minkowski2,
                                                        KnnWeights::Uniform});
    Matrix bad(1, 4, 1.0);
    CHECK_THROWS_AS(model.predict(bad), DimensionMismatch);
}
