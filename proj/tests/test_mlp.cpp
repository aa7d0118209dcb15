#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "propml/errors.hpp"
#include "propml/metrics.hpp"
#include "propml/mlp.hpp"
#include "propml/rng.hpp"

using namespace propml;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

MlpConfig tiny_config(std::vector<int> layers, std::uint64_t seed, int epochs = 0) {
    MlpConfig cfg;
    cfg.hidden_layers = std::move(layers);
    cfg.seed = seed;
    cfg.max_epochs = epochs;
    return cfg;
}

// Forward pass oracle over the flattened parameters, long double throughout.
double forward_oracle(const std::vector<double>& flat, const std::vector<int>& widths,
                      std::span<const double> input) {
    std::vector<long double> current(input.begin(), input.end());
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(widths[l]);
        const auto fan_out = static_cast<std::size_t>(widths[l + 1]);
        std::vector<long double> next(fan_out, 0.0L);
        for (std::size_t u = 0; u < fan_out; ++u)
            for (std::size_t c = 0; c < fan_in; ++c) next[u] += flat[pos + u * fan_in + c] * current[c];
        pos += fan_out * fan_in;
        for (std::size_t u = 0; u < fan_out; ++u) {
            next[u] += flat[pos + u];
            const bool is_output = l + 2 == widths.size();
            if (!is_output && next[u] < 0.0L) next[u] = 0.0L;
        }
        pos += fan_out;
        current = std::move(next);
    }
    return static_cast<double>(current[0]);
}

}  // namespace

TEST_CASE("zero epoch budget leaves the initialization untouched") {
    Rng rng(1);
    const Matrix train = random_matrix(rng, 20, 3);
    const std::vector<double> y(20, 1.0);
    const MlpModel a(train, y, tiny_config({4, 3}, 42));
    const MlpModel b(train, y, tiny_config({4, 3}, 42));
    CHECK(a.parameters() == b.parameters());
    CHECK(a.loss_history().empty());

    const MlpModel trained(train, y, tiny_config({4, 3}, 42, 5));
    CHECK(a.parameters() != trained.parameters());
}

TEST_CASE("a one-unit net learns y = 2x") {
    Rng rng(2);
    const std::size_t n = 64;
    Matrix train(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        train.at(i, 0) = rng.uniform(0.0, 2.0);
        y[i] = 2.0 * train.at(i, 0);
    }
    // Seed chosen so the single ReLU unit starts live; a dead unit has no
    // gradient path back to life on this all-positive input.
    MlpConfig cfg = tiny_config({1}, 2, 500);
    cfg.learning_rate = 0.01;
    cfg.batch_size = 32;
    cfg.patience = 500;  // run the full budget
    const MlpModel model(train, y, cfg);
    const auto preds = model.predict(train);
    CHECK(metrics::mean_squared_error({y, preds}) < 1e-2);
    CHECK(model.loss_history().back() < model.loss_history().front());
}

TEST_CASE("forward pass agrees with a dense-algebra oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + rng.below(6);
        const Matrix train = random_matrix(rng, 8, d);
        const std::vector<double> y(8, 0.5);
        const MlpModel model(train, y, tiny_config({static_cast<int>(1 + rng.below(5)),
                                                    static_cast<int>(1 + rng.below(4))},
                                                   rng.next_u64()));
        const std::vector<int> widths = {static_cast<int>(d), model.weights()[0].rows > 0
                                                                  ? static_cast<int>(model.weights()[0].rows)
                                                                  : 1,
                                         static_cast<int>(model.weights()[1].rows), 1};
        const auto flat = model.parameters();
        const Matrix queries = random_matrix(rng, 5, d);
        for (std::size_t q = 0; q < queries.rows; ++q) {
            const double expected = forward_oracle(flat, widths, queries.row(q));
            CHECK(model.predict_one(queries.row(q)) ==
                  doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("all-zero parameters map everything to zero") {
    Rng rng(4);
    const Matrix train = random_matrix(rng, 10, 3);
    const std::vector<double> y(10, 1.0);
    MlpModel model(train, y, tiny_config({5, 4}, 1));
    model.set_parameters(std::vector<double>(model.parameter_count(), 0.0));
    const Matrix queries = random_matrix(rng, 6, 3);
    for (double p : model.predict(queries)) CHECK(p == 0.0);
}

TEST_CASE("nonnegative parameters and inputs give nonnegative outputs") {
    Rng rng(5);
    const Matrix train = random_matrix(rng, 10, 4, 0.0, 1.0);
    const std::vector<double> y(10, 1.0);
    MlpModel model(train, y, tiny_config({6, 3}, 2));
    auto flat = model.parameters();
    for (auto& v : flat) v = std::abs(v);
    model.set_parameters(flat);
    const Matrix queries = random_matrix(rng, 8, 4, 0.0, 2.0);
    for (double p : model.predict(queries)) CHECK(p >= 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(6);
    int accepted = 0;
    while (accepted < 100) {
        const std::size_t d = 1 + rng.below(4);
        const std::size_t batch = 2 + rng.below(5);
        const Matrix x = random_matrix(rng, batch, d);
        std::vector<double> y(batch);
        for (auto& v : y) v = rng.normal(0.0, 1.0);

        MlpModel model(x, y, tiny_config({static_cast<int>(1 + rng.below(4)),
                                          static_cast<int>(1 + rng.below(3))},
                                         rng.next_u64()));

        // Keep every pre-activation away from the ReLU kink.
        bool safe = true;
        {
            std::vector<double> flat = model.parameters();
            for (std::size_t q = 0; q < batch && safe; ++q) {
                std::vector<double> cur(x.row(q).begin(), x.row(q).end());
                std::size_t pos = 0;
                for (std::size_t l = 0; l < model.weights().size(); ++l) {
                    const auto& w = model.weights()[l];
                    std::vector<double> next(w.rows);
                    for (std::size_t u = 0; u < w.rows; ++u) {
                        double s = 0.0;
                        for (std::size_t c = 0; c < w.cols; ++c)
                            s += flat[pos + u * w.cols + c] * cur[c];
                        s += flat[pos + w.rows * w.cols + u];
                        if (l + 1 < model.weights().size() && std::abs(s) < 1e-3) safe = false;
                        next[u] = l + 1 < model.weights().size() ? std::max(0.0, s) : s;
                    }
                    pos += w.rows * w.cols + w.rows;
                    cur = std::move(next);
                }
            }
        }
        if (!safe) continue;
        ++accepted;

        const auto grads = model.loss_gradient(x, y);
        std::vector<double> analytic;
        for (std::size_t l = 0; l < grads.weights.size(); ++l) {
            analytic.insert(analytic.end(), grads.weights[l].data.begin(),
                            grads.weights[l].data.end());
            analytic.insert(analytic.end(), grads.biases[l].begin(), grads.biases[l].end());
        }

        auto flat = model.parameters();
        MlpModel probe = model;
        const double h = 1e-6;
        for (std::size_t p = 0; p < flat.size(); ++p) {
            auto bumped = flat;
            bumped[p] = flat[p] + h;
            probe.set_parameters(bumped);
            const double up = probe.loss(x, y);
            bumped[p] = flat[p] - h;
            probe.set_parameters(bumped);
            const double down = probe.loss(x, y);
            const double numeric = (up - down) / (2.0 * h);
            const double scale = std::max({1e-4, std::abs(numeric), std::abs(analytic[p])});
            CHECK(std::abs(numeric - analytic[p]) / scale < 1e-5);
        }
    }
}

TEST_CASE("the L2 term adds exactly alpha * W / n to weight gradients") {
    Rng rng(7);
    const std::size_t batch = 6;
    const Matrix x = random_matrix(rng, batch, 3);
    std::vector<double> y(batch);
    for (auto& v : y) v = rng.normal(0.0, 1.0);

    MlpConfig with_l2 = tiny_config({4}, 9);
    with_l2.l2_alpha = 0.37;
    MlpConfig without = with_l2;
    without.l2_alpha = 0.0;

    const MlpModel a(x, y, with_l2);
    const MlpModel b(x, y, without);
    REQUIRE(a.parameters() == b.parameters());  // same seed, same init

    const auto ga = a.loss_gradient(x, y);
    const auto gb = b.loss_gradient(x, y);
    for (std::size_t l = 0; l < ga.weights.size(); ++l) {
        for (std::size_t p = 0; p < ga.weights[l].data.size(); ++p) {
            const double expected = 0.37 * a.weights()[l].data[p] / static_cast<double>(batch);
            CHECK(ga.weights[l].data[p] - gb.weights[l].data[p] ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
        for (std::size_t p = 0; p < ga.biases[l].size(); ++p)
            CHECK(ga.biases[l][p] == gb.biases[l][p]);  // no penalty on biases
    }
}

TEST_CASE("parameter count matches the architecture arithmetic") {
    Rng rng(8);
    const std::size_t d = 30;
    const Matrix train = random_matrix(rng, 5, d);
    const std::vector<double> y(5, 1.0);
    MlpConfig cfg = tiny_config({256, 128}, 1);
    const MlpModel model(train, y, cfg);
    CHECK(model.parameter_count() == 256 * d + 256 + 128 * 256 + 128 + 128 + 1);
}

TEST_CASE("training is seed deterministic") {
    Rng rng(9);
    const Matrix train = random_matrix(rng, 40, 3);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = train.at(i, 0) + 0.5 * train.at(i, 2);

    MlpConfig cfg = tiny_config({8, 4}, 123, 20);
    cfg.batch_size = 16;
    const MlpModel a(train, y, cfg);
    const MlpModel b(train, y, cfg);
    CHECK(a.parameters() == b.parameters());
    CHECK(a.loss_history() == b.loss_history());

    cfg.seed = 124;
    const MlpModel c(train, y, cfg);
    CHECK(a.parameters() != c.parameters());
}

TEST_CASE("loss history stays finite or fit aborts with the epoch") {
    Rng rng(10);
    const Matrix train = random_matrix(rng, 30, 2, 0.0, 1.0);
    std::vector<double> y(30);
    for (auto& v : y) v = rng.uniform(0.0, 4.0);

    MlpConfig cfg = tiny_config({6}, 5, 30);
    const MlpModel model(train, y, cfg);
    for (double loss : model.loss_history()) CHECK(std::isfinite(loss));

    MlpConfig explosive = tiny_config({6}, 5, 50);
    explosive.learning_rate = 1e150;  // drives the forward pass to overflow
    CHECK_THROWS_AS(MlpModel(train, y, explosive), NonFiniteLoss);
}
