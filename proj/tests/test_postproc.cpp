#include "doctest.h"

#include <cmath>

#include "cbp/gradcheck.hpp"
#include "cbp/postproc.hpp"
#include "cbp/synth.hpp"
#include "test_util.hpp"

using namespace cbp;
using testutil::dot;

TEST_CASE("signed sqrt basics") {
    Matrix m(1, 3);
    m.data = {4.0, -9.0, 0.0};
    auto out = signed_sqrt(m);
    CHECK(out.data[0] == doctest::Approx(2.0));
    CHECK(out.data[1] == doctest::Approx(-3.0));
    CHECK(out.data[2] == 0.0);
}

TEST_CASE("signed sqrt gradient matches finite differences away from zero") {
    SeededRng rng(3);
    Matrix m(2, 5);
    for (auto& v : m.data) {
        v = rng.normal();
        if (std::fabs(v) < 1e-3) v = 0.5;  // keep clear of the kink
    }
    Matrix go(2, 5);
    for (auto& v : go.data) v = rng.normal();

    auto analytic = signed_sqrt_backward(m, go);
    auto loss = [&] {
        auto y = signed_sqrt(m);
        return dot({y.data.data(), y.data.size()}, {go.data.data(), go.data.size()});
    };
    auto numeric = finite_diff(m.data, loss, 1e-7);
    CHECK(max_rel_error(analytic.data, numeric) < 1e-6);
}

TEST_CASE("l2 normalize basics") {
    Matrix m(2, 2);
    m.data = {3.0, 4.0, 0.0, 0.0};
    auto out = l2_normalize(m);
    CHECK(out.data[0] == doctest::Approx(0.6));
    CHECK(out.data[1] == doctest::Approx(0.8));
    CHECK(out.data[2] == 0.0);
    CHECK(out.data[3] == 0.0);
}

TEST_CASE("l2 normalize is idempotent") {
    SeededRng rng(8);
    Matrix m(3, 7);
    for (auto& v : m.data) v = rng.normal();
    auto once = l2_normalize(m);
    auto twice = l2_normalize(once);
    for (std::size_t i = 0; i < m.data.size(); ++i)
        CHECK(twice.data[i] == doctest::Approx(once.data[i]).epsilon(1e-10));
}

TEST_CASE("l2 normalize gradient matches finite differences") {
    SeededRng rng(15);
    Matrix m(2, 6);
    for (auto& v : m.data) v = rng.normal();
    Matrix go(2, 6);
    for (auto& v : go.data) v = rng.normal();

    auto analytic = l2_normalize_backward(m, go);
    auto loss = [&] {
        auto y = l2_normalize(m);
        return dot({y.data.data(), y.data.size()}, {go.data.data(), go.data.size()});
    };
    auto numeric = finite_diff(m.data, loss, 1e-7);
    CHECK(max_rel_error(analytic.data, numeric) < 1e-6);
}

TEST_CASE("zero row has zero normalization gradient") {
    Matrix m(1, 3);
    Matrix go(1, 3);
    go.data = {1.0, 1.0, 1.0};
    auto g = l2_normalize_backward(m, go);
    for (double v : g.data) CHECK(v == 0.0);
}

namespace {

// 2-class separable toy set: class 0 at (-1,...), class 1 at (+1,...).
std::pair<Matrix, io::LabelTable> separable_toy(std::size_t n_per_class, std::size_t dim) {
    Matrix feats(2 * n_per_class, dim);
    io::LabelTable labels;
    SeededRng rng(99);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const std::uint32_t cls = i < n_per_class ? 0 : 1;
        feats.at(i, 0) = cls == 0 ? -1.0 : 1.0;
        for (std::size_t j = 1; j < dim; ++j) feats.at(i, j) = 0.1 * rng.normal();
        labels.rows.emplace_back(static_cast<std::uint32_t>(i), cls);
    }
    return {feats, labels};
}

}  // namespace

TEST_CASE("logistic regression fits separable data") {
    auto [feats, labels] = separable_toy(10, 4);
    auto model = train_logreg(feats, labels, 2);
    CHECK(model.lambda == 0.001);  // default
    auto pred = predict(model, feats);
    CHECK(accuracy(pred, labels) == 1.0);
}

TEST_CASE("huge lambda shrinks weights toward zero") {
    auto [feats, labels] = separable_toy(10, 4);
    TrainConfig cfg;
    cfg.lambda = 1e6;
    auto model = train_logreg(feats, labels, 2, cfg);
    for (double wv : model.weights.data) CHECK(std::fabs(wv) < 1e-3);
    auto pred = predict(model, feats);
    for (std::size_t i = 0; i < feats.rows; ++i)
        for (std::size_t cls = 0; cls < 2; ++cls)
            CHECK(pred.probs.at(i, cls) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("empty class is rejected") {
    auto [feats, labels] = separable_toy(5, 3);
    CHECK_THROWS_AS(train_logreg(feats, labels, 3), std::invalid_argument);
}

TEST_CASE("non-finite features are rejected") {
    auto [feats, labels] = separable_toy(5, 3);
    feats.data[0] = std::nan("");
    CHECK_THROWS_AS(train_logreg(feats, labels, 2), std::invalid_argument);
}

TEST_CASE("zero model predicts uniformly") {
    LinearModel model;
    model.k = 4;
    model.dim = 3;
    model.weights = Matrix(4, 3);
    model.bias.assign(4, 0.0);
    Matrix feats(2, 3);
    feats.data = {1.0, 2.0, 3.0, -1.0, 0.0, 1.0};
    auto pred = predict(model, feats);
    for (std::size_t i = 0; i < 2; ++i) {
        double sum = 0.0;
        for (std::size_t cls = 0; cls < 4; ++cls) {
            CHECK(pred.probs.at(i, cls) == doctest::Approx(0.25));
            sum += pred.probs.at(i, cls);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("prediction dim mismatch raises") {
    LinearModel model;
    model.k = 2;
    model.dim = 3;
    model.weights = Matrix(2, 3);
    model.bias.assign(2, 0.0);
    Matrix feats(1, 4);
    CHECK_THROWS_AS(predict(model, feats), std::invalid_argument);
}

namespace {

struct FewShotFixture {
    Matrix feats;
    io::LabelTable labels;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
};

FewShotFixture fewshot_fixture() {
    // 3 well-separated classes, 8 train + 4 test samples each.
    FewShotFixture fx;
    const std::size_t k = 3, per_class = 12, dim = 5;
    fx.feats = Matrix(k * per_class, dim);
    SeededRng rng(7);
    for (std::size_t cls = 0; cls < k; ++cls)
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t row = cls * per_class + i;
            fx.feats.at(row, cls) = 2.0;
            for (std::size_t j = 0; j < dim; ++j) fx.feats.at(row, j) += 0.2 * rng.normal();
            fx.labels.rows.emplace_back(static_cast<std::uint32_t>(row),
                                        static_cast<std::uint32_t>(cls));
            if (i < 8)
                fx.train_idx.push_back(row);
            else
                fx.test_idx.push_back(row);
        }
    return fx;
}

}  // namespace

TEST_CASE("few-shot evaluation is deterministic per seed") {
    auto fx = fewshot_fixture();
    const std::vector<std::size_t> shots = {1, 2};
    SeededRng r1(33), r2(33);
    auto a = fewshot_eval(fx.feats, fx.labels, fx.train_idx, fx.test_idx, shots, 3, r1);
    auto b = fewshot_eval(fx.feats, fx.labels, fx.train_idx, fx.test_idx, shots, 3, r2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean_accuracy == b[i].mean_accuracy);
        CHECK(a[i].std_accuracy == b[i].std_accuracy);
    }
}

TEST_CASE("all-available shots reduce to a single full run") {
    auto fx = fewshot_fixture();
    const std::vector<std::size_t> shots = {8};  // the whole train pool
    SeededRng rng(44);
    auto rows = fewshot_eval(fx.feats, fx.labels, fx.train_idx, fx.test_idx, shots, 2, rng);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].std_accuracy == 0.0);  // sampling is degenerate

    // Compare with a direct full training run on the train pool.
    Matrix train_feats(fx.train_idx.size(), fx.feats.cols);
    io::LabelTable train_labels;
    for (std::size_t i = 0; i < fx.train_idx.size(); ++i) {
        auto src = fx.feats.row(fx.train_idx[i]);
        std::copy(src.begin(), src.end(), train_feats.row(i).begin());
        train_labels.rows.emplace_back(static_cast<std::uint32_t>(i),
                                       fx.labels.rows[fx.train_idx[i]].second);
    }
    auto model = train_logreg(train_feats, train_labels, 3);
    Matrix test_feats(fx.test_idx.size(), fx.feats.cols);
    io::LabelTable test_labels;
    for (std::size_t i = 0; i < fx.test_idx.size(); ++i) {
        auto src = fx.feats.row(fx.test_idx[i]);
        std::copy(src.begin(), src.end(), test_feats.row(i).begin());
        test_labels.rows.emplace_back(static_cast<std::uint32_t>(i),
                                      fx.labels.rows[fx.test_idx[i]].second);
    }
    CHECK(rows[0].mean_accuracy ==
          doctest::Approx(accuracy(predict(model, test_feats), test_labels)));
}

TEST_CASE("infeasible shot counts are rejected") {
    auto fx = fewshot_fixture();
    const std::vector<std::size_t> shots = {20};
    SeededRng rng(1);
    CHECK_THROWS_AS(fewshot_eval(fx.feats, fx.labels, fx.train_idx, fx.test_idx, shots, 1, rng),
                    std::invalid_argument);
}

TEST_CASE("synthetic data with zero spread collapses each class") {
    SynthConfig cfg;
    cfg.classes = 2;
    cfg.per_class = 3;
    cfg.c = 4;
    cfg.h = cfg.w = 1;
    cfg.spread = 0.0;
    SeededRng rng(10);
    auto data = synth_data(cfg, rng);
    for (std::size_t i = 1; i < cfg.per_class; ++i)
        for (std::size_t j = 0; j < cfg.c; ++j)
            CHECK(data.grid.at(i, 0, 0)[j] == data.grid.at(0, 0, 0)[j]);
    CHECK(data.labels.size() == 6);
}

TEST_CASE("synthetic data is deterministic per seed") {
    SynthConfig cfg;
    cfg.classes = 3;
    cfg.per_class = 2;
    cfg.c = 5;
    cfg.spread = 0.2;
    SeededRng r1(77), r2(77);
    auto a = synth_data(cfg, r1);
    auto b = synth_data(cfg, r2);
    CHECK(a.grid.data == b.grid.data);
}

TEST_CASE("negative spread is rejected") {
    SynthConfig cfg;
    cfg.spread = -1.0;
    SeededRng rng(1);
    CHECK_THROWS_AS(synth_data(cfg, rng), std::invalid_argument);
}
