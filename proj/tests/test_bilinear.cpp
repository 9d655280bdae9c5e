#include "doctest.h"

#include <cmath>

#include "cbp/bilinear.hpp"
#include "cbp/gradcheck.hpp"
#include "test_util.hpp"

using namespace cbp;
using testutil::dot;
using testutil::random_grid;

TEST_CASE("single-location pooling is the outer product") {
    Grid g(1, 1, 1, 2);
    g.data = {1.0, 2.0};
    auto pooled = bilinear_pool(g);
    CHECK(pooled.dim == 4);
    CHECK(pooled.data[0] == 1.0);
    CHECK(pooled.data[1] == 2.0);
    CHECK(pooled.data[2] == 2.0);
    CHECK(pooled.data[3] == 4.0);
}

TEST_CASE("two orthogonal locations sum their outer products") {
    Grid g(1, 1, 2, 2);
    g.data = {1.0, 0.0, 0.0, 1.0};
    auto pooled = bilinear_pool(g);
    CHECK(pooled.data == std::vector<double>{1.0, 0.0, 0.0, 1.0});
}

TEST_CASE("output dimension is c squared") {
    Grid g(1, 1, 1, 512);
    CHECK(bilinear_pool(g).dim == 262144);
}

TEST_CASE("pooled matrix is symmetric") {
    SeededRng rng(5);
    auto g = random_grid(rng, 2, 3, 3, 6);
    auto pooled = bilinear_pool(g);
    for (std::size_t s = 0; s < g.n; ++s) {
        auto row = pooled.row(s);
        for (std::size_t i = 0; i < g.c; ++i)
            for (std::size_t j = 0; j < g.c; ++j)
                CHECK(row[i * g.c + j] == doctest::Approx(row[j * g.c + i]).epsilon(1e-12));
    }
}

TEST_CASE("exact kernel trivial cases") {
    Grid a(1, 1, 1, 2), b(1, 1, 1, 2);
    a.data = {1.0, 0.0};
    b.data = {0.0, 1.0};
    CHECK(exact_kernel(a, b) == 0.0);
    a.data = {1.0, 1.0};
    b.data = {1.0, 1.0};
    CHECK(exact_kernel(a, b) == 4.0);
}

TEST_CASE("kernel identity: double sum equals descriptor inner product") {
    SeededRng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t c = 1 + rng.uniform_index(8);
        auto a = random_grid(rng, 1, 1 + rng.uniform_index(3), 1 + rng.uniform_index(3), c);
        auto b = random_grid(rng, 1, 1 + rng.uniform_index(3), 1 + rng.uniform_index(3), c);
        const double direct = exact_kernel(a, b);
        const double via_pool = dot(bilinear_pool(a).row(0), bilinear_pool(b).row(0));
        CHECK(std::fabs(direct - via_pool) <=
              1e-10 * std::max({1.0, std::fabs(direct), std::fabs(via_pool)}));
    }
}

TEST_CASE("kernel is symmetric and positive on the diagonal") {
    SeededRng rng(23);
    auto a = random_grid(rng, 1, 2, 2, 5);
    auto b = random_grid(rng, 1, 3, 1, 5);
    CHECK(exact_kernel(a, b) == doctest::Approx(exact_kernel(b, a)).epsilon(1e-12));
    CHECK(exact_kernel(a, a) >= 0.0);
}

TEST_CASE("pooling is additive over spatial locations") {
    SeededRng rng(29);
    auto g = random_grid(rng, 1, 2, 3, 4);
    auto whole = bilinear_pool(g);
    std::vector<double> acc(g.c * g.c, 0.0);
    for (std::size_t r = 0; r < g.h; ++r)
        for (std::size_t col = 0; col < g.w; ++col) {
            Grid one(1, 1, 1, g.c);
            auto x = g.at(0, r, col);
            std::copy(x.begin(), x.end(), one.data.begin());
            auto part = bilinear_pool(one);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += part.data[i];
        }
    for (std::size_t i = 0; i < acc.size(); ++i)
        CHECK(acc[i] == doctest::Approx(whole.data[i]).epsilon(1e-12));
}

TEST_CASE("channel mismatch raises") {
    Grid a(1, 1, 1, 2), b(1, 1, 1, 3);
    CHECK_THROWS_AS(exact_kernel(a, b), std::invalid_argument);
}

TEST_CASE("backward trivial cases") {
    Grid g(1, 1, 1, 2);
    g.data = {1.0, 2.0};

    Pooled zero(1, 4, PoolKind::FullBilinear);
    auto gz = bilinear_pool_backward(g, zero);
    for (double v : gz.data) CHECK(v == 0.0);

    Pooled identity(1, 4, PoolKind::FullBilinear);
    identity.data = {1.0, 0.0, 0.0, 1.0};
    auto gi = bilinear_pool_backward(g, identity);
    CHECK(gi.data[0] == 2.0);
    CHECK(gi.data[1] == 4.0);
}

TEST_CASE("backward matches finite differences") {
    SeededRng rng(31);
    auto g = random_grid(rng, 2, 2, 2, 3);
    Pooled grad_out(2, 9, PoolKind::FullBilinear);
    for (auto& v : grad_out.data) v = rng.normal();

    auto analytic = bilinear_pool_backward(g, grad_out);
    auto loss = [&] {
        auto pooled = bilinear_pool(g);
        return dot({pooled.data.data(), pooled.data.size()},
                   {grad_out.data.data(), grad_out.data.size()});
    };
    auto numeric = finite_diff(g.data, loss, 1e-6);
    CHECK(max_rel_error(analytic.data, numeric) < 1e-6);
}
