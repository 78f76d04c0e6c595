#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "tengraph/graph.hpp"

using namespace tengraph;

namespace {

bool kernel_valued(const DenseTensor& g, double eps) {
    for (double v : g.data())
        if (!(v == 0.0 || (v >= eps && v <= 1.0))) return false;
    return true;
}

}  // namespace

TEST_CASE("kernel weight") {
    CHECK(kernel_weight(0.0, 0.1, 0.5) == 1.0);
    const double boundary = std::sqrt(0.1 * std::log(2.0));
    CHECK(kernel_weight(boundary, 0.1, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(kernel_weight(boundary * (1.0 - 1e-12), 0.1, 0.5) >= 0.5);
    CHECK(kernel_weight(boundary * (1.0 + 1e-9), 0.1, 0.5) == 0.0);
    CHECK(kernel_weight(1.0, 0.1, 0.5) == 0.0);
    CHECK(std::exp(-10.0) == doctest::Approx(4.54e-5).epsilon(1e-3));
    CHECK_THROWS_AS(kernel_weight(-0.1, 0.1, 0.5), DataError);

    double prev = 1.0;
    for (double d = 0.0; d < 1.0; d += 0.01) {
        const double w = kernel_weight(d, 0.1, 0.5);
        CHECK(w <= prev);
        prev = w;
    }
}

TEST_CASE("spatial distance") {
    DenseTensor x({1, 1, 2, 1});
    x(0, 0, 0, 0) = 5.0;
    x(0, 0, 1, 0) = 3.0;
    CHECK(spatial_distance(x, 0, 1, 0) == 2.0);
    CHECK(spatial_distance(x, 1, 1, 0) == 0.0);
    DenseTensor two({2, 1, 2, 1});
    two(0, 0, 0, 0) = 1.0;
    two(1, 0, 1, 0) = 3.0;
    CHECK(spatial_distance(two, 0, 1, 0) == 2.0);
    CHECK_THROWS_AS(spatial_distance(x, 0, 2, 0), ShapeError);
}

TEST_CASE("initial STG") {
    const KernelParams p;
    DenseTensor same({3, 2, 4, 1}, 7.0);
    const Matrix a = build_initial_stg(same, p);
    CHECK((a - (Matrix::Ones(4, 4) - Matrix::Identity(4, 4))).norm() == 0.0);

    DenseTensor two({1, 1, 2, 1});
    two(0, 0, 1, 0) = 1.0;
    CHECK(build_initial_stg(two, p).norm() == 0.0);

    const DenseTensor one({2, 3, 1, 1}, 1.0);
    const Matrix single = build_initial_stg(one, p);
    CHECK(single.rows() == 1);
    CHECK(single(0, 0) == 0.0);
}

TEST_CASE("kernel slices are symmetric, zero-diagonal and kernel-valued") {
    Rng rng(55);
    for (int rep = 0; rep < 30; ++rep) {
        const DenseTensor x = oracle::random_tensor(
            {oracle::random_extent(rng, 4), 2 + rng.below(4), 2 + rng.below(5), oracle::random_extent(rng, 2)}, rng,
            0.0, 0.6);
        const KernelParams p{0.1, 0.5};
        const SpatialTensorGraph stg = build_kernel_stg(x, p);
        const TemporalTensorGraph ttg = build_ttg(x, p);
        CHECK(kernel_valued(stg.weights, p.epsilon));
        CHECK(kernel_valued(ttg.weights, p.epsilon));
        for (const DenseTensor* g : {&stg.weights, &ttg.weights}) {
            for (std::size_t s = 0; s < g->extent(2); ++s)
                for (std::size_t i = 0; i < g->extent(0); ++i) {
                    CHECK((*g)(i, i, s) == 0.0);
                    for (std::size_t j = 0; j < g->extent(0); ++j) CHECK((*g)(i, j, s) == (*g)(j, i, s));
                }
        }
        for (std::size_t t = 0; t < x.extent(1); ++t) {
            const Matrix ref = build_kernel_slice(x, t, p);
            CHECK((stg.slice(t) - ref).norm() == 0.0);
        }
    }
}

TEST_CASE("TTG examples") {
    const KernelParams p;
    DenseTensor x({2, 4, 2, 1});
    for (std::size_t t = 0; t < 4; ++t) {
        x(0, t, 0, 0) = x(1, t, 0, 0) = 3.0;  // node 0 constant
        x(0, t, 1, 0) = x(1, t, 1, 0) = static_cast<double>(t);
    }
    const TemporalTensorGraph g = build_ttg(x, p);
    CHECK((g.slice(0) - (Matrix::Ones(4, 4) - Matrix::Identity(4, 4))).norm() == 0.0);
    // Node 1 moves by one unit per step: every pair is at mean distance >= 1.
    CHECK(g.slice(1).norm() == 0.0);
    CHECK_THROWS_AS(build_ttg(DenseTensor({1, 1, 2, 1}), p), DataError);
}

TEST_CASE("evolution from a zero seed") {
    const std::size_t n = 5, steps = 4;
    const double alpha = 0.7;
    const SpatialTensorGraph g = evolve_stg(Matrix::Zero(n, n), steps, {3, alpha});
    for (std::size_t t = 0; t < steps; ++t) {
        const double expect = static_cast<double>(t) * alpha / static_cast<double>(n);
        CHECK((g.slice(t).array() - expect).abs().maxCoeff() < 1e-14);
    }
    Rng rng(1);
    const Matrix a0 = oracle::random_matrix(n, n, rng, 0.0, 1.0);
    const SpatialTensorGraph frozen = evolve_stg(a0, 3, {2, 0.0});
    for (std::size_t t = 0; t < 3; ++t) CHECK((frozen.slice(t) - a0).norm() == 0.0);
    CHECK_THROWS_AS(evolve_stg(a0, 3, {0, 1.0}), ConfigError);
    CHECK_THROWS_AS(evolve_stg(a0, 3, {6, 1.0}), ConfigError);
}

TEST_CASE("evolved STG is entrywise monotone and increments are row-stochastic") {
    Rng rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + rng.below(6);
        Matrix a0 = oracle::random_matrix(n, n, rng, 0.0, 1.0);
        a0.diagonal().setZero();
        if (rep % 3 == 0) a0 = (a0.array() > 0.6).cast<double>().matrix();  // sparse 0/1 seed
        const std::size_t k = 1 + rng.below(n);
        const Matrix inc = evolution_increment(a0, k);
        CHECK((inc.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
        CHECK(inc.minCoeff() > 0.0);

        const SpatialTensorGraph g = evolve_stg(a0, 6, {k, 1.0});
        for (std::size_t t = 1; t < 6; ++t) {
            CHECK((g.slice(t) - g.slice(t - 1)).minCoeff() >= 0.0);
            const Matrix d = g.slice(t) - g.slice(t - 1);
            CHECK((d.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("evolved TTG variant") {
    Rng rng(9);
    const DenseTensor x = oracle::random_tensor({3, 4, 3, 1}, rng, 0.0, 0.3);
    const TemporalTensorGraph g = evolve_ttg(x, {}, {2, 1.0});
    CHECK(g.weights.shape() == Shape{4, 4, 3});
    CHECK((g.slice(0) - build_ttg(x, {}).slice(0)).norm() == 0.0);
    for (std::size_t n = 1; n < 3; ++n) CHECK((g.slice(n) - g.slice(n - 1)).minCoeff() >= 0.0);
}

TEST_CASE("summaries and edge lists") {
    DenseTensor g({3, 3, 2});
    g(0, 1, 0) = g(1, 0, 0) = 0.75;
    g(0, 1, 1) = 1.0;
    const auto s = summarize_slices(g);
    REQUIRE(s.size() == 2);
    CHECK(s[0].density == doctest::Approx(2.0 / 6.0));
    CHECK(s[0].max_weight == 0.75);
    CHECK(s[1].density == doctest::Approx(1.0 / 6.0));
    std::ostringstream os;
    write_edge_list(os, g);
    CHECK(os.str() == "0 1 0 0.75\n1 0 0 0.75\n0 1 1 1\n");
}
