#include <doctest.h>

#include "oracles.hpp"
#include "tengraph/layers.hpp"
#include "tengraph/peps.hpp"

using namespace tengraph;

namespace {

// Non-negative, symmetric-in-the-square-modes pair like real graph stacks.
std::pair<DenseTensor, DenseTensor> random_pair(std::size_t n, std::size_t t, Rng& rng) {
    DenseTensor a({n, n, t}), b({t, t, n});
    for (std::size_t s = 0; s < t; ++s)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) a(i, j, s) = a(j, i, s) = rng.uniform();
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = i + 1; j < t; ++j) b(i, j, s) = b(j, i, s) = rng.uniform();
    return {a, b};
}

double orthonormality_defect(const Matrix& m) {
    return (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("full ranks represent the pair exactly") {
    Rng rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rng.below(4), t = 2 + rng.below(4);
        auto [a, b] = random_pair(n, t, rng);
        const PepsPair p = peps_fit(a, b, {n, t, 1, 1e-6});
        CHECK(p.sweeps == 1);
        CHECK(p.joint_error < 1e-12);
        auto [ra, rb] = peps_reconstruct(p);
        CHECK(relative_error(ra, a) < 1e-8);
        CHECK(relative_error(rb, b) < 1e-8);
    }
}

TEST_CASE("shared rank-one instance is recovered exactly") {
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rng.below(5), t = 2 + rng.below(5);
        const Matrix u = oracle::random_matrix(n, 1, rng, 0.1, 1.0), v = oracle::random_matrix(t, 1, rng, 0.1, 1.0);
        const double alpha = 0.5 + rng.uniform(), beta = 0.5 + rng.uniform();
        DenseTensor a({n, n, t}), b({t, t, n});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t s = 0; s < t; ++s) a(i, j, s) = alpha * u(i, 0) * u(j, 0) * v(s, 0);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j < t; ++j)
                for (std::size_t s = 0; s < n; ++s) b(i, j, s) = beta * v(i, 0) * v(j, 0) * u(s, 0);
        const PepsPair p = peps_fit(a, b, {1, 1, 50, 1e-6});
        CHECK(p.joint_error < 1e-10);
        auto [ra, rb] = peps_reconstruct(p);
        CHECK(relative_error(ra, a) < 1e-10);
        CHECK(relative_error(rb, b) < 1e-10);
    }
}

TEST_CASE("zero pair reconstructs to zeros") {
    const PepsPair p = peps_fit(DenseTensor({3, 3, 2}), DenseTensor({2, 2, 3}), {2, 1, 5, 1e-6});
    CHECK(p.joint_error == 0.0);
    auto [ra, rb] = peps_reconstruct(p);
    CHECK(ra.frobenius_norm() == 0.0);
    CHECK(rb.frobenius_norm() == 0.0);
}

TEST_CASE("objective never increases across sweeps") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng rng(seed);
        const std::size_t n = 3 + rng.below(6), t = 3 + rng.below(6);
        auto [a, b] = random_pair(n, t, rng);
        const std::size_t rn = 1 + rng.below(n - 1), rt = 1 + rng.below(t - 1);
        const PepsPair p = peps_fit(a, b, {rn, rt, 30, 1e-12});
        REQUIRE(p.history.size() == p.sweeps + 1);
        for (std::size_t k = 1; k < p.history.size(); ++k) CHECK(p.history[k] <= p.history[k - 1] + 1e-9);
        CHECK(orthonormality_defect(p.node_factor) < 1e-8);
        CHECK(orthonormality_defect(p.time_factor) < 1e-8);
        // Reported error is the residual of the returned pair.
        auto [ra, rb] = peps_reconstruct(p);
        double direct = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) direct += std::pow(a.data()[i] - ra.data()[i], 2);
        for (std::size_t i = 0; i < b.size(); ++i) direct += std::pow(b.data()[i] - rb.data()[i], 2);
        CHECK(std::abs(direct - p.joint_error) <= 1e-9 * std::max(1.0, direct));
        CHECK(std::abs(peps_joint_error(a, b, p.node_factor, p.time_factor) - p.joint_error) <= 1e-9 * std::max(1.0, direct));
    }
}

TEST_CASE("final objective does not grow with rank") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(100 + seed);
        const std::size_t n = 6, t = 5;
        auto [a, b] = random_pair(n, t, rng);
        for (std::size_t rt = 1; rt <= t; ++rt) {
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t rn = 1; rn <= n; ++rn) {
                const double j = peps_fit(a, b, {rn, rt, 50, 1e-9}).joint_error;
                CHECK(j <= prev + 1e-9);
                prev = j;
            }
        }
        for (std::size_t rn = 1; rn <= n; ++rn) {
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t rt = 1; rt <= t; ++rt) {
                const double j = peps_fit(a, b, {rn, rt, 50, 1e-9}).joint_error;
                CHECK(j <= prev + 1e-9);
                prev = j;
            }
        }
    }
}

TEST_CASE("parameter count and compression ratio") {
    PepsPair p;
    p.node_factor = Matrix::Zero(64, 8);
    p.time_factor = Matrix::Zero(12, 4);
    CHECK(p.parameter_count() == 64 * 8 + 12 * 4 + 64 * 4 + 16 * 8);
    CHECK(compression_ratio(p, 64, 12) == doctest::Approx(58368.0 / 944.0).epsilon(1e-14));

    for (std::size_t n = 2; n <= 5; ++n) {
        PepsPair full;
        full.node_factor = Matrix::Zero(n, n);
        full.time_factor = Matrix::Zero(n, n);
        const double nn = static_cast<double>(n);
        CHECK(compression_ratio(full, n, n) == doctest::Approx(2 * nn * nn * nn / (2 * nn * nn + 2 * nn * nn * nn)));
        CHECK(compression_ratio(full, n, n) < 1.0);
    }
    for (std::size_t n = 2; n <= 8; ++n)
        for (std::size_t t = 2; t <= 8; ++t)
            for (std::size_t rn = 1; rn < n; ++rn)
                for (std::size_t rt = 1; rt < t; ++rt) {
                    PepsPair q;
                    q.node_factor = Matrix::Zero(n, rn);
                    q.time_factor = Matrix::Zero(t, rt);
                    REQUIRE(q.parameter_count() < n * n * t + t * t * n);
                }
    const PepsOptions d = default_peps_options(16, 12);
    CHECK(d.rank_nodes == 4);
    CHECK(d.rank_time == 6);
    CHECK(default_peps_options(5, 3).rank_nodes == 2);
    CHECK(default_peps_options(5, 3).rank_time == 2);
}

TEST_CASE("reconstructions lift to finite filters") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        auto [a, b] = random_pair(5, 4, rng);
        const PepsPair p = peps_fit(a, b, default_peps_options(5, 4));
        auto [ra, rb] = peps_reconstruct(p);
        for (double& v : ra.data()) v = std::max(v, 0.0);
        for (double& v : rb.data()) v = std::max(v, 0.0);
        const LiftedGraph la = lift_slices(ra, GraphKind::Spatial, {3, false});
        const LiftedGraph lb = lift_slices(rb, GraphKind::Temporal, {3, false});
        CHECK(la.filters.all_finite());
        CHECK(lb.filters.all_finite());
        const DenseTensor x = oracle::random_tensor({2, 4, 5, 1}, rng);
        const DenseTensor out = tgcl_forward(sgcl_forward(x, la, {oracle::random_tensor({3, 2, 4}, rng)}), lb,
                                             {oracle::random_tensor({6, 1, 5}, rng)});
        CHECK(out.all_finite());
    }
}

TEST_CASE("invalid inputs") {
    Rng rng(3);
    auto [a, b] = random_pair(3, 2, rng);
    CHECK_THROWS_AS(peps_fit(a, b, {4, 1, 5, 1e-6}), ShapeError);
    CHECK_THROWS_AS(peps_fit(a, b, {1, 3, 5, 1e-6}), ShapeError);
    CHECK_THROWS_AS(peps_fit(a, b, {1, 1, 0, 1e-6}), ConfigError);
    CHECK_THROWS_AS(peps_fit(a, DenseTensor({2, 2, 4}), {1, 1, 5, 1e-6}), ShapeError);
    a(0, 1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(peps_fit(a, b, {1, 1, 5, 1e-6}), NumericalError);
}
