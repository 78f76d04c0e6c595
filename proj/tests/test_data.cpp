#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "tengraph/data.hpp"

using namespace tengraph;

namespace {

SeriesTable parse(const std::string& text) {
    std::istringstream is(text);
    return parse_csv(is, "mem.csv");
}

SeriesTable ramp_table(std::size_t steps, std::size_t nodes, Rng& rng) {
    SeriesTable s;
    Matrix m(steps, nodes);
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t j = 0; j < nodes; ++j) m(t, j) = 5.0 * rng.uniform() + static_cast<double>(j);
    s.values.push_back(m);
    for (std::size_t j = 0; j < nodes; ++j) s.station_ids.push_back("n" + std::to_string(j));
    return s;
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("csv of integers") {
    const SeriesTable s = parse("a,b\n1,2\n3,4\n5,6\n");
    REQUIRE(s.steps() == 3);
    REQUIRE(s.nodes() == 2);
    CHECK(s.station_ids == std::vector<std::string>{"a", "b"});
    Matrix expect(3, 2);
    expect << 1, 2, 3, 4, 5, 6;
    CHECK(s.values[0] == expect);
    CHECK(s.imputed == 0);
    CHECK(s.timestamps.empty());
}

TEST_CASE("missing cells are carried forward, leading gaps zero-filled") {
    const SeriesTable s = parse("a,b\n5,1\n,2\nNA,NaN\n");
    CHECK(s.values[0](1, 0) == 5.0);
    CHECK(s.values[0](2, 0) == 5.0);
    CHECK(s.values[0](2, 1) == 2.0);
    CHECK(s.imputed == 3);

    const SeriesTable lead = parse("a,b\n,1\n2,3\n");
    CHECK(lead.values[0](0, 0) == 0.0);
    CHECK(lead.imputed == 1);
}

TEST_CASE("malformed csv reports the position") {
    const std::string ragged = error_of("a,b\n1,2\n3\n");
    CHECK(ragged.find("row 3") != std::string::npos);
    const std::string bad = error_of("a,b\n1,2\n3,x7\n");
    CHECK(bad.find("row 3") != std::string::npos);
    CHECK(bad.find("column 2") != std::string::npos);
    CHECK_FALSE(error_of("").empty());
    CHECK_FALSE(error_of("a,b\n").empty());
    CHECK_FALSE(error_of("timestamp,a\n2,1\n1,1\n").empty());
}

TEST_CASE("timestamp column and csv round trip") {
    const SeriesTable s = parse("timestamp,x,y\n0,1.5,2\n300,-1,0.25\n");
    CHECK(s.timestamps == std::vector<double>{0, 300});
    CHECK(s.nodes() == 2);
    std::ostringstream os;
    write_csv(os, s);
    const SeriesTable back = parse(os.str());
    CHECK(back.values[0] == s.values[0]);
    CHECK(back.timestamps == s.timestamps);
    CHECK(back.station_ids == s.station_ids);
}

TEST_CASE("window counts follow the split arithmetic") {
    Rng rng(1);
    const SeriesTable s = ramp_table(100, 3, rng);
    const DatasetSplits d = window_split(s, 12, 3, {});
    CHECK(d.train_steps == 70);
    CHECK(d.val_steps == 10);
    CHECK(d.test_steps == 20);
    CHECK(d.train.windows() == 70 - 12 - 3 + 1);
    CHECK(d.val.empty());  // 10 steps cannot hold 12 + 3
    CHECK(d.flags == std::vector<std::string>{"val split empty"});
    CHECK(d.test.windows() == 20 - 15 + 1);
    CHECK(d.train.x.shape() == Shape{56, 12, 3, 1});
    CHECK(d.train.y.shape() == Shape{56, 3, 3, 1});
    CHECK(d.test.first_step == 80);

    const DatasetSplits only = window_split(s, 12, 3, {1.0, 0.0, 0.0});
    CHECK(only.val.empty());
    CHECK(only.test.empty());
    CHECK(only.flags == std::vector<std::string>{"val split empty", "test split empty"});
}

TEST_CASE("too-short series names the minimum length") {
    Rng rng(2);
    const SeriesTable s = ramp_table(20, 2, rng);
    try {
        window_split(s, 12, 3, {0.7, 0.1, 0.2});
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("at least 22") != std::string::npos);
    }
    CHECK_THROWS_AS(window_split(s, 12, 3, {0.5, 0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(window_split(s, 0, 3, {}), ConfigError);
}

TEST_CASE("train statistics standardize the train segment") {
    Rng rng(3);
    const SeriesTable s = ramp_table(200, 4, rng);
    const DatasetSplits d = window_split(s, 6, 2, {});
    const std::size_t n = 4, l = 6;
    // The train segment is the first window followed by each later window's last step.
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> seg;
        for (std::size_t t = 0; t < l; ++t) seg.push_back(d.train.x(0, t, j, 0));
        for (std::size_t i = 1; i < d.train.windows(); ++i) seg.push_back(d.train.x(i, l - 1, j, 0));
        const std::size_t last = d.train.windows() - 1;
        for (std::size_t h = 0; h < 2; ++h) seg.push_back(d.train.y(last, h, j, 0));
        REQUIRE(seg.size() == d.train_steps);
        double mean = 0.0;
        for (double v : seg) mean += v;
        mean /= static_cast<double>(seg.size());
        double var = 0.0;
        for (double v : seg) var += (v - mean) * (v - mean);
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(std::sqrt(var / static_cast<double>(seg.size())) - 1.0) < 1e-10);
    }
}

TEST_CASE("windows reconstruct the series and never leak across splits") {
    Rng rng(4);
    const SeriesTable s = ramp_table(300, 3, rng);
    const DatasetSplits d = window_split(s, 8, 4, {});
    for (const WindowedDataset* ds : {&d.train, &d.val, &d.test}) {
        const DenseTensor x = denormalize(ds->x, ds->stats), y = denormalize(ds->y, ds->stats);
        for (std::size_t i = 0; i < ds->windows(); ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                for (std::size_t t = 0; t < 8; ++t)
                    REQUIRE(std::abs(x(i, t, j, 0) - s.values[0](ds->first_step + i + t, j)) < 1e-12);
                for (std::size_t h = 0; h < 4; ++h)
                    REQUIRE(std::abs(y(i, h, j, 0) - s.values[0](ds->first_step + i + 8 + h, j)) < 1e-12);
            }
    }
    // Last target step of the last train window precedes the first input step of val and test.
    const std::size_t train_last_y = d.train.first_step + d.train.windows() - 1 + 8 + 4 - 1;
    CHECK(train_last_y < d.val.first_step);
    const std::size_t val_last_y = d.val.first_step + d.val.windows() - 1 + 8 + 4 - 1;
    CHECK(val_last_y < d.test.first_step);
    CHECK(d.test.first_step + d.test.windows() - 1 + 11 == 299);
}

TEST_CASE("normalize and denormalize are inverse") {
    Rng rng(5);
    const DenseTensor x = oracle::random_tensor({3, 4, 2, 2}, rng, -5, 5);
    const NormalizationStats st{{1.0, -2.0, 0.5, 3.0}, {2.0, 0.5, 1.0, 4.0}};
    CHECK(oracle::max_abs_diff(denormalize(normalize(x, st), st), x) < 1e-12);
    CHECK(normalize(x, st)(0, 0, 1, 0) == doctest::Approx((x(0, 0, 1, 0) - 0.5) / 1.0));
    CHECK_THROWS_AS(normalize(x, {{1.0}, {1.0}}), ShapeError);
}

TEST_CASE("persistence repeats the last step") {
    Rng rng(6);
    const DenseTensor x = oracle::random_tensor({2, 5, 3, 1}, rng);
    const DenseTensor p = persistence_forecast(x, 4);
    CHECK(p.shape() == Shape{2, 4, 3, 1});
    for (std::size_t h = 0; h < 4; ++h) CHECK(p(1, h, 2, 0) == x(1, 4, 2, 0));
}

TEST_CASE("synthetic generator") {
    SynthOptions flat;
    flat.nodes = 6;
    flat.steps = 50;
    flat.noise = 0.0;
    flat.amplitude = 0.0;
    flat.spread = 0.0;
    const SyntheticSeries c = synth_diffusion(flat);
    CHECK((c.table.values[0].array() - flat.level).abs().maxCoeff() < 1e-12);

    SynthOptions o;
    o.nodes = 8;
    o.steps = 300;
    o.seed = 3;
    const SyntheticSeries a = synth_diffusion(o), b = synth_diffusion(o);
    CHECK(a.table.values[0] == b.table.values[0]);
    CHECK(a.adjacency == b.adjacency);
    o.seed = 4;
    CHECK(synth_diffusion(o).table.values[0] != a.table.values[0]);

    CHECK((a.adjacency - a.adjacency.transpose()).norm() == 0.0);
    CHECK(a.adjacency.diagonal().norm() == 0.0);
    for (Eigen::Index i = 0; i < a.adjacency.rows(); ++i) CHECK(a.adjacency.row(i).sum() >= 1.0);

    CHECK_THROWS_AS(synth_diffusion({1}), ConfigError);
}

TEST_CASE("noiseless diffusion stays inside the initial range") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthOptions o;
        o.nodes = 10;
        o.steps = 1000;
        o.seed = seed;
        o.noise = 0.0;
        const SyntheticSeries s = synth_diffusion(o);
        const double lo = s.initial_state.minCoeff() - o.amplitude, hi = s.initial_state.maxCoeff() + o.amplitude;
        CHECK(s.table.values[0].minCoeff() >= lo - 1e-12);
        CHECK(s.table.values[0].maxCoeff() <= hi + 1e-12);

        // Removing the seasonal term recovers the averaging recursion.
        o.amplitude = 0.0;
        const Matrix z = synth_diffusion(o).table.values[0];
        Matrix p = s.adjacency;
        for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
        for (Eigen::Index t = 0; t + 1 < 20; ++t) {
            const Vector next = (1.0 - o.gamma) * z.row(t).transpose() + o.gamma * p * z.row(t).transpose();
            CHECK((z.row(t + 1).transpose() - next).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}
