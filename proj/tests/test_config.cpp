#include <doctest.h>

#include "tengraph/config.hpp"

using namespace tengraph;

TEST_CASE("defaults validate and dump every key") {
    const RunConfig c;
    CHECK_NOTHROW(validate(c));
    const std::string text = dump_config_json(c);
    for (const std::string& k : config_keys()) CHECK(text.find("\"" + k + "\"") != std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(parse_config_json(text) == c);
}

TEST_CASE("dumped config re-ingests to the same values") {
    RunConfig c;
    c.sigma2 = 0.123456789012345;
    c.stg_mode = "kernel";
    c.respect_asymmetry = true;
    c.seed = 18446744073709551615ull;
    c.lr = 3e-3;
    c.eval_horizons = "1,2,3";
    CHECK(parse_config_json(dump_config_json(c)) == c);
    CHECK(dump_config_json(parse_config_json(dump_config_json(c))) == dump_config_json(c));
}

TEST_CASE("json parsing is strict") {
    CHECK_THROWS_AS(parse_config_json(R"({"sigma": 0.1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k_a": "three"})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k_a": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k_a": 2.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"peps_clamp": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("{"), ConfigError);

    const RunConfig m = merge_config_json(RunConfig{}, R"({"hidden": 8, "optimizer": "adam", "epsilon": 1})");
    CHECK(m.hidden == 8);
    CHECK(m.optimizer == "adam");
    CHECK(m.epsilon == 1.0);
    CHECK(m.k_a == RunConfig{}.k_a);
}

TEST_CASE("overrides parse per key type") {
    RunConfig c;
    apply_override(c, "epsilon=0.25");
    apply_override(c, "k_b=5");
    apply_override(c, "peps_clamp=false");
    apply_override(c, "train_graphs=1");
    apply_override(c, "composition=additive");
    apply_override(c, "seed=42");
    CHECK(c.epsilon == 0.25);
    CHECK(c.k_b == 5);
    CHECK_FALSE(c.peps_clamp);
    CHECK(c.train_graphs);
    CHECK(c.composition == "additive");
    CHECK(c.seed == 42);
    CHECK_THROWS_AS(apply_override(c, "k_b=2.5"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "k_b=-1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "epsilon=abc"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "peps_clamp=maybe"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "nokey=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "epsilon"), ConfigError);
}

TEST_CASE("validation rejects out-of-range settings") {
    auto rejects = [](auto mutate) {
        RunConfig c;
        mutate(c);
        CHECK_THROWS_AS(validate(c), ConfigError);
    };
    rejects([](RunConfig& c) { c.sigma2 = 0.0; });
    rejects([](RunConfig& c) { c.epsilon = 1.5; });
    rejects([](RunConfig& c) { c.k_a = 0; });
    rejects([](RunConfig& c) { c.stg_mode = "learned"; });
    rejects([](RunConfig& c) { c.composition = "parallel"; });
    rejects([](RunConfig& c) { c.variant = "ttg"; });
    rejects([](RunConfig& c) { c.split_train = 0.9; });
    rejects([](RunConfig& c) { c.horizon = 3; });  // default eval horizons reach 12
    rejects([](RunConfig& c) { c.eval_horizons = "3,,6"; });
    rejects([](RunConfig& c) { c.window = 1; });
    rejects([](RunConfig& c) { c.hidden = 0; });
    rejects([](RunConfig& c) { c.lr = -1.0; });
    rejects([](RunConfig& c) { c.optimizer = "sgd"; });
    rejects([](RunConfig& c) { c.synth_nodes = 1; });
}

TEST_CASE("typed views and builders") {
    RunConfig c;
    CHECK(stg_mode(c) == GraphMode::Evolved);
    CHECK(ttg_mode(c) == GraphMode::Kernel);
    CHECK(composition(c) == Composition::Sequential);
    CHECK(block_activation(c) == Activation::ReLU);
    CHECK(optimizer(c) == Optimizer::Momentum);
    CHECK(loss_kind(c) == LossKind::Mean);
    CHECK(eval_horizons(c) == std::vector<std::size_t>{3, 6, 12});

    CHECK(evolve_options(c, 4).embed_rank == 4);
    CHECK(evolve_options(c, 64).embed_rank == 10);
    const PepsOptions p = peps_options(c, 16, 12);
    CHECK(p.rank_nodes == default_peps_options(16, 12).rank_nodes);
    c.peps_rank_nodes = 3;
    CHECK(peps_options(c, 16, 12).rank_nodes == 3);

    c.optimizer = "adam";
    c.lr = 3e-3;
    c.seed = 9;
    const TrainOptions t = train_options(c);
    CHECK(t.optimizer == Optimizer::Adam);
    CHECK(t.lr == 3e-3);
    CHECK(synth_options(c).seed == 9);
    CHECK(split_fractions(c).val == 0.1);
    CHECK(kernel_params(c).sigma2 == 0.1);
}
