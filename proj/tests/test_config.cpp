// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

#include <braidmc/config.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace braidmc;

namespace {

const char* kCheckerboard = R"(
# deep checkerboard
[lattice]
kind = square
L = 4

[model]
kind = nn_square
V = 20        # in units of t
mu = symmetric
filling = 1/2
beta = 18

[run]
samples = 500
seed = 42
replicas = 2
translations = false

[output]
dir = "out/cb # not a comment"
)";

std::string error_of(const std::string& text) {
    try {
        validate_config(parse_config_text(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, ParsesSectionsAndValues) {
    const auto cfg = parse_config_text(kCheckerboard);
    EXPECT_EQ(cfg.params.lattice.kind, LatticeKind::square);
    EXPECT_EQ(cfg.params.lattice.L, 4);
    EXPECT_EQ(cfg.params.model.V, 20.0);
    EXPECT_EQ(cfg.params.model.filling, Rational(1, 2));
    EXPECT_EQ(cfg.params.target_samples, 500U);
    EXPECT_EQ(cfg.params.seed, 42U);
    EXPECT_EQ(cfg.replicas, 2U);
    EXPECT_FALSE(cfg.params.sampler.translations);
    EXPECT_EQ(cfg.mu_mode, MuMode::symmetric);
    EXPECT_EQ(cfg.output_dir, "out/cb # not a comment");
    EXPECT_NO_THROW(validate_config(cfg));
}

TEST(Config, Defaults) {
    const auto cfg = parse_config_text("[lattice]\nL = 6\n");
    EXPECT_EQ(cfg.params.model.beta, 18.0);
    EXPECT_EQ(cfg.params.model.t, 1.0);
    EXPECT_EQ(cfg.params.sampler.worm_fugacity, 1.0);
    EXPECT_EQ(cfg.mu_mode, MuMode::fixed);
    EXPECT_EQ(cfg.replicas, 1U);
}

TEST(Config, UnknownKeyNamed) {
    const std::string msg = error_of("[model]\ntt = 1\n");
    EXPECT_NE(msg.find("'tt'"), std::string::npos) << msg;
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
    EXPECT_NE(error_of("[lattices]\nL = 4\n").find("[lattices]"), std::string::npos);
    // keys are bound to their section
    EXPECT_NE(error_of("[run]\nV = 4\n").find("'V'"), std::string::npos);
}

TEST(Config, RejectsBadValues) {
    EXPECT_FALSE(error_of("[lattice]\nL = four\n").empty());
    EXPECT_FALSE(error_of("[model]\nV = 1.5x\n").empty());
    EXPECT_FALSE(error_of("[model]\nfilling = 1/0\n").empty());
    EXPECT_FALSE(error_of("[model]\nfilling = 3/2\n").empty());
    EXPECT_FALSE(error_of("[run]\nseed = -3\n").empty());
    EXPECT_FALSE(error_of("[run]\ntranslations = maybe\n").empty());
    EXPECT_FALSE(error_of("L = 4\n").empty());
    EXPECT_FALSE(error_of("[lattice]\nL 4\n").empty());
    EXPECT_FALSE(error_of("[lattice]\nL = 4\nL = 6\n").empty());
    EXPECT_FALSE(error_of("[lattice\n").empty());
}

TEST(Config, CrossFieldValidation) {
    // kagome model on a square lattice
    EXPECT_FALSE(error_of("[model]\nkind = hexagon_kagome\n").empty());
    // 1/3 filling of 25 sites is not an integer
    EXPECT_FALSE(error_of("[lattice]\nL = 5\n[model]\nfilling = 1/3\n").empty());
    EXPECT_FALSE(error_of("[run]\nsamples = 0\n").empty());
    EXPECT_FALSE(error_of("[run]\nreplicas = 0\n").empty());
    EXPECT_FALSE(error_of("[model]\nbeta = 0\n").empty());
    EXPECT_TRUE(error_of("[lattice]\nkind = kagome\nL = 2\n[model]\nkind = hexagon_kagome\nfilling = 1/3\n").empty());
}

TEST(Config, Overrides) {
    auto cfg = parse_config_text(kCheckerboard);
    apply_override(cfg, "model.V=5");
    apply_override(cfg, "run.samples = 77");
    apply_override(cfg, "model.mu=0.25");
    EXPECT_EQ(cfg.params.model.V, 5.0);
    EXPECT_EQ(cfg.params.target_samples, 77U);
    EXPECT_EQ(cfg.mu_mode, MuMode::fixed);
    EXPECT_EQ(cfg.params.model.mu, 0.25);
    EXPECT_THROW(apply_override(cfg, "model.tt=1"), ConfigError);
    EXPECT_THROW(apply_override(cfg, "V=1"), ConfigError);
}

TEST(Config, CanonicalIsStableAndSensitive) {
    const auto a = parse_config_text(kCheckerboard);
    const auto b = parse_config_text(std::string(kCheckerboard) + "\n# trailing comment\n");
    EXPECT_EQ(a.canonical(), b.canonical());
    auto c = a;
    apply_override(c, "run.seed=43");
    EXPECT_NE(a.canonical(), c.canonical());
    EXPECT_EQ(a.to_json()["model"]["mu_mode"], "symmetric");
}

TEST(Config, ResolveSymmetricMu) {
    auto cfg = parse_config_text(kCheckerboard);
    EXPECT_FALSE(resolve_mu(cfg).has_value());
    // four neighbours at half filling
    EXPECT_DOUBLE_EQ(cfg.params.model.mu, 40.0);
}

TEST(Config, ShippedPresetsParse) {
    const std::filesystem::path dir = BRAIDMC_PRESET_DIR;
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".toml") continue;
        SCOPED_TRACE(entry.path().string());
        EXPECT_NO_THROW(validate_config(load_config(entry.path().string())));
        ++n;
    }
    EXPECT_GE(n, 8);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/braidmc.toml"), ConfigError); }
