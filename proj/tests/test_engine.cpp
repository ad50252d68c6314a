// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

#include <braidmc/audit.hpp>
#include <braidmc/engine.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace braidmc;

namespace {

RunParams small_params(LatticeSpec spec, ModelKind kind, double t, double V, double mu, double beta,
                       Rational filling = {1, 2}) {
    RunParams p;
    p.lattice = spec;
    p.model.kind = kind;
    p.model.t = t;
    p.model.V = V;
    p.model.mu = mu;
    p.model.beta = beta;
    p.model.filling = filling;
    p.model.cutoff = 2.0;
    p.thermalization_sweeps = 200;
    p.target_samples = 1000;
    p.seed = 7;
    return p;
}

}  // namespace

// Every proposal kind, checked against weights and proposal densities recomputed from scratch.
TEST(Reversibility, AuditAllMoveKinds) {
    const std::vector<RunParams> systems = {
        small_params({LatticeKind::chain, 4}, ModelKind::nn_chain, 1.0, 1.3, 0.7, 2.0),
        small_params({LatticeKind::square, 3, 2}, ModelKind::nn_square, 0.8, 2.0, 2.5, 3.0),
        small_params({LatticeKind::kagome, 2}, ModelKind::hexagon_kagome, 1.0, 0.6, 2.0, 1.5),
        small_params({LatticeKind::square, 4}, ModelKind::dipolar_square, 1.0, 1.5, 1.0, 1.0),
        small_params({LatticeKind::chain, 2}, ModelKind::nn_chain, 1.0, 0.0, -0.4, 1.0),
    };
    std::map<MoveKind, int> audited;
    int pairs = 0;
    double worst = 0;
    double worst_weight = 0;
    for (const auto& p : systems) {
        Simulation sim(p);
        sim.thermalize();
        Rng rng(1234);
        UpdateStats st;
        for (int k = 0; k < 20000; ++k) {
            for (auto kind : {MoveKind::insert_worm, MoveKind::remove_worm, MoveKind::shift_end, MoveKind::insert_kink,
                              MoveKind::remove_kink}) {
                const Proposal prop = sim.sampler().propose(kind, rng);
                if (!prop.feasible) continue;
                const auto rec = audit_proposal(sim.sampler(), prop);
                ASSERT_TRUE(rec.has_value());
                const double err = std::abs(rec->production - rec->brute);
                worst = std::max(worst, err);
                worst_weight = std::max(worst_weight, rec->weight_error);
                EXPECT_LE(err, 1e-10) << kMoveNames[static_cast<std::size_t>(kind)] << " production "
                                      << rec->production << " brute " << rec->brute;
                ++audited[kind];
                ++pairs;
            }
            sim.sampler().step(rng, st);
        }
    }
    EXPECT_GE(pairs, 100000);
    for (auto kind : {MoveKind::insert_worm, MoveKind::remove_worm, MoveKind::shift_end, MoveKind::insert_kink,
                      MoveKind::remove_kink})
        EXPECT_GT(audited[kind], 1000) << kMoveNames[static_cast<std::size_t>(kind)];
    EXPECT_LE(worst_weight, 1e-10);
    RecordProperty("worst_log_ratio_error", std::to_string(worst));
}

TEST(Sweep, ZeroHoppingNeverInsertsKinks) {
    auto p = small_params({LatticeKind::chain, 4}, ModelKind::nn_chain, 0.0, 1.0, 0.5, 2.0);
    Simulation sim(p);
    Rng rng(5);
    UpdateStats st;
    int feasible = 0;
    for (int k = 0; k < 20000; ++k) {
        if (sim.sampler().config().has_worm()) {
            const auto prop = sim.sampler().propose(MoveKind::insert_kink, rng);
            if (prop.feasible) {
                ++feasible;
                EXPECT_EQ(std::exp(prop.log_ratio), 0.0);
            }
        }
        sim.sampler().step(rng, st);
    }
    EXPECT_GT(feasible, 100);
    EXPECT_EQ(st[MoveKind::insert_kink].accepted, 0U);
    EXPECT_EQ(sim.sampler().config().kink_count(), 0U);
}

TEST(Sweep, TwoSiteSymmetry) {
    auto p = small_params({LatticeKind::chain, 2}, ModelKind::nn_chain, 1.0, 0.0, 0.0, 2.0);
    p.target_samples = 20000;
    const auto s = run(p);
    ASSERT_EQ(s.samples.size(), 20000U);
    std::vector<double> on0;
    for (const auto& x : s.samples) on0.push_back(x.fock0[0]);
    const auto e = binned_error(on0);
    EXPECT_NEAR(e.mean, 0.5, 3 * e.stderr_ + 1e-12);
}

TEST(Sweep, InvariantsHoldAfterEveryAcceptedUpdate) {
    auto p = small_params({LatticeKind::kagome, 2}, ModelKind::hexagon_kagome, 1.0, 1.0, 4.0, 2.0);
    Simulation sim(p);
    Rng rng(77);
    UpdateStats st;
    for (int k = 0; k < 50000; ++k) {
        if (!sim.sampler().step(rng, st)) continue;
        const auto rep = sim.sampler().config().check_invariants();
        ASSERT_TRUE(rep.ok()) << rep.problems.front();
    }
    for (std::size_t k = 0; k < kMoveKinds; ++k) EXPECT_LE(st.moves[k].accepted, st.moves[k].proposed);
}

TEST(Sweep, LogWeightDriftAfterMillionAcceptedUpdates) {
    auto p = small_params({LatticeKind::chain, 4}, ModelKind::nn_chain, 1.0, 2.0, 1.0, 4.0);
    Simulation sim(p);
    Rng rng(2024);
    UpdateStats st;
    std::size_t accepted = 0;
    while (accepted < 1000000)
        if (sim.sampler().step(rng, st)) ++accepted;
    EXPECT_LE(std::abs(sim.sampler().log_weight() - sim.sampler().recompute_log_weight()), 1e-9);
}

TEST(Run, EmptyRequest) {
    auto p = small_params({LatticeKind::chain, 4}, ModelKind::nn_chain, 1.0, 0.0, 0.0, 1.0);
    p.thermalization_sweeps = 0;
    p.target_samples = 0;
    const auto s = run(p);
    EXPECT_TRUE(s.samples.empty());
}

TEST(Run, TwoSiteEnergy) {
    auto p = small_params({LatticeKind::chain, 2}, ModelKind::nn_chain, 1.0, 0.0, 0.0, 10.0);
    p.target_samples = 20000;
    const auto s = run(p);
    const auto e = estimate_energy(s);
    EXPECT_NEAR(e.mean, -1.0, 3 * e.stderr_);
    EXPECT_LT(e.stderr_, 0.05);
}

TEST(Run, FourRingEnergy) {
    auto p = small_params({LatticeKind::chain, 4}, ModelKind::nn_chain, 1.0, 0.0, -1.0, 10.0, {1, 4});
    p.target_samples = 20000;
    const auto s = run(p);
    const auto e = estimate_energy(s);
    // ground state -2t; the first excited single-particle level is 2t higher
    EXPECT_NEAR(e.mean, -2.0, 3 * e.stderr_ + 1e-6);
}

TEST(Run, SnapshotsAreClosedAtTargetN) {
    auto p = small_params({LatticeKind::square, 3, 2}, ModelKind::nn_square, 1.0, 2.0, 3.0, 2.0);
    const auto s = run(p);
    ASSERT_EQ(s.samples.size(), p.target_samples);
    for (const auto& x : s.samples) {
        EXPECT_EQ(particle_count(x.fock0), 3);
        EXPECT_EQ(x.cycles.particles(), 3);
    }
    EXPECT_EQ(s.diagnostics.invariant_violations, 0U);
    EXPECT_LE(s.diagnostics.max_weight_drift, 1e-9);
}

TEST(Run, DeterministicStream) {
    auto p = small_params({LatticeKind::square, 3, 2}, ModelKind::nn_square, 1.0, 2.0, 3.0, 2.0);
    const auto a = run(p);
    const auto b = run(p);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        EXPECT_EQ(a.samples[k].fock0, b.samples[k].fock0);
        EXPECT_EQ(a.samples[k].kinks, b.samples[k].kinks);
        EXPECT_EQ(a.samples[k].diag_energy, b.samples[k].diag_energy);
        EXPECT_EQ(a.samples[k].cycles, b.samples[k].cycles);
    }
    p.replica = 1;
    const auto c = run(p);
    bool differs = false;
    for (std::size_t k = 0; k < a.samples.size(); ++k) differs |= a.samples[k].kinks != c.samples[k].kinks;
    EXPECT_TRUE(differs);
}

TEST(Run, StalledSamplerAtHopelessMu) {
    auto p = small_params({LatticeKind::square, 4}, ModelKind::nn_square, 1.0, 1.0, -30.0, 2.0);
    p.thermalization_sweeps = 20;
    p.stall_sweeps = 300;
    EXPECT_THROW(run(p), StalledSampler);
}

TEST(Run, DeepCheckerboardTrivialCyclesDominate) {
    auto p = small_params({LatticeKind::square, 4}, ModelKind::nn_square, 1.0, 20.0, 40.0, 18.0);
    p.target_samples = 1500;
    const auto s = run(p);
    std::map<CycleVector, int> hist;
    for (const auto& x : s.samples) ++hist[x.cycles];
    CycleVector trivial;
    trivial.counts.assign(8, 0);
    trivial.counts[0] = 8;
    int best = 0;
    CycleVector top;
    for (const auto& [q, n] : hist)
        if (n > best) {
            best = n;
            top = q;
        }
    EXPECT_EQ(top, trivial);
    EXPECT_EQ(s.diagnostics.invariant_violations, 0U);
}

TEST(EstimateEnergy, TooFewSamples) {
    SampleStream s;
    s.samples.resize(50);
    EXPECT_THROW(estimate_energy(s), TooFewSamples);
}

TEST(TuneMu, SymmetricPointHalfFilling) {
    auto p = small_params({LatticeKind::square, 4}, ModelKind::nn_square, 1.0, 3.0, 0.0, 2.0);
    const auto lat = build_lattice(p.lattice);
    const auto table = build_interactions(lat, p.model.kind);
    const double mu = symmetric_mu(p.model, table);
    EXPECT_DOUBLE_EQ(mu, 6.0);
    std::vector<double> ns;
    const auto tp = pilot_point(p, mu, 8, 6000);
    EXPECT_NEAR(tp.mean_n, 8.0, 0.25);
}

TEST(TuneMu, EmptyLimit) {
    auto p = small_params({LatticeKind::chain, 6}, ModelKind::nn_chain, 1.0, 0.0, 0.0, 2.0);
    const auto tp = pilot_point(p, -25.0, 3, 400);
    EXPECT_LT(tp.mean_n, 0.05);
}

TEST(TuneMu, CheckerboardFindsTarget) {
    auto p = small_params({LatticeKind::square, 4}, ModelKind::nn_square, 1.0, 20.0, 0.0, 18.0);
    const auto res = tune_mu(p, 8, 200, 8);
    EXPECT_GE(res.fraction_at_target, 0.10);
    EXPECT_FALSE(res.non_monotone);
}
