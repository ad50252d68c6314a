// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

#include <braidmc/engine.hpp>
#include <braidmc/worldlines.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace braidmc;

namespace {

std::int32_t bond_between(const Lattice& lat, Site i, Site j) {
    for (const auto& inc : lat.incident[static_cast<std::size_t>(i)])
        if (inc.other == j) return inc.bond;
    throw std::logic_error("no bond");
}

struct Builder {
    std::shared_ptr<const Lattice> lat;
    Configuration c;

    Builder(LatticeSpec spec, double beta, FockState f)
        : lat(std::make_shared<const Lattice>(build_lattice(spec))), c(lat, beta, std::move(f)) {}

    Builder& hop(Site from, Site to, double tau) {
        c.add_kink(bond_between(*lat, from, to), from, to, tau / c.beta());
        return *this;
    }
};

// 2x2 plaquette ring 0-1-3-2; three particles rotate one step each
Builder three_cycle() {
    Builder b({LatticeKind::square, 2}, 4.0, {1, 1, 0, 1});
    b.hop(3, 2, 0.5).hop(1, 3, 1.5).hop(0, 1, 2.5).hop(2, 0, 3.5);
    return b;
}

// 3x2 torus, sites x + 3y; particles on 0 and 4 exchange around plaquette 0-1-4-3, particle on 2 idles
Builder exchange_first() {
    Builder b({LatticeKind::square, 3, 2}, 5.0, {1, 0, 1, 0, 1, 0});
    b.hop(0, 1, 0.4).hop(4, 3, 1.1).hop(1, 4, 2.0).hop(3, 0, 3.7);
    return b;
}

// same exchange through the other plaquette 1-2-5-4, with the idle particle on 0
Builder exchange_second() {
    Builder b({LatticeKind::square, 3, 2}, 5.0, {1, 1, 0, 0, 0, 1});
    b.hop(1, 2, 0.9).hop(5, 4, 1.3).hop(2, 5, 4.1).hop(4, 1, 4.6);
    return b;
}

}  // namespace

TEST(Occupation, KinkFree) {
    Builder b({LatticeKind::chain, 4}, 3.0, {1, 0, 1, 0});
    for (double tau : {0.0, 0.7, 2.999}) {
        EXPECT_EQ(b.c.occupation(0, tau), 1);
        EXPECT_EQ(b.c.occupation(1, tau), 0);
    }
    EXPECT_THROW((void)b.c.occupation(0, 3.0), InvalidArgument);
}

TEST(Occupation, ExcursionAndBoundaryConvention) {
    Builder b({LatticeKind::chain, 4}, 4.0, {1, 0, 0, 0});
    b.hop(0, 1, 1.0).hop(1, 0, 3.0);
    EXPECT_EQ(b.c.occupation(1, 2.0), 1);
    EXPECT_EQ(b.c.occupation(0, 2.0), 0);
    EXPECT_EQ(b.c.occupation(1, std::nextafter(1.0, 0.0)), 0);
    EXPECT_EQ(b.c.occupation(1, 1.0), 1);
    EXPECT_EQ(b.c.occupation(0, 3.0), 1);
    EXPECT_TRUE(b.c.check_invariants().ok());
}

TEST(FockState, KinkFreeAndWorm) {
    Builder b({LatticeKind::chain, 4}, 2.0, {0, 1, 1, 0});
    EXPECT_EQ(b.c.fock_state(0.0), (FockState{0, 1, 1, 0}));
    EXPECT_EQ(b.c.fock_state(1.9), (FockState{0, 1, 1, 0}));
    b.c.open_worm(0, 0.2, 0.4);
    EXPECT_THROW((void)b.c.fock_state(0.0), InvalidArgument);
    EXPECT_THROW((void)permutation_cycles(b.c), InvalidArgument);
}

TEST(FockState, SingleHopLocality) {
    Builder b({LatticeKind::chain, 5}, 2.0, {1, 0, 1, 0, 0});
    b.hop(2, 3, 0.5).hop(3, 2, 1.5);
    const auto before = b.c.fock_state(std::nextafter(0.5, 0.0));
    const auto after = b.c.fock_state(0.5);
    int diffs = 0;
    for (std::size_t s = 0; s < before.size(); ++s)
        if (before[s] != after[s]) {
            ++diffs;
            EXPECT_TRUE(s == 2 || s == 3);
        }
    EXPECT_EQ(diffs, 2);
}

TEST(FockState, ThreeParticlePlaquetteAtZero) {
    const auto b = three_cycle();
    EXPECT_EQ(b.c.fock_state(0.0), (FockState{1, 1, 0, 1}));
    EXPECT_EQ(particle_count(b.c.fock_state(2.0)), 3);
}

TEST(LogWeight, KinkFree) {
    Builder b({LatticeKind::square, 4}, 3.0, FockState(16, 0));
    FockState f(16, 0);
    f[0] = f[1] = f[5] = 1;
    Configuration c(b.lat, 3.0, f);
    const auto table = build_interactions(*b.lat, ModelKind::nn_square);
    ModelSpec m;
    m.t = 1.3;
    m.V = 2.0;
    m.mu = 0.4;
    m.beta = 3.0;
    EXPECT_NEAR(log_weight(c, m, table), -3.0 * diagonal_energy(f, table, 2.0, 0.4), 1e-12);
    m.t = 0.0;
    EXPECT_THROW((void)log_weight(c, m, table), InvalidArgument);
}

TEST(LogWeight, ExcursionFactor) {
    const double beta = 5.0;
    FockState f{1, 1, 0, 0, 0};
    Builder b({LatticeKind::chain, 5}, beta, f);
    const auto table = build_interactions(*b.lat, ModelKind::nn_chain);
    ModelSpec m;
    m.t = 0.7;
    m.V = 1.9;
    m.mu = -0.3;
    m.beta = beta;
    const double base = log_weight(b.c, m, table);
    b.hop(1, 2, 1.25).hop(2, 1, 3.5);
    const double dE = energy_delta_hop(f, 1, 2, table, m.V, m.mu);
    EXPECT_NEAR(log_weight(b.c, m, table) - base, 2.0 * std::log(m.t) - dE * 2.25, 1e-12);
}

TEST(LogWeight, CyclicTimeShiftInvariant) {
    auto b = exchange_first();
    const auto table = build_interactions(*b.lat, ModelKind::nn_square);
    ModelSpec m;
    m.t = 1.1;
    m.V = 3.0;
    m.mu = 0.5;
    m.beta = 5.0;
    const double w = log_weight(b.c, m, table);
    for (double d : {0.3, 1.7, 4.99, -2.2}) {
        const auto s = b.c.shifted(d);
        EXPECT_TRUE(s.check_invariants().ok());
        EXPECT_NEAR(log_weight(s, m, table), w, 1e-10);
    }
}

TEST(PermutationCycles, ThreeCycleOnPlaquette) {
    const auto b = three_cycle();
    ASSERT_TRUE(b.c.check_invariants().ok());
    EXPECT_EQ(permutation_cycles(b.c).counts, (std::vector<int>{0, 0, 1}));
}

TEST(PermutationCycles, TwoDistinctExchanges) {
    const auto b1 = exchange_first();
    const auto b2 = exchange_second();
    ASSERT_TRUE(b1.c.check_invariants().ok());
    ASSERT_TRUE(b2.c.check_invariants().ok());
    EXPECT_EQ(permutation_cycles(b1.c).counts, (std::vector<int>{1, 1, 0}));
    EXPECT_EQ(permutation_cycles(b2.c).counts, (std::vector<int>{1, 1, 0}));
    EXPECT_NE(b1.c.kinks()[0].from, b2.c.kinks()[0].from);
}

TEST(PermutationCycles, KinkFreeIsIdentity) {
    Builder b({LatticeKind::kagome, 2}, 18.0, FockState{1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 0});
    const auto q = permutation_cycles(b.c);
    EXPECT_EQ(q.counts, (std::vector<int>{5, 0, 0, 0, 0}));
    EXPECT_EQ(q.str(), "5-0-0-0-0");
}

TEST(PermutationCycles, ShiftInvariant) {
    for (const auto& b : {three_cycle(), exchange_first()}) {
        const auto q = permutation_cycles(b.c);
        for (double d : {0.1, 0.6, 1.3, 2.9, 3.6})
            EXPECT_EQ(permutation_cycles(b.c.shifted(d)), q);
    }
}

TEST(Invariants, DetectsCorruption) {
    auto b = exchange_first();
    std::vector<std::vector<Event>> ev;
    std::vector<std::uint8_t> idle = b.c.idle_occupations();
    for (std::size_t s = 0; s < b.c.site_count(); ++s) ev.push_back(b.c.events(static_cast<Site>(s)));
    EXPECT_NO_THROW(Configuration::from_parts(b.lat, 5.0, ev, idle, std::nullopt));
    auto broken = ev;
    broken[0][0].occ_after ^= 1;
    EXPECT_THROW(Configuration::from_parts(b.lat, 5.0, broken, idle, std::nullopt), InvalidArgument);
    auto unpaired = ev;
    unpaired[1].clear();
    EXPECT_THROW(Configuration::from_parts(b.lat, 5.0, unpaired, idle, std::nullopt), InvalidArgument);
}

TEST(Invariants, RandomSampledConfigurations) {
    RunParams p;
    p.lattice = {LatticeKind::square, 3, 2};
    p.model.kind = ModelKind::nn_square;
    p.model.V = 1.0;
    p.model.mu = 1.5;
    p.model.beta = 3.0;
    p.thermalization_sweeps = 50;
    Simulation sim(p);
    sim.thermalize();
    Rng rng(99);
    UpdateStats st;
    int closed = 0;
    for (int k = 0; k < 3000; ++k) {
        sim.sampler().run_steps(rng, 7, st);
        const auto& c = sim.sampler().config();
        ASSERT_TRUE(c.check_invariants().ok()) << c.check_invariants().problems.front();
        if (c.has_worm()) continue;
        ++closed;
        const auto q = permutation_cycles(c);
        EXPECT_EQ(q.particles(), c.particle_number());
        const double d = (rng.uniform() - 0.5) * 10.0;
        EXPECT_EQ(permutation_cycles(c.shifted(d)), q);
    }
    EXPECT_GT(closed, 100);
}

TEST(Translations, BijectiveAndWeightPreserving) {
    struct Case {
        LatticeSpec spec;
        ModelKind kind;
        double mu;
    };
    for (const auto& cs : {Case{{LatticeKind::square, 3, 2}, ModelKind::nn_square, 1.5},
                           Case{{LatticeKind::kagome, 2}, ModelKind::hexagon_kagome, 3.0},
                           Case{{LatticeKind::chain, 2}, ModelKind::nn_chain, 0.0},
                           Case{{LatticeKind::square, 4}, ModelKind::dipolar_square, 2.0}}) {
        const auto lat = build_lattice(cs.spec);
        const auto ts = lattice_translations(lat);
        const std::size_t cells = cs.spec.kind == LatticeKind::chain
                                      ? static_cast<std::size_t>(cs.spec.L)
                                      : static_cast<std::size_t>(cs.spec.extent_x() * cs.spec.extent_y());
        ASSERT_EQ(ts.size(), cells);
        for (std::size_t s = 0; s < lat.site_count(); ++s) EXPECT_EQ(ts[0].site[s], static_cast<Site>(s));
        for (const auto& t : ts) {
            std::vector<int> hit(lat.site_count(), 0);
            for (auto s : t.site) ++hit[static_cast<std::size_t>(s)];
            for (int h : hit) EXPECT_EQ(h, 1);
            for (std::size_t b = 0; b < lat.bonds.size(); ++b) {
                const auto& from = lat.bonds[b];
                const auto& to = lat.bonds[static_cast<std::size_t>(t.bond[b])];
                const auto a = t.site[static_cast<std::size_t>(from.a)];
                const auto c = t.site[static_cast<std::size_t>(from.b)];
                EXPECT_TRUE((to.a == a && to.b == c) || (to.a == c && to.b == a));
            }
        }

        RunParams p;
        p.lattice = cs.spec;
        p.model.kind = cs.kind;
        p.model.V = 1.0;
        p.model.mu = cs.mu;
        p.model.beta = 2.0;
        p.model.cutoff = 2.0;
        p.thermalization_sweeps = 50;
        Simulation sim(p);
        sim.thermalize();
        Rng rng(3);
        UpdateStats st;
        ModelSpec m = p.model;
        const auto table = build_interactions(lat, m.kind, m.cutoff);
        for (int k = 0; k < 200; ++k) {
            sim.sampler().run_steps(rng, 11, st);
            const auto& c = sim.sampler().config();
            const auto& t = ts[rng.index(ts.size())];
            const auto d = c.translated(t);
            ASSERT_TRUE(d.check_invariants().ok()) << d.check_invariants().problems.front();
            EXPECT_NEAR(log_weight(d, m, table), log_weight(c, m, table), 1e-9);
            EXPECT_EQ(d.kink_count(), c.kink_count());
            if (!c.has_worm()) {
                EXPECT_EQ(permutation_cycles(d), permutation_cycles(c));
            }
        }
    }
}
