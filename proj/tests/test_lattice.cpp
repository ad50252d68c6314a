// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

#include <braidmc/lattice.hpp>

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace braidmc;

namespace {

FockState checkerboard(const Lattice& lat) {
    FockState f(lat.site_count());
    for (std::size_t s = 0; s < f.size(); ++s) {
        const int x = static_cast<int>(lat.coords[s].x);
        const int y = static_cast<int>(lat.coords[s].y);
        f[s] = static_cast<std::uint8_t>((x + y) % 2 == 0);
    }
    return f;
}

FockState random_fock(std::size_t m, std::mt19937_64& gen) {
    FockState f(m);
    for (auto& v : f) v = static_cast<std::uint8_t>(gen() & 1U);
    return f;
}

}  // namespace

TEST(BuildLattice, SquareL4) {
    const auto lat = build_lattice({LatticeKind::square, 4});
    EXPECT_EQ(lat.site_count(), 16U);
    EXPECT_EQ(lat.bonds.size(), 32U);
    for (Site s = 0; s < 16; ++s) EXPECT_EQ(lat.coordination(s), 4U);
    EXPECT_FALSE(lat.duplicate_bonds);
}

TEST(BuildLattice, KagomeL2) {
    const auto lat = build_lattice({LatticeKind::kagome, 2});
    EXPECT_EQ(lat.site_count(), 12U);
    EXPECT_EQ(lat.bonds.size(), 24U);
    EXPECT_EQ(lat.hexagons.size(), 4U);
    std::vector<int> member(12, 0);
    for (const auto& h : lat.hexagons) {
        EXPECT_EQ(std::set<Site>(h.begin(), h.end()).size(), 6U);
        for (auto s : h) ++member[static_cast<std::size_t>(s)];
    }
    for (int m : member) EXPECT_EQ(m, 2);
}

TEST(BuildLattice, KagomeHexagonsAreBondRings) {
    for (int L : {3, 4}) {
        const auto lat = build_lattice({LatticeKind::kagome, L});
        for (Site s = 0; s < static_cast<Site>(lat.site_count()); ++s) EXPECT_EQ(lat.coordination(s), 4U);
        EXPECT_EQ(lat.bonds.size(), 6U * L * L);
        for (const auto& h : lat.hexagons)
            for (int k = 0; k < 6; ++k) EXPECT_TRUE(lat.is_bond(h[k], h[(k + 1) % 6]));
        std::size_t total = 0;
        for (const auto& h : lat.hexagons) total += h.size();
        EXPECT_EQ(total, 2 * lat.site_count());
    }
}

TEST(BuildLattice, SquareL2FlagsDuplicateSlots) {
    const auto lat = build_lattice({LatticeKind::square, 2});
    EXPECT_EQ(lat.site_count(), 4U);
    EXPECT_EQ(lat.bonds.size(), 8U);
    EXPECT_TRUE(lat.duplicate_bonds);
}

TEST(BuildLattice, RejectsTooSmall) {
    EXPECT_THROW(build_lattice({LatticeKind::square, 1}), InvalidArgument);
    EXPECT_THROW(build_lattice({LatticeKind::kagome, 1}), InvalidArgument);
}

TEST(BuildLattice, ChainVariants) {
    const auto two = build_lattice({LatticeKind::chain, 2});
    EXPECT_EQ(two.bonds.size(), 1U);
    const auto ring = build_lattice({LatticeKind::chain, 3});
    EXPECT_EQ(ring.bonds.size(), 3U);
    for (Site s = 0; s < 3; ++s) EXPECT_EQ(ring.coordination(s), 2U);
}

TEST(BuildInteractions, DipolarCoefficient) {
    const auto lat = build_lattice({LatticeKind::square, 12});
    const auto table = build_interactions(lat, ModelKind::dipolar_square, 4.0);
    // sites (0,0) and (2,0)
    bool found = false;
    for (const auto& p : table.pairs)
        if (p.i == 0 && p.j == 2) {
            EXPECT_DOUBLE_EQ(p.c, 1.0 / 8.0);
            found = true;
        }
    EXPECT_TRUE(found);
    for (const auto& p : table.pairs) {
        const double r = minimal_image_distance(lat, p.i, p.j);
        EXPECT_GT(r, 0.0);
        EXPECT_LE(r, 4.0 + 1e-12);
        EXPECT_DOUBLE_EQ(r, minimal_image_distance(lat, p.j, p.i));
        EXPECT_GT(p.c, 0.0);
    }
}

TEST(BuildInteractions, DipolarPairsAppearOnce) {
    const auto lat = build_lattice({LatticeKind::square, 8});
    const auto table = build_interactions(lat, ModelKind::dipolar_square, 4.0);
    std::set<std::pair<Site, Site>> seen;
    for (const auto& p : table.pairs) {
        EXPECT_LT(p.i, p.j);
        EXPECT_TRUE(seen.insert({p.i, p.j}).second);
    }
    // every site sees the same shell structure: r <= 4 on an 8x8 torus
    std::size_t expected = 0;
    for (int dx = -4; dx <= 4; ++dx)
        for (int dy = -4; dy <= 4; ++dy)
            if ((dx || dy) && dx * dx + dy * dy <= 16 && dx > -4 && dy > -4) ++expected;
    for (const auto& ps : table.partners) EXPECT_EQ(ps.size(), expected);
}

TEST(BuildInteractions, NearestNeighbourSquare) {
    const auto lat = build_lattice({LatticeKind::square, 4});
    const auto table = build_interactions(lat, ModelKind::nn_square);
    EXPECT_EQ(table.pairs.size(), 32U);
    for (const auto& p : table.pairs) EXPECT_DOUBLE_EQ(p.c, 1.0);
}

TEST(BuildInteractions, HexagonPairsPerHexagon) {
    const auto lat = build_lattice({LatticeKind::kagome, 2});
    const auto table = build_interactions(lat, ModelKind::hexagon_kagome);
    double total = 0;
    for (const auto& p : table.pairs) total += p.c;
    EXPECT_DOUBLE_EQ(total, 15.0 * static_cast<double>(lat.hexagons.size()));

    const auto big = build_lattice({LatticeKind::kagome, 4});
    const auto tb = build_interactions(big, ModelKind::hexagon_kagome);
    EXPECT_EQ(tb.pairs.size(), 15U * big.hexagons.size());
    EXPECT_DOUBLE_EQ(tb.max_field(), 10.0);
}

TEST(BuildInteractions, RejectsIncompatible) {
    const auto sq = build_lattice({LatticeKind::square, 4});
    EXPECT_THROW(build_interactions(sq, ModelKind::hexagon_kagome), InvalidArgument);
    const auto sq6 = build_lattice({LatticeKind::square, 6});
    EXPECT_THROW(build_interactions(sq6, ModelKind::dipolar_square, 4.0), InvalidArgument);
    const auto kg = build_lattice({LatticeKind::kagome, 2});
    EXPECT_THROW(build_interactions(kg, ModelKind::nn_square), InvalidArgument);
}

TEST(DiagonalEnergy, CheckerboardIsZero) {
    const auto lat = build_lattice({LatticeKind::square, 4});
    const auto table = build_interactions(lat, ModelKind::nn_square);
    EXPECT_DOUBLE_EQ(diagonal_energy(checkerboard(lat), table, 20.0, 0.0), 0.0);
}

TEST(DiagonalEnergy, FullHexagon) {
    const auto lat = build_lattice({LatticeKind::kagome, 4});
    const auto table = build_interactions(lat, ModelKind::hexagon_kagome);
    FockState f(lat.site_count(), 0);
    for (auto s : lat.hexagons[5]) f[static_cast<std::size_t>(s)] = 1;
    EXPECT_DOUBLE_EQ(diagonal_energy(f, table, 2.5, 0.0), 15.0 * 2.5);
}

TEST(DiagonalEnergy, EmptyLatticeAndChemicalPotential) {
    const auto lat = build_lattice({LatticeKind::square, 4});
    const auto table = build_interactions(lat, ModelKind::nn_square);
    FockState f(16, 0);
    EXPECT_DOUBLE_EQ(diagonal_energy(f, table, 20.0, 3.0), 0.0);
    f[0] = 1;
    EXPECT_DOUBLE_EQ(diagonal_energy(f, table, 20.0, 3.0), -3.0);
}

TEST(EnergyDeltaHop, DeepCheckerboard) {
    const auto lat = build_lattice({LatticeKind::square, 4});
    const auto table = build_interactions(lat, ModelKind::nn_square);
    const auto f = checkerboard(lat);
    const Site i = 0;
    const Site j = 1;
    ASSERT_EQ(f[0], 1);
    ASSERT_EQ(f[1], 0);
    EXPECT_DOUBLE_EQ(energy_delta_hop(f, i, j, table, 20.0, 0.0), 60.0);
}

TEST(EnergyDeltaHop, SingleParticleAndReverse) {
    const auto lat = build_lattice({LatticeKind::kagome, 2});
    const auto table = build_interactions(lat, ModelKind::hexagon_kagome);
    FockState f(lat.site_count(), 0);
    f[3] = 1;
    const Site j = lat.incident[3][0].other;
    EXPECT_DOUBLE_EQ(energy_delta_hop(f, 3, j, table, 7.0, 0.0), 0.0);
    EXPECT_THROW(energy_delta_hop(f, j, 3, table, 7.0, 0.0), InvalidArgument);
}

TEST(EnergyDeltaHop, MatchesFullDifferenceOnRandomStates) {
    std::mt19937_64 gen(12345);
    struct Case {
        LatticeSpec spec;
        ModelKind kind;
        double cutoff;
    };
    const std::vector<Case> cases = {{{LatticeKind::square, 4}, ModelKind::nn_square, 4.0},
                                     {{LatticeKind::square, 8}, ModelKind::dipolar_square, 4.0},
                                     {{LatticeKind::kagome, 3}, ModelKind::hexagon_kagome, 4.0},
                                     {{LatticeKind::kagome, 3}, ModelKind::nn_kagome, 4.0}};
    for (const auto& c : cases) {
        const auto lat = build_lattice(c.spec);
        const auto table = build_interactions(lat, c.kind, c.cutoff);
        int done = 0;
        while (done < 1000) {
            auto f = random_fock(lat.site_count(), gen);
            const auto b = lat.bonds[gen() % lat.bonds.size()];
            Site i = b.a;
            Site j = b.b;
            if (f[static_cast<std::size_t>(i)] == f[static_cast<std::size_t>(j)]) continue;
            if (!f[static_cast<std::size_t>(i)]) std::swap(i, j);
            const double before = diagonal_energy(f, table, 1.7, 0.3);
            const double d = energy_delta_hop(f, i, j, table, 1.7, 0.3);
            auto g = f;
            g[static_cast<std::size_t>(i)] = 0;
            g[static_cast<std::size_t>(j)] = 1;
            const double after = diagonal_energy(g, table, 1.7, 0.3);
            EXPECT_NEAR(d, after - before, 1e-12 * std::max(1.0, std::abs(before)));
            EXPECT_NEAR(energy_delta_hop(g, j, i, table, 1.7, 0.3), -d, 1e-12 * std::max(1.0, std::abs(d)));
            ++done;
        }
    }
}

TEST(ModelSpec, ParticlesAndValidation) {
    ModelSpec m;
    m.filling = Rational(1, 3);
    EXPECT_EQ(m.particles(36), 12);
    EXPECT_THROW((void)m.particles(16), InvalidArgument);
    m.t = 0.0;
    EXPECT_THROW(m.validate(), InvalidArgument);
}

TEST(LatticeJson, DumpsBondsAndPairs) {
    const auto lat = build_lattice({LatticeKind::kagome, 2});
    const auto table = build_interactions(lat, ModelKind::hexagon_kagome);
    const auto jl = to_json(lat);
    EXPECT_EQ(jl["bonds"].size(), 24U);
    EXPECT_EQ(jl["hexagons"].size(), 4U);
    const auto jt = to_json(table);
    EXPECT_EQ(jt["pairs"].size(), table.pairs.size());
}
