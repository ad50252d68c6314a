// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file lattice.hpp
 * @brief Periodic square / Kagome lattices, hop-bond tables, diagonal
 *        interaction tables and diagonal energies of hard-core bosons.
 *
 * Site indexing is deterministic:
 * - square: site = x + Lx * y
 * - kagome: site = 3 * (cx + L * cy) + b, basis b in {0, 1, 2} at
 *   offsets (0,0), (1,0), (1/2, sqrt(3)/2) with lattice vectors (2,0), (1,sqrt(3)).
 * - chain:  site = x (periodic ring; two sites share a single bond).
 *
 * Energies are in the same units as t; distances in nearest-neighbour units.
 */

#pragma once

#include <braidmc/common.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace braidmc {

enum class LatticeKind { square, kagome, chain };

enum class ModelKind { nn_square, dipolar_square, hexagon_kagome, nn_kagome, nn_chain };

inline std::string to_string(LatticeKind k) {
    switch (k) {
        case LatticeKind::square: return "square";
        case LatticeKind::kagome: return "kagome";
        case LatticeKind::chain: return "chain";
    }
    return "?";
}

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::nn_square: return "nn_square";
        case ModelKind::dipolar_square: return "dipolar_square";
        case ModelKind::hexagon_kagome: return "hexagon_kagome";
        case ModelKind::nn_kagome: return "nn_kagome";
        case ModelKind::nn_chain: return "nn_chain";
    }
    return "?";
}

inline LatticeKind parse_lattice_kind(const std::string& s) {
    if (s == "square") return LatticeKind::square;
    if (s == "kagome") return LatticeKind::kagome;
    if (s == "chain") return LatticeKind::chain;
    throw InvalidArgument("unknown lattice kind '" + s + "'");
}

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "nn_square") return ModelKind::nn_square;
    if (s == "dipolar_square") return ModelKind::dipolar_square;
    if (s == "hexagon_kagome") return ModelKind::hexagon_kagome;
    if (s == "nn_kagome") return ModelKind::nn_kagome;
    if (s == "nn_chain") return ModelKind::nn_chain;
    throw InvalidArgument("unknown model kind '" + s + "'");
}

/// Geometry request. `Ly == 0` means a square L x L (or L x L cells) torus.
struct LatticeSpec {
    LatticeKind kind = LatticeKind::square;
    int L = 4;
    int Ly = 0;

    [[nodiscard]] int extent_x() const { return L; }
    [[nodiscard]] int extent_y() const { return kind == LatticeKind::chain ? 1 : (Ly > 0 ? Ly : L); }

    [[nodiscard]] int site_count() const {
        switch (kind) {
            case LatticeKind::square: return extent_x() * extent_y();
            case LatticeKind::kagome: return 3 * extent_x() * extent_y();
            case LatticeKind::chain: return L;
        }
        return 0;
    }

    /// Canonical text used for fingerprints.
    [[nodiscard]] std::string canonical() const {
        return to_string(kind) + ":" + std::to_string(extent_x()) + "x" + std::to_string(extent_y());
    }

    friend bool operator==(const LatticeSpec& a, const LatticeSpec& b) {
        return a.kind == b.kind && a.extent_x() == b.extent_x() && a.extent_y() == b.extent_y();
    }
};

struct Coord {
    double x = 0;
    double y = 0;
};

/// Unordered nearest-neighbour pair; one entry per bond slot.
struct Bond {
    Site a = 0;
    Site b = 0;
};

/// A bond slot seen from one of its sites.
struct Incidence {
    std::int32_t bond = 0;
    Site other = 0;
};

struct Lattice {
    LatticeSpec spec;
    std::vector<Coord> coords;
    std::vector<Bond> bonds;
    std::vector<std::array<Site, 6>> hexagons;          ///< kagome only, ring order
    std::vector<std::vector<Incidence>> incident;       ///< per-site bond slots
    bool duplicate_bonds = false;                       ///< some site pair carries two bond slots

    [[nodiscard]] std::size_t site_count() const { return coords.size(); }
    [[nodiscard]] std::size_t coordination(Site i) const { return incident[static_cast<std::size_t>(i)].size(); }
    [[nodiscard]] std::size_t max_coordination() const {
        std::size_t z = 0;
        for (const auto& inc : incident) z = std::max(z, inc.size());
        return z;
    }
    [[nodiscard]] bool is_bond(Site i, Site j) const {
        for (const auto& inc : incident[static_cast<std::size_t>(i)])
            if (inc.other == j) return true;
        return false;
    }
};

namespace detail {

inline void finish_lattice(Lattice& lat) {
    lat.incident.assign(lat.coords.size(), {});
    std::map<std::pair<Site, Site>, int> seen;
    for (std::size_t b = 0; b < lat.bonds.size(); ++b) {
        const auto [i, j] = lat.bonds[b];
        lat.incident[static_cast<std::size_t>(i)].push_back({static_cast<std::int32_t>(b), j});
        lat.incident[static_cast<std::size_t>(j)].push_back({static_cast<std::int32_t>(b), i});
        if (++seen[{std::min(i, j), std::max(i, j)}] > 1) lat.duplicate_bonds = true;
    }
}

inline int wrap(int v, int n) { return ((v % n) + n) % n; }

}  // namespace detail

/// Builds the periodic lattice described by `spec`. Throws InvalidArgument for L < 2.
inline Lattice build_lattice(const LatticeSpec& spec) {
    if (spec.L < 2 || (spec.kind != LatticeKind::chain && spec.extent_y() < 2))
        throw InvalidArgument("build_lattice: linear size must be >= 2");

    Lattice lat;
    lat.spec = spec;
    const int lx = spec.extent_x();
    const int ly = spec.extent_y();

    switch (spec.kind) {
        case LatticeKind::chain: {
            for (int x = 0; x < lx; ++x) lat.coords.push_back({double(x), 0.0});
            if (lx == 2) {
                lat.bonds.push_back({0, 1});
            } else {
                for (int x = 0; x < lx; ++x) lat.bonds.push_back({x, (x + 1) % lx});
            }
            break;
        }
        case LatticeKind::square: {
            for (int y = 0; y < ly; ++y)
                for (int x = 0; x < lx; ++x) lat.coords.push_back({double(x), double(y)});
            for (int y = 0; y < ly; ++y) {
                for (int x = 0; x < lx; ++x) {
                    const Site s = x + lx * y;
                    lat.bonds.push_back({s, detail::wrap(x + 1, lx) + lx * y});
                    lat.bonds.push_back({s, x + lx * detail::wrap(y + 1, ly)});
                }
            }
            break;
        }
        case LatticeKind::kagome: {
            const double h = std::sqrt(3.0) / 2.0;
            auto id = [&](int cx, int cy, int b) {
                return static_cast<Site>(3 * (detail::wrap(cx, lx) + lx * detail::wrap(cy, ly)) + b);
            };
            for (int cy = 0; cy < ly; ++cy) {
                for (int cx = 0; cx < lx; ++cx) {
                    const double ox = 2.0 * cx + cy;
                    const double oy = 2.0 * h * cy;
                    lat.coords.push_back({ox, oy});
                    lat.coords.push_back({ox + 1.0, oy});
                    lat.coords.push_back({ox + 0.5, oy + h});
                }
            }
            for (int cy = 0; cy < ly; ++cy) {
                for (int cx = 0; cx < lx; ++cx) {
                    // up triangle
                    lat.bonds.push_back({id(cx, cy, 0), id(cx, cy, 1)});
                    lat.bonds.push_back({id(cx, cy, 0), id(cx, cy, 2)});
                    lat.bonds.push_back({id(cx, cy, 1), id(cx, cy, 2)});
                    // down triangle: b1(R), b0(R+a1), b2(R+a1-a2)
                    lat.bonds.push_back({id(cx, cy, 1), id(cx + 1, cy, 0)});
                    lat.bonds.push_back({id(cx, cy, 1), id(cx + 1, cy - 1, 2)});
                    lat.bonds.push_back({id(cx + 1, cy, 0), id(cx + 1, cy - 1, 2)});
                    // hexagon around R + (3/2, sqrt(3)/2)
                    lat.hexagons.push_back({id(cx, cy, 1), id(cx + 1, cy, 0), id(cx + 1, cy, 2),
                                            id(cx, cy + 1, 1), id(cx, cy + 1, 0), id(cx, cy, 2)});
                }
            }
            break;
        }
    }
    detail::finish_lattice(lat);
    return lat;
}

/// A torus translation as a relabeling of sites and bond slots.
struct Translation {
    std::vector<Site> site;
    std::vector<std::int32_t> bond;
};

/**
 * All translations of the periodic lattice, identity first. Bond slots are laid
 * out per unit cell, so a translation keeps each slot's position inside its cell.
 */
inline std::vector<Translation> lattice_translations(const Lattice& lat) {
    const int lx = lat.spec.extent_x();
    const int ly = lat.spec.kind == LatticeKind::chain ? 1 : lat.spec.extent_y();
    const int per_cell = lat.spec.kind == LatticeKind::kagome ? 3 : 1;
    const std::size_t cells = static_cast<std::size_t>(lx) * static_cast<std::size_t>(ly);
    const std::size_t bonds_per_cell = lat.bonds.size() / cells;
    std::vector<Translation> out;
    for (int dy = 0; dy < ly; ++dy) {
        for (int dx = 0; dx < lx; ++dx) {
            Translation t;
            t.site.resize(lat.site_count());
            t.bond.resize(lat.bonds.size());
            for (int y = 0; y < ly; ++y) {
                for (int x = 0; x < lx; ++x) {
                    const auto from = static_cast<std::size_t>(x + lx * y);
                    const auto to = static_cast<std::size_t>(detail::wrap(x + dx, lx) + lx * detail::wrap(y + dy, ly));
                    for (int b = 0; b < per_cell; ++b)
                        t.site[from * per_cell + static_cast<std::size_t>(b)] = static_cast<Site>(to * per_cell + static_cast<std::size_t>(b));
                    for (std::size_t b = 0; b < bonds_per_cell; ++b)
                        t.bond[from * bonds_per_cell + b] = static_cast<std::int32_t>(to * bonds_per_cell + b);
                }
            }
            if (bonds_per_cell == 0)  // two-site chain: one slot shared by both cells
                for (std::size_t b = 0; b < t.bond.size(); ++b) t.bond[b] = static_cast<std::int32_t>(b);
            out.push_back(std::move(t));
        }
    }
    return out;
}

/// Minimal-image Euclidean distance between two sites of a square torus.
inline double minimal_image_distance(const Lattice& lat, Site i, Site j) {
    const int lx = lat.spec.extent_x();
    const int ly = lat.spec.extent_y();
    int dx = std::abs(static_cast<int>(lat.coords[i].x) - static_cast<int>(lat.coords[j].x));
    int dy = std::abs(static_cast<int>(lat.coords[i].y) - static_cast<int>(lat.coords[j].y));
    dx = std::min(dx, lx - dx);
    dy = std::min(dy, ly - dy);
    return std::sqrt(double(dx * dx + dy * dy));
}

// -----------------------------------------------------------------------------
// Interactions
// -----------------------------------------------------------------------------

struct PairTerm {
    Site i = 0;
    Site j = 0;
    double c = 1.0;  ///< coefficient in units of V
};

struct Partner {
    Site site = 0;
    double c = 0.0;
};

/// H_0 = V * sum_pairs c_ij n_i n_j. `partners` is the per-site merged view.
struct InteractionTable {
    ModelKind kind = ModelKind::nn_square;
    std::vector<PairTerm> pairs;
    std::vector<std::vector<Partner>> partners;

    [[nodiscard]] std::span<const Partner> of(Site i) const { return partners[static_cast<std::size_t>(i)]; }

    /// max_i sum_p c_ip (largest possible interaction field in units of V).
    [[nodiscard]] double max_field() const {
        double m = 0;
        for (const auto& ps : partners) {
            double s = 0;
            for (const auto& p : ps) s += p.c;
            m = std::max(m, s);
        }
        return m;
    }
};

inline bool compatible(ModelKind m, LatticeKind l) {
    switch (m) {
        case ModelKind::nn_square:
        case ModelKind::dipolar_square: return l == LatticeKind::square;
        case ModelKind::hexagon_kagome:
        case ModelKind::nn_kagome: return l == LatticeKind::kagome;
        case ModelKind::nn_chain: return l == LatticeKind::chain;
    }
    return false;
}

/**
 * Builds the diagonal interaction table for `kind` on `lattice`.
 *
 * - nn_*: one term per hop-bond slot, c = 1.
 * - dipolar_square: every pair with minimal-image distance 0 < r <= cutoff, c = 1/r^3.
 * - hexagon_kagome: all 15 unordered pairs of every hexagon, shared pairs summed.
 */
inline InteractionTable build_interactions(const Lattice& lattice, ModelKind kind, double cutoff = 4.0) {
    if (!compatible(kind, lattice.spec.kind))
        throw InvalidArgument("build_interactions: model " + to_string(kind) + " needs a different lattice than " +
                              to_string(lattice.spec.kind));
    InteractionTable table;
    table.kind = kind;
    const auto m = static_cast<Site>(lattice.site_count());

    switch (kind) {
        case ModelKind::nn_square:
        case ModelKind::nn_kagome:
        case ModelKind::nn_chain:
            for (const auto& b : lattice.bonds) table.pairs.push_back({std::min(b.a, b.b), std::max(b.a, b.b), 1.0});
            break;
        case ModelKind::dipolar_square: {
            const int half = std::min(lattice.spec.extent_x(), lattice.spec.extent_y());
            if (!(cutoff > 0) || 2.0 * cutoff > half)
                throw InvalidArgument("build_interactions: dipolar cutoff must be in (0, L/2]");
            for (Site i = 0; i < m; ++i) {
                for (Site j = i + 1; j < m; ++j) {
                    const double r = minimal_image_distance(lattice, i, j);
                    if (r > 0 && r <= cutoff + 1e-12) table.pairs.push_back({i, j, 1.0 / (r * r * r)});
                }
            }
            break;
        }
        case ModelKind::hexagon_kagome: {
            std::map<std::pair<Site, Site>, double> merged;
            for (const auto& hex : lattice.hexagons)
                for (int a = 0; a < 6; ++a)
                    for (int b = a + 1; b < 6; ++b)
                        merged[{std::min(hex[a], hex[b]), std::max(hex[a], hex[b])}] += 1.0;
            for (const auto& [key, c] : merged) table.pairs.push_back({key.first, key.second, c});
            break;
        }
    }

    table.partners.assign(lattice.site_count(), {});
    std::vector<std::map<Site, double>> acc(lattice.site_count());
    for (const auto& p : table.pairs) {
        acc[static_cast<std::size_t>(p.i)][p.j] += p.c;
        acc[static_cast<std::size_t>(p.j)][p.i] += p.c;
    }
    for (std::size_t i = 0; i < acc.size(); ++i)
        for (const auto& [s, c] : acc[i]) table.partners[i].push_back({s, c});
    return table;
}

// -----------------------------------------------------------------------------
// Model parameters and diagonal energies
// -----------------------------------------------------------------------------

struct ModelSpec {
    ModelKind kind = ModelKind::nn_square;
    double t = 1.0;
    double V = 0.0;
    double mu = 0.0;
    Rational filling{1, 2};
    double beta = 18.0;
    double cutoff = 4.0;

    /// Target particle number N = filling * sites; throws unless integral.
    [[nodiscard]] int particles(std::size_t sites) const {
        const Rational n = filling * Rational(static_cast<std::int64_t>(sites));
        if (n.den != 1) throw InvalidArgument("filling " + filling.str() + " is not commensurate with " +
                                              std::to_string(sites) + " sites");
        return static_cast<int>(n.num);
    }

    void validate() const {
        if (!(t > 0)) throw InvalidArgument("model: hopping t must be > 0");
        if (!(beta > 0)) throw InvalidArgument("model: beta must be > 0");
        if (!(Rational(0) < filling) || !(filling < Rational(1)))
            throw InvalidArgument("model: filling must lie in (0, 1)");
    }
};

/// Interaction field h_i = sum_p c_ip n_p (units of V).
inline double interaction_field(const FockState& fock, const InteractionTable& table, Site i) {
    double h = 0;
    for (const auto& p : table.of(i)) h += p.c * fock[static_cast<std::size_t>(p.site)];
    return h;
}

/// V * sum_ij c_ij n_i n_j - mu * N.
inline double diagonal_energy(const FockState& fock, const InteractionTable& table, double V, double mu) {
    if (fock.size() != table.partners.size()) throw InvalidArgument("diagonal_energy: fock length mismatch");
    double e = 0;
    for (const auto& p : table.pairs) e += p.c * fock[static_cast<std::size_t>(p.i)] * fock[static_cast<std::size_t>(p.j)];
    return V * e - mu * particle_count(fock);
}

/// E(after) - E(before) for moving the particle on i to the empty site j.
inline double energy_delta_hop(const FockState& fock, Site i, Site j, const InteractionTable& table, double V,
                               double /*mu*/) {
    if (fock[static_cast<std::size_t>(i)] != 1 || fock[static_cast<std::size_t>(j)] != 0)
        throw InvalidArgument("energy_delta_hop: requires n_i = 1 and n_j = 0");
    double hi = 0;
    double hj = 0;
    for (const auto& p : table.of(i))
        if (p.site != j) hi += p.c * fock[static_cast<std::size_t>(p.site)];
    for (const auto& p : table.of(j))
        if (p.site != i) hj += p.c * fock[static_cast<std::size_t>(p.site)];
    return V * (hj - hi);
}

// -----------------------------------------------------------------------------
// JSON debug dumps
// -----------------------------------------------------------------------------

inline nlohmann::json to_json(const Lattice& lat) {
    nlohmann::json j;
    j["kind"] = to_string(lat.spec.kind);
    j["Lx"] = lat.spec.extent_x();
    j["Ly"] = lat.spec.extent_y();
    j["duplicate_bonds"] = lat.duplicate_bonds;
    auto& sites = j["sites"] = nlohmann::json::array();
    for (const auto& c : lat.coords) sites.push_back({c.x, c.y});
    auto& bonds = j["bonds"] = nlohmann::json::array();
    for (const auto& b : lat.bonds) bonds.push_back({b.a, b.b});
    auto& hex = j["hexagons"] = nlohmann::json::array();
    for (const auto& h : lat.hexagons) hex.push_back(h);
    return j;
}

inline nlohmann::json to_json(const InteractionTable& table) {
    nlohmann::json j;
    j["model"] = to_string(table.kind);
    auto& pairs = j["pairs"] = nlohmann::json::array();
    for (const auto& p : table.pairs) pairs.push_back({{"i", p.i}, {"j", p.j}, {"c", p.c}});
    return j;
}

}  // namespace braidmc
