// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file oracle.hpp
 * @brief Exact references for small systems: fixed-N diagonalization and a
 *        Trotterized labeled-particle oracle for permutation-cycle statistics.
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/lattice.hpp>
#include <braidmc/worldlines.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace braidmc {

inline constexpr std::size_t kDenseBasisLimit = 4000;
inline constexpr std::size_t kIterativeBasisLimit = 200000;
inline constexpr std::size_t kLabeledDimensionLimit = 100000;

/// Saturating binomial coefficient.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        r = r * num / i;
    }
    return r;
}

/// All N-particle occupation vectors of M sites in lexicographic order.
class FockBasis {
 public:
    FockBasis(std::size_t sites, int particles) : sites_(sites), particles_(particles) {
        if (sites > 64) throw InvalidArgument("FockBasis: at most 64 sites");
        if (particles < 0 || static_cast<std::size_t>(particles) > sites)
            throw InvalidArgument("FockBasis: particle number out of range");
        FockState f(sites, 0);
        fill(f, 0, particles);
        index_.reserve(states_.size());
        for (std::size_t k = 0; k < states_.size(); ++k) index_.emplace(mask(states_[k]), k);
    }

    [[nodiscard]] std::size_t size() const { return states_.size(); }
    [[nodiscard]] std::size_t sites() const { return sites_; }
    [[nodiscard]] int particles() const { return particles_; }
    [[nodiscard]] const FockState& operator[](std::size_t k) const { return states_[k]; }
    [[nodiscard]] const std::vector<FockState>& states() const { return states_; }

    [[nodiscard]] std::optional<std::size_t> index_of(const FockState& f) const {
        if (f.size() != sites_) return std::nullopt;
        const auto it = index_.find(mask(f));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    static std::uint64_t mask(const FockState& f) {
        std::uint64_t m = 0;
        for (std::size_t s = 0; s < f.size(); ++s)
            if (f[s]) m |= std::uint64_t{1} << s;
        return m;
    }

 private:
    void fill(FockState& f, std::size_t pos, int left) {
        if (left == 0) {
            states_.push_back(f);
            return;
        }
        if (sites_ - pos < static_cast<std::size_t>(left)) return;
        fill(f, pos + 1, left);  // n_pos = 0 sorts first
        f[pos] = 1;
        fill(f, pos + 1, left - 1);
        f[pos] = 0;
    }

    std::size_t sites_;
    int particles_;
    std::vector<FockState> states_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

enum class SolveMode { ground, full };

/**
 * Eigenpairs of H = -t sum_b (a+_i a_j + h.c.) + H_0 on the fixed-N sector.
 * The chemical potential is a constant here and is left out.
 */
struct SpectralData {
    SolveMode mode = SolveMode::ground;
    FockBasis basis{0, 0};
    Eigen::VectorXd eigenvalues;    ///< ascending; only the lowest in ground mode
    Eigen::VectorXd ground;         ///< normalized, sign fixed so the component sum is positive
    Eigen::MatrixXd eigenvectors;   ///< columns, full mode only
    Eigen::VectorXd diagonal;       ///< H_0 in the basis
    double ground_residual = 0;
    int iterations = 0;
};

namespace detail {

inline Eigen::SparseMatrix<double, Eigen::RowMajor> fixed_n_hamiltonian(const Lattice& lat, const InteractionTable& table,
                                                                       const ModelSpec& model, const FockBasis& basis,
                                                                       Eigen::VectorXd& diag) {
    const std::size_t d = basis.size();
    diag.resize(static_cast<Eigen::Index>(d));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(d * (lat.bonds.size() / 2 + 1));
    for (std::size_t k = 0; k < d; ++k) {
        FockState f = basis[k];
        diag[static_cast<Eigen::Index>(k)] = diagonal_energy(f, table, model.V, 0.0);
        trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag[static_cast<Eigen::Index>(k)]);
        for (const auto& b : lat.bonds) {
            const auto a = static_cast<std::size_t>(b.a);
            const auto c = static_cast<std::size_t>(b.b);
            if (f[a] == f[c]) continue;
            std::swap(f[a], f[c]);
            const auto j = basis.index_of(f);
            std::swap(f[a], f[c]);
            trip.emplace_back(static_cast<int>(*j), static_cast<int>(k), -model.t);
        }
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

inline void fix_sign(Eigen::VectorXd& v) {
    if (v.sum() < 0) v = -v;
}

/// Restarted Lanczos with full reorthogonalization for the lowest eigenpair.
inline void lanczos_ground(const Eigen::SparseMatrix<double, Eigen::RowMajor>& h, double tol, SpectralData& out) {
    const Eigen::Index d = h.rows();
    const Eigen::Index m = std::min<Eigen::Index>(d, 48);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(d);
    for (Eigen::Index k = 0; k < d; ++k) v[k] += 1e-3 * static_cast<double>(k % 7);
    v.normalize();
    Eigen::MatrixXd basis(d, m);
    double theta = 0;
    for (int restart = 0; restart < 500; ++restart) {
        std::vector<double> alpha;
        std::vector<double> beta;
        basis.col(0) = v;
        Eigen::Index used = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
            Eigen::VectorXd w = h * basis.col(j);
            alpha.push_back(basis.col(j).dot(w));
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
            used = j + 1;
            const double b = w.norm();
            if (j + 1 == m || b < 1e-13) break;
            beta.push_back(b);
            basis.col(j + 1) = w / b;
        }
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
        for (Eigen::Index j = 0; j < used; ++j) {
            t(j, j) = alpha[static_cast<std::size_t>(j)];
            if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta[static_cast<std::size_t>(j)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues()[0];
        v = basis.leftCols(used) * es.eigenvectors().col(0);
        v.normalize();
        out.iterations = restart + 1;
        out.ground_residual = (h * v - theta * v).norm();
        if (out.ground_residual < tol) break;
    }
    out.eigenvalues = Eigen::VectorXd::Constant(1, theta);
    out.ground = v;
}

}  // namespace detail

/// Throws BasisTooLarge above 4000 states (full) or 2e5 states (ground).
inline SpectralData ed_solve(const Lattice& lat, const InteractionTable& table, const ModelSpec& model, int n,
                             SolveMode mode) {
    const auto dim = binomial(lat.site_count(), static_cast<std::uint64_t>(std::max(n, 0)));
    const std::size_t limit = mode == SolveMode::full ? kDenseBasisLimit : kIterativeBasisLimit;
    if (dim > limit)
        throw BasisTooLarge("ed_solve: basis size " + std::to_string(dim) + " exceeds " + std::to_string(limit) +
                            (mode == SolveMode::full ? " (full)" : " (ground)"));
    SpectralData out;
    out.mode = mode;
    out.basis = FockBasis(lat.site_count(), n);
    const auto h = detail::fixed_n_hamiltonian(lat, table, model, out.basis, out.diagonal);
    if (mode == SolveMode::full || out.basis.size() <= 64) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h.toDense()));
        out.eigenvalues = es.eigenvalues();
        out.ground = es.eigenvectors().col(0);
        if (mode == SolveMode::full) out.eigenvectors = es.eigenvectors();
        const Eigen::VectorXd r = h * out.ground - out.eigenvalues[0] * out.ground;
        out.ground_residual = r.norm();
        if (mode == SolveMode::ground) out.eigenvalues.conservativeResize(1);
    } else {
        detail::lanczos_ground(h, 1e-10, out);
    }
    detail::fix_sign(out.ground);
    return out;
}

inline SpectralData ed_solve(const LatticeSpec& spec, const ModelSpec& model, int n, SolveMode mode) {
    const auto lat = build_lattice(spec);
    const auto table = build_interactions(lat, model.kind, model.cutoff);
    return ed_solve(lat, table, model, n, mode);
}

namespace detail {

inline Eigen::VectorXd boltzmann(const SpectralData& sd, double beta) {
    if (sd.mode != SolveMode::full) throw InvalidArgument("thermal quantities need full mode");
    const double e0 = sd.eigenvalues[0];
    Eigen::VectorXd w = (-(beta) * (sd.eigenvalues.array() - e0)).exp();
    return w / w.sum();
}

}  // namespace detail

/// p(alpha) = <alpha| e^{-beta H} |alpha> / Z over the basis.
inline Eigen::VectorXd thermal_diag(const SpectralData& sd, double beta) {
    const Eigen::VectorXd w = detail::boltzmann(sd, beta);
    return sd.eigenvectors.array().square().matrix() * w;
}

/// Thermal <H>, in units of t, chemical potential excluded.
inline double thermal_energy(const SpectralData& sd, double beta) {
    return detail::boltzmann(sd, beta).dot(sd.eigenvalues);
}

/// Thermal <H_0>; the kinetic part is thermal_energy minus this.
inline double thermal_diagonal_energy(const SpectralData& sd, double beta) {
    return thermal_diag(sd, beta).dot(sd.diagonal);
}

inline nlohmann::json to_json(const SpectralData& sd, std::optional<double> beta = std::nullopt) {
    nlohmann::json j;
    j["mode"] = sd.mode == SolveMode::full ? "full" : "ground";
    j["basis_size"] = sd.basis.size();
    j["sites"] = sd.basis.sites();
    j["particles"] = sd.basis.particles();
    j["eigenvalues"] = std::vector<double>(sd.eigenvalues.data(), sd.eigenvalues.data() + sd.eigenvalues.size());
    j["ground_residual"] = sd.ground_residual;
    if (sd.basis.size() <= 4096) {
        auto& states = j["basis"] = nlohmann::json::array();
        for (const auto& f : sd.basis.states()) {
            std::string s;
            for (auto v : f) s += static_cast<char>('0' + v);
            states.push_back(s);
        }
        j["ground"] = std::vector<double>(sd.ground.data(), sd.ground.data() + sd.ground.size());
        if (beta && sd.mode == SolveMode::full) {
            const Eigen::VectorXd p = thermal_diag(sd, *beta);
            j["beta"] = *beta;
            j["thermal_diag"] = std::vector<double>(p.data(), p.data() + p.size());
            j["thermal_energy"] = thermal_energy(sd, *beta);
        }
    }
    return j;
}

// -----------------------------------------------------------------------------
// Labeled-particle Trotter oracle
// -----------------------------------------------------------------------------

struct TrotterPoint {
    double dtau = 0;
    std::size_t slices = 0;
    std::map<CycleVector, double> probabilities;
};

struct TrotterCycles {
    std::size_t dimension = 0;
    std::vector<TrotterPoint> points;             ///< one per requested step, in input order
    std::map<CycleVector, double> extrapolated;   ///< dtau -> 0
    std::map<CycleVector, double> residual;       ///< |all points - without coarsest| per entry
    double max_residual = 0;

    [[nodiscard]] double at(const CycleVector& q) const {
        const auto it = extrapolated.find(q);
        return it == extrapolated.end() ? 0.0 : it->second;
    }
};

namespace detail {

inline CycleVector cycle_type(const std::vector<int>& perm) {
    const std::size_t n = perm.size();
    CycleVector q;
    q.counts.assign(n, 0);
    std::vector<char> seen(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::size_t len = 0;
        for (std::size_t k = s; !seen[k]; k = static_cast<std::size_t>(perm[k])) {
            seen[k] = 1;
            ++len;
        }
        ++q.counts[len - 1];
    }
    return q;
}

/// Least-squares fit of y = sum_k c_k x^k for k < order; returns c_0.
inline double polynomial_intercept(const std::vector<double>& x, const std::vector<double>& y, int order) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(n, order);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1;
        for (int k = 0; k < order; ++k) {
            a(i, k) = p;
            p *= x[static_cast<std::size_t>(i)];
        }
        b[i] = y[static_cast<std::size_t>(i)];
    }
    return a.colPivHouseholderQr().solve(b)[0];
}

/// Quadratic-in-dtau^2 fit for three or more points, linear for two.
inline double extrapolate(const std::vector<double>& d2, const std::vector<double>& y) {
    const int order = std::min<int>(3, static_cast<int>(d2.size()));
    return polynomial_intercept(d2, y, order);
}

}  // namespace detail

/**
 * Exact cycle-length distribution of a symmetric Trotter product
 *   e^{-dt H0/2} e^{-dt K} e^{-dt H0/2}
 * on injective placements of N labeled hard-core particles, for each step in
 * `dtaus`, followed by extrapolation in dtau^2. Steps are rounded so that
 * beta/dtau is an integer. Throws DimensionTooLarge and ExtrapolationUnstable.
 */
inline TrotterCycles trotter_cycles(const Lattice& lat, const InteractionTable& table, const ModelSpec& model, int n,
                                    double beta, std::span<const double> dtaus, double max_residual = 1e-4) {
    if (dtaus.size() < 3) throw InvalidArgument("trotter_cycles: need at least 3 time steps");
    if (n < 1) throw InvalidArgument("trotter_cycles: need at least one particle");
    const std::size_t m = lat.site_count();
    std::uint64_t dim = 1;
    for (int k = 0; k < n; ++k) dim *= m - static_cast<std::size_t>(k);
    if (dim > kLabeledDimensionLimit)
        throw DimensionTooLarge("trotter_cycles: labeled dimension " + std::to_string(dim) + " exceeds " +
                                std::to_string(kLabeledDimensionLimit));

    // placements: label k sits on place[k]
    std::vector<std::vector<int>> places;
    std::map<std::vector<int>, std::size_t> where;
    std::vector<int> cur;
    std::vector<char> used(m, 0);
    std::function<void()> rec = [&] {
        if (static_cast<int>(cur.size()) == n) {
            where.emplace(cur, places.size());
            places.push_back(cur);
            return;
        }
        for (std::size_t s = 0; s < m; ++s) {
            if (used[s]) continue;
            used[s] = 1;
            cur.push_back(static_cast<int>(s));
            rec();
            cur.pop_back();
            used[s] = 0;
        }
    };
    rec();
    const auto d = static_cast<Eigen::Index>(places.size());

    Eigen::VectorXd h0(d);
    Eigen::MatrixXd kin = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
        const auto& p = places[static_cast<std::size_t>(x)];
        FockState f(m, 0);
        for (int s : p) f[static_cast<std::size_t>(s)] = 1;
        h0[x] = diagonal_energy(f, table, model.V, 0.0);
        for (int k = 0; k < n; ++k) {
            const auto i = static_cast<std::size_t>(p[static_cast<std::size_t>(k)]);
            for (const auto& inc : lat.incident[i]) {
                if (f[static_cast<std::size_t>(inc.other)]) continue;
                auto q = p;
                q[static_cast<std::size_t>(k)] = inc.other;
                kin(static_cast<Eigen::Index>(where.at(q)), x) -= model.t;
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(kin);

    // label permutations and the placement each one maps x to
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<CycleVector> types;
    for (const auto& pi : perms) types.push_back(detail::cycle_type(pi));

    TrotterCycles out;
    out.dimension = static_cast<std::size_t>(d);
    for (double dt_req : dtaus) {
        if (!(dt_req > 0)) throw InvalidArgument("trotter_cycles: time steps must be positive");
        TrotterPoint pt;
        pt.slices = static_cast<std::size_t>(std::max(1.0, std::round(beta / dt_req)));
        pt.dtau = beta / static_cast<double>(pt.slices);
        const Eigen::VectorXd half = (-0.5 * pt.dtau * h0.array()).exp();
        const Eigen::VectorXd ek = (-pt.dtau * ks.eigenvalues().array()).exp();
        Eigen::MatrixXd t = half.asDiagonal() * (ks.eigenvectors() * ek.asDiagonal() * ks.eigenvectors().transpose()) *
                            half.asDiagonal();
        t = 0.5 * (t + t.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ts(t);
        const Eigen::VectorXd lp = ts.eigenvalues().array().max(0.0).pow(static_cast<double>(pt.slices));
        const Eigen::MatrixXd w = ts.eigenvectors() * lp.asDiagonal() * ts.eigenvectors().transpose();

        std::map<CycleVector, double> acc;
        double total = 0;
        std::vector<int> y(static_cast<std::size_t>(n));
        for (Eigen::Index x = 0; x < d; ++x) {
            const auto& p = places[static_cast<std::size_t>(x)];
            for (std::size_t a = 0; a < perms.size(); ++a) {
                for (int k = 0; k < n; ++k)
                    y[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(perms[a][static_cast<std::size_t>(k)])];
                const double v = w(static_cast<Eigen::Index>(where.at(y)), x);
                acc[types[a]] += v;
                total += v;
            }
        }
        for (auto& [q, v] : acc) v /= total;
        pt.probabilities = std::move(acc);
        out.points.push_back(std::move(pt));
    }

    std::vector<std::size_t> order(out.points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return out.points[a].dtau < out.points[b].dtau; });
    std::vector<double> d2;
    for (auto k : order) d2.push_back(out.points[k].dtau * out.points[k].dtau);
    std::vector<double> d2_fine(d2.begin(), d2.end() - 1);
    for (const auto& [q, unused] : out.points.front().probabilities) {
        std::vector<double> y;
        for (auto k : order) {
            const auto it = out.points[k].probabilities.find(q);
            y.push_back(it == out.points[k].probabilities.end() ? 0.0 : it->second);
        }
        const double all = detail::extrapolate(d2, y);
        const double fine = detail::extrapolate(d2_fine, std::vector<double>(y.begin(), y.end() - 1));
        out.extrapolated[q] = all;
        out.residual[q] = std::abs(all - fine);
        out.max_residual = std::max(out.max_residual, out.residual[q]);
    }
    if (out.max_residual > max_residual)
        throw ExtrapolationUnstable("trotter_cycles: extrapolation residual " + std::to_string(out.max_residual) +
                                    " exceeds " + std::to_string(max_residual));
    return out;
}

inline nlohmann::json to_json(const TrotterCycles& tc) {
    nlohmann::json j;
    j["dimension"] = tc.dimension;
    j["max_residual"] = tc.max_residual;
    auto& pts = j["points"] = nlohmann::json::array();
    for (const auto& p : tc.points) {
        nlohmann::json pj{{"dtau", p.dtau}, {"slices", p.slices}};
        for (const auto& [q, v] : p.probabilities) pj["probabilities"][q.str()] = v;
        pts.push_back(pj);
    }
    for (const auto& [q, v] : tc.extrapolated) {
        j["extrapolated"][q.str()] = v;
        j["residual"][q.str()] = tc.residual.at(q);
    }
    return j;
}

}  // namespace braidmc
