// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file audit.hpp
 * @brief Brute-force detailed-balance check of sampler proposals.
 *
 * For a proposal old -> new this recomputes, without using the sampler's rate
 * profiles, the full log weights of both configurations and the proposal
 * densities of the move and of its inverse. Heat-bath densities are rebuilt
 * from full log-weight evaluations along the sampled window, using that the
 * log weight is linear in the moved time between consecutive event times.
 */

#pragma once

#include <braidmc/engine.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace braidmc {

struct AuditRecord {
    MoveKind kind = MoveKind::insert_worm;
    double production = 0;    ///< sampler log acceptance ratio
    double brute = 0;         ///< independently recomputed log ratio
    double weight_error = 0;  ///< |sampler delta log weight - recomputed|
};

namespace audit_detail {

inline double wrap_u(double u) {
    if (u >= 1.0) u -= 1.0;
    if (u < 0.0) u += 1.0;
    return u;
}

/// Distance from `origin` in the given direction to event time `t`, in (0, 1].
inline double dist(double origin, double t, bool forward) {
    double d = forward ? t - origin : origin - t;
    if (d <= 0) d += 1.0;
    return d;
}

/// Nearest distance to any event on site s other than those at `exclude`.
inline double nearest(const Configuration& c, Site s, double origin, bool forward, std::vector<double> exclude) {
    exclude.push_back(origin);
    double best = 1.0;
    for (const auto& e : c.events(s)) {
        if (std::find(exclude.begin(), exclude.end(), e.time) != exclude.end()) continue;
        best = std::min(best, dist(origin, e.time, forward));
    }
    return best;
}

/// log int_0^len exp(s y) dy
inline double log_int_exp(double s, double len) {
    const double sl = s * len;
    if (std::abs(sl) < 1e-12) return std::log(len) + 0.5 * sl;
    if (s > 0) return sl + std::log1p(-std::exp(-sl)) - std::log(s);
    return std::log1p(-std::exp(sl)) - std::log(-s);
}

/**
 * log density at y_star of the law prop. to exp(h(y)) on (0, L) (tau units).
 * `h` must be linear between consecutive event distances found inside the window.
 */
inline double heat_bath_log_density(const Configuration& c, double origin, bool forward, double L_u,
                                    const std::function<double(double)>& h, double y_star) {
    const double beta = c.beta();
    std::vector<double> knots{0.0, L_u * beta};
    for (Site s = 0; s < static_cast<Site>(c.site_count()); ++s)
        for (const auto& e : c.events(s)) {
            if (e.time == origin) continue;
            const double d = dist(origin, e.time, forward);
            if (d < L_u) knots.push_back(d * beta);
        }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<double> logs;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        const double b = knots[k + 1];
        const double len = b - a;
        if (len <= 0) continue;
        const double h1 = h(a + len / 3.0);
        const double h2 = h(a + 2.0 * len / 3.0);
        const double slope = (h2 - h1) / (len / 3.0);
        const double ha = h1 - slope * len / 3.0;
        logs.push_back(ha + log_int_exp(slope, len));
    }
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logs) m = std::max(m, v);
    double sum = 0;
    for (double v : logs) sum += std::exp(v - m);
    return h(y_star) - (m + std::log(sum));
}

struct Context {
    const WormSampler& s;
    double lw(const Configuration& c) const {
        return log_weight(c, s.model(), s.table(), s.log_worm_factor());
    }
    double p(MoveKind k, bool worm) const { return s.kind_probability(k, worm); }
};

inline const Event& event_at(const Configuration& c, Site s, double u) {
    return c.events(s)[static_cast<std::size_t>(c.find_event(s, u))];
}

/// log probability density of proposing `p` from configuration `c`; -inf if impossible.
inline double log_q(const Context& ctx, const Configuration& c, const Proposal& p) {
    const double ninf = -std::numeric_limits<double>::infinity();
    const double beta = c.beta();
    const double M = static_cast<double>(c.site_count());
    switch (p.kind) {
        case MoveKind::insert_worm: {
            if (c.has_worm()) return ninf;
            const double D = nearest(c, p.site, p.u0, true, {});
            const double y = dist(p.u0, p.u1, true);
            if (y >= D) return ninf;
            auto h = [&](double yy) {
                Configuration t = c;
                t.open_worm(p.site, p.u0, wrap_u(p.u0 + yy / beta));
                return ctx.lw(t);
            };
            return std::log(ctx.p(p.kind, false)) - std::log(M) - std::log(beta) +
                   heat_bath_log_density(c, p.u0, true, D, h, y * beta);
        }
        case MoveKind::remove_worm: {
            if (!c.has_worm()) return ninf;
            const auto a = c.worm()[static_cast<std::size_t>(p.end)];
            const auto b = c.worm()[static_cast<std::size_t>(1 - p.end)];
            if (a.site != b.site) return ninf;
            if (nearest(c, a.site, a.time, true, {}) != dist(a.time, b.time, true)) return ninf;
            return std::log(ctx.p(p.kind, true)) - std::log(2.0);
        }
        case MoveKind::shift_end: {
            if (!c.has_worm()) return ninf;
            const auto e = c.worm()[static_cast<std::size_t>(p.end)];
            double start = 0;
            double db = 2.0;
            for (const auto& ev : c.events(e.site)) {
                if (ev.time == e.time) continue;
                if (dist(e.time, ev.time, false) < db) {
                    db = dist(e.time, ev.time, false);
                    start = ev.time;
                }
            }
            const double window = nearest(c, e.site, start, true, {e.time});
            const double y = dist(start, p.u0, true);
            if (y >= window) return ninf;
            auto h = [&](double yy) {
                Configuration t = c;
                t.move_end(p.end, wrap_u(start + yy / beta));
                return ctx.lw(t);
            };
            return std::log(ctx.p(p.kind, true)) - std::log(2.0) +
                   heat_bath_log_density(c, start, true, window, h, y * beta);
        }
        case MoveKind::insert_kink: {
            if (!c.has_worm()) return ninf;
            const auto e = c.worm()[static_cast<std::size_t>(p.end)];
            const Site i = e.site;
            const Site j = p.site;
            const auto& inc = c.lattice().incident[static_cast<std::size_t>(i)];
            int slots = 0;
            for (const auto& x : inc)
                if (x.bond == p.bond && x.other == j) ++slots;
            if (slots == 0) return ninf;
            const int n_plus = event_at(c, i, e.time).occ_after;
            const bool fwd = p.above;
            const int nj = fwd ? c.occupation_u(j, e.time) : c.occupation_below_u(j, e.time);
            if (nj != (fwd ? 1 - n_plus : n_plus)) return ninf;
            const double D = std::min(nearest(c, i, e.time, fwd, {}), nearest(c, j, e.time, fwd, {}));
            const double x = dist(e.time, p.u0, fwd);
            if (x >= D) return ninf;
            auto h = [&](double yy) {
                Configuration t = c;
                t.hop_end(p.end, j, p.bond, wrap_u(fwd ? e.time + yy / beta : e.time - yy / beta));
                return ctx.lw(t);
            };
            return std::log(ctx.p(p.kind, true)) - 2.0 * std::log(2.0) + std::log(static_cast<double>(slots)) -
                   std::log(static_cast<double>(inc.size())) + heat_bath_log_density(c, e.time, fwd, D, h, x * beta);
        }
        case MoveKind::remove_kink: {
            if (!c.has_worm()) return ninf;
            const auto e = c.worm()[static_cast<std::size_t>(p.end)];
            const Site j = e.site;
            const bool fwd = p.above;
            // nearest event on j in the chosen direction must be a kink whose partner has nothing closer
            double best = 2.0;
            const Event* adj = nullptr;
            for (const auto& ev : c.events(j)) {
                if (ev.time == e.time) continue;
                const double d = dist(e.time, ev.time, fwd);
                if (d < best) {
                    best = d;
                    adj = &ev;
                }
            }
            if (!adj || adj->is_worm_end()) return ninf;
            if (nearest(c, adj->partner, e.time, fwd, {}) != best) return ninf;
            return std::log(ctx.p(p.kind, true)) - 2.0 * std::log(2.0);
        }
    }
    return ninf;
}

/// The proposal that undoes `p`, expressed relative to the configuration after `p`.
inline Proposal inverse(const Configuration& before, const Proposal& p) {
    Proposal r;
    r.end = p.end;
    switch (p.kind) {
        case MoveKind::insert_worm:
            r.kind = MoveKind::remove_worm;
            r.end = 0;
            break;
        case MoveKind::remove_worm: {
            r.kind = MoveKind::insert_worm;
            const auto a = before.worm()[static_cast<std::size_t>(p.end)];
            const auto b = before.worm()[static_cast<std::size_t>(1 - p.end)];
            r.site = a.site;
            r.u0 = a.time;
            r.u1 = b.time;
            break;
        }
        case MoveKind::shift_end:
            r.kind = MoveKind::shift_end;
            r.u0 = before.worm()[static_cast<std::size_t>(p.end)].time;
            break;
        case MoveKind::insert_kink:
            r.kind = MoveKind::remove_kink;
            r.above = p.above;
            r.u0 = p.u0;
            break;
        case MoveKind::remove_kink: {
            r.kind = MoveKind::insert_kink;
            r.above = p.above;
            r.site = before.worm()[static_cast<std::size_t>(p.end)].site;
            const auto& k = event_at(before, r.site, p.u0);
            r.bond = k.bond;
            r.u0 = p.u0;
            break;
        }
    }
    r.feasible = true;
    return r;
}

}  // namespace audit_detail

/**
 * Audits one feasible proposal from the sampler's current configuration.
 * Returns nullopt for infeasible proposals.
 */
inline std::optional<AuditRecord> audit_proposal(const WormSampler& sampler, const Proposal& p) {
    if (!p.feasible) return std::nullopt;
    using namespace audit_detail;
    const Context ctx{sampler};
    const Configuration& before = sampler.config();
    Configuration after = before;
    apply_proposal(after, p);
    const double lw0 = ctx.lw(before);
    const double lw1 = ctx.lw(after);
    const double qf = log_q(ctx, before, p);
    const double qr = log_q(ctx, after, inverse(before, p));
    AuditRecord rec;
    rec.kind = p.kind;
    rec.production = p.log_ratio;
    rec.brute = (lw1 - lw0) + qr - qf;
    rec.weight_error = std::abs(p.delta_log_weight - (lw1 - lw0));
    return rec;
}

}  // namespace braidmc
