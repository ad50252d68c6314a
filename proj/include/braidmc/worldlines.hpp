// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file worldlines.hpp
 * @brief Continuous imaginary-time worldline configurations of hard-core bosons.
 *
 * Times are stored in units of beta, u = tau / beta in [0, 1). Each site keeps a
 * time-sorted list of events; an event flips the occupation of its site and
 * records the occupation just after it. A kink (hop) shows up in the lists of
 * both of its sites at the same time; a worm end shows up in one list only.
 *
 * Occupation convention: occupation(site, tau) is the value right after the
 * last event at or before tau; events at tau take effect at tau.
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/lattice.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace braidmc {

struct Event {
    double time = 0;          ///< u in [0, 1)
    Site partner = -1;        ///< other site of a kink, -1 for a worm end
    std::int32_t bond = -1;   ///< bond slot of a kink, -1 for a worm end
    std::uint8_t occ_after = 0;

    [[nodiscard]] bool is_worm_end() const { return bond < 0; }
};

struct WormEnd {
    Site site = 0;
    double time = 0;  ///< u in [0, 1)
};

/// Counts (n_1, ..., n_N) of permutation cycles of length l*beta.
struct CycleVector {
    std::vector<int> counts;

    [[nodiscard]] int particles() const {
        int n = 0;
        for (std::size_t l = 0; l < counts.size(); ++l) n += static_cast<int>(l + 1) * counts[l];
        return n;
    }
    [[nodiscard]] std::string str() const {
        std::string s;
        for (std::size_t l = 0; l < counts.size(); ++l) {
            if (l) s += '-';
            s += std::to_string(counts[l]);
        }
        return s;
    }
    friend auto operator<=>(const CycleVector&, const CycleVector&) = default;
};

/// Non-fatal summary of structural checks; empty `problems` means valid.
struct InvariantReport {
    std::vector<std::string> problems;
    [[nodiscard]] bool ok() const { return problems.empty(); }
};

class Configuration {
 public:
    Configuration() = default;

    /// Kink-free configuration with occupations `fock0`.
    Configuration(std::shared_ptr<const Lattice> lattice, double beta, FockState fock0)
        : lattice_(std::move(lattice)), beta_(beta), events_(fock0.size()), idle_occ_(std::move(fock0)) {
        if (!lattice_ || idle_occ_.size() != lattice_->site_count())
            throw InvalidArgument("Configuration: fock0 length must equal site count");
        if (!(beta_ > 0)) throw InvalidArgument("Configuration: beta must be > 0");
    }

    [[nodiscard]] const Lattice& lattice() const { return *lattice_; }
    [[nodiscard]] const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }
    [[nodiscard]] double beta() const { return beta_; }
    [[nodiscard]] std::size_t site_count() const { return events_.size(); }
    [[nodiscard]] std::size_t kink_count() const { return kinks_; }
    [[nodiscard]] bool has_worm() const { return worm_.has_value(); }
    [[nodiscard]] const std::array<WormEnd, 2>& worm() const { return *worm_; }
    [[nodiscard]] const std::vector<Event>& events(Site s) const { return events_[idx(s)]; }

    // --- occupation queries (u in [0,1)) --------------------------------------

    /// Occupation right after the last event at or before u.
    [[nodiscard]] int occupation_u(Site s, double u) const {
        const auto& ev = events_[idx(s)];
        if (ev.empty()) return idle_occ_[idx(s)];
        auto it = std::upper_bound(ev.begin(), ev.end(), u, [](double v, const Event& e) { return v < e.time; });
        if (it == ev.begin()) return ev.back().occ_after;
        return std::prev(it)->occ_after;
    }

    /// Occupation just below u (ignores an event exactly at u).
    [[nodiscard]] int occupation_below_u(Site s, double u) const {
        const auto& ev = events_[idx(s)];
        if (ev.empty()) return idle_occ_[idx(s)];
        auto it = std::lower_bound(ev.begin(), ev.end(), u, [](const Event& e, double v) { return e.time < v; });
        if (it == ev.begin()) return ev.back().occ_after;
        return std::prev(it)->occ_after;
    }

    /// occupation(site, tau) for tau in [0, beta).
    [[nodiscard]] int occupation(Site s, double tau) const {
        if (tau < 0 || tau >= beta_) throw InvalidArgument("occupation: tau outside [0, beta)");
        return occupation_u(s, tau / beta_);
    }

    /// Fock state at imaginary time tau.
    [[nodiscard]] FockState fock_state(double tau = 0.0) const {
        if (has_worm()) throw InvalidArgument("fock_state: undefined while a worm is open");
        if (tau < 0 || tau >= beta_) throw InvalidArgument("fock_state: tau outside [0, beta)");
        FockState f(site_count());
        for (std::size_t s = 0; s < f.size(); ++s) f[s] = static_cast<std::uint8_t>(occupation_u(static_cast<Site>(s), tau / beta_));
        return f;
    }

    [[nodiscard]] FockState fock_state_u(double u) const {
        FockState f(site_count());
        for (std::size_t s = 0; s < f.size(); ++s) f[s] = static_cast<std::uint8_t>(occupation_u(static_cast<Site>(s), u));
        return f;
    }

    [[nodiscard]] int particle_number() const { return particle_count(fock_state_u(0.0)); }

    /// Index of the event at exactly time u on site s, or -1.
    [[nodiscard]] int find_event(Site s, double u) const {
        const auto& ev = events_[idx(s)];
        auto it = std::lower_bound(ev.begin(), ev.end(), u, [](const Event& e, double v) { return e.time < v; });
        if (it != ev.end() && it->time == u) return static_cast<int>(it - ev.begin());
        return -1;
    }

    /// Forward distance (u units, in (0,1]) from u to the first event on s strictly after u,
    /// skipping events at times listed in `skip`. Returns 1 if there is none.
    [[nodiscard]] double distance_forward(Site s, double u, std::initializer_list<double> skip = {}) const {
        double best = 1.0;
        for (const auto& e : events_[idx(s)]) {
            if (e.time == u || contains(skip, e.time)) continue;
            double d = e.time - u;
            if (d <= 0) d += 1.0;
            best = std::min(best, d);
        }
        return best;
    }

    /// Backward distance (u units, in (0,1]) from u to the last event on s strictly before u.
    [[nodiscard]] double distance_backward(Site s, double u, std::initializer_list<double> skip = {}) const {
        double best = 1.0;
        for (const auto& e : events_[idx(s)]) {
            if (e.time == u || contains(skip, e.time)) continue;
            double d = u - e.time;
            if (d <= 0) d += 1.0;
            best = std::min(best, d);
        }
        return best;
    }

    // --- mutation primitives; callers guarantee consistency ----------------

    /// Adds a hop of the particle on `from` to `to` at time u across bond slot `bond`.
    void add_kink(std::int32_t bond, Site from, Site to, double u) {
        insert_event(from, {u, to, bond, 0});
        insert_event(to, {u, from, bond, 1});
        ++kinks_;
    }

    /// Removes the kink at time u touching site s (and its partner entry).
    void remove_kink(Site s, double u) {
        const int k = find_event(s, u);
        if (k < 0 || events_[idx(s)][static_cast<std::size_t>(k)].is_worm_end())
            throw InvalidArgument("remove_kink: no kink at given time");
        const Site other = events_[idx(s)][static_cast<std::size_t>(k)].partner;
        erase_event(s, u);
        erase_event(other, u);
        --kinks_;
    }

    /// Opens a worm on site s: occupation is flipped on the forward segment (ua, ub).
    void open_worm(Site s, double ua, double ub) {
        if (has_worm()) throw InvalidArgument("open_worm: worm already open");
        const auto n = static_cast<std::uint8_t>(occupation_u(s, ua));
        insert_event(s, {ua, -1, -1, static_cast<std::uint8_t>(1 - n)});
        insert_event(s, {ub, -1, -1, n});
        worm_ = std::array<WormEnd, 2>{WormEnd{s, ua}, WormEnd{s, ub}};
    }

    /// Closes the worm by erasing the flipped segment running forward from end `first`
    /// to the other end; both ends must sit on the same site.
    void close_worm(int first = 0) {
        if (!has_worm()) throw InvalidArgument("close_worm: no worm");
        const auto a = (*worm_)[static_cast<std::size_t>(first)];
        const auto b = (*worm_)[static_cast<std::size_t>(1 - first)];
        if (a.site != b.site) throw InvalidArgument("close_worm: ends on different sites");
        // the last erase fixes idle_occ_ to occ_after(b), the value outside the segment
        erase_event(a.site, a.time);
        erase_event(b.site, b.time);
        worm_.reset();
    }

    /// Moves worm end `which` to time u on the same site (no event in between).
    void move_end(int which, double u) {
        auto& end = (*worm_)[static_cast<std::size_t>(which)];
        auto ev = events_[idx(end.site)][static_cast<std::size_t>(find_event(end.site, end.time))];
        erase_event(end.site, end.time);
        ev.time = u;
        insert_event(end.site, ev);
        end.time = u;
    }

    /// Moves worm end `which` from its site i to neighbour j across `bond`, adding a kink at uk.
    void hop_end(int which, Site j, std::int32_t bond, double uk) {
        auto& end = (*worm_)[static_cast<std::size_t>(which)];
        const Site i = end.site;
        const auto ev = events_[idx(i)][static_cast<std::size_t>(find_event(i, end.time))];
        const std::uint8_t n_plus = ev.occ_after;
        erase_event(i, end.time);
        insert_event(j, ev);
        end.site = j;
        if (n_plus == 0)
            add_kink(bond, i, j, uk);
        else
            add_kink(bond, j, i, uk);
    }

    /// Inverse of hop_end: removes the kink at uk adjacent to end `which` and moves the end
    /// onto the kink's other site.
    /// `above` tells whether the kink lies after the end in time; it fixes the
    /// occupation j keeps outside the removed segment.
    void unhop_end(int which, double uk, bool above) {
        auto& end = (*worm_)[static_cast<std::size_t>(which)];
        const Site j = end.site;
        const int k = find_event(j, uk);
        const Site i = events_[idx(j)][static_cast<std::size_t>(k)].partner;
        const auto ev = events_[idx(j)][static_cast<std::size_t>(find_event(j, end.time))];
        const auto outside = above ? events_[idx(j)][static_cast<std::size_t>(k)].occ_after : ev.occ_after;
        remove_kink(j, uk);
        erase_event(j, end.time);
        if (events_[idx(j)].empty()) idle_occ_[idx(j)] = outside;
        insert_event(i, ev);
        end.site = i;
    }

    /// Copy with every time shifted by delta (tau units) around the periodic axis.
    [[nodiscard]] Configuration shifted(double delta_tau) const {
        Configuration c = *this;
        double d = std::fmod(delta_tau / beta_, 1.0);
        if (d < 0) d += 1.0;
        auto shift = [d](double u) {
            double v = u + d;
            if (v >= 1.0) v -= 1.0;
            return v;
        };
        for (auto& ev : c.events_) {
            for (auto& e : ev) e.time = shift(e.time);
            std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
        }
        if (c.worm_)
            for (auto& w : *c.worm_) w.time = shift(w.time);
        return c;
    }

    /// Copy with every site and bond slot relabeled by a lattice translation.
    [[nodiscard]] Configuration translated(const Translation& t) const {
        Configuration c = *this;
        for (std::size_t s = 0; s < events_.size(); ++s) {
            const auto to = static_cast<std::size_t>(t.site[s]);
            c.idle_occ_[to] = idle_occ_[s];
            auto& ev = c.events_[to];
            ev = events_[s];
            for (auto& e : ev) {
                if (e.is_worm_end()) continue;
                e.partner = t.site[idx(e.partner)];
                e.bond = t.bond[static_cast<std::size_t>(e.bond)];
            }
        }
        if (c.worm_)
            for (auto& w : *c.worm_) w.site = t.site[idx(w.site)];
        return c;
    }

    /// Raw state access for serialization.
    [[nodiscard]] const std::vector<std::uint8_t>& idle_occupations() const { return idle_occ_; }

    /// Rebuilds a configuration from serialized parts, then validates it.
    static Configuration from_parts(std::shared_ptr<const Lattice> lattice, double beta,
                                    std::vector<std::vector<Event>> events, std::vector<std::uint8_t> idle,
                                    std::optional<std::array<WormEnd, 2>> worm) {
        Configuration c(std::move(lattice), beta, std::move(idle));
        c.events_ = std::move(events);
        c.worm_ = worm;
        std::size_t half_kinks = 0;
        for (const auto& ev : c.events_)
            for (const auto& e : ev)
                if (!e.is_worm_end()) ++half_kinks;
        c.kinks_ = half_kinks / 2;
        const auto report = c.check_invariants();
        if (!report.ok()) throw InvalidArgument("Configuration: " + report.problems.front());
        return c;
    }

    /**
     * Structural validation in O(total events): sorted unique times per site,
     * alternating occupations with periodic wrap, kink pairing across sites on a
     * real bond, worm bookkeeping and (closed sector) constant N(tau).
     */
    [[nodiscard]] InvariantReport check_invariants() const {
        InvariantReport r;
        std::size_t ends = 0;
        std::size_t half_kinks = 0;
        std::map<double, int> time_use;
        for (std::size_t s = 0; s < events_.size(); ++s) {
            const auto& ev = events_[s];
            for (std::size_t k = 0; k < ev.size(); ++k) {
                const auto& e = ev[k];
                if (!(e.time >= 0.0 && e.time < 1.0)) r.problems.push_back("event time outside [0,1) on site " + std::to_string(s));
                if (k > 0 && !(ev[k - 1].time < e.time)) r.problems.push_back("unsorted or coincident times on site " + std::to_string(s));
                const auto& prev = ev[(k + ev.size() - 1) % ev.size()];
                if (e.occ_after > 1) r.problems.push_back("occupation outside {0,1}");
                if (ev.size() == 1 || prev.occ_after == e.occ_after)
                    r.problems.push_back("event does not flip occupation on site " + std::to_string(s));
                if (e.is_worm_end()) {
                    ++ends;
                    ++time_use[e.time];
                    continue;
                }
                ++half_kinks;
                if (e.partner < 0 || static_cast<std::size_t>(e.partner) >= events_.size() || e.partner == static_cast<Site>(s)) {
                    r.problems.push_back("kink with invalid partner");
                    continue;
                }
                const auto& lb = lattice_->bonds.at(static_cast<std::size_t>(e.bond));
                const bool on_bond = (lb.a == static_cast<Site>(s) && lb.b == e.partner) || (lb.b == static_cast<Site>(s) && lb.a == e.partner);
                if (!on_bond) r.problems.push_back("kink not on its bond slot");
                const int j = find_event(e.partner, e.time);
                if (j < 0) {
                    r.problems.push_back("kink without partner entry");
                } else {
                    const auto& m = events_[idx(e.partner)][static_cast<std::size_t>(j)];
                    if (m.partner != static_cast<Site>(s) || m.bond != e.bond || m.occ_after == e.occ_after)
                        r.problems.push_back("kink partner entry inconsistent");
                }
                if (static_cast<Site>(s) < e.partner) ++time_use[e.time];
            }
        }
        for (const auto& [t, n] : time_use)
            if (n > 1) r.problems.push_back("two events share a time");
        if (half_kinks != 2 * kinks_) r.problems.push_back("kink counter out of sync");
        if (has_worm()) {
            if (ends != 2) r.problems.push_back("worm flag set but " + std::to_string(ends) + " end events");
            for (const auto& w : *worm_) {
                const int k = find_event(w.site, w.time);
                if (k < 0 || !events_[idx(w.site)][static_cast<std::size_t>(k)].is_worm_end())
                    r.problems.push_back("worm end not found in its site list");
            }
        } else if (ends != 0) {
            r.problems.push_back("worm end events present in closed configuration");
        }
        if (!has_worm() && r.ok()) {
            // N(tau) constant: kinks conserve N and every site returns to its tau=0 value.
            const int n0 = particle_count(fock_state_u(0.0));
            for (const auto& [t, n] : time_use) {
                (void)n;
                if (particle_count(fock_state_u(t)) != n0) {
                    r.problems.push_back("particle number varies in closed configuration");
                    break;
                }
            }
        }
        return r;
    }

    /// All kinks as (u, from, to, bond), time-ordered.
    struct KinkRecord {
        double time;
        Site from;
        Site to;
        std::int32_t bond;
    };
    [[nodiscard]] std::vector<KinkRecord> kinks() const {
        std::vector<KinkRecord> out;
        for (std::size_t s = 0; s < events_.size(); ++s)
            for (const auto& e : events_[s])
                if (!e.is_worm_end() && e.occ_after == 0) out.push_back({e.time, static_cast<Site>(s), e.partner, e.bond});
        std::sort(out.begin(), out.end(), [](const KinkRecord& a, const KinkRecord& b) { return a.time < b.time; });
        return out;
    }

 private:
    static std::size_t idx(Site s) { return static_cast<std::size_t>(s); }
    static bool contains(std::initializer_list<double> xs, double v) {
        for (double x : xs)
            if (x == v) return true;
        return false;
    }

    void insert_event(Site s, const Event& e) {
        auto& ev = events_[idx(s)];
        if (ev.empty()) idle_occ_[idx(s)] = static_cast<std::uint8_t>(e.occ_after);
        auto it = std::lower_bound(ev.begin(), ev.end(), e.time, [](const Event& x, double v) { return x.time < v; });
        if (it != ev.end() && it->time == e.time) throw InvalidArgument("insert_event: coincident event time");
        ev.insert(it, e);
    }

    void erase_event(Site s, double u) {
        auto& ev = events_[idx(s)];
        const int k = find_event(s, u);
        if (k < 0) throw InvalidArgument("erase_event: no event at time");
        const auto occ = ev[static_cast<std::size_t>(k)].occ_after;
        ev.erase(ev.begin() + k);
        if (ev.empty()) idle_occ_[idx(s)] = occ;
    }

    std::shared_ptr<const Lattice> lattice_;
    double beta_ = 1.0;
    std::vector<std::vector<Event>> events_;
    std::vector<std::uint8_t> idle_occ_;
    std::size_t kinks_ = 0;
    std::optional<std::array<WormEnd, 2>> worm_;
};

// -----------------------------------------------------------------------------
// Weights and cycles
// -----------------------------------------------------------------------------

/// Time integral of the diagonal energy (tau units) and its H_0-only part, over [0, beta).
struct DiagonalIntegral {
    double total = 0;      ///< int (V sum c n n - mu N) dtau
    double particles = 0;  ///< int N dtau
};

inline DiagonalIntegral integrate_diagonal(const Configuration& config, const InteractionTable& table, double V,
                                           double mu) {
    struct Flip {
        double time;
        Site site;
        std::uint8_t occ;
    };
    std::vector<Flip> flips;
    for (Site s = 0; s < static_cast<Site>(config.site_count()); ++s)
        for (const auto& e : config.events(s)) flips.push_back({e.time, s, e.occ_after});
    std::stable_sort(flips.begin(), flips.end(), [](const Flip& a, const Flip& b) { return a.time < b.time; });

    FockState fock = config.fock_state_u(0.0);
    double energy = diagonal_energy(fock, table, V, mu);
    double n = particle_count(fock);
    DiagonalIntegral acc;
    double last = 0.0;
    for (const auto& f : flips) {
        if (f.time == 0.0) continue;  // already in fock(0)
        acc.total += energy * (f.time - last);
        acc.particles += n * (f.time - last);
        last = f.time;
        if (fock[static_cast<std::size_t>(f.site)] == f.occ) continue;
        const double field = interaction_field(fock, table, f.site);
        const int sign = f.occ ? 1 : -1;
        energy += sign * (V * field - mu);
        n += sign;
        fock[static_cast<std::size_t>(f.site)] = f.occ;
    }
    acc.total += energy * (1.0 - last);
    acc.particles += n * (1.0 - last);
    acc.total *= config.beta();
    acc.particles *= config.beta();
    return acc;
}

/**
 * log omega = n log t - int_0^beta E_diag(tau) dtau, plus log C for an open worm.
 * Throws for t <= 0.
 */
inline double log_weight(const Configuration& config, const ModelSpec& model, const InteractionTable& table,
                         double log_worm_factor = 0.0) {
    if (!(model.t > 0)) throw InvalidArgument("log_weight: hopping t must be > 0");
    const auto integral = integrate_diagonal(config, table, model.V, model.mu);
    double lw = static_cast<double>(config.kink_count()) * std::log(model.t) - integral.total;
    if (config.has_worm()) lw += log_worm_factor;
    return lw;
}

/// Permutation of the occupied sites at tau = 0 obtained by following every worldline to tau = beta.
inline std::vector<Site> worldline_permutation(const Configuration& config) {
    if (config.has_worm()) throw InvalidArgument("permutation_cycles: undefined while a worm is open");
    const auto n = static_cast<Site>(config.site_count());
    std::vector<Site> perm(config.site_count(), -1);
    for (Site s0 = 0; s0 < n; ++s0) {
        if (!config.occupation_u(s0, 0.0)) continue;
        Site s = s0;
        double u = 0.0;
        for (;;) {
            const auto& ev = config.events(s);
            auto it = std::upper_bound(ev.begin(), ev.end(), u, [](double v, const Event& e) { return v < e.time; });
            if (it == ev.end()) break;
            // the particle occupies s, so the next event on s is its departure
            u = it->time;
            s = it->partner;
        }
        // a kink exactly at u = 0 acts at tau = beta on the way out
        const auto& last = config.events(s);
        if (!last.empty() && last.front().time == 0.0 && !last.front().is_worm_end()) s = last.front().partner;
        perm[static_cast<std::size_t>(s0)] = s;
    }
    return perm;
}

/// Cycle-length counts of the worldline permutation; counts has length N.
inline CycleVector permutation_cycles(const Configuration& config) {
    const auto perm = worldline_permutation(config);
    int particles = 0;
    for (auto p : perm)
        if (p >= 0) ++particles;
    CycleVector q;
    q.counts.assign(static_cast<std::size_t>(particles), 0);
    std::vector<char> seen(perm.size(), 0);
    for (std::size_t s = 0; s < perm.size(); ++s) {
        if (perm[s] < 0 || seen[s]) continue;
        int len = 0;
        std::size_t cur = s;
        while (!seen[cur]) {
            seen[cur] = 1;
            ++len;
            cur = static_cast<std::size_t>(perm[cur]);
        }
        ++q.counts[static_cast<std::size_t>(len - 1)];
    }
    return q;
}

}  // namespace braidmc
