// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file engine.hpp
 * @brief Continuous-time worm sampler for hard-core bosons and the run loop
 *        that turns it into a stream of fixed-N closed-sector snapshots.
 *
 * Weights are per d(tau) measure: t^n exp(-int E_diag dtau), times the worm
 * factor C for open configurations. Moves:
 *
 *   closed sector: insert worm (site, first end uniform, second end heat-bath)
 *   open sector:   shift an end in time (heat-bath, always accepted),
 *                  hop an end across a bond creating a kink (heat-bath time),
 *                  the inverse kink removal, and worm removal.
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/lattice.hpp>
#include <braidmc/profile.hpp>
#include <braidmc/statistics.hpp>
#include <braidmc/worldlines.hpp>

#include <json.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace braidmc {

enum class MoveKind : std::uint8_t { insert_worm, remove_worm, shift_end, insert_kink, remove_kink };
inline constexpr std::size_t kMoveKinds = 5;
inline constexpr std::array<const char*, kMoveKinds> kMoveNames = {"insert_worm", "remove_worm", "shift_end",
                                                                   "insert_kink", "remove_kink"};

struct MoveCounter {
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
};

struct UpdateStats {
    std::array<MoveCounter, kMoveKinds> moves{};

    MoveCounter& operator[](MoveKind k) { return moves[static_cast<std::size_t>(k)]; }
    const MoveCounter& operator[](MoveKind k) const { return moves[static_cast<std::size_t>(k)]; }

    UpdateStats& operator+=(const UpdateStats& o) {
        for (std::size_t k = 0; k < kMoveKinds; ++k) {
            moves[k].proposed += o.moves[k].proposed;
            moves[k].accepted += o.moves[k].accepted;
        }
        return *this;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t k = 0; k < kMoveKinds; ++k)
            j[kMoveNames[k]] = {{"proposed", moves[k].proposed}, {"accepted", moves[k].accepted}};
        return j;
    }
};

/// Open-sector move selection; the closed sector always proposes a worm insertion.
struct MoveProbabilities {
    double shift_end = 0.25;
    double insert_kink = 0.3;
    double remove_kink = 0.3;
    double remove_worm = 0.15;

    void validate() const {
        const double s = shift_end + insert_kink + remove_kink + remove_worm;
        if (std::abs(s - 1.0) > 1e-12 || shift_end < 0 || insert_kink <= 0 || remove_kink <= 0 || remove_worm <= 0)
            throw InvalidArgument("move probabilities must be positive and sum to 1");
    }
};

struct SamplerOptions {
    double worm_fugacity = 1.0;
    MoveProbabilities probs;
    bool translations = true;  ///< random torus translation of the whole configuration once per sweep
};

/// A proposed elementary update. `log_ratio` is the log Metropolis-Hastings ratio.
struct Proposal {
    MoveKind kind = MoveKind::insert_worm;
    bool feasible = false;
    int end = 0;
    Site site = 0;
    std::int32_t bond = -1;
    bool above = false;
    double u0 = 0;
    double u1 = 0;
    double log_ratio = -std::numeric_limits<double>::infinity();
    double delta_log_weight = 0;
};

/// Performs the configuration change described by a feasible proposal.
inline void apply_proposal(Configuration& c, const Proposal& p) {
    switch (p.kind) {
        case MoveKind::insert_worm: c.open_worm(p.site, p.u0, p.u1); break;
        case MoveKind::remove_worm: c.close_worm(p.end); break;
        case MoveKind::shift_end: c.move_end(p.end, p.u0); break;
        case MoveKind::insert_kink: c.hop_end(p.end, p.site, p.bond, p.u0); break;
        case MoveKind::remove_kink: c.unhop_end(p.end, p.u0, p.above); break;
    }
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
    void reset(double v) {
        sum_ = v;
        c_ = 0;
    }
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + c_; }
    [[nodiscard]] std::pair<double, double> parts() const { return {sum_, c_}; }
    void set_parts(std::pair<double, double> p) {
        sum_ = p.first;
        c_ = p.second;
    }

 private:
    double sum_ = 0;
    double c_ = 0;
};

class WormSampler {
 public:
    WormSampler(std::shared_ptr<const Lattice> lattice, std::shared_ptr<const InteractionTable> table, ModelSpec model,
                Configuration config, SamplerOptions options = {})
        : lattice_(std::move(lattice)), table_(std::move(table)), model_(model), config_(std::move(config)),
          options_(options) {
        if (!(model_.t >= 0)) throw InvalidArgument("sampler: t must be >= 0");
        if (!(model_.beta > 0)) throw InvalidArgument("sampler: beta must be > 0");
        if (!(options_.worm_fugacity > 0)) throw InvalidArgument("sampler: worm fugacity must be > 0");
        options_.probs.validate();
        if (config_.beta() != model_.beta) throw InvalidArgument("sampler: configuration beta differs from model");
        const double m = static_cast<double>(lattice_->site_count());
        double kappa = static_cast<double>(lattice_->max_coordination()) * model_.t +
                       std::abs(model_.V) * table_->max_field() + std::abs(model_.mu);
        if (!(kappa > 0)) kappa = 1.0;
        log_c_ = std::log(options_.worm_fugacity * kappa / (m * model_.beta));
        log_t_ = model_.t > 0 ? std::log(model_.t) : -std::numeric_limits<double>::infinity();
        tracked_.reset(recompute_log_weight());
    }

    [[nodiscard]] const Configuration& config() const { return config_; }
    [[nodiscard]] const ModelSpec& model() const { return model_; }
    [[nodiscard]] const Lattice& lattice() const { return *lattice_; }
    [[nodiscard]] const InteractionTable& table() const { return *table_; }
    [[nodiscard]] const SamplerOptions& options() const { return options_; }
    [[nodiscard]] double log_worm_factor() const { return log_c_; }

    /// Incrementally tracked log weight.
    [[nodiscard]] double log_weight() const { return tracked_.value(); }

    /// log weight from scratch (t = 0 with no kinks contributes nothing).
    [[nodiscard]] double recompute_log_weight() const {
        const auto integral = integrate_diagonal(config_, *table_, model_.V, model_.mu);
        double lw = -integral.total;
        if (config_.kink_count() > 0) lw += static_cast<double>(config_.kink_count()) * log_t_;
        if (config_.has_worm()) lw += log_c_;
        return lw;
    }

    void resync() { tracked_.reset(recompute_log_weight()); }

    [[nodiscard]] std::pair<double, double> tracked_parts() const { return tracked_.parts(); }
    void set_tracked_parts(std::pair<double, double> p) { tracked_.set_parts(p); }

    /// Weight-preserving relabeling; the tracked weight is left as is.
    void translate(const Translation& t) { config_ = config_.translated(t); }

    /// Replaces the configuration (e.g. after a checkpoint load).
    void set_config(Configuration c) {
        config_ = std::move(c);
        resync();
    }

    [[nodiscard]] double kind_probability(MoveKind k, bool worm) const {
        if (!worm) return k == MoveKind::insert_worm ? 1.0 : 0.0;
        switch (k) {
            case MoveKind::insert_worm: return 0.0;
            case MoveKind::remove_worm: return options_.probs.remove_worm;
            case MoveKind::shift_end: return options_.probs.shift_end;
            case MoveKind::insert_kink: return options_.probs.insert_kink;
            case MoveKind::remove_kink: return options_.probs.remove_kink;
        }
        return 0.0;
    }

    MoveKind choose_kind(Rng& rng) const {
        if (!config_.has_worm()) return MoveKind::insert_worm;
        const auto& p = options_.probs;
        const double u = rng.uniform();
        if (u < p.shift_end) return MoveKind::shift_end;
        if (u < p.shift_end + p.insert_kink) return MoveKind::insert_kink;
        if (u < p.shift_end + p.insert_kink + p.remove_kink) return MoveKind::remove_kink;
        return MoveKind::remove_worm;
    }

    Proposal propose(MoveKind kind, Rng& rng) const {
        switch (kind) {
            case MoveKind::insert_worm: return propose_insert_worm(rng);
            case MoveKind::remove_worm: return propose_remove_worm(rng);
            case MoveKind::shift_end: return propose_shift(rng);
            case MoveKind::insert_kink: return propose_insert_kink(rng);
            case MoveKind::remove_kink: return propose_remove_kink(rng);
        }
        return {};
    }

    void apply(const Proposal& p) {
        apply_proposal(config_, p);
        tracked_.add(p.delta_log_weight);
    }

    /// One Metropolis-Hastings step; returns whether the proposal was accepted.
    bool step(Rng& rng, UpdateStats& stats) {
        const MoveKind kind = choose_kind(rng);
        const Proposal p = propose(kind, rng);
        ++stats[kind].proposed;
        if (!p.feasible) return false;
        const bool accept = p.log_ratio >= 0 || rng.uniform() < std::exp(p.log_ratio);
        if (!accept) return false;
        apply(p);
        ++stats[kind].accepted;
        return true;
    }

    void run_steps(Rng& rng, std::size_t n, UpdateStats& stats) {
        for (std::size_t k = 0; k < n; ++k) step(rng, stats);
    }

    // --- profiles shared by production moves and tests -----------------------

    /// Rate for flipping site s from occupation n_old over a window: (1 - 2 n_old)(V h_s - mu).
    [[nodiscard]] RateProfile flip_profile(Site s, int n_old, double origin, bool forward, double length_u) const {
        const double sgn = 1.0 - 2.0 * n_old;
        std::vector<WeightedSite> ws;
        for (const auto& p : table_->of(s)) ws.push_back({p.site, sgn * model_.V * p.c});
        return RateProfile::build(config_, origin, forward, length_u, -sgn * model_.mu, ws);
    }

    /// Rate for moving a particle from i to j (sigma = +1) or j to i (sigma = -1).
    [[nodiscard]] RateProfile hop_profile(Site i, Site j, double sigma, double origin, bool forward,
                                          double length_u) const {
        std::vector<WeightedSite> ws;
        for (const auto& p : table_->of(j))
            if (p.site != i) ws.push_back({p.site, sigma * model_.V * p.c});
        for (const auto& p : table_->of(i))
            if (p.site != j) ws.push_back({p.site, -sigma * model_.V * p.c});
        return RateProfile::build(config_, origin, forward, length_u, 0.0, ws);
    }

 private:
    [[nodiscard]] double log_z_factor() const {
        return std::log(static_cast<double>(lattice_->site_count())) + std::log(model_.beta);
    }

    [[nodiscard]] const Event& end_event(int which) const {
        const auto& w = config_.worm()[static_cast<std::size_t>(which)];
        return config_.events(w.site)[static_cast<std::size_t>(config_.find_event(w.site, w.time))];
    }

    /// Wraps origin +- d and returns the realized distance (u units), or -1 if it collapses.
    static double place(double origin, double d_u, bool forward, double limit_u, double& out) {
        double u = forward ? origin + d_u : origin - d_u;
        if (u >= 1.0) u -= 1.0;
        if (u < 0.0) u += 1.0;
        if (!(u >= 0.0 && u < 1.0)) return -1;
        double dd = forward ? u - origin : origin - u;
        if (dd <= 0) dd += 1.0;
        if (!(dd > 0.0 && dd < limit_u) || u == origin) return -1;
        out = u;
        return dd;
    }

    Proposal propose_insert_worm(Rng& rng) const {
        Proposal p;
        p.kind = MoveKind::insert_worm;
        if (config_.has_worm()) return p;
        const auto m = lattice_->site_count();
        p.site = static_cast<Site>(rng.index(m));
        p.u0 = rng.uniform();
        if (config_.find_event(p.site, p.u0) >= 0) return p;
        const int n = config_.occupation_u(p.site, p.u0);
        const double D = config_.distance_forward(p.site, p.u0);
        const auto prof = flip_profile(p.site, n, p.u0, true, D);
        const double x = prof.sample(rng);
        const double dd = place(p.u0, x / model_.beta, true, D, p.u1);
        if (dd < 0) return p;
        const double xt = dd * model_.beta;
        p.feasible = true;
        p.delta_log_weight = log_c_ - prof.integral(xt);
        p.log_ratio = log_c_ + log_z_factor() + prof.log_mass() + std::log(options_.probs.remove_worm) - std::log(2.0);
        return p;
    }

    Proposal propose_remove_worm(Rng& rng) const {
        Proposal p;
        p.kind = MoveKind::remove_worm;
        if (!config_.has_worm()) return p;
        p.end = static_cast<int>(rng.index(2));
        const auto a = config_.worm()[static_cast<std::size_t>(p.end)];
        const auto b = config_.worm()[static_cast<std::size_t>(1 - p.end)];
        if (a.site != b.site) return p;
        const double dab = config_.distance_forward(a.site, a.time);
        double fb = b.time - a.time;
        if (fb <= 0) fb += 1.0;
        if (dab != fb) return p;  // b must be the next event after a
        const int n = 1 - end_event(p.end).occ_after;
        const double D = config_.distance_forward(a.site, a.time, {b.time});
        const auto prof = flip_profile(a.site, n, a.time, true, D);
        const double xt = fb * model_.beta;
        p.feasible = true;
        p.delta_log_weight = -(log_c_ - prof.integral(xt));
        p.log_ratio =
            -(log_c_ + log_z_factor() + prof.log_mass() + std::log(options_.probs.remove_worm) - std::log(2.0));
        return p;
    }

    Proposal propose_shift(Rng& rng) const {
        Proposal p;
        p.kind = MoveKind::shift_end;
        if (!config_.has_worm()) return p;
        p.end = static_cast<int>(rng.index(2));
        const auto e = config_.worm()[static_cast<std::size_t>(p.end)];
        const int n_above = end_event(p.end).occ_after;
        const auto& ev = config_.events(e.site);
        const int k = config_.find_event(e.site, e.time);
        const int nk = static_cast<int>(ev.size());
        const double start = ev[static_cast<std::size_t>((k + nk - 1) % nk)].time;
        double db = e.time - start;
        if (db <= 0) db += 1.0;
        const double nxt = ev[static_cast<std::size_t>((k + 1) % nk)].time;
        double window = nxt - start;
        if (window <= 0) window += 1.0;
        // weight of the end at s: exp(-int_start^s (E_below - E_above)); same form as flipping n_above
        const auto prof = flip_profile(e.site, n_above, start, true, window);
        const double y = prof.sample(rng);
        const double dd = place(start, y / model_.beta, true, window, p.u0);
        if (dd < 0 || p.u0 == e.time) return p;
        p.feasible = true;
        p.delta_log_weight = -(prof.integral(dd * model_.beta) - prof.integral(db * model_.beta));
        p.log_ratio = 0.0;
        return p;
    }

    Proposal propose_insert_kink(Rng& rng) const {
        Proposal p;
        p.kind = MoveKind::insert_kink;
        if (!config_.has_worm()) return p;
        p.end = static_cast<int>(rng.index(2));
        p.above = rng.index(2) == 1;
        const auto e = config_.worm()[static_cast<std::size_t>(p.end)];
        const Site i = e.site;
        const auto& inc = lattice_->incident[static_cast<std::size_t>(i)];
        if (inc.empty()) return p;
        const auto slot = inc[rng.index(inc.size())];
        const Site j = slot.other;
        p.site = j;
        p.bond = slot.bond;
        const int n_plus = end_event(p.end).occ_after;
        const int n_minus = 1 - n_plus;
        double D;
        double sigma;
        if (!p.above) {
            if (config_.occupation_below_u(j, e.time) != n_plus) return p;
            D = std::min(config_.distance_backward(i, e.time), config_.distance_backward(j, e.time));
            sigma = n_minus ? 1.0 : -1.0;
        } else {
            if (config_.occupation_u(j, e.time) != n_minus) return p;
            D = std::min(config_.distance_forward(i, e.time), config_.distance_forward(j, e.time));
            sigma = n_plus ? 1.0 : -1.0;
        }
        const auto prof = hop_profile(i, j, sigma, e.time, p.above, D);
        const double x = prof.sample(rng);
        const double dd = place(e.time, x / model_.beta, p.above, D, p.u0);
        if (dd < 0) return p;
        p.feasible = true;
        p.delta_log_weight = log_t_ - prof.integral(dd * model_.beta);
        p.log_ratio = log_t_ + prof.log_mass() + std::log(static_cast<double>(inc.size())) +
                      std::log(options_.probs.remove_kink) - std::log(options_.probs.insert_kink);
        return p;
    }

    Proposal propose_remove_kink(Rng& rng) const {
        Proposal p;
        p.kind = MoveKind::remove_kink;
        if (!config_.has_worm()) return p;
        p.end = static_cast<int>(rng.index(2));
        p.above = rng.index(2) == 1;
        const auto e = config_.worm()[static_cast<std::size_t>(p.end)];
        const Site j = e.site;
        const auto& ev = config_.events(j);
        const int k = config_.find_event(j, e.time);
        const int nk = static_cast<int>(ev.size());
        const auto& adj = ev[static_cast<std::size_t>(p.above ? (k + 1) % nk : (k + nk - 1) % nk)];
        if (adj.is_worm_end()) return p;
        const Site i = adj.partner;
        const double uk = adj.time;
        const double dk = p.above ? config_.distance_forward(j, e.time) : config_.distance_backward(j, e.time);
        const double di = p.above ? config_.distance_forward(i, e.time) : config_.distance_backward(i, e.time);
        if (di != dk) return p;  // the kink must also be the nearest event on i
        const int n_plus = end_event(p.end).occ_after;
        double D;
        double sigma;
        if (!p.above) {
            D = std::min(config_.distance_backward(i, e.time, {uk}), config_.distance_backward(j, e.time, {uk}));
            sigma = n_plus ? -1.0 : 1.0;
        } else {
            D = std::min(config_.distance_forward(i, e.time, {uk}), config_.distance_forward(j, e.time, {uk}));
            sigma = n_plus ? 1.0 : -1.0;
        }
        const auto prof = hop_profile(i, j, sigma, e.time, p.above, D);
        p.u0 = uk;
        p.site = i;
        p.bond = adj.bond;
        p.feasible = true;
        p.delta_log_weight = -(log_t_ - prof.integral(dk * model_.beta));
        p.log_ratio = -(log_t_ + prof.log_mass() + std::log(static_cast<double>(lattice_->coordination(i))) +
                        std::log(options_.probs.remove_kink) - std::log(options_.probs.insert_kink));
        return p;
    }

    std::shared_ptr<const Lattice> lattice_;
    std::shared_ptr<const InteractionTable> table_;
    ModelSpec model_;
    Configuration config_;
    SamplerOptions options_;
    double log_c_ = 0;
    double log_t_ = 0;
    CompensatedSum tracked_;
};

// -----------------------------------------------------------------------------
// Run loop
// -----------------------------------------------------------------------------

struct RunParams {
    ModelSpec model;
    LatticeSpec lattice;
    std::size_t thermalization_sweeps = 1000;
    std::size_t target_samples = 10000;
    std::size_t measure_interval = 1;
    std::uint64_t seed = 1;
    std::uint64_t replica = 0;
    SamplerOptions sampler;
    bool validate = true;               ///< invariant and drift checks at every snapshot
    std::size_t stall_sweeps = 10000;   ///< sweeps without a valid snapshot before StalledSampler

    void check() const {
        if (measure_interval < 1) throw InvalidArgument("run: measure_interval must be >= 1");
        if (!(model.beta > 0)) throw InvalidArgument("run: beta must be > 0");
        if (!(model.t >= 0)) throw InvalidArgument("run: t must be >= 0");
    }
};

struct Snapshot {
    CycleVector cycles;
    FockState fock0;
    double diag_energy = 0;  ///< (1/beta) int H_0 dtau, no chemical potential term
    std::uint32_t kinks = 0;

    [[nodiscard]] double energy(double beta) const { return diag_energy - static_cast<double>(kinks) / beta; }
};

struct RunDiagnostics {
    std::uint64_t invariant_violations = 0;
    std::string first_violation;
    double max_weight_drift = 0;
    std::uint64_t checks = 0;
    std::uint64_t attempts = 0;        ///< measurement boundaries visited
    std::uint64_t closed_attempts = 0;
    std::uint64_t valid_attempts = 0;
};

struct SampleStream {
    std::vector<Snapshot> samples;
    UpdateStats stats;
    RunDiagnostics diagnostics;
    int target_particles = 0;
    double beta = 1;
    std::uint64_t sweeps = 0;
    std::uint64_t steps_per_sweep = 0;
};

/// Deterministic low-energy starting state: greedily occupy the site with the smallest field.
inline FockState greedy_fock(const Lattice& lat, const InteractionTable& table, int n) {
    FockState f(lat.site_count(), 0);
    for (int k = 0; k < n; ++k) {
        Site best = -1;
        double best_h = std::numeric_limits<double>::infinity();
        for (Site s = 0; s < static_cast<Site>(f.size()); ++s) {
            if (f[static_cast<std::size_t>(s)]) continue;
            const double h = interaction_field(f, table, s);
            if (h < best_h - 1e-12) {
                best_h = h;
                best = s;
            }
        }
        f[static_cast<std::size_t>(best)] = 1;
    }
    return f;
}

/// Counters that together with the configuration and RNG define the run state.
struct EngineCounters {
    std::uint64_t thermal_done = 0;
    std::uint64_t kink_sum = 0;
    std::uint64_t kink_obs = 0;
    std::uint64_t steps_per_sweep = 0;  ///< frozen after thermalization
    std::uint64_t sweeps = 0;
    std::uint64_t samples = 0;
    std::uint64_t since_valid = 0;
};

class Simulation {
 public:
    explicit Simulation(const RunParams& params)
        : params_(params),
          lattice_(std::make_shared<const Lattice>(build_lattice(params.lattice))),
          table_(std::make_shared<const InteractionTable>(build_interactions(*lattice_, params.model.kind, params.model.cutoff))),
          target_(params.model.particles(lattice_->site_count())),
          rng_(Rng::split(params.seed, params.replica)),
          sampler_(lattice_, table_, params.model,
                   Configuration(lattice_, params.model.beta, greedy_fock(*lattice_, *table_, target_)),
                   params.sampler) {
        params_.check();
        if (params_.sampler.translations) translations_ = lattice_translations(*lattice_);
    }

    [[nodiscard]] const RunParams& params() const { return params_; }
    [[nodiscard]] const WormSampler& sampler() const { return sampler_; }
    WormSampler& sampler() { return sampler_; }
    [[nodiscard]] int target_particles() const { return target_; }
    [[nodiscard]] const EngineCounters& counters() const { return counters_; }
    [[nodiscard]] const UpdateStats& stats() const { return stats_; }
    [[nodiscard]] const RunDiagnostics& diagnostics() const { return diag_; }
    [[nodiscard]] const Rng& rng() const { return rng_; }
    [[nodiscard]] std::shared_ptr<const Lattice> lattice() const { return lattice_; }
    [[nodiscard]] std::shared_ptr<const InteractionTable> table() const { return table_; }
    [[nodiscard]] bool thermalized() const { return counters_.thermal_done >= params_.thermalization_sweeps; }

    /// Restores state captured by a checkpoint.
    void restore(Configuration config, const Rng& rng, const EngineCounters& counters, const UpdateStats& stats,
                 const RunDiagnostics& diag, std::optional<std::pair<double, double>> tracked = std::nullopt) {
        sampler_.set_config(std::move(config));
        if (tracked) sampler_.set_tracked_parts(*tracked);
        rng_ = rng;
        counters_ = counters;
        stats_ = stats;
        diag_ = diag;
    }

    void thermalize() {
        const std::size_t m = lattice_->site_count();
        while (counters_.thermal_done < params_.thermalization_sweeps) {
            sweep(m + sampler_.config().kink_count());
            ++counters_.thermal_done;
            if (2 * counters_.thermal_done > params_.thermalization_sweeps) {
                counters_.kink_sum += sampler_.config().kink_count();
                ++counters_.kink_obs;
            }
        }
        if (counters_.steps_per_sweep == 0) {
            const std::uint64_t avg =
                counters_.kink_obs ? (counters_.kink_sum + counters_.kink_obs / 2) / counters_.kink_obs : 0;
            counters_.steps_per_sweep = m + avg;
        }
    }

    /// Advances to the next valid snapshot. Throws StalledSampler.
    Snapshot next_sample() {
        thermalize();
        for (;;) {
            for (std::size_t s = 0; s < params_.measure_interval; ++s) {
                sweep(counters_.steps_per_sweep);
                ++counters_.sweeps;
                ++counters_.since_valid;
            }
            ++diag_.attempts;
            const auto& c = sampler_.config();
            if (!c.has_worm()) {
                ++diag_.closed_attempts;
                if (c.particle_number() == target_) {
                    ++diag_.valid_attempts;
                    counters_.since_valid = 0;
                    ++counters_.samples;
                    return snapshot();
                }
            }
            if (counters_.since_valid >= params_.stall_sweeps)
                throw StalledSampler("no valid fixed-N closed snapshot in " + std::to_string(params_.stall_sweeps) +
                                     " sweeps (check mu or worm fugacity)");
        }
    }

    /// Collects the remaining samples up to params.target_samples.
    SampleStream run() {
        SampleStream out;
        out.target_particles = target_;
        out.beta = params_.model.beta;
        if (params_.target_samples == 0 && params_.thermalization_sweeps == 0) return out;
        out.samples.reserve(params_.target_samples);
        while (counters_.samples < params_.target_samples) out.samples.push_back(next_sample());
        thermalize();
        out.stats = stats_;
        out.diagnostics = diag_;
        out.sweeps = counters_.sweeps;
        out.steps_per_sweep = counters_.steps_per_sweep;
        return out;
    }

 private:
    void sweep(std::size_t steps) {
        sampler_.run_steps(rng_, steps, stats_);
        if (translations_.size() > 1) sampler_.translate(translations_[rng_.index(translations_.size())]);
    }

    Snapshot snapshot() {
        const auto& c = sampler_.config();
        if (params_.validate) {
            ++diag_.checks;
            const auto rep = c.check_invariants();
            const auto q = permutation_cycles(c);
            if (!rep.ok() || q.particles() != target_) {
                ++diag_.invariant_violations;
                if (diag_.first_violation.empty())
                    diag_.first_violation = rep.ok() ? "cycle lengths do not sum to N" : rep.problems.front();
            }
            const double exact = sampler_.recompute_log_weight();
            diag_.max_weight_drift = std::max(diag_.max_weight_drift, std::abs(exact - sampler_.log_weight()));
            sampler_.resync();
        }
        Snapshot s;
        s.cycles = permutation_cycles(c);
        s.fock0 = c.fock_state_u(0.0);
        s.kinks = static_cast<std::uint32_t>(c.kink_count());
        s.diag_energy = integrate_diagonal(c, *table_, params_.model.V, 0.0).total / params_.model.beta;
        return s;
    }

    RunParams params_;
    std::shared_ptr<const Lattice> lattice_;
    std::shared_ptr<const InteractionTable> table_;
    int target_ = 0;
    Rng rng_;
    WormSampler sampler_;
    EngineCounters counters_;
    UpdateStats stats_;
    RunDiagnostics diag_;
    std::vector<Translation> translations_;
};

inline SampleStream run(const RunParams& params) {
    Simulation sim(params);
    return sim.run();
}

/// E = <E_diag> - <n_kinks>/beta, jackknife over bins. Throws TooFewSamples below 100 snapshots.
inline Estimate estimate_energy(const SampleStream& stream) {
    if (stream.samples.size() < 100)
        throw TooFewSamples("estimate_energy: need at least 100 snapshots, got " + std::to_string(stream.samples.size()));
    std::vector<std::vector<double>> cols(2);
    for (const auto& s : stream.samples) {
        cols[0].push_back(s.energy(stream.beta));
        cols[1].push_back(s.diag_energy);
    }
    return jackknife(cols, [](std::span<const double> m) { return m[0]; });
}

// -----------------------------------------------------------------------------
// Chemical potential tuning
// -----------------------------------------------------------------------------

struct TunePoint {
    double mu = 0;
    double mean_n = 0;
    double fraction_at_target = 0;
};

struct TuneResult {
    double mu = 0;
    double fraction_at_target = 0;
    bool non_monotone = false;
    std::vector<TunePoint> history;
};

/// Pilot run at chemical potential `mu`: particle-number statistics of closed configurations.
inline TunePoint pilot_point(const RunParams& base, double mu, int target_n, std::size_t sweeps) {
    RunParams p = base;
    p.model.mu = mu;
    p.thermalization_sweeps = sweeps / 2;
    Simulation sim(p);
    sim.thermalize();
    auto& sampler = sim.sampler();
    Rng rng = Rng::split(base.seed ^ 0x9e3779b97f4a7c15ULL, base.replica);
    UpdateStats st;
    const auto steps = sim.counters().steps_per_sweep;
    double sum = 0;
    std::size_t closed = 0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < sweeps; ++k) {
        sampler.run_steps(rng, steps, st);
        if (sampler.config().has_worm()) continue;
        const int n = sampler.config().particle_number();
        sum += n;
        ++closed;
        if (n == target_n) ++hits;
    }
    TunePoint tp;
    tp.mu = mu;
    tp.mean_n = closed ? sum / static_cast<double>(closed) : std::numeric_limits<double>::quiet_NaN();
    tp.fraction_at_target = closed ? static_cast<double>(hits) / static_cast<double>(closed) : 0.0;
    return tp;
}

/**
 * Bisection on <N>(mu) using short pilot runs. Returns the visited mu whose
 * pilot put the largest fraction of closed configurations at target_n.
 */
inline TuneResult tune_mu(const RunParams& params, int target_n, std::size_t pilot_sweeps = 400,
                          int iterations = 12) {
    const Lattice lat = build_lattice(params.lattice);
    const InteractionTable table = build_interactions(lat, params.model.kind, params.model.cutoff);
    const double span = static_cast<double>(lat.max_coordination()) * params.model.t + 1.0;
    const double vmax = params.model.V * table.max_field();
    double lo = std::min(0.0, vmax) - span;
    double hi = std::max(0.0, vmax) + span;
    TuneResult res;
    res.fraction_at_target = -1;
    for (int it = 0; it < iterations; ++it) {
        const double mu = 0.5 * (lo + hi);
        const TunePoint tp = pilot_point(params, mu, target_n, pilot_sweeps);
        res.history.push_back(tp);
        if (tp.fraction_at_target > res.fraction_at_target) {
            res.fraction_at_target = tp.fraction_at_target;
            res.mu = mu;
        }
        if (std::isnan(tp.mean_n)) break;
        if (tp.mean_n < target_n)
            lo = mu;
        else
            hi = mu;
    }
    for (const auto& a : res.history)
        for (const auto& b : res.history)
            if (a.mu < b.mu && a.mean_n > b.mean_n + 0.5) res.non_monotone = true;
    return res;
}

/// Particle-hole symmetric chemical potential V * max_field / 2 (exact for uniform field sums).
inline double symmetric_mu(const ModelSpec& model, const InteractionTable& table) {
    return 0.5 * model.V * table.max_field();
}

}  // namespace braidmc
