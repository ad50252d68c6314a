// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file compare.hpp
 * @brief Sampled streams against the exact small-system references: thermal
 *        energy, the diagonal distribution at tau = 0, and cycle statistics.
 */

#pragma once

#include <braidmc/engine.hpp>
#include <braidmc/oracle.hpp>
#include <braidmc/statistics.hpp>
#include <braidmc/topology.hpp>

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace braidmc {

struct ProbabilityCheck {
    std::string label;
    double exact = 0;
    double sampled = 0;
    double sigma = 0;      ///< statistical error of `sampled`
    double tolerance = 0;  ///< systematic allowance of the reference
    double z = 0;
};

struct OracleReport {
    std::size_t samples = 0;
    std::size_t basis = 0;
    double energy_exact = 0;
    Estimate energy;
    double energy_z = 0;
    std::vector<ProbabilityCheck> states;  ///< exact p > threshold
    double chi2 = 0;
    std::size_t dof = 0;
    std::optional<std::vector<ProbabilityCheck>> cycles;
    double trotter_residual = 0;
    std::string cycles_note;

    [[nodiscard]] double max_abs_z() const {
        double m = std::abs(energy_z);
        for (const auto& s : states) m = std::max(m, std::abs(s.z));
        if (cycles)
            for (const auto& c : *cycles) m = std::max(m, std::abs(c.z));
        return m;
    }
};

namespace detail {

/// Indicator mean with a binned error, floored by the multinomial error at the exact value.
inline ProbabilityCheck indicator_check(std::string label, const std::vector<double>& hits, double exact,
                                        double tolerance = 0) {
    ProbabilityCheck c;
    c.label = std::move(label);
    c.exact = exact;
    const auto e = binned_error(hits);
    c.sampled = e.mean;
    const double n = static_cast<double>(hits.size());
    c.sigma = std::max(e.stderr_, std::sqrt(std::max(exact * (1 - exact), 1.0 / n) / n));
    c.tolerance = tolerance;
    const double gap = std::abs(c.sampled - c.exact);
    c.z = (c.sampled >= c.exact ? 1.0 : -1.0) * std::max(0.0, gap - tolerance) / c.sigma;
    return c;
}

inline std::string fock_label(const FockState& f) {
    std::string s;
    for (auto v : f) s += static_cast<char>('0' + v);
    return s;
}

/// Steps near 0.2, 0.1, 0.05, 0.025 that divide beta.
inline std::vector<double> default_dtaus(double beta) {
    std::vector<double> d;
    for (double target : {0.2, 0.1, 0.05, 0.025}) d.push_back(beta / std::max(1.0, std::round(beta / target)));
    return d;
}

}  // namespace detail

/**
 * Compares `samples` (fixed-N closed snapshots of `params`) with ED in full mode
 * and, when the labeled dimension allows, with the Trotter cycle oracle.
 * Throws BasisTooLarge when the dense solve is out of reach.
 */
inline OracleReport compare_to_oracles(const RunParams& params, std::span<const Snapshot> samples,
                                       double threshold = 0.01) {
    if (samples.size() < 100) throw TooFewSamples("compare_to_oracles: need at least 100 snapshots");
    const auto lat = build_lattice(params.lattice);
    const auto table = build_interactions(lat, params.model.kind, params.model.cutoff);
    const int n = params.model.particles(lat.site_count());
    const double beta = params.model.beta;
    const auto sd = ed_solve(lat, table, params.model, n, SolveMode::full);

    OracleReport r;
    r.samples = samples.size();
    r.basis = sd.basis.size();
    r.energy_exact = thermal_energy(sd, beta);
    std::vector<double> e;
    e.reserve(samples.size());
    for (const auto& s : samples) e.push_back(s.energy(beta));
    r.energy = binned_error(e);
    r.energy_z = r.energy.stderr_ > 0 ? (r.energy.mean - r.energy_exact) / r.energy.stderr_ : 0.0;

    const auto exact = thermal_diag(sd, beta);
    std::vector<double> hits(samples.size());
    for (std::size_t a = 0; a < sd.basis.size(); ++a) {
        const double pa = exact[static_cast<Eigen::Index>(a)];
        if (pa <= threshold) continue;
        for (std::size_t k = 0; k < samples.size(); ++k) hits[k] = samples[k].fock0 == sd.basis[a] ? 1.0 : 0.0;
        r.states.push_back(detail::indicator_check(detail::fock_label(sd.basis[a]), hits, pa));
        r.chi2 += r.states.back().z * r.states.back().z;
    }
    r.dof = r.states.size();

    try {
        const auto dt = detail::default_dtaus(beta);
        const auto tc = trotter_cycles(lat, table, params.model, n, beta, dt);
        r.trotter_residual = tc.max_residual;
        std::map<CycleVector, bool> keys;
        for (const auto& [q, p] : tc.extrapolated)
            if (p > threshold) keys[q] = true;
        std::map<CycleVector, std::size_t> seen;
        for (const auto& s : samples) ++seen[s.cycles];
        for (const auto& [q, c] : seen)
            if (static_cast<double>(c) > threshold * static_cast<double>(samples.size())) keys[q] = true;
        std::vector<ProbabilityCheck> out;
        for (const auto& [q, unused] : keys) {
            for (std::size_t k = 0; k < samples.size(); ++k) hits[k] = samples[k].cycles == q ? 1.0 : 0.0;
            const auto res = tc.residual.count(q) ? tc.residual.at(q) : 0.0;
            out.push_back(detail::indicator_check(q.str(), hits, std::max(0.0, tc.at(q)), std::max(res, 1e-3)));
        }
        r.cycles = std::move(out);
    } catch (const DimensionTooLarge& ex) {
        r.cycles_note = std::string("cycle oracle skipped: ") + ex.what();
    } catch (const ExtrapolationUnstable& ex) {
        r.cycles_note = std::string("cycle oracle skipped: ") + ex.what();
    }
    return r;
}

inline nlohmann::json to_json(const ProbabilityCheck& c) {
    return {{"label", c.label}, {"exact", c.exact}, {"sampled", c.sampled}, {"sigma", c.sigma},
            {"tolerance", c.tolerance}, {"z", c.z}};
}

inline nlohmann::json to_json(const OracleReport& r) {
    nlohmann::json j;
    j["samples"] = r.samples;
    j["basis_size"] = r.basis;
    j["energy"] = {{"exact", r.energy_exact},
                   {"sampled", r.energy.mean},
                   {"error", r.energy.stderr_},
                   {"tau_int", r.energy.tau_int},
                   {"z", r.energy_z}};
    auto& st = j["diagonal"]["states"] = nlohmann::json::array();
    for (const auto& s : r.states) st.push_back(to_json(s));
    j["diagonal"]["chi2"] = r.chi2;
    j["diagonal"]["dof"] = r.dof;
    if (r.cycles) {
        auto& cy = j["cycles"]["entries"] = nlohmann::json::array();
        for (const auto& c : *r.cycles) cy.push_back(to_json(c));
        j["cycles"]["trotter_residual"] = r.trotter_residual;
    } else {
        j["cycles"] = {{"skipped", r.cycles_note}};
    }
    j["max_abs_z"] = r.max_abs_z();
    return j;
}

}  // namespace braidmc
