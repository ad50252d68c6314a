// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file analysis.hpp
 * @brief Replica streams to a merged topological spectrum and energy.
 */

#pragma once

#include <braidmc/engine.hpp>
#include <braidmc/statistics.hpp>
#include <braidmc/topology.hpp>

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace braidmc {

struct MergedRun {
    Spectrum spectrum;
    Estimate f_pc;
    Estimate energy;
    std::size_t replicas = 0;
};

/// Fingerprint that replicas must share to be merged.
inline std::string run_fingerprint(const RunParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << p.lattice.canonical() << "|" << to_string(p.model.kind) << "|t=" << p.model.t << "|V=" << p.model.V
       << "|mu=" << p.model.mu << "|n=" << p.model.filling.str() << "|beta=" << p.model.beta << "|rc=" << p.model.cutoff;
    return os.str();
}

/**
 * Merges per-replica snapshot streams in replica order. Histograms add; the
 * f_PC and energy series are combined with n_eff weights. Throws
 * MetadataMismatch if replicas disagree and EmptyStream without samples.
 */
inline MergedRun merge_streams(const std::vector<std::pair<RunParams, std::vector<Snapshot>>>& replicas) {
    if (replicas.empty()) throw EmptyStream("merge_streams: no replicas");
    const auto& p0 = replicas.front().first;
    const int n = p0.model.particles(static_cast<std::size_t>(p0.lattice.site_count()));
    std::vector<PartialResult> cycles;
    std::vector<PartialResult> energies;
    for (const auto& [p, samples] : replicas) {
        PartialResult c;
        PartialResult e;
        c.metadata = e.metadata = run_fingerprint(p);
        for (const auto& s : samples) {
            ++c.counts[s.cycles.str()];
            c.series.push_back(f_pc(s.cycles, n));
            e.series.push_back(s.energy(p.model.beta));
        }
        cycles.push_back(std::move(c));
        energies.push_back(std::move(e));
    }
    const auto mc = merge_replicas(cycles);
    const auto me = merge_replicas(energies);
    std::map<CycleVector, std::uint64_t> counts;
    for (const auto& [k, v] : mc.counts) counts[parse_cycle_vector(k)] += v;
    MergedRun out;
    out.spectrum = spectrum_from_counts(counts, n, mc.estimate.n_eff);
    out.spectrum.fpc_series = mc.estimate;
    out.f_pc = mc.estimate;
    out.energy = me.estimate;
    out.replicas = mc.replicas;
    return out;
}

}  // namespace braidmc
