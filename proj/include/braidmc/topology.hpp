// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file topology.hpp
 * @brief Derived cycle invariants and the topological spectrum histogram.
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/statistics.hpp>
#include <braidmc/worldlines.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace braidmc {

/// Fraction of particles in cycles of each length; p_prime drops the 1-beta cycles.
struct PFraction {
    std::vector<Rational> p;        ///< index l-1 for cycle length l = 1..N
    std::vector<Rational> p_prime;  ///< index l-2 for l = 2..N
};

namespace detail {

inline void check_cycles(const CycleVector& q, int n) {
    if (n <= 0) throw InvalidArgument("cycle vector: N must be positive");
    for (int c : q.counts)
        if (c < 0) throw InvalidArgument("cycle vector " + q.str() + ": negative count");
    if (q.particles() != n)
        throw InvalidArgument("cycle vector " + q.str() + ": sum l*n_l = " + std::to_string(q.particles()) +
                              " != N = " + std::to_string(n));
}

}  // namespace detail

inline PFraction p_of(const CycleVector& q, int n) {
    detail::check_cycles(q, n);
    PFraction f;
    f.p.assign(static_cast<std::size_t>(n), Rational(0));
    for (std::size_t k = 0; k < q.counts.size(); ++k)
        if (q.counts[k]) f.p[k] = Rational(static_cast<std::int64_t>(q.counts[k]) * static_cast<std::int64_t>(k + 1), n);
    f.p_prime.assign(f.p.begin() + 1, f.p.end());
    return f;
}

/// p_prime . (2, 3, ..., N)
inline double avg_cycle_length(const CycleVector& q, int n) {
    detail::check_cycles(q, n);
    std::int64_t s = 0;
    for (std::size_t k = 1; k < q.counts.size(); ++k) {
        const auto l = static_cast<std::int64_t>(k + 1);
        s += static_cast<std::int64_t>(q.counts[k]) * l * l;
    }
    return static_cast<double>(s) / static_cast<double>(n);
}

inline double f_pc(const CycleVector& q, int n) {
    detail::check_cycles(q, n);
    const int n1 = q.counts.empty() ? 0 : q.counts[0];
    return 1.0 - static_cast<double>(n1) / static_cast<double>(n);
}

/// Longest cycle present, in units of beta.
inline int longest_cycle(const CycleVector& q) {
    for (std::size_t k = q.counts.size(); k-- > 0;)
        if (q.counts[k]) return static_cast<int>(k + 1);
    return 0;
}

/// Half-width of the Wilson score interval at one standard deviation.
inline double wilson_halfwidth(double p, double n) {
    if (!(n > 0)) return 0.5;
    const double z2 = 1.0;
    const double denom = 1.0 + z2 / n;
    return std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
}

struct SpectrumEntry {
    CycleVector q;
    double avg_lambda = 0;
    double probability = 0;
    double error = 0;
    std::uint64_t count = 0;
};

struct Spectrum {
    int particles = 0;
    std::uint64_t total_samples = 0;
    double n_eff = 0;       ///< effective sample size used for the errors
    Estimate fpc_series;    ///< stream statistics of the f_PC series
    std::vector<SpectrumEntry> entries;

    /// Sum over entries of p(q) f_pc(q).
    [[nodiscard]] double mean_f_pc() const {
        double s = 0;
        for (const auto& e : entries) s += e.probability * f_pc(e.q, particles);
        return s;
    }
    [[nodiscard]] const SpectrumEntry* find(const CycleVector& q) const {
        for (const auto& e : entries)
            if (e.q == q) return &e;
        return nullptr;
    }
    [[nodiscard]] const SpectrumEntry& top() const {
        if (entries.empty()) throw EmptyStream("spectrum has no entries");
        return *std::max_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.count < b.count || (a.count == b.count && b.q < a.q);
        });
    }
};

/**
 * Builds a spectrum from merged counts. Errors are Wilson half-widths with the
 * given effective sample size; n_eff <= 0 means uncorrelated samples.
 */
inline Spectrum spectrum_from_counts(const std::map<CycleVector, std::uint64_t>& counts, int n, double n_eff) {
    if (counts.empty()) throw EmptyStream("spectrum: no samples");
    Spectrum sp;
    sp.particles = n;
    for (const auto& [q, c] : counts) sp.total_samples += c;
    sp.n_eff = n_eff > 0 ? std::min(n_eff, static_cast<double>(sp.total_samples)) : static_cast<double>(sp.total_samples);
    for (const auto& [q, c] : counts) {
        SpectrumEntry e;
        e.q = q;
        e.avg_lambda = avg_cycle_length(q, n);
        e.count = c;
        e.probability = static_cast<double>(c) / static_cast<double>(sp.total_samples);
        e.error = wilson_halfwidth(e.probability, sp.n_eff);
        sp.entries.push_back(std::move(e));
    }
    std::sort(sp.entries.begin(), sp.entries.end(), [](const auto& a, const auto& b) {
        return a.avg_lambda < b.avg_lambda || (a.avg_lambda == b.avg_lambda && a.q < b.q);
    });
    return sp;
}

/// Histogram of a snapshot stream; n_eff comes from the f_PC series autocorrelation.
inline Spectrum accumulate(std::span<const CycleVector> stream, int n) {
    if (stream.empty()) throw EmptyStream("accumulate: empty stream");
    std::map<CycleVector, std::uint64_t> counts;
    std::vector<double> f;
    f.reserve(stream.size());
    for (const auto& q : stream) {
        f.push_back(f_pc(q, n));
        ++counts[q];
    }
    Estimate est;
    if (f.size() >= kMinBins) {
        est = binned_error(f);
    } else {
        est.length = f.size();
        est.mean = detail::plain_mean(f);
        est.n_eff = static_cast<double>(f.size());
    }
    Spectrum sp = spectrum_from_counts(counts, n, est.n_eff);
    sp.fpc_series = est;
    return sp;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Full spectrum as CSV, header q,avg_lambda,prob,err,count.
inline std::string spectrum_csv(const Spectrum& sp) {
    std::string out = "q,avg_lambda,prob,err,count\n";
    for (const auto& e : sp.entries)
        out += e.q.str() + "," + format_number(e.avg_lambda) + "," + format_number(e.probability) + "," +
               format_number(e.error) + "," + std::to_string(e.count) + "\n";
    return out;
}

/**
 * Entries with probability above `threshold` as CSV rows (q, p percentages,
 * probability, error). The percentages are dash-separated like q.
 */
inline std::string spectrum_report(const Spectrum& sp, double threshold = 0.01) {
    std::string out = "q,p_percent,avg_lambda,prob,err\n";
    for (const auto& e : sp.entries) {
        if (!(e.probability > threshold) && !(threshold == 0.0)) continue;
        const auto pf = p_of(e.q, sp.particles);
        std::string pct;
        for (std::size_t k = 0; k < pf.p.size(); ++k) {
            if (k) pct += '-';
            pct += format_number(100.0 * pf.p[k].value());
        }
        out += e.q.str() + "," + pct + "," + format_number(e.avg_lambda) + "," + format_number(e.probability) + "," +
               format_number(e.error) + "\n";
    }
    return out;
}

inline nlohmann::json to_json(const Spectrum& sp) {
    nlohmann::json j;
    j["particles"] = sp.particles;
    j["total_samples"] = sp.total_samples;
    j["n_eff"] = sp.n_eff;
    j["f_pc"] = {{"mean", sp.fpc_series.mean}, {"err", sp.fpc_series.stderr_}, {"tau_int", sp.fpc_series.tau_int}};
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : sp.entries)
        arr.push_back({{"q", e.q.str()},
                       {"counts", e.q.counts},
                       {"avg_lambda", e.avg_lambda},
                       {"prob", e.probability},
                       {"err", e.error},
                       {"count", e.count}});
    return j;
}

inline CycleVector parse_cycle_vector(const std::string& text) {
    CycleVector q;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto dash = text.find('-', pos);
        const auto piece = text.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
        if (piece.empty() || piece.find_first_not_of("0123456789") != std::string::npos)
            throw InvalidArgument("bad cycle vector '" + text + "'");
        q.counts.push_back(std::stoi(piece));
        if (dash == std::string::npos) break;
        pos = dash + 1;
    }
    return q;
}

}  // namespace braidmc
