// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file statistics.hpp
 * @brief Binning, jackknife and replica merging for correlated Monte Carlo series.
 */

#pragma once

#include <braidmc/common.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace braidmc {

struct Estimate {
    double mean = 0;
    double stderr_ = 0;
    double tau_int = 0.5;
    double n_eff = 0;
    std::size_t bin_size = 1;
    std::size_t length = 0;
};

namespace detail {

/// Mean and standard error of the mean over `nbins` bins of `b` consecutive values.
inline std::pair<double, double> bin_stats(std::span<const double> x, std::size_t b) {
    const std::size_t nb = x.size() / b;
    std::vector<double> m(nb, 0.0);
    for (std::size_t k = 0; k < nb; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < b; ++i) s += x[k * b + i];
        m[k] = s / static_cast<double>(b);
    }
    double mean = 0;
    for (double v : m) mean += v;
    mean /= static_cast<double>(nb);
    double ss = 0;
    for (double v : m) ss += (v - mean) * (v - mean);
    const double var = nb > 1 ? ss / static_cast<double>(nb - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(nb))};
}

inline double plain_mean(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

}  // namespace detail

constexpr std::size_t kMinBins = 16;

/**
 * Bin-doubling error analysis. The bin size doubles until the error changes by
 * less than 5% or fewer than 16 bins would remain; the last error is reported.
 * Throws TooFewSamples for fewer than 16 values.
 */
inline Estimate binned_error(std::span<const double> x) {
    if (x.size() < kMinBins) throw TooFewSamples("binned_error: need at least 16 values, got " + std::to_string(x.size()));
    Estimate est;
    est.length = x.size();
    est.mean = detail::plain_mean(x);
    const double naive = detail::bin_stats(x, 1).second;
    std::size_t b = 1;
    double err = naive;
    while (x.size() / (2 * b) >= kMinBins) {
        const double next = detail::bin_stats(x, 2 * b).second;
        b *= 2;
        const bool flat = err > 0 ? std::abs(next - err) / err < 0.05 : next == 0.0;
        err = next;
        if (flat) break;
    }
    est.stderr_ = err;
    est.bin_size = b;
    if (naive > 0) {
        est.tau_int = 0.5 * (err / naive) * (err / naive);
    } else {
        est.tau_int = 0.5;
    }
    est.n_eff = std::min(static_cast<double>(x.size()), static_cast<double>(x.size()) / (2.0 * std::max(est.tau_int, 1e-300)));
    return est;
}

/// Standard error at bin sizes 1, 2, 4, ... while at least 16 bins remain.
inline std::vector<double> binning_curve(std::span<const double> x) {
    std::vector<double> out;
    for (std::size_t b = 1; x.size() / b >= kMinBins; b *= 2) out.push_back(detail::bin_stats(x, b).second);
    return out;
}

/**
 * Leave-one-bin-out jackknife of `estimator` applied to the column means.
 *
 * The bin size defaults to the binned_error plateau of the first column, so the
 * identity estimator on one column reproduces binned_error's stderr.
 */
inline Estimate jackknife(const std::vector<std::vector<double>>& columns,
                          const std::function<double(std::span<const double>)>& estimator, std::size_t bin_size = 0) {
    if (columns.empty()) throw InvalidArgument("jackknife: no columns");
    const std::size_t n = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) throw InvalidArgument("jackknife: columns differ in length");
    const Estimate base = binned_error(columns.front());
    const std::size_t b = bin_size ? bin_size : base.bin_size;
    const std::size_t nb = n / b;
    if (nb < kMinBins) throw TooFewSamples("jackknife: fewer than 16 bins");
    const std::size_t used = nb * b;
    const std::size_t k = columns.size();

    std::vector<double> totals(k, 0.0);
    std::vector<std::vector<double>> bin_sums(k, std::vector<double>(nb, 0.0));
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < used; ++i) bin_sums[c][i / b] += columns[c][i];
    for (std::size_t c = 0; c < k; ++c)
        for (double s : bin_sums[c]) totals[c] += s;

    std::vector<double> means(k);
    for (std::size_t c = 0; c < k; ++c) means[c] = detail::plain_mean(columns[c]);
    Estimate est;
    est.length = n;
    est.mean = estimator(means);
    std::vector<double> theta(nb);
    std::vector<double> loo(k);
    for (std::size_t j = 0; j < nb; ++j) {
        for (std::size_t c = 0; c < k; ++c) loo[c] = (totals[c] - bin_sums[c][j]) / static_cast<double>(used - b);
        theta[j] = estimator(loo);
    }
    const double tbar = detail::plain_mean(theta);
    double ss = 0;
    for (double v : theta) ss += (v - tbar) * (v - tbar);
    est.stderr_ = std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
    est.bin_size = b;
    est.tau_int = base.tau_int;
    est.n_eff = base.n_eff;
    return est;
}

inline Estimate jackknife(std::span<const double> series,
                          const std::function<double(std::span<const double>)>& estimator) {
    return jackknife(std::vector<std::vector<double>>{std::vector<double>(series.begin(), series.end())}, estimator);
}

/// One replica's contribution: a metadata fingerprint, histogram counts and a scalar series.
struct PartialResult {
    std::string metadata;
    std::map<std::string, std::uint64_t> counts;
    std::vector<double> series;
};

struct MergedResult {
    std::string metadata;
    std::map<std::string, std::uint64_t> counts;
    Estimate estimate;
    std::size_t replicas = 0;
};

/**
 * Adds histogram counts and combines per-replica series means weighted by n_eff.
 * Empty partials contribute nothing. Throws MetadataMismatch when fingerprints differ.
 */
inline MergedResult merge_replicas(const std::vector<PartialResult>& parts) {
    MergedResult out;
    bool have_meta = false;
    double wsum = 0;
    double wmean = 0;
    std::vector<std::pair<double, Estimate>> pieces;
    for (const auto& p : parts) {
        const bool empty = p.counts.empty() && p.series.empty();
        if (empty) continue;
        if (!have_meta) {
            out.metadata = p.metadata;
            have_meta = true;
        } else if (p.metadata != out.metadata) {
            throw MetadataMismatch("merge_replicas: '" + p.metadata + "' vs '" + out.metadata + "'");
        }
        ++out.replicas;
        for (const auto& [k, v] : p.counts) out.counts[k] += v;
        if (p.series.empty()) continue;
        const Estimate e = binned_error(p.series);
        pieces.emplace_back(e.n_eff, e);
        wsum += e.n_eff;
        wmean += e.n_eff * e.mean;
    }
    if (wsum > 0) {
        out.estimate.mean = wmean / wsum;
        double var = 0;
        std::size_t len = 0;
        for (const auto& [w, e] : pieces) {
            var += (w / wsum) * (w / wsum) * e.stderr_ * e.stderr_;
            len += e.length;
        }
        out.estimate.stderr_ = std::sqrt(var);
        out.estimate.n_eff = wsum;
        out.estimate.length = len;
        out.estimate.tau_int = static_cast<double>(len) / (2.0 * wsum);
    }
    return out;
}

}  // namespace braidmc
