// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file profile.hpp
 * @brief Piecewise-constant rate along an imaginary-time window, with exact
 *        integrals and inverse-CDF sampling of exp(-int_0^x r).
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/worldlines.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace braidmc {

struct WeightedSite {
    Site site = 0;
    double w = 0;
};

namespace detail {

/// log int_0^l exp(-r s) ds
inline double log_piece_mass(double r, double l) {
    const double rl = r * l;
    if (std::abs(rl) < 1e-12) return std::log(l) - 0.5 * rl;
    if (r > 0) return std::log(-std::expm1(-rl)) - std::log(r);
    const double a = -r;
    return a * l + std::log(-std::expm1(-a * l)) - std::log(a);
}

/// Inverse CDF of the density prop. to exp(-r s) on [0, l).
inline double sample_piece(double r, double l, double u) {
    const double rl = r * l;
    if (std::abs(rl) < 1e-12) return u * l;
    if (r > 0) return -std::log1p(u * std::expm1(-rl)) / r;
    const double a = -r;
    return l + std::log(u + (1.0 - u) * std::exp(-a * l)) / a;
}

inline double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace detail

/**
 * r(s) = c0 + sum_p w_p n_p(s) for s in [0, length) (tau units), where s runs
 * forward or backward in time from `origin` and n_p are partner occupations.
 */
class RateProfile {
 public:
    struct Piece {
        double start;
        double length;
        double rate;
        double integral;  ///< A(start)
    };

    static RateProfile build(const Configuration& config, double origin, bool forward, double length_u, double c0,
                             const std::vector<WeightedSite>& partners) {
        const double beta = config.beta();
        RateProfile prof;
        prof.length_ = length_u * beta;
        double rate = c0;
        std::vector<std::pair<double, double>> steps;
        for (const auto& p : partners) {
            if (p.w == 0) continue;
            const int n0 = forward ? config.occupation_u(p.site, origin) : config.occupation_below_u(p.site, origin);
            rate += p.w * n0;
            for (const auto& e : config.events(p.site)) {
                double d = forward ? e.time - origin : origin - e.time;
                if (d <= 0) d += 1.0;
                if (d >= length_u) continue;
                const double sgn = forward ? (2.0 * e.occ_after - 1.0) : (1.0 - 2.0 * e.occ_after);
                steps.emplace_back(d * beta, p.w * sgn);
            }
        }
        std::sort(steps.begin(), steps.end());
        double s = 0;
        double a = 0;
        for (const auto& [d, dr] : steps) {
            if (d > s) {
                prof.pieces_.push_back({s, d - s, rate, a});
                a += rate * (d - s);
                s = d;
            }
            rate += dr;
        }
        if (prof.length_ > s) prof.pieces_.push_back({s, prof.length_ - s, rate, a});
        std::vector<double> lm;
        lm.reserve(prof.pieces_.size());
        for (const auto& pc : prof.pieces_) lm.push_back(-pc.integral + detail::log_piece_mass(pc.rate, pc.length));
        prof.log_mass_ = detail::log_sum_exp(lm);
        prof.piece_log_mass_ = std::move(lm);
        return prof;
    }

    [[nodiscard]] double length() const { return length_; }

    /// log int_0^length exp(-A(s)) ds
    [[nodiscard]] double log_mass() const { return log_mass_; }

    /// A(x) = int_0^x r(s) ds
    [[nodiscard]] double integral(double x) const {
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            const auto& pc = pieces_[k];
            if (x <= pc.start + pc.length || k + 1 == pieces_.size()) return pc.integral + pc.rate * (x - pc.start);
        }
        return 0.0;
    }

    /// Draws x with density exp(-A(x)) / exp(log_mass).
    double sample(Rng& rng) const {
        const double u = rng.uniform();
        double acc = 0;
        std::size_t k = 0;
        for (; k + 1 < pieces_.size(); ++k) {
            acc += std::exp(piece_log_mass_[k] - log_mass_);
            if (u < acc) break;
        }
        const auto& pc = pieces_[k];
        return pc.start + detail::sample_piece(pc.rate, pc.length, rng.uniform());
    }

    [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }

 private:
    std::vector<Piece> pieces_;
    std::vector<double> piece_log_mass_;
    double length_ = 0;
    double log_mass_ = 0;
};

}  // namespace braidmc
