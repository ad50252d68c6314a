// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file common.hpp
 * @brief Shared vocabulary types: sites, Fock states, exact rationals,
 *        error hierarchy and the deterministic random number generator.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace braidmc {

using Site = std::int32_t;

/// Occupation numbers n_i in {0,1}, indexed by site.
using FockState = std::vector<std::uint8_t>;

inline int particle_count(const FockState& fock) {
    int n = 0;
    for (auto v : fock) n += v;
    return n;
}

// -----------------------------------------------------------------------------
// Errors
// -----------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct BasisTooLarge : Error {
    using Error::Error;
};

struct DimensionTooLarge : Error {
    using Error::Error;
};

struct ExtrapolationUnstable : Error {
    using Error::Error;
};

struct StalledSampler : Error {
    using Error::Error;
};

struct TooFewSamples : Error {
    using Error::Error;
};

struct EmptyStream : Error {
    using Error::Error;
};

struct MetadataMismatch : Error {
    using Error::Error;
};

struct Infeasible : Error {
    using Error::Error;
};

// -----------------------------------------------------------------------------
// Rational
// -----------------------------------------------------------------------------

/// Exact rational p/q with q > 0, always reduced.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Rational() = default;
    constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
        if (den == 0) throw InvalidArgument("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const auto g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    [[nodiscard]] constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend constexpr Rational operator+(Rational a, Rational b) {
        return {a.num * b.den + b.num * a.den, a.den * b.den};
    }
    friend constexpr Rational operator-(Rational a, Rational b) {
        return {a.num * b.den - b.num * a.den, a.den * b.den};
    }
    friend constexpr Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
    friend constexpr Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
    friend constexpr bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend constexpr bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }

    [[nodiscard]] std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

inline std::ostream& operator<<(std::ostream& os, Rational r) { return os << r.str(); }

/// Parses "p/q", "p" or a decimal with at most 9 fractional digits.
inline Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            return {std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1))};
        }
        const auto dot = text.find('.');
        if (dot == std::string::npos) return {std::stoll(text), 1};
        const auto frac = text.substr(dot + 1);
        if (frac.size() > 9) throw InvalidArgument("too many digits");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t whole = dot == 0 ? 0 : std::stoll(text.substr(0, dot));
        const std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
        const bool neg = !text.empty() && text[0] == '-';
        return {whole * den + (neg ? -part : part), den};
    } catch (const std::logic_error&) {
        throw InvalidArgument("not a rational number: '" + text + "'");
    }
}

// -----------------------------------------------------------------------------
// Random numbers
// -----------------------------------------------------------------------------

/**
 * Deterministic 64-bit generator (Mersenne twister, period 2^19937-1).
 *
 * Only the raw engine output is used; real and integer variates are derived
 * here instead of through <random> distributions, whose algorithms are
 * implementation-defined. Replica streams come from split().
 */
class Rng {
 public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed, 0); }

    /// Stream for replica `index` of a run seeded with `seed`.
    static Rng split(std::uint64_t seed, std::uint64_t index) {
        Rng r;
        r.reseed(seed, index);
        return r;
    }

    void reseed(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        if (n == 0) throw InvalidArgument("Rng::index: empty range");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (one variate per call).
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    [[nodiscard]] std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
        if (!is) throw InvalidArgument("Rng: corrupt state string");
    }

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
    std::mt19937_64 engine_;
};

/// FNV-1a, used for config and lattice fingerprints.
inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace braidmc
