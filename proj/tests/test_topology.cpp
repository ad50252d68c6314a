// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

#include <braidmc/topology.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <functional>
#include <random>

using namespace braidmc;

namespace {

CycleVector cv(std::vector<int> c) { return CycleVector{std::move(c)}; }

std::vector<CycleVector> partitions(int n) {
    std::vector<CycleVector> out;
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int left, int maxl) {
        if (left == 0) {
            out.push_back(cv(counts));
            return;
        }
        for (int l = std::min(left, maxl); l >= 1; --l) {
            ++counts[static_cast<std::size_t>(l - 1)];
            rec(left - l, l);
            --counts[static_cast<std::size_t>(l - 1)];
        }
    };
    rec(n, n);
    return out;
}

}  // namespace

TEST(PFraction, Examples) {
    const auto a = p_of(cv({1, 1, 0}), 3);
    EXPECT_EQ(a.p, (std::vector<Rational>{{1, 3}, {2, 3}, 0}));
    EXPECT_EQ(a.p_prime, (std::vector<Rational>{{2, 3}, 0}));
    const auto b = p_of(cv({5, 0, 0, 0, 0}), 5);
    EXPECT_EQ(b.p[0], Rational(1));
    const auto c = p_of(cv({0, 0, 1}), 3);
    EXPECT_EQ(c.p_prime, (std::vector<Rational>{0, 1}));
}

TEST(PFraction, RejectsInconsistent) {
    EXPECT_THROW(p_of(cv({1, 1, 0}), 4), InvalidArgument);
    EXPECT_THROW(p_of(cv({-1, 2}), 3), InvalidArgument);
    EXPECT_THROW(avg_cycle_length(cv({2, 0}), 3), InvalidArgument);
}

TEST(AvgCycleLength, Examples) {
    EXPECT_DOUBLE_EQ(avg_cycle_length(cv({0, 0, 1}), 3), 3.0);
    EXPECT_DOUBLE_EQ(avg_cycle_length(cv({1, 1, 0}), 3), 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(avg_cycle_length(cv({8, 0, 0, 0, 0, 0, 0, 0}), 8), 0.0);
}

TEST(FPc, Examples) {
    EXPECT_DOUBLE_EQ(f_pc(cv({6, 0, 0, 0, 0, 0}), 6), 0.0);
    EXPECT_DOUBLE_EQ(f_pc(cv({1, 1, 0}), 3), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(f_pc(cv({0, 0, 1}), 3), 1.0);
}

TEST(Invariants, AllPartitionsOfSeven) {
    const int n = 7;
    const auto all = partitions(n);
    EXPECT_EQ(all.size(), 15U);
    for (const auto& q : all) {
        const auto pf = p_of(q, n);
        Rational sum(0);
        for (auto r : pf.p) {
            EXPECT_FALSE(r < Rational(0));
            EXPECT_FALSE(Rational(1) < r);
            sum = sum + r;
        }
        EXPECT_EQ(sum, Rational(1));
        Rational sp(0);
        for (auto r : pf.p_prime) sp = sp + r;
        EXPECT_NEAR(sp.value(), f_pc(q, n), 1e-15);
        const double lam = avg_cycle_length(q, n);
        EXPECT_GE(lam, 0.0);
        EXPECT_LE(lam, n);
    }
}

TEST(Accumulate, Counting) {
    const auto qa = cv({3, 0, 0});
    const auto qb = cv({1, 1, 0});
    const std::vector<CycleVector> s = {qa, qa, qb};
    const auto sp = accumulate(s, 3);
    ASSERT_EQ(sp.entries.size(), 2U);
    EXPECT_DOUBLE_EQ(sp.find(qa)->probability, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(sp.find(qb)->probability, 1.0 / 3.0);
    EXPECT_EQ(sp.top().q, qa);
    EXPECT_EQ(sp.total_samples, 3U);
}

TEST(Accumulate, EmptyStream) {
    EXPECT_THROW(accumulate(std::vector<CycleVector>{}, 3), EmptyStream);
}

TEST(Accumulate, SortedByAverageLengthThenLexicographic) {
    // ties in <lambda> are broken on q
    const auto a = cv({2, 0, 0, 1, 0, 0});
    const auto b = cv({0, 3, 0, 0, 0, 0});
    const auto c = cv({6, 0, 0, 0, 0, 0});
    const auto d = cv({0, 0, 2, 0, 0, 0});
    const std::vector<CycleVector> s = {d, a, b, c, a};
    const auto sp = accumulate(s, 6);
    ASSERT_EQ(sp.entries.size(), 4U);
    for (std::size_t k = 1; k < sp.entries.size(); ++k) {
        const auto& x = sp.entries[k - 1];
        const auto& y = sp.entries[k];
        EXPECT_TRUE(x.avg_lambda < y.avg_lambda || (x.avg_lambda == y.avg_lambda && x.q < y.q));
    }
    EXPECT_EQ(sp.entries.front().q, c);
}

TEST(Accumulate, PropertiesOnRandomStreams) {
    const int n = 6;
    const auto all = partitions(n);
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CycleVector> s;
        const std::size_t len = 20 + gen() % 500;
        for (std::size_t k = 0; k < len; ++k) s.push_back(all[gen() % (1 + gen() % all.size())]);
        const auto sp = accumulate(s, n);
        double total = 0;
        for (const auto& e : sp.entries) {
            total += e.probability;
            EXPECT_DOUBLE_EQ(e.probability, static_cast<double>(e.count) / static_cast<double>(sp.total_samples));
            EXPECT_GT(e.error, 0.0);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        double mean = 0;
        for (const auto& q : s) mean += f_pc(q, n);
        mean /= static_cast<double>(s.size());
        EXPECT_NEAR(sp.mean_f_pc(), mean, 1e-12);
        EXPECT_NEAR(sp.fpc_series.mean, mean, 1e-12);

        auto shuffled = s;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        const auto sp2 = accumulate(shuffled, n);
        ASSERT_EQ(sp2.entries.size(), sp.entries.size());
        for (std::size_t k = 0; k < sp.entries.size(); ++k) {
            EXPECT_EQ(sp2.entries[k].q, sp.entries[k].q);
            EXPECT_EQ(sp2.entries[k].count, sp.entries[k].count);
        }
    }
}

TEST(Wilson, NonZeroAtZeroCount) {
    EXPECT_GT(wilson_halfwidth(0.0, 100), 0.0);
    EXPECT_NEAR(wilson_halfwidth(0.5, 1e8), 0.5e-4, 1e-9);
}

TEST(SpectrumReport, Threshold) {
    const auto qa = cv({4, 0, 0, 0});
    const auto qb = cv({2, 1, 0, 0});
    std::vector<CycleVector> s(200, qa);
    s.push_back(qb);
    const auto sp = accumulate(s, 4);
    const auto rep = spectrum_report(sp, 0.01);
    EXPECT_EQ(rep, "q,p_percent,avg_lambda,prob,err\n4-0-0-0,100-0-0-0,0," + format_number(200.0 / 201.0) + "," +
                       format_number(sp.entries[0].error) + "\n");
    EXPECT_EQ(spectrum_report(sp, 0.999), "q,p_percent,avg_lambda,prob,err\n");
    const auto all = spectrum_report(sp, 0.0);
    EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), 3);
}

TEST(SpectrumCsv, HeaderAndRoundTrip) {
    const std::vector<CycleVector> s = {cv({1, 1, 0}), cv({0, 0, 1}), cv({3, 0, 0})};
    const auto csv = spectrum_csv(accumulate(s, 3));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "q,avg_lambda,prob,err,count");
    EXPECT_EQ(parse_cycle_vector("1-1-0"), cv({1, 1, 0}));
    EXPECT_THROW(parse_cycle_vector("1--0"), InvalidArgument);
}

TEST(SpectrumJson, Mirror) {
    const std::vector<CycleVector> s = {cv({1, 1, 0}), cv({3, 0, 0})};
    const auto j = to_json(accumulate(s, 3));
    EXPECT_EQ(j["entries"].size(), 2U);
    EXPECT_EQ(j["entries"][0]["q"], "3-0-0");
}
