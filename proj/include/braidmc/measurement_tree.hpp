// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file measurement_tree.hpp
 * @brief Degenerate classical state sets of the solid phases and optimal
 *        single-site measurement trees that identify a member.
 */

#pragma once

#include <braidmc/common.hpp>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace braidmc {

/// Equally likely Fock states on an L x L square lattice, site x + L y.
struct StateSet {
    int L = 0;
    std::vector<FockState> states;
    std::vector<std::string> labels;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] std::size_t sites() const { return states.empty() ? 0 : states.front().size(); }
};

/// The two checkerboard crystals. Throws InvalidArgument for odd L.
inline StateSet build_cb_states(int L) {
    if (L < 2 || L % 2) throw InvalidArgument("build_cb_states: L must be even, got " + std::to_string(L));
    StateSet s;
    s.L = L;
    for (int parity = 0; parity < 2; ++parity) {
        FockState f(static_cast<std::size_t>(L * L), 0);
        for (int y = 0; y < L; ++y)
            for (int x = 0; x < L; ++x) f[static_cast<std::size_t>(x + L * y)] = static_cast<std::uint8_t>((x + y) % 2 == parity);
        s.states.push_back(std::move(f));
        s.labels.push_back(parity ? "cb odd" : "cb even");
    }
    return s;
}

/// Column stripes x = s (mod 3) then row stripes y = s (mod 3), s = 0, 1, 2.
inline StateSet build_str_states(int L) {
    if (L < 3 || L % 3) throw InvalidArgument("build_str_states: L must be divisible by 3, got " + std::to_string(L));
    StateSet s;
    s.L = L;
    for (int orient = 0; orient < 2; ++orient) {
        for (int off = 0; off < 3; ++off) {
            FockState f(static_cast<std::size_t>(L * L), 0);
            for (int y = 0; y < L; ++y)
                for (int x = 0; x < L; ++x)
                    f[static_cast<std::size_t>(x + L * y)] = static_cast<std::uint8_t>((orient ? y : x) % 3 == off);
            s.states.push_back(std::move(f));
            s.labels.push_back(std::string(orient ? "rows" : "columns") + " s=" + std::to_string(off));
        }
    }
    return s;
}

/// log2 k for k equally likely states.
inline double info_content(const StateSet& set) {
    if (set.states.empty()) throw InvalidArgument("info_content: empty set");
    return std::log2(static_cast<double>(set.size()));
}

/// Binary tree; internal nodes query one site, leaves name one state.
struct DecisionTree {
    struct Node {
        int site = -1;            ///< -1 for a leaf
        int child[2] = {-1, -1};  ///< by measured occupation
        int state = -1;           ///< leaf only
    };
    std::vector<Node> nodes;  ///< nodes[0] is the root

    /// Follows the measurements of `f` and returns the leaf's state index.
    [[nodiscard]] int classify(const FockState& f) const {
        int k = 0;
        while (nodes[static_cast<std::size_t>(k)].site >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(k)];
            k = n.child[f[static_cast<std::size_t>(n.site)]];
            if (k < 0) return -1;
        }
        return nodes[static_cast<std::size_t>(k)].state;
    }

    /// Depth of each state's leaf, indexed by state.
    [[nodiscard]] std::vector<int> leaf_depths(std::size_t k) const {
        std::vector<int> d(k, -1);
        std::vector<std::pair<int, int>> stack{{0, 0}};
        while (!stack.empty()) {
            const auto [i, depth] = stack.back();
            stack.pop_back();
            const auto& n = nodes[static_cast<std::size_t>(i)];
            if (n.site < 0) {
                d[static_cast<std::size_t>(n.state)] = depth;
            } else {
                for (int c : n.child) stack.emplace_back(c, depth + 1);
            }
        }
        return d;
    }

    /// Every state reaches its own leaf and every leaf is reached once.
    [[nodiscard]] bool valid_for(const StateSet& set) const {
        std::vector<int> seen(set.size(), 0);
        for (std::size_t k = 0; k < set.size(); ++k) {
            const int leaf = classify(set.states[k]);
            if (leaf != static_cast<int>(k)) return false;
            ++seen[k];
        }
        std::size_t leaves = 0;
        for (const auto& n : nodes)
            if (n.site < 0) ++leaves;
        return leaves == set.size();
    }
};

struct TreeResult {
    DecisionTree tree;
    Rational expected_depth;
    std::map<int, int> profile;  ///< depth -> number of leaves
};

namespace detail {

/// Minimal total leaf depth of any binary tree with k leaves.
inline std::uint64_t huffman_total(std::uint64_t k) {
    if (k <= 1) return 0;
    const std::uint64_t d = static_cast<std::uint64_t>(std::bit_width(k) - 1);
    return k * d + 2 * (k - (std::uint64_t{1} << d));
}

class TreeSearch {
 public:
    explicit TreeSearch(const StateSet& set) : set_(set) {
        const std::size_t k = set.size();
        // one representative (lowest index) per distinct split of the full set
        std::map<std::uint64_t, int> by_mask;
        for (std::size_t s = 0; s < set.sites(); ++s) {
            std::uint64_t m = 0;
            for (std::size_t i = 0; i < k; ++i)
                if (set.states[i][s]) m |= std::uint64_t{1} << i;
            by_mask.emplace(m, static_cast<int>(s));
        }
        for (const auto& [m, s] : by_mask) queries_.push_back({s, m});
        std::sort(queries_.begin(), queries_.end(), [](const auto& a, const auto& b) { return a.site < b.site; });
    }

    struct Best {
        std::uint64_t total = 0;  ///< sum of leaf depths below this subset
        int site = -1;
    };

    Best solve(std::uint64_t subset) {
        if (std::popcount(subset) <= 1) return {0, -1};
        if (const auto it = memo_.find(subset); it != memo_.end()) return it->second;
        const auto n = static_cast<std::uint64_t>(std::popcount(subset));
        struct Cand {
            int site;
            std::uint64_t one;
            std::uint64_t imbalance;
        };
        std::vector<Cand> cands;
        for (const auto& q : queries_) {
            const std::uint64_t one = subset & q.mask;
            if (one == 0 || one == subset) continue;
            const auto a = static_cast<std::uint64_t>(std::popcount(one));
            cands.push_back({q.site, one, a > n - a ? a - (n - a) : (n - a) - a});
        }
        if (cands.empty()) throw Infeasible("optimal_tree: two states agree on every site");
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.imbalance < y.imbalance; });
        // deduplicate splits seen from this subset, keeping the lowest site
        std::map<std::uint64_t, int> uniq;
        for (const auto& c : cands) {
            const std::uint64_t key = std::min(c.one, subset & ~c.one);
            const auto it = uniq.find(key);
            if (it == uniq.end() || c.site < it->second) uniq[key] = c.site;
        }
        Best best{std::numeric_limits<std::uint64_t>::max(), -1};
        for (const auto& c : cands) {
            const std::uint64_t key = std::min(c.one, subset & ~c.one);
            if (uniq.at(key) != c.site) continue;
            const std::uint64_t zero = subset & ~c.one;
            const std::uint64_t lb = n + huffman_total(static_cast<std::uint64_t>(std::popcount(c.one))) +
                                     huffman_total(static_cast<std::uint64_t>(std::popcount(zero)));
            if (lb > best.total) continue;
            const std::uint64_t total = n + solve(c.one).total + solve(zero).total;
            if (total < best.total || (total == best.total && c.site < best.site)) best = {total, c.site};
        }
        memo_.emplace(subset, best);
        return best;
    }

    int build(std::uint64_t subset, DecisionTree& t) {
        const int id = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        if (std::popcount(subset) == 1) {
            t.nodes[static_cast<std::size_t>(id)].state = std::countr_zero(subset);
            return id;
        }
        const Best b = solve(subset);
        std::uint64_t one = 0;
        for (const auto& q : queries_)
            if (q.site == b.site) one = subset & q.mask;
        t.nodes[static_cast<std::size_t>(id)].site = b.site;
        const int c0 = build(subset & ~one, t);
        const int c1 = build(one, t);
        t.nodes[static_cast<std::size_t>(id)].child[0] = c0;
        t.nodes[static_cast<std::size_t>(id)].child[1] = c1;
        return id;
    }

 private:
    struct Query {
        int site;
        std::uint64_t mask;
    };
    const StateSet& set_;
    std::vector<Query> queries_;
    std::unordered_map<std::uint64_t, Best> memo_;
};

}  // namespace detail

/**
 * Decision tree of single-site occupation queries minimizing the mean leaf
 * depth over equally likely states. Among optimal queries the lowest site
 * index wins. Throws Infeasible when two states are identical.
 */
inline TreeResult optimal_tree(const StateSet& set) {
    const std::size_t k = set.size();
    if (k < 2) throw InvalidArgument("optimal_tree: need at least 2 states");
    if (k > 64) throw InvalidArgument("optimal_tree: at most 64 states");
    if (set.sites() > 256) throw InvalidArgument("optimal_tree: at most 256 sites");
    for (const auto& s : set.states)
        if (s.size() != set.sites()) throw InvalidArgument("optimal_tree: states differ in size");
    detail::TreeSearch search(set);
    const std::uint64_t all = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    const auto best = search.solve(all);
    TreeResult r;
    search.build(all, r.tree);
    r.expected_depth = Rational(static_cast<std::int64_t>(best.total), static_cast<std::int64_t>(k));
    for (int d : r.tree.leaf_depths(k)) ++r.profile[d];
    return r;
}

inline nlohmann::json to_json(const DecisionTree& t, const StateSet& set, int node = 0) {
    const auto& n = t.nodes[static_cast<std::size_t>(node)];
    if (n.site < 0) {
        nlohmann::json leaf{{"state", n.state}};
        if (static_cast<std::size_t>(n.state) < set.labels.size()) leaf["label"] = set.labels[static_cast<std::size_t>(n.state)];
        return leaf;
    }
    nlohmann::json j{{"site", n.site}};
    if (set.L > 0) j["xy"] = {n.site % set.L, n.site / set.L};
    j["if_0"] = to_json(t, set, n.child[0]);
    j["if_1"] = to_json(t, set, n.child[1]);
    return j;
}

/// Indented flowchart, one query or outcome per line.
inline std::string to_text(const DecisionTree& t, const StateSet& set, int node = 0, int indent = 0) {
    const auto& n = t.nodes[static_cast<std::size_t>(node)];
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    if (n.site < 0) {
        const auto idx = static_cast<std::size_t>(n.state);
        return pad + "=> " + (idx < set.labels.size() ? set.labels[idx] : "state " + std::to_string(n.state)) + "\n";
    }
    std::string out = pad + "measure n(" + std::to_string(n.site % std::max(set.L, 1)) + "," +
                      std::to_string(n.site / std::max(set.L, 1)) + ")\n";
    for (int v = 0; v < 2; ++v) {
        out += pad + "  n=" + std::to_string(v) + ":\n";
        out += to_text(t, set, n.child[v], indent + 4);
    }
    return out;
}

}  // namespace braidmc
