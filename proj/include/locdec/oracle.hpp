#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "label.hpp"
#include "turing.hpp"

namespace locdec {

// A scalar oracle hands the adversary a sorted list of labels, one per node,
// keyed only by the instance size. `labels_for(n)` must be numerically
// non-decreasing. When knows_exact_n is false the oracle answers for some
// size N >= n chosen by the adversary and only n of the N labels are placed.
struct ScalarOracle {
    std::string name;
    bool declared_large = false;
    bool knows_exact_n = true;
    std::function<std::vector<LabelValue>(std::uint64_t)> labels_for;
    // For large oracles that support it: from one label, a finite upper bound
    // on how many nodes can carry labels numerically <= it, valid for every
    // instance size. Drives the id-recovery compiler.
    std::function<std::uint64_t(const LabelValue&)> index_bound;

    std::vector<LabelValue> labels(std::uint64_t n) const {
        if (n == 0) throw ValidationError("oracle queried with n = 0");
        auto v = labels_for(n);
        if (v.size() != n) throw ValidationError("oracle returned wrong label count");
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (LabelValue::compare_numeric(v[i - 1], v[i]) > 0)
                throw ValidationError("oracle labels must be sorted non-decreasing");
        }
        return v;
    }
};

inline std::uint64_t invert_bound(const ScalarOracle& o, const LabelValue& label) {
    if (!o.declared_large || !o.index_bound)
        throw CapabilityError("oracle " + o.name + " does not support index bounds");
    return o.index_bound(label);
}

// ---- built-in oracles ----

inline ScalarOracle oracle_identity() {
    ScalarOracle o;
    o.name = "identity";
    o.declared_large = true;
    o.labels_for = [](std::uint64_t n) {
        std::vector<LabelValue> v;
        for (std::uint64_t i = 1; i <= n; ++i) v.push_back(LabelValue::of_nat(i));
        return v;
    };
    o.index_bound = [](const LabelValue& l) { return l.to_nat_saturating(); };
    return o;
}

inline ScalarOracle oracle_const_n() {
    ScalarOracle o;
    o.name = "const-n";
    o.declared_large = true;
    o.labels_for = [](std::uint64_t n) {
        return std::vector<LabelValue>(n, LabelValue::of_nat(n));
    };
    o.index_bound = [](const LabelValue& l) { return l.to_nat_saturating(); };
    return o;
}

inline ScalarOracle oracle_leader() {
    ScalarOracle o;
    o.name = "leader";
    o.declared_large = false;
    o.labels_for = [](std::uint64_t n) {
        std::vector<LabelValue> v(n, LabelValue::of_nat(0));
        v.back() = LabelValue::of_nat(1);
        return v;
    };
    return o;
}

inline ScalarOracle oracle_zeros_then_pow2() {
    ScalarOracle o;
    o.name = "zeros-then-pow2";
    o.declared_large = false;
    o.labels_for = [](std::uint64_t n) {
        std::vector<LabelValue> v(n, LabelValue::of_nat(0));
        v.back() = LabelValue::of_bits("1" + std::string(n, '0')); // 2^n
        return v;
    };
    return o;
}

// Every node learns the same upper bound N on the instance size.
inline ScalarOracle oracle_upper_bound() {
    ScalarOracle o;
    o.name = "upper-bound";
    o.declared_large = true;
    o.knows_exact_n = false;
    o.labels_for = [](std::uint64_t n) {
        return std::vector<LabelValue>(n, LabelValue::of_nat(n));
    };
    o.index_bound = [](const LabelValue& l) { return l.to_nat_saturating(); };
    return o;
}

// n-1 zeros plus one n-bit string whose i-th bit (1-indexed, left to right)
// says whether indexed machine i halts on the empty tape within `budget`.
inline ScalarOracle oracle_halting_bits(std::uint64_t budget) {
    ScalarOracle o;
    o.name = "halting-bits(" + std::to_string(budget) + ")";
    o.declared_large = false;
    auto cache = std::make_shared<std::map<std::uint64_t, bool>>();
    o.labels_for = [budget, cache](std::uint64_t n) {
        std::string bits;
        bits.reserve(n);
        for (std::uint64_t i = 1; i <= n; ++i) {
            auto it = cache->find(i);
            if (it == cache->end())
                it = cache->emplace(i, run_bounded(machine_for_index(i), budget).halted).first;
            bits.push_back(it->second ? '1' : '0');
        }
        std::vector<LabelValue> v(n, LabelValue::of_nat(0));
        v.back() = LabelValue::of_bits(bits);
        return v;
    };
    return o;
}

inline std::uint64_t halting_bits_budget_default() { return 10000; }

// Registered oracle names: identity, const-n, leader, zeros-then-pow2,
// upper-bound, halting-bits(B).
inline ScalarOracle oracle_by_name(const std::string& name) {
    if (name == "identity") return oracle_identity();
    if (name == "const-n") return oracle_const_n();
    if (name == "leader") return oracle_leader();
    if (name == "zeros-then-pow2") return oracle_zeros_then_pow2();
    if (name == "upper-bound") return oracle_upper_bound();
    if (name.rfind("halting-bits", 0) == 0) {
        std::string rest = name.substr(12);
        if (rest.empty()) return oracle_halting_bits(halting_bits_budget_default());
        if (rest.front() == '(' && rest.back() == ')') {
            std::string num = rest.substr(1, rest.size() - 2);
            if (!num.empty() && num.find_first_not_of("0123456789") == std::string::npos)
                return oracle_halting_bits(std::stoull(num));
        }
        throw ConfigError("bad halting-bits budget in oracle name: " + name);
    }
    throw ConfigError("unknown oracle: " + name);
}

inline std::vector<std::string> oracle_names() {
    return {"identity", "const-n", "leader", "zeros-then-pow2", "upper-bound", "halting-bits(B)"};
}

// ---- largeness ----

// Searches for a witness position k <= n_max such that the k-th smallest
// label stays numerically >= c on every size n in [k, max(n_max, 2k)]. The
// window extends past n_max so a position that only works at the boundary
// (where no larger sizes were examined) does not count.
inline std::optional<std::uint64_t> largeness_witness(const ScalarOracle& o, std::uint64_t c,
                                                      std::uint64_t n_max) {
    if (n_max == 0) throw ValidationError("largeness check needs n_max >= 1");
    LabelValue target = LabelValue::of_nat(c);
    std::map<std::uint64_t, std::vector<LabelValue>> cache;
    auto at = [&](std::uint64_t n) -> const std::vector<LabelValue>& {
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, o.labels(n)).first;
        return it->second;
    };
    for (std::uint64_t k = 1; k <= n_max; ++k) {
        std::uint64_t hi = std::max(n_max, 2 * k);
        bool ok = true;
        for (std::uint64_t n = k; n <= hi && ok; ++n) {
            if (LabelValue::compare_numeric(at(n)[k - 1], target) < 0) ok = false;
        }
        if (ok) return k;
    }
    return std::nullopt;
}

// ---- adversary placement ----

struct AdversaryStrategy {
    enum class Kind { SortedById, Random, ConstantOnSet };
    Kind kind = Kind::SortedById;
    std::uint64_t seed = 0;
    std::vector<NodeIndex> set;
    std::uint64_t value = 0;

    static AdversaryStrategy sorted_by_id() { return {}; }
    static AdversaryStrategy random(std::uint64_t seed) {
        AdversaryStrategy s;
        s.kind = Kind::Random;
        s.seed = seed;
        return s;
    }
    static AdversaryStrategy constant_on_set(std::vector<NodeIndex> nodes, std::uint64_t value) {
        AdversaryStrategy s;
        s.kind = Kind::ConstantOnSet;
        s.set = std::move(nodes);
        s.value = value;
        return s;
    }

    std::string name() const {
        switch (kind) {
            case Kind::SortedById: return "sorted-by-id";
            case Kind::Random: return "random:" + std::to_string(seed);
            case Kind::ConstantOnSet:
                return "const:" + std::to_string(value) + "@" + std::to_string(set.size()) + "nodes";
        }
        return "?";
    }
};

// Places oracle labels on the graph. For oracles that only assume an upper
// bound on the size, pass N >= n to query at size N; the n numerically
// largest of those labels are placed. Exact-size oracles reject N != n.
inline void assign_oracle_labels(LabelledGraph& g, const ScalarOracle& oracle,
                                 const AdversaryStrategy& strategy,
                                 std::optional<std::uint64_t> N = std::nullopt) {
    std::uint64_t n = g.size();
    std::vector<LabelValue> labels;
    if (oracle.knows_exact_n) {
        if (N && *N != n) throw ConfigError("oracle " + oracle.name + " answers only for the exact size");
        labels = oracle.labels(n);
    } else {
        std::uint64_t big = N.value_or(n);
        if (big < n) throw ValidationError("size bound N must be at least the instance size");
        auto all = oracle.labels(big);
        labels.assign(all.end() - std::ptrdiff_t(n), all.end());
    }

    std::vector<NodeIndex> order(g.size());
    std::iota(order.begin(), order.end(), NodeIndex(0));

    switch (strategy.kind) {
        case AdversaryStrategy::Kind::SortedById: {
            if (!g.has_ids()) throw ConfigError("sorted-by-id placement needs node identifiers");
            std::sort(order.begin(), order.end(),
                      [&](NodeIndex a, NodeIndex b) { return *g.nodes[a].id < *g.nodes[b].id; });
            break;
        }
        case AdversaryStrategy::Kind::Random: {
            std::mt19937_64 rng(strategy.seed);
            std::shuffle(order.begin(), order.end(), rng);
            break;
        }
        case AdversaryStrategy::Kind::ConstantOnSet: {
            for (NodeIndex v : strategy.set) {
                if (v >= g.size()) throw ValidationError("constant-on-set node out of range");
            }
            std::vector<NodeIndex> uniq = strategy.set;
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            LabelValue want = LabelValue::of_nat(strategy.value);
            std::vector<std::size_t> hits, rest;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (LabelValue::compare_numeric(labels[i], want) == 0 && hits.size() < uniq.size())
                    hits.push_back(i);
                else
                    rest.push_back(i);
            }
            if (hits.size() < uniq.size())
                throw InfeasibleStrategyError("oracle offers only " + std::to_string(hits.size()) +
                                              " labels equal to " + std::to_string(strategy.value) +
                                              " but " + std::to_string(uniq.size()) + " were requested");
            std::vector<LabelValue> placed(g.size(), LabelValue::of_nat(0));
            for (std::size_t i = 0; i < uniq.size(); ++i) placed[uniq[i]] = labels[hits[i]];
            std::size_t next = 0;
            for (NodeIndex v = 0; v < g.size(); ++v) {
                if (std::binary_search(uniq.begin(), uniq.end(), v)) continue;
                placed[v] = labels[rest[next++]];
            }
            for (NodeIndex v = 0; v < g.size(); ++v) g.nodes[v].oracle = placed[v];
            return;
        }
    }
    for (std::size_t pos = 0; pos < order.size(); ++pos) g.nodes[order[pos]].oracle = labels[pos];
}

} // namespace locdec
