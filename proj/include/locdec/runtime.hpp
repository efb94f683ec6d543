#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "canonical.hpp"
#include "graph.hpp"

namespace locdec {

// A constant-radius decision rule: every node extracts its radius-r view and
// answers yes/no from that view alone. decide must be a pure function of the
// view; debug builds evaluate it twice and compare to keep everyone honest.
struct LocalAlgorithm {
    std::string name;
    std::size_t radius = 0;
    bool oblivious = true;          // never looks at identifiers
    bool uses_oracle_labels = false;
    std::function<bool(const View&)> decide; // true = yes

    bool eval(const View& v) const {
        bool out = decide(v);
#ifndef NDEBUG
        if (decide(v) != out) throw ConfigError("decide is not a pure function of the view: " + name);
#endif
        return out;
    }
};

struct Verdict {
    std::vector<bool> per_node; // indexed like the graph's nodes
    bool accepted = false;      // all yes

    std::vector<std::size_t> no_nodes() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < per_node.size(); ++i) {
            if (!per_node[i]) out.push_back(i);
        }
        return out;
    }
};

inline nlohmann::json verdict_to_json(const Verdict& v) {
    nlohmann::json j;
    j["accepted"] = v.accepted;
    j["no_nodes"] = v.no_nodes();
    return j;
}

// Runs the algorithm at every node. The instance accepts iff every node says
// yes. Configuration mismatches (id-using algorithm on an anonymous graph,
// oracle-using algorithm without oracle labels) are errors, not rejections.
inline Verdict run(const LocalAlgorithm& alg, const LabelledGraph& g) {
    g.validate();
    if (!alg.oblivious && !g.has_ids())
        throw ConfigError("algorithm '" + alg.name + "' needs identifiers but the graph has none");
    if (alg.uses_oracle_labels && !g.has_oracle_labels())
        throw ConfigError("algorithm '" + alg.name + "' needs oracle labels but the graph has none");
    Verdict v;
    v.per_node.resize(g.size());
    v.accepted = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool out = alg.eval(ball(g, i, alg.radius, alg.oblivious));
        v.per_node[i] = out;
        if (!out) v.accepted = false;
    }
    return v;
}

// Fresh distinct identifiers for each trial, drawn from ranges that move with
// the trial number so both id values and their relative order vary.
inline std::vector<std::uint64_t> sample_distinct_ids(std::size_t n, std::uint64_t seed, std::size_t trial) {
    std::uint64_t width = 4 * std::uint64_t(n) + 16;
    std::uint64_t base = std::uint64_t(trial) * width + 1; // trial ranges stay disjoint
    std::vector<std::uint64_t> pool;
    for (std::uint64_t k = 0; k < width; ++k) pool.push_back(base + k);
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (trial + 1)));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(n);
    return pool;
}

// Empirical obliviousness check: re-runs the algorithm under `trials` fresh
// identifier assignments and reports whether every per-node output stayed
// fixed. A true result is evidence, not proof; a false result is a witness.
inline bool check_oblivious(const LocalAlgorithm& alg, LabelledGraph g, std::size_t trials,
                            std::uint64_t seed = 0x10cdecULL) {
    if (trials == 0) throw ConfigError("check_oblivious needs at least one trial");
    std::vector<std::vector<bool>> seen;
    for (std::size_t t = 0; t < trials; ++t) {
        auto ids = sample_distinct_ids(g.size(), seed, t);
        for (std::size_t i = 0; i < g.size(); ++i) g.nodes[i].id = ids[i];
        // Run with identifiers visible, whatever the algorithm claims.
        LocalAlgorithm peek = alg;
        peek.oblivious = false;
        seen.push_back(run(peek, g).per_node);
        if (seen.size() > 1 && seen.back() != seen.front()) return false;
    }
    return true;
}

// Same decision rule announced at a larger radius; the extra ring is ignored.
inline LocalAlgorithm wrap_radius(const LocalAlgorithm& alg, std::size_t r2) {
    if (r2 < alg.radius) throw ConfigError("wrap_radius cannot shrink the radius");
    LocalAlgorithm out = alg;
    std::size_t inner = alg.radius;
    auto base = alg.decide;
    out.radius = r2;
    out.name = alg.name + "@r" + std::to_string(r2);
    out.decide = [base, inner](const View& v) { return base(sub_view(v, inner)); };
    return out;
}

} // namespace locdec
