#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "canonical.hpp"
#include "constructions.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "label.hpp"
#include "oracle.hpp"
#include "runtime.hpp"
#include "turing.hpp"

namespace locdec {

inline void apply_constant_oracle_labels(LabelledGraph& g, const LabelValue& l) {
    for (auto& n : g.nodes) n.oracle = l;
}

// Every radius-r identifier-free neighborhood that can appear in a valid
// tableau instance of one machine, under a constant oracle label. Views are
// keyed by canonical form so membership checks are order independent.
struct NeighborhoodCollection {
    std::string machine_bits;
    std::uint64_t r = 0;
    LabelValue base_label = LabelValue::of_nat(0);
    std::map<CanonicalKey, View> views;
    bool complete = true;
};

namespace detail {

struct PartialAssembly {
    LabelledGraph g;
    NodeIndex pivot = 0;
    std::vector<NodeIndex> roots; // nodes whose full-radius balls are realizable
};

// The pivot corner of a tableau for a machine still running: grid cells
// (i, j) with i + j <= tri, plus attached fragments and an optional tail.
// Grid roots are the cells with i + j <= root_bound; around those every
// radius-r ball matches some arbitrarily large honest instance.
inline PartialAssembly build_partial_assembly(const TuringMachine& m, const ConstructionParams& p,
                                              std::size_t tri, std::optional<int> pivot_bit,
                                              std::uint64_t tail_len, std::size_t root_bound) {
    m.validate();
    p.validate();
    std::vector<Configuration> cfg;
    cfg.push_back(initial_configuration(m));
    for (std::size_t i = 0; i < tri; ++i) {
        Configuration c = cfg.back();
        if (m.is_halt(c.state)) throw ConfigError("partial assembly needs a machine that is still running");
        step(m, c);
        cfg.push_back(std::move(c));
    }
    if (m.is_halt(cfg.back().state))
        throw ConfigError("partial assembly needs a machine that is still running");

    std::string mb = m.encode().bits();
    PartialAssembly out;
    LabelledGraph& g = out.g;
    std::map<std::pair<std::size_t, std::size_t>, NodeIndex> at;
    for (std::size_t i = 0; i <= tri; ++i) {
        for (std::size_t j = 0; i + j <= tri; ++j) {
            const Configuration& c = cfg[i];
            TableauNodeLabel L;
            L.role = Role::Grid;
            L.machine_bits = mb;
            L.radius = p.r;
            auto it = c.tape.find(j);
            L.cell.sym = it == c.tape.end() ? Sym::Blank : it->second;
            L.cell.head = c.head == j ? int(c.state) : -1;
            L.ci = std::uint8_t(i % 3);
            L.cj = std::uint8_t(j % 3);
            L.top = i == 0;
            L.left = j == 0;
            L.pivot = L.top && L.left;
            if (L.pivot && pivot_bit) L.pivot_bit = pivot_bit;
            NodeIndex v = g.add_node(L.encode());
            at[{i, j}] = v;
            if (i + j <= root_bound) out.roots.push_back(v);
        }
    }
    out.pivot = at.at({0, 0});
    for (const auto& [pos, v] : at) {
        auto down = at.find({pos.first + 1, pos.second});
        if (down != at.end()) g.add_edge(v, down->second);
        auto right = at.find({pos.first, pos.second + 1});
        if (right != at.end()) g.add_edge(v, right->second);
    }

    if (!p.max_fragments || *p.max_fragments > 0) {
        auto frags = build_fragments(m, p);
        std::size_t take = p.max_fragments
                               ? std::min<std::size_t>(std::size_t(*p.max_fragments), frags.size())
                               : frags.size();
        for (std::size_t k = 1; k <= take; ++k) {
            auto [spoke, base] = attach_fragment(g, out.pivot, frags[k - 1], k, mb, p.r);
            out.roots.push_back(spoke);
            for (std::size_t c = 0; c < frags[k - 1].w * frags[k - 1].h; ++c)
                out.roots.push_back(base + c);
        }
    }

    NodeIndex prev = out.pivot;
    for (std::uint64_t t = 1; t <= tail_len; ++t) {
        TableauNodeLabel L;
        L.role = Role::Tail;
        L.index = t;
        NodeIndex cur = g.add_node(L.encode());
        g.add_edge(prev, cur);
        out.roots.push_back(cur);
        prev = cur;
    }
    return out;
}

} // namespace detail

// Enumerates the view collection for one machine at one radius. If the
// machine halts quickly the whole tail-bearing instance is finite and every
// node of it is a root; otherwise a pivot-corner assembly supplies the
// near-pivot views and claimed window interiors supply the deep-table ones.
inline NeighborhoodCollection enumerate_Q(const TuringMachine& m, std::uint64_t r,
                                          std::uint64_t cap = 1000000,
                                          const LabelValue& i0 = LabelValue::of_nat(0),
                                          std::optional<ConstructionParams> params = std::nullopt) {
    if (r == 0) throw ConfigError("view enumeration needs radius >= 1");
    ConstructionParams p;
    if (params) {
        p = *params;
        if (p.r != r) throw ConfigError("construction params disagree with the requested radius");
    } else {
        p.r = r;
        p.N = 2 * r;
    }
    m.validate();

    NeighborhoodCollection out;
    out.machine_bits = m.encode().bits();
    out.r = r;
    out.base_label = i0;

    auto add_view = [&](View v) {
        CanonicalKey key = canonical_key(v);
        if (out.views.count(key)) return;
        if (out.views.size() >= cap)
            throw CapacityError("view enumeration outgrew its cap", cap, out.views.size() + 1);
        out.views.emplace(std::move(key), std::move(v));
    };

    if (run_bounded(m, 2 * r + 2).halted) {
        LabelledGraph g = build_G(m, p);
        apply_constant_oracle_labels(g, i0);
        for (NodeIndex v = 0; v < g.size(); ++v) add_view(ball(g, v, r, true));
    } else {
        auto part = detail::build_partial_assembly(m, p, 2 * r + 1, std::nullopt, p.N, r);
        apply_constant_oracle_labels(part.g, i0);
        for (NodeIndex v : part.roots) add_view(ball(part.g, v, r, true));
    }

    // Deep-table and far-border views: interiors of standalone claimed
    // windows, rooted far enough from every unclaimed edge.
    if (!p.max_fragments || *p.max_fragments > 0) {
        auto frags = build_fragments(m, p);
        std::size_t take = p.max_fragments
                               ? std::min<std::size_t>(std::size_t(*p.max_fragments), frags.size())
                               : frags.size();
        for (std::size_t k = 0; k < take; ++k) {
            const Fragment& f = frags[k];
            LabelledGraph mat = materialize_fragment(f, out.machine_bits, r, i0);
            for (std::uint64_t i = 0; i < f.h; ++i) {
                for (std::uint64_t j = 0; j < f.w; ++j) {
                    bool deep_top = f.claims.top || i >= r;
                    bool deep_bottom = f.claims.bottom || i + r <= f.h - 1;
                    bool deep_left = f.claims.left || j >= r;
                    bool deep_right = f.claims.right || j + r <= f.w - 1;
                    if (deep_top && deep_bottom && deep_left && deep_right)
                        add_view(ball(mat, i * f.w + j, r, true));
                }
            }
        }
    }
    return out;
}

// Turns an identifier-using decider into an identifier-oblivious one that
// reads a large oracle instead: the double-radius view bounds how many nodes
// can carry the labels it sees, and the new decider accepts iff the inner
// one accepts under every injective assignment of candidate identifiers.
inline LocalAlgorithm compile_ld_to_ldof(const LocalAlgorithm& A, const ScalarOracle& oracle,
                                         std::uint64_t enum_cap = 1000000) {
    if (!oracle.declared_large)
        throw CapabilityError("compilation needs an oracle declared large: " + oracle.name);
    if (!oracle.index_bound)
        throw CapabilityError("compilation needs an index bound for oracle " + oracle.name);

    LocalAlgorithm out;
    out.name = A.name + "@" + oracle.name;
    out.radius = 2 * A.radius;
    out.oblivious = true;
    out.uses_oracle_labels = true;

    LocalAlgorithm inner = A;
    auto bound = oracle.index_bound;
    bool pass_labels = A.uses_oracle_labels;
    out.decide = [inner, bound, enum_cap, pass_labels](const View& v) -> bool {
        View U = sub_view(v, inner.radius);
        std::uint64_t gstar = 0;
        for (const auto& n : U.nodes) {
            if (!n.oracle) throw ConfigError("compiled decider needs oracle labels everywhere");
            gstar = std::max(gstar, bound(*n.oracle));
        }
        std::size_t k = U.size();
        // Fewer candidate identifiers than nodes: the labels in sight are
        // impossible in an honest run, so no assignment can reject.
        if (gstar < k) return true;

        std::uint64_t total = 1;
        bool overflow = false;
        for (std::size_t i = 0; i < k; ++i) {
            std::uint64_t factor = gstar - i;
            if (total > std::numeric_limits<std::uint64_t>::max() / factor) {
                overflow = true;
                break;
            }
            total *= factor;
        }
        if (overflow || total > enum_cap)
            throw CapacityError("identifier enumeration outgrew its cap", enum_cap,
                                overflow ? std::numeric_limits<std::uint64_t>::max() : total);

        View W = U;
        if (!pass_labels)
            for (auto& n : W.nodes) n.oracle.reset();
        std::vector<bool> used(gstar + 1, false);
        bool all_yes = true;
        auto assign = [&](auto&& self, std::size_t pos) -> void {
            if (!all_yes) return;
            if (pos == k) {
                if (!inner.eval(W)) all_yes = false;
                return;
            }
            for (std::uint64_t id = 1; id <= gstar && all_yes; ++id) {
                if (used[id]) continue;
                used[id] = true;
                W.nodes[pos].id = id;
                self(self, pos + 1);
                used[id] = false;
            }
        };
        assign(assign, 0);
        return all_yes;
    };
    return out;
}

struct SeparatorOutcome {
    int bit = 0;
    bool any_no = false;
    std::size_t examined = 0;
    bool whole_instance = false; // instance probe: finite instance vs pivot corner
    std::vector<std::pair<CanonicalKey, bool>> transcript;
};

// Feeds every enumerable view of the machine's tableau family to an
// identifier-oblivious decider. Output bit 1 means some view was rejected.
inline SeparatorOutcome separate_by_neighborhoods(const LocalAlgorithm& A, const TuringMachine& m,
                                                  std::uint64_t r,
                                                  const LabelValue& i0 = LabelValue::of_nat(0),
                                                  std::uint64_t cap = 1000000,
                                                  std::optional<ConstructionParams> params = std::nullopt) {
    if (A.radius != r) throw ConfigError("decider radius must match the enumeration radius");
    if (!A.oblivious) throw ConfigError("view separation needs an identifier-oblivious decider");
    NeighborhoodCollection Q = enumerate_Q(m, r, cap, i0, params);
    SeparatorOutcome out;
    for (const auto& [key, view] : Q.views) {
        bool yes = A.eval(view);
        out.transcript.emplace_back(key, yes);
        if (!yes) out.any_no = true;
        ++out.examined;
    }
    out.bit = out.any_no ? 1 : 0;
    return out;
}

// Builds one bit-1 probe instance (whole when the machine halts within 2r
// steps, a pivot corner otherwise), hands out identifiers, and runs the
// decider at every node within distance r of the pivot. Output bit 0 means
// some probe node rejected.
inline SeparatorOutcome separate_by_instance(const LocalAlgorithm& A, const TuringMachine& m,
                                             std::uint64_t r,
                                             std::optional<ConstructionParams> params = std::nullopt) {
    if (A.radius != r) throw ConfigError("decider radius must match the probe radius");
    ConstructionParams p;
    if (params) {
        p = *params;
        if (p.r != r) throw ConfigError("construction params disagree with the requested radius");
    } else {
        p.r = r;
    }
    m.validate();

    LabelledGraph g;
    NodeIndex pivot = 0;
    SeparatorOutcome out;
    if (run_bounded(m, 2 * r).halted) {
        ConstructionParams pj = p;
        pj.pivot_bit = 1;
        g = build_J(m, pj);
        out.whole_instance = true;
    } else {
        auto part = detail::build_partial_assembly(m, p, 2 * r, 1, 0, 0);
        g = std::move(part.g);
        pivot = part.pivot;
    }
    for (std::size_t i = 0; i < g.size(); ++i) g.nodes[i].id = i + 1;
    if (A.uses_oracle_labels) apply_constant_oracle_labels(g, LabelValue::of_nat(g.size()));

    auto dist = g.distances_from(pivot);
    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (dist[v] > r) continue;
        bool yes = A.eval(ball(g, v, A.radius, A.oblivious));
        ++out.examined;
        if (!yes) out.any_no = true;
    }
    out.bit = out.any_no ? 0 : 1;
    return out;
}

// ---- stock deciders for exercising the separators ----

inline LocalAlgorithm decider_constant_yes(std::uint64_t r = 1) {
    LocalAlgorithm a;
    a.name = "constant-yes";
    a.radius = r;
    a.decide = [](const View&) { return true; };
    return a;
}

inline LocalAlgorithm decider_constant_no(std::uint64_t r = 1) {
    LocalAlgorithm a;
    a.name = "constant-no";
    a.radius = r;
    a.decide = [](const View&) { return false; };
    return a;
}

// Rejects any view showing a tableau cell whose head state is its machine's
// accepting halt state. Oracle-label tolerant so it can run on enumerated
// views directly.
inline LocalAlgorithm decider_halt1_rejector(std::uint64_t r = 1) {
    LocalAlgorithm a;
    a.name = "halt1-rejector";
    a.radius = r;
    a.uses_oracle_labels = true;
    a.decide = [](const View& v) {
        for (const auto& n : v.nodes) {
            auto l = TableauNodeLabel::try_decode(n.input);
            if (!l) continue;
            if (l->role != Role::Grid && l->role != Role::FragmentGrid) continue;
            if (l->cell.head < 0) continue;
            const TuringMachine* m = cached_machine(l->machine_bits);
            if (m && std::size_t(l->cell.head) == m->halt1) return false;
        }
        return true;
    };
    return a;
}

// At a bit-carrying pivot, replays the machine for 2r steps and rejects a
// mismatched claim. Identifier-using so only the instance probe accepts it.
inline LocalAlgorithm decider_pivot_stub(std::uint64_t r = 1) {
    LocalAlgorithm a;
    a.name = "pivot-stub";
    a.radius = r;
    a.oblivious = false;
    a.decide = [r](const View& v) {
        auto l = TableauNodeLabel::try_decode(v.nodes[0].input);
        if (!l || l->role != Role::Grid || !l->pivot || !l->pivot_bit) return true;
        const TuringMachine* m = cached_machine(l->machine_bits);
        if (!m) return true;
        RunOutcome run = run_bounded(*m, 2 * r);
        return !(run.halted && run.bit != *l->pivot_bit);
    };
    return a;
}

} // namespace locdec
