#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "constructions.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "label.hpp"
#include "oracle.hpp"
#include "runtime.hpp"
#include "turing.hpp"

namespace locdec {

// Hard ceiling on machine replays performed inside deciders, so a crafted
// label cannot stall a run. Instances large enough to need more steps than
// this would have over 10^12 nodes.
constexpr std::uint64_t k_sim_guard = 1000000;

// One decider for a language, together with the decision class it lives in.
// Tags: LD uses identifiers, LDO is identifier-oblivious, the ^f variants
// additionally read scalar oracle labels (oracle_name says which oracle).
struct DeciderEntry {
    std::string class_tag;
    std::string oracle_name;
    LocalAlgorithm alg;
};

struct Language {
    std::string name;
    std::optional<Family> family; // set when members are gadget instances
    std::function<bool(const LabelledGraph&)> membership;
    std::vector<DeciderEntry> deciders;
};

inline bool decider_tag_consistent(const DeciderEntry& d) {
    bool ids = d.class_tag == "LD" || d.class_tag == "LD^f";
    bool oracle = d.class_tag == "LD^f" || d.class_tag == "LDO^f";
    if (!ids && d.class_tag != "LDO" && d.class_tag != "LDO^f") return false;
    return d.alg.oblivious == !ids && d.alg.uses_oracle_labels == oracle &&
           d.oracle_name.empty() == !oracle;
}

namespace detail {

inline bool label_is_bit(const LabelValue& v) {
    return v.bits() == "0" || v.bits() == "1";
}

} // namespace detail

// Properly 2-colored graphs: inputs are single bits and no edge repeats one.
inline Language lang_two_coloring() {
    Language L;
    L.name = "two-coloring";
    L.membership = [](const LabelledGraph& g) {
        try {
            g.validate();
        } catch (const Error&) {
            return false;
        }
        for (const auto& n : g.nodes) {
            if (!detail::label_is_bit(n.input)) return false;
        }
        for (const auto& [u, v] : g.edges()) {
            if (g.nodes[u].input == g.nodes[v].input) return false;
        }
        return true;
    };
    LocalAlgorithm a;
    a.name = "two-coloring/ldo";
    a.radius = 1;
    a.decide = [](const View& v) {
        if (!detail::label_is_bit(v.nodes[0].input)) return false;
        for (std::size_t i : v.neighbors(0)) {
            if (v.nodes[i].input == v.nodes[0].input) return false;
        }
        return true;
    };
    L.deciders.push_back({"LDO", "", a});
    return L;
}

// Graphs with an even number of nodes; decided at radius 0 by reading the
// size announced by the constant oracle.
inline Language lang_parity() {
    Language L;
    L.name = "parity";
    L.membership = [](const LabelledGraph& g) {
        try {
            g.validate();
        } catch (const Error&) {
            return false;
        }
        return g.size() % 2 == 0;
    };
    LocalAlgorithm a;
    a.name = "parity/ldof";
    a.radius = 0;
    a.uses_oracle_labels = true;
    a.decide = [](const View& v) {
        const auto& o = v.nodes[0].oracle;
        if (!o || o->bits().empty()) return false;
        return o->bits().back() == '0'; // even numbers end in 0, any bit length
    };
    L.deciders.push_back({"LDO^f", "const-n", a});
    return L;
}

// Tailed tableau instances whose machine outputs 0. The identifier-using
// decider replays the machine for id(v) steps at every machine-carrying
// node; some identifier always exceeds the halting time, so a wrong output
// bit is caught somewhere.
inline Language lang_tableau_zero() {
    Language L;
    L.name = "tableau-zero";
    L.family = Family::G;
    L.membership = [](const LabelledGraph& g) {
        auto f = validate_instance(g, Family::G);
        return f.ok && f.output == 0;
    };
    LocalAlgorithm a;
    a.name = "tableau-zero/ld";
    a.radius = 2;
    a.oblivious = false;
    a.decide = [](const View& v) {
        if (!detail::check_view(Family::G, v)) return false;
        auto l = TableauNodeLabel::try_decode(v.nodes[0].input);
        if (!l) return false;
        if (l->role == Role::Grid || l->role == Role::FragmentGrid || l->role == Role::Spoke) {
            const TuringMachine* m = cached_machine(l->machine_bits);
            if (!m) return false;
            std::uint64_t steps = std::min<std::uint64_t>(v.nodes[0].id.value_or(0), k_sim_guard);
            RunOutcome out = run_bounded(*m, steps);
            if (out.halted && out.bit != 0) return false;
        }
        return true;
    };
    L.deciders.push_back({"LD", "", a});
    return L;
}

// Bit-carrying tableau instances whose claimed pivot bit equals the real
// output. The pivot replays the machine using the announced size bound as
// its step budget.
inline Language lang_pivot_bit_match() {
    Language L;
    L.name = "pivot-bit-match";
    L.family = Family::J;
    L.membership = [](const LabelledGraph& g) {
        auto f = validate_instance(g, Family::J);
        return f.ok && f.pivot_bit && f.output == *f.pivot_bit;
    };
    LocalAlgorithm a;
    a.name = "pivot-bit-match/ldof";
    a.radius = 2;
    a.uses_oracle_labels = true;
    a.decide = [](const View& v) {
        if (!detail::check_view(Family::J, v)) return false;
        auto l = TableauNodeLabel::try_decode(v.nodes[0].input);
        if (!l) return false;
        if (l->role == Role::Grid && l->pivot) {
            if (!l->pivot_bit) return false;
            const TuringMachine* m = cached_machine(l->machine_bits);
            if (!m) return false;
            const auto& o = v.nodes[0].oracle;
            if (!o) return false;
            std::uint64_t budget = std::min(o->to_nat_saturating(), k_sim_guard);
            RunOutcome out = run_bounded(*m, budget);
            return out.halted && out.bit == *l->pivot_bit;
        }
        return true;
    };
    L.deciders.push_back({"LDO^f", "upper-bound", a});
    return L;
}

// Plain tableau instances whose machine outputs 0, decided without
// identifiers: whichever node holds the long halting-bit label uses the
// label's length (the instance size) as its replay budget.
inline Language lang_plain_tableau_zero() {
    Language L;
    L.name = "plain-tableau-zero";
    L.family = Family::H;
    L.membership = [](const LabelledGraph& g) {
        auto f = validate_instance(g, Family::H);
        return f.ok && f.output == 0;
    };
    LocalAlgorithm a;
    a.name = "plain-tableau-zero/ldof";
    a.radius = 2;
    a.uses_oracle_labels = true;
    a.decide = [](const View& v) {
        if (!detail::check_view(Family::H, v)) return false;
        const auto& o = v.nodes[0].oracle;
        if (!o) return false;
        if (o->bits().size() >= 2) {
            auto l = TableauNodeLabel::try_decode(v.nodes[0].input);
            if (!l) return false;
            const TuringMachine* m = cached_machine(l->machine_bits);
            if (!m) return false;
            std::uint64_t budget = std::min<std::uint64_t>(o->bits().size(), k_sim_guard);
            RunOutcome out = run_bounded(*m, budget);
            return out.halted && out.bit == 0;
        }
        return true;
    };
    L.deciders.push_back({"LDO^f", "halting-bits(10000)", a});
    return L;
}

// Sized paths whose size indexes a machine that halts within the oracle's
// budget. The path length names the machine; the node holding the full
// halting-bit string reads the machine's own bit off its end.
inline Language lang_path_halting() {
    Language L;
    L.name = "path-halting";
    L.family = Family::P;
    L.membership = [](const LabelledGraph& g) {
        auto f = validate_instance(g, Family::P);
        if (!f.ok) return false;
        return run_bounded(machine_for_index(f.path_n), halting_bits_budget_default()).halted;
    };
    LocalAlgorithm a;
    a.name = "path-halting/ldof";
    a.radius = 2;
    a.uses_oracle_labels = true;
    a.decide = [](const View& v) {
        if (!detail::check_view(Family::P, v)) return false;
        auto l = TableauNodeLabel::try_decode(v.nodes[0].input);
        if (!l) return false;
        const auto& o = v.nodes[0].oracle;
        if (!o) return false;
        if (o->bits().size() == l->path_n) return o->bits().back() == '1';
        return true;
    };
    L.deciders.push_back({"LDO^f", "halting-bits(10000)", a});
    return L;
}

inline const std::vector<Language>& languages() {
    static const std::vector<Language> all = {
        lang_two_coloring(),   lang_parity(),
        lang_tableau_zero(),   lang_pivot_bit_match(),
        lang_plain_tableau_zero(), lang_path_halting(),
    };
    return all;
}

inline const Language& language_by_name(const std::string& name) {
    for (const auto& l : languages()) {
        if (l.name == name) return l;
    }
    throw ConfigError("unknown language: " + name);
}

} // namespace locdec
