#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "constructions.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "languages.hpp"
#include "turing.hpp"

namespace locdec {

// A frozen instance with its expected verdicts: `valid` is what the
// structural validator must say, `member` what the family's language
// membership must say. Corrupted variants expect false for both.
struct CorpusEntry {
    std::string name;
    Family family;
    bool valid = false;
    bool member = false;
    LabelledGraph graph;
};

inline std::string family_language(Family f) {
    switch (f) {
        case Family::H: return "plain-tableau-zero";
        case Family::G: return "tableau-zero";
        case Family::J: return "pivot-bit-match";
        case Family::P: return "path-halting";
    }
    return "?";
}

inline const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = [] {
        std::vector<CorpusEntry> out;
        auto add = [&](std::string name, Family fam, bool valid, bool member, LabelledGraph g) {
            out.push_back(CorpusEntry{std::move(name), fam, valid, member, std::move(g)});
        };
        auto mk = [](std::uint64_t r, std::uint64_t N, std::uint64_t mf,
                     std::optional<int> bit = std::nullopt) {
            ConstructionParams p;
            p.r = r;
            p.N = N;
            p.max_fragments = mf;
            p.pivot_bit = bit;
            return p;
        };

        add("h-zero-r1", Family::H, true, true, build_H(m_zero(), mk(1, 1, 2)));
        add("h-one-r1", Family::H, true, false, build_H(m_one(), mk(1, 1, 1)));
        add("h-zero-r2", Family::H, true, true, build_H(m_zero(), mk(2, 1, 1)));
        add("g-zero-r1", Family::G, true, true, build_G(m_zero(), mk(1, 3, 2)));
        add("g-one-r1", Family::G, true, false, build_G(m_one(), mk(1, 1, 1)));
        add("g-count2-r1", Family::G, true, true, build_G(m_count(2), mk(1, 2, 1)));
        add("j-zero-bit0", Family::J, true, true, build_J(m_zero(), mk(1, 1, 1, 0)));
        add("j-one-bit1", Family::J, true, true, build_J(m_one(), mk(1, 1, 1, 1)));
        add("j-one-bit0", Family::J, true, false, build_J(m_one(), mk(1, 1, 1, 0)));
        add("j-count3-bit0", Family::J, true, true, build_J(m_count(3), mk(1, 1, 0, 0)));
        add("p-1", Family::P, true, true, build_P(1));
        add("p-3", Family::P, true, false, build_P(3));
        add("p-70", Family::P, true, true, build_P(70));

        std::size_t base_count = out.size();
        for (const auto& c : corruption_catalog()) {
            bool placed = false;
            for (std::size_t i = 0; i < base_count && !placed; ++i) {
                const CorpusEntry& b = out[i];
                if (!b.valid || !c.families.count(b.family)) continue;
                if (!c.applies(b.graph)) continue;
                add("corrupt-" + c.name + "-of-" + b.name, b.family, false, false,
                    c.apply(b.graph));
                placed = true;
            }
            if (!placed)
                throw std::logic_error("no corpus base accepts corruption " + c.name);
        }
        return out;
    }();
    return entries;
}

inline nlohmann::json corpus_manifest() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : corpus()) {
        arr.push_back({{"name", e.name},
                       {"family", family_name(e.family)},
                       {"language", family_language(e.family)},
                       {"nodes", e.graph.size()},
                       {"edges", e.graph.edges().size()},
                       {"valid", e.valid},
                       {"member", e.member}});
    }
    return arr;
}

} // namespace locdec
