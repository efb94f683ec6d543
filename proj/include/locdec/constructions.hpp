#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "label.hpp"
#include "runtime.hpp"
#include "turing.hpp"

namespace locdec {

// Node roles inside the tableau gadget graphs. Grid cells form the run
// tableau of a machine; fragment cells are window gadgets hanging off the
// pivot via spoke nodes; tail nodes form the labelled path attached to the
// pivot; path nodes are the standalone sized-path family.
enum class Role : std::uint8_t { Grid = 0, FragmentGrid = 1, Tail = 2, Spoke = 3, Path = 4 };

enum class Family : std::uint8_t { H = 0, G = 1, J = 2, P = 3 };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::H: return "H";
        case Family::G: return "G";
        case Family::J: return "J";
        case Family::P: return "P";
    }
    return "?";
}

inline Family family_from_string(const std::string& s) {
    if (s == "H") return Family::H;
    if (s == "G") return Family::G;
    if (s == "J") return Family::J;
    if (s == "P") return Family::P;
    throw ConfigError("unknown family: " + s);
}

struct TableauNodeLabel {
    Role role = Role::Grid;
    std::string machine_bits; // grid, fragment grid, spoke
    std::uint64_t radius = 0; // ditto
    TapeCell cell;            // grid roles
    std::uint8_t ci = 0, cj = 0;
    bool top = false, left = false, bottom = false, right = false, pivot = false;
    std::optional<int> pivot_bit;
    std::uint64_t fragment = 0; // 0 on table grid cells, >= 1 on fragment cells and spokes
    std::uint64_t index = 0;    // tail position
    std::uint64_t path_n = 0, path_d = 0;

    std::uint64_t flag_mask() const {
        return (top ? 1u : 0u) | (left ? 2u : 0u) | (bottom ? 4u : 0u) | (right ? 8u : 0u) |
               (pivot ? 16u : 0u);
    }

    LabelValue encode() const {
        std::vector<LabelValue> f;
        f.push_back(LabelValue::of_nat(std::uint64_t(role)));
        switch (role) {
            case Role::Grid:
            case Role::FragmentGrid:
                f.push_back(LabelValue::of_bits(machine_bits));
                f.push_back(LabelValue::of_nat(radius));
                f.push_back(LabelValue::of_nat(std::uint64_t(cell.sym)));
                f.push_back(LabelValue::of_nat(std::uint64_t(cell.head + 1)));
                f.push_back(LabelValue::of_nat(ci));
                f.push_back(LabelValue::of_nat(cj));
                f.push_back(LabelValue::of_nat(flag_mask()));
                f.push_back(LabelValue::of_nat(pivot_bit ? std::uint64_t(*pivot_bit + 1) : 0));
                f.push_back(LabelValue::of_nat(fragment));
                break;
            case Role::Tail:
                f.push_back(LabelValue::of_nat(index));
                break;
            case Role::Spoke:
                f.push_back(LabelValue::of_bits(machine_bits));
                f.push_back(LabelValue::of_nat(radius));
                f.push_back(LabelValue::of_nat(fragment));
                break;
            case Role::Path:
                f.push_back(LabelValue::of_nat(path_n));
                f.push_back(LabelValue::of_nat(path_d));
                break;
        }
        return LabelValue::of_tuple(f);
    }

    static TableauNodeLabel decode(const LabelValue& v) {
        auto f = v.tuple_fields();
        if (f.empty()) throw ValidationError("empty node label");
        std::uint64_t role_n = f[0].to_nat();
        if (role_n > 4) throw ValidationError("bad role in node label");
        TableauNodeLabel out;
        out.role = Role(role_n);
        auto nat = [&](std::size_t i) { return f[i].to_nat(); };
        switch (out.role) {
            case Role::Grid:
            case Role::FragmentGrid: {
                if (f.size() != 10) throw ValidationError("grid label has wrong arity");
                out.machine_bits = f[1].bits();
                out.radius = nat(2);
                std::uint64_t sym = nat(3), headp = nat(4), flags = nat(7), bitp = nat(8);
                if (out.radius < 1) throw ValidationError("grid label radius must be >= 1");
                if (sym > 2) throw ValidationError("bad symbol in grid label");
                if (headp > 1u << 20) throw ValidationError("bad head state in grid label");
                if (flags >= 32) throw ValidationError("bad flags in grid label");
                if (bitp > 2) throw ValidationError("bad pivot bit in grid label");
                out.cell.sym = Sym(sym);
                out.cell.head = int(headp) - 1;
                out.ci = std::uint8_t(nat(5));
                out.cj = std::uint8_t(nat(6));
                if (out.ci > 2 || out.cj > 2) throw ValidationError("bad coordinate residue");
                out.top = flags & 1;
                out.left = flags & 2;
                out.bottom = flags & 4;
                out.right = flags & 8;
                out.pivot = flags & 16;
                if (bitp) out.pivot_bit = int(bitp) - 1;
                out.fragment = nat(9);
                if (out.role == Role::Grid && out.fragment != 0)
                    throw ValidationError("table grid cells carry no fragment id");
                if (out.role == Role::FragmentGrid && out.fragment == 0)
                    throw ValidationError("fragment cells need a fragment id");
                break;
            }
            case Role::Tail:
                if (f.size() != 2) throw ValidationError("tail label has wrong arity");
                out.index = nat(1);
                if (out.index < 1) throw ValidationError("tail indices start at 1");
                break;
            case Role::Spoke:
                if (f.size() != 4) throw ValidationError("spoke label has wrong arity");
                out.machine_bits = f[1].bits();
                out.radius = nat(2);
                out.fragment = nat(3);
                if (out.radius < 1) throw ValidationError("spoke label radius must be >= 1");
                if (out.fragment < 1) throw ValidationError("spoke label needs a fragment id");
                break;
            case Role::Path:
                if (f.size() != 3) throw ValidationError("path label has wrong arity");
                out.path_n = nat(1);
                out.path_d = nat(2);
                if (out.path_n < 1 || out.path_d >= out.path_n)
                    throw ValidationError("path label distance out of range");
                break;
        }
        return out;
    }

    static std::optional<TableauNodeLabel> try_decode(const LabelValue& v) {
        try {
            return decode(v);
        } catch (const Error&) {
            return std::nullopt;
        }
    }
};

// Decodes machine encodings at most once each; labels repeat the same bits
// across every cell of an instance.
inline const TuringMachine* cached_machine(const std::string& bits) {
    static std::mutex mu;
    static std::map<std::string, std::optional<TuringMachine>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(bits);
    if (it == cache.end()) {
        std::optional<TuringMachine> m;
        try {
            m = TuringMachine::decode(LabelValue::of_bits(bits));
        } catch (const Error&) {
        }
        it = cache.emplace(bits, std::move(m)).first;
    }
    return it->second ? &*it->second : nullptr;
}

struct ConstructionParams {
    std::uint64_t r = 1;              // checking radius carried in labels
    std::uint64_t N = 1;              // tail length for the tailed family
    std::optional<int> pivot_bit;     // claimed output bit for the bit family
    std::uint64_t frag_w = 0, frag_h = 0; // 0 means the default 2r+2
    std::uint64_t fragment_cap = 1000000; // enumeration cap (completed windows)
    std::uint64_t tm_budget = 10000;      // step budget for the table
    std::optional<std::uint64_t> max_fragments; // attach only the first k fragments

    std::uint64_t w() const { return frag_w ? frag_w : 2 * r + 2; }
    std::uint64_t h() const { return frag_h ? frag_h : 2 * r + 2; }

    void validate() const {
        if (r < 1) throw ConfigError("radius must be >= 1");
        if (N < 1) throw ConfigError("tail length must be >= 1");
        if (pivot_bit && *pivot_bit != 0 && *pivot_bit != 1)
            throw ConfigError("pivot bit must be 0 or 1");
        if (fragment_cap < 1) throw ConfigError("fragment cap must be >= 1");
        if (tm_budget < 1) throw ConfigError("step budget must be >= 1");
    }
};

// ---- the window engine ----
//
// A fragment row is checked against its successor cell by cell. Each check
// sees the cell plus its two horizontal sides, where a side is either a
// real cell, the table border (the window edge coincides with the table
// edge), or unknown (the table continues outside the window).

enum class SideKind : std::uint8_t { Cell, Border, Unknown };

struct Side {
    SideKind kind = SideKind::Unknown;
    TapeCell cell;
    static Side border() { return Side{SideKind::Border, {}}; }
    static Side unknown() { return Side{SideKind::Unknown, {}}; }
    static Side of(TapeCell c) { return Side{SideKind::Cell, c}; }
};

// States a head can be in right after stepping into a column from the left.
inline std::vector<std::size_t> enter_from_left(const TuringMachine& m) {
    std::set<std::size_t> qs;
    for (std::size_t q = 0; q < m.num_states(); ++q) {
        if (m.is_halt(q)) continue;
        for (std::size_t s = 0; s < 3; ++s) {
            if (m.delta[q][s] && m.delta[q][s]->move == Move::R) qs.insert(m.delta[q][s]->next);
        }
    }
    return {qs.begin(), qs.end()};
}

inline std::vector<std::size_t> enter_from_right(const TuringMachine& m) {
    std::set<std::size_t> qs;
    for (std::size_t q = 0; q < m.num_states(); ++q) {
        if (m.is_halt(q)) continue;
        for (std::size_t s = 0; s < 3; ++s) {
            if (m.delta[q][s] && m.delta[q][s]->move == Move::L) qs.insert(m.delta[q][s]->next);
        }
    }
    return {qs.begin(), qs.end()};
}

// All possible contents of the cell directly below `mid`, or nullopt when
// the triple cannot occur in any run tableau (two heads, a halted head with
// a successor row, a head walking off the right table edge). A head can
// land in a column only from that column or the two beside it, so when all
// three are visible the successor is forced. `allow_entering` admits a head
// stepping in across an unknown side; callers must clear it whenever the
// row is known to contain a head elsewhere.
inline std::optional<std::vector<TapeCell>> below_options(const TuringMachine& m, const Side& left,
                                                          const TapeCell& mid, const Side& right,
                                                          bool allow_entering) {
    auto head_of = [&](const Side& s) { return s.kind == SideKind::Cell ? s.cell.head : -1; };
    int lh = head_of(left), rh = head_of(right);
    int visible = (mid.head >= 0) + (lh >= 0) + (rh >= 0);
    if (visible > 1) return std::nullopt;
    auto bad_state = [&](int q) { return q >= 0 && std::size_t(q) >= m.num_states(); };
    if (bad_state(mid.head) || bad_state(lh) || bad_state(rh)) return std::nullopt;
    // A row containing a halted head is final; it has no successor.
    if (mid.head >= 0 && m.is_halt(std::size_t(mid.head))) return std::nullopt;
    if (lh >= 0 && m.is_halt(std::size_t(lh))) return std::nullopt;
    if (rh >= 0 && m.is_halt(std::size_t(rh))) return std::nullopt;

    if (mid.head >= 0) {
        const Transition& t = m.at(std::size_t(mid.head), mid.sym);
        TapeCell below{t.write, -1};
        if (t.move == Move::S) {
            below.head = int(t.next);
        } else if (t.move == Move::L) {
            // Moving left from column 0 stays put.
            if (left.kind == SideKind::Border) below.head = int(t.next);
        } else {
            if (right.kind == SideKind::Border) return std::nullopt;
        }
        return std::vector<TapeCell>{below};
    }
    if (lh >= 0) {
        const Transition& t = m.at(std::size_t(lh), left.cell.sym);
        return std::vector<TapeCell>{TapeCell{mid.sym, t.move == Move::R ? int(t.next) : -1}};
    }
    if (rh >= 0) {
        const Transition& t = m.at(std::size_t(rh), right.cell.sym);
        return std::vector<TapeCell>{TapeCell{mid.sym, t.move == Move::L ? int(t.next) : -1}};
    }

    std::vector<TapeCell> opts{TapeCell{mid.sym, -1}};
    if (allow_entering) {
        std::set<int> seen{-1};
        if (left.kind == SideKind::Unknown) {
            for (std::size_t q : enter_from_left(m)) {
                if (seen.insert(int(q)).second) opts.push_back(TapeCell{mid.sym, int(q)});
            }
        }
        if (right.kind == SideKind::Unknown) {
            for (std::size_t q : enter_from_right(m)) {
                if (seen.insert(int(q)).second) opts.push_back(TapeCell{mid.sym, int(q)});
            }
        }
    }
    return opts;
}

// ---- fragments ----
//
// A fragment is a w x h window that could be cut out of some run tableau of
// the machine: cell contents, the window corner's coordinates mod 3, and
// claims saying which window edges coincide with table edges.

struct FragClaims {
    bool top = false, left = false, bottom = false, right = false;
    bool operator==(const FragClaims&) const = default;
};

struct Fragment {
    std::uint64_t w = 0, h = 0;
    std::uint8_t ci0 = 0, cj0 = 0;
    FragClaims claims;
    std::vector<TapeCell> cells; // row-major

    const TapeCell& at(std::uint64_t i, std::uint64_t j) const { return cells[i * w + j]; }
    TapeCell& at(std::uint64_t i, std::uint64_t j) { return cells[i * w + j]; }

    std::string key() const {
        std::string s;
        s += std::to_string(w) + "x" + std::to_string(h) + ";";
        s += std::to_string(ci0) + "," + std::to_string(cj0) + ";";
        s += claims.top ? 'T' : '.';
        s += claims.left ? 'L' : '.';
        s += claims.bottom ? 'B' : '.';
        s += claims.right ? 'R' : '.';
        s += ';';
        for (const TapeCell& c : cells) {
            s += sym_str(c.sym);
            if (c.head >= 0) s += "q" + std::to_string(c.head);
            s += ',';
        }
        return s;
    }
};

// Full re-validation of a window against the machine: exactly the rules the
// enumerator builds from, so membership checking never trusts the builder.
inline bool fragment_window_consistent(const TuringMachine& m, const Fragment& f) {
    if (f.w < 1 || f.h < 1 || f.cells.size() != f.w * f.h) return false;
    if (f.ci0 > 2 || f.cj0 > 2) return false;
    if (f.claims.top && f.ci0 != 0) return false;
    if (f.claims.left && f.cj0 != 0) return false;
    for (std::uint64_t i = 0; i < f.h; ++i) {
        int heads = 0;
        for (std::uint64_t j = 0; j < f.w; ++j) {
            int q = f.at(i, j).head;
            if (q >= 0) {
                if (std::size_t(q) >= m.num_states()) return false;
                ++heads;
            }
        }
        if (heads > 1) return false;
    }
    if (f.claims.top) {
        for (std::uint64_t j = 0; j < f.w; ++j) {
            if (f.at(0, j).sym != Sym::Blank) return false;
            int want = (j == 0 && f.claims.left) ? int(m.start) : -1;
            if (f.at(0, j).head != want) return false;
        }
    }
    auto side_at = [&](std::uint64_t i, std::int64_t j) -> Side {
        if (j < 0) return f.claims.left ? Side::border() : Side::unknown();
        if (std::uint64_t(j) >= f.w) return f.claims.right ? Side::border() : Side::unknown();
        return Side::of(f.at(i, std::uint64_t(j)));
    };
    for (std::uint64_t i = 0; i + 1 < f.h; ++i) {
        bool rowhead = false;
        for (std::uint64_t j = 0; j < f.w; ++j) {
            int q = f.at(i, j).head;
            if (q >= 0) {
                if (m.is_halt(std::size_t(q))) return false; // only the final row may halt
                rowhead = true;
            }
        }
        for (std::uint64_t j = 0; j < f.w; ++j) {
            auto opts = below_options(m, side_at(i, std::int64_t(j) - 1), f.at(i, j),
                                      side_at(i, std::int64_t(j) + 1), !rowhead);
            if (!opts) return false;
            if (std::find(opts->begin(), opts->end(), f.at(i + 1, j)) == opts->end()) return false;
        }
    }
    std::uint64_t last = f.h - 1;
    for (std::uint64_t j = 0; j < f.w; ++j) {
        int q = f.at(last, j).head;
        if (q < 0) continue;
        bool halt = m.is_halt(std::size_t(q));
        if (f.claims.bottom) {
            if (!halt) return false;
        } else {
            if (halt) return false;
            const Transition& t = m.at(std::size_t(q), f.at(last, j).sym);
            if (t.move == Move::R && j == f.w - 1 && f.claims.right) return false;
        }
    }
    return true;
}

struct FragmentEnumeration {
    std::vector<Fragment> fragments; // deduplicated, sorted by key
    bool complete = true;
    std::uint64_t leaves = 0; // completed candidate windows before dedup
};

// Enumerates every machine-consistent window of the given dimensions. The
// cap counts completed candidate windows; blowing it stops the walk with
// complete=false and whatever was found so far.
inline FragmentEnumeration enumerate_fragments(const TuringMachine& m, std::uint64_t w,
                                               std::uint64_t h, std::uint64_t cap) {
    m.validate();
    if (w < 1 || h < 1) throw ConfigError("fragment dimensions must be >= 1");
    FragmentEnumeration out;
    std::set<std::string> seen;
    auto eL = enter_from_left(m), eR = enter_from_right(m);
    const std::uint64_t explored_cap = cap > (UINT64_MAX >> 7) ? UINT64_MAX : 64 * cap + 4096;
    std::uint64_t explored = 0;
    bool stop = false;

    for (int mask = 0; mask < 16 && !stop; ++mask) {
        FragClaims cl;
        cl.top = mask & 1;
        cl.left = mask & 2;
        cl.bottom = mask & 4;
        cl.right = mask & 8;
        for (std::uint8_t ci0 = 0; ci0 <= (cl.top ? 0 : 2) && !stop; ++ci0) {
            for (std::uint8_t cj0 = 0; cj0 <= (cl.left ? 0 : 2) && !stop; ++cj0) {
                // Row 0 candidates.
                std::vector<std::vector<TapeCell>> starts;
                if (cl.top) {
                    std::vector<TapeCell> row(w);
                    if (cl.left) row[0].head = int(m.start);
                    starts.push_back(std::move(row));
                } else {
                    std::vector<std::size_t> digits(w, 0);
                    while (true) {
                        std::vector<TapeCell> base(w);
                        for (std::uint64_t j = 0; j < w; ++j) base[j].sym = Sym(digits[j]);
                        starts.push_back(base);
                        for (std::uint64_t j = 0; j < w; ++j) {
                            for (std::size_t q = 0; q < m.num_states(); ++q) {
                                if (h > 1 && m.is_halt(q)) continue;
                                auto row = base;
                                row[j].head = int(q);
                                starts.push_back(std::move(row));
                            }
                        }
                        std::size_t d = 0;
                        while (d < w && digits[d] == 2) digits[d++] = 0;
                        if (d == w) break;
                        ++digits[d];
                    }
                }

                std::vector<std::vector<TapeCell>> rows;
                auto emit = [&]() {
                    ++out.leaves;
                    if (out.leaves > cap) {
                        out.complete = false;
                        stop = true;
                        return;
                    }
                    Fragment f;
                    f.w = w;
                    f.h = h;
                    f.ci0 = ci0;
                    f.cj0 = cj0;
                    f.claims = cl;
                    for (const auto& row : rows)
                        f.cells.insert(f.cells.end(), row.begin(), row.end());
                    if (!fragment_window_consistent(m, f)) return; // enumerator bug guard
                    if (seen.insert(f.key()).second) out.fragments.push_back(std::move(f));
                };
                auto extend = [&](auto&& self) -> void {
                    if (stop) return;
                    std::uint64_t i = rows.size() - 1;
                    const auto& row = rows.back();
                    if (i + 1 == h) {
                        // Final-row rules.
                        for (std::uint64_t j = 0; j < w; ++j) {
                            int q = row[j].head;
                            if (q < 0) continue;
                            bool halt = m.is_halt(std::size_t(q));
                            if (cl.bottom) {
                                if (!halt) return;
                            } else {
                                if (halt) return;
                                const Transition& t = m.at(std::size_t(q), row[j].sym);
                                if (t.move == Move::R && j == w - 1 && cl.right) return;
                            }
                        }
                        emit();
                        return;
                    }
                    std::int64_t headj = -1;
                    for (std::uint64_t j = 0; j < w; ++j) {
                        if (row[j].head >= 0) headj = std::int64_t(j);
                    }
                    if (headj >= 0 && m.is_halt(std::size_t(row[std::size_t(headj)].head))) return;
                    auto side_at = [&](std::int64_t j) -> Side {
                        if (j < 0) return cl.left ? Side::border() : Side::unknown();
                        if (std::uint64_t(j) >= w) return cl.right ? Side::border() : Side::unknown();
                        return Side::of(row[std::size_t(j)]);
                    };
                    if (headj >= 0) {
                        std::vector<TapeCell> next(w);
                        for (std::uint64_t j = 0; j < w; ++j) {
                            auto opts = below_options(m, side_at(std::int64_t(j) - 1), row[j],
                                                      side_at(std::int64_t(j) + 1), false);
                            if (!opts) return;
                            next[j] = opts->front();
                        }
                        if (++explored > explored_cap) {
                            out.complete = false;
                            stop = true;
                            return;
                        }
                        rows.push_back(std::move(next));
                        self(self);
                        rows.pop_back();
                        return;
                    }
                    std::vector<TapeCell> base(w);
                    for (std::uint64_t j = 0; j < w; ++j) base[j].sym = row[j].sym;
                    std::vector<std::vector<TapeCell>> variants{base};
                    std::set<std::pair<std::uint64_t, int>> added;
                    if (!cl.left) {
                        for (std::size_t q : eL) {
                            if (!added.insert({0, int(q)}).second) continue;
                            auto v2 = base;
                            v2[0].head = int(q);
                            variants.push_back(std::move(v2));
                        }
                    }
                    if (!cl.right) {
                        for (std::size_t q : eR) {
                            if (!added.insert({w - 1, int(q)}).second) continue;
                            auto v2 = base;
                            v2[w - 1].head = int(q);
                            variants.push_back(std::move(v2));
                        }
                    }
                    for (auto& v2 : variants) {
                        if (stop) return;
                        if (++explored > explored_cap) {
                            out.complete = false;
                            stop = true;
                            return;
                        }
                        rows.push_back(std::move(v2));
                        self(self);
                        rows.pop_back();
                    }
                };
                for (auto& r0 : starts) {
                    if (stop) break;
                    // Claimed-top start rows must also satisfy row-0 content rules,
                    // which they do by construction; unclaimed rows are free.
                    if (++explored > explored_cap) {
                        out.complete = false;
                        stop = true;
                        break;
                    }
                    rows.clear();
                    rows.push_back(r0);
                    extend(extend);
                }
            }
        }
    }
    std::sort(out.fragments.begin(), out.fragments.end(),
              [](const Fragment& a, const Fragment& b) { return a.key() < b.key(); });
    return out;
}

inline std::vector<Fragment> build_fragments(const TuringMachine& m, const ConstructionParams& p) {
    p.validate();
    auto res = enumerate_fragments(m, p.w(), p.h(), p.fragment_cap);
    if (!res.complete)
        throw CapacityError("fragment enumeration outgrew its cap", p.fragment_cap,
                            res.fragments.size());
    return std::move(res.fragments);
}

// Cuts the w x h window at (i0, j0) out of a real run tableau; the claims
// record which window edges lie on the table edges. Reference for tests.
inline Fragment window_of_table(const ExecutionTable& t, std::uint64_t i0, std::uint64_t j0,
                                std::uint64_t w, std::uint64_t h) {
    if (i0 + h > t.side() || j0 + w > t.side()) throw ConfigError("window exceeds the table");
    Fragment f;
    f.w = w;
    f.h = h;
    f.ci0 = std::uint8_t(i0 % 3);
    f.cj0 = std::uint8_t(j0 % 3);
    f.claims.top = i0 == 0;
    f.claims.left = j0 == 0;
    f.claims.bottom = i0 + h == t.side();
    f.claims.right = j0 + w == t.side();
    for (std::uint64_t i = 0; i < h; ++i) {
        for (std::uint64_t j = 0; j < w; ++j) f.cells.push_back(t.at(i0 + i, j0 + j));
    }
    return f;
}

// Stand-alone labelled form of a fragment, labelled like plain table cells
// so its interior neighborhoods compare equal to deep-table neighborhoods.
inline LabelledGraph materialize_fragment(const Fragment& f, const std::string& machine_bits,
                                          std::uint64_t r,
                                          std::optional<LabelValue> oracle = std::nullopt) {
    LabelledGraph g;
    for (std::uint64_t i = 0; i < f.h; ++i) {
        for (std::uint64_t j = 0; j < f.w; ++j) {
            TableauNodeLabel L;
            L.role = Role::Grid;
            L.machine_bits = machine_bits;
            L.radius = r;
            L.cell = f.at(i, j);
            L.ci = std::uint8_t((f.ci0 + i) % 3);
            L.cj = std::uint8_t((f.cj0 + j) % 3);
            L.top = f.claims.top && i == 0;
            L.left = f.claims.left && j == 0;
            L.bottom = f.claims.bottom && i == f.h - 1;
            L.right = f.claims.right && j == f.w - 1;
            L.pivot = L.top && L.left;
            g.add_node(L.encode(), std::nullopt, oracle);
        }
    }
    auto idx = [&](std::uint64_t i, std::uint64_t j) { return i * f.w + j; };
    for (std::uint64_t i = 0; i < f.h; ++i) {
        for (std::uint64_t j = 0; j < f.w; ++j) {
            if (i + 1 < f.h) g.add_edge(idx(i, j), idx(i + 1, j));
            if (j + 1 < f.w) g.add_edge(idx(i, j), idx(i, j + 1));
        }
    }
    return g;
}

// ---- builders ----

// Path a, a+1, ..., b with tail labels.
inline LabelledGraph build_tail(std::uint64_t a, std::uint64_t b) {
    if (a < 1) throw ConfigError("tail indices start at 1");
    if (a > b) throw ConfigError("tail range is empty");
    LabelledGraph g;
    for (std::uint64_t t = a; t <= b; ++t) {
        TableauNodeLabel L;
        L.role = Role::Tail;
        L.index = t;
        g.add_node(L.encode());
        if (t > a) g.add_edge(g.size() - 2, g.size() - 1);
    }
    return g;
}

namespace detail {

// Appends spoke k and fragment k's window cells, wired pivot - spoke -
// corner. Returns the spoke index and the first cell index; cells occupy
// [first, first + w*h) in row-major order.
inline std::pair<NodeIndex, NodeIndex> attach_fragment(LabelledGraph& g, NodeIndex pivot,
                                                       const Fragment& f, std::uint64_t k,
                                                       const std::string& mb, std::uint64_t r) {
    TableauNodeLabel S;
    S.role = Role::Spoke;
    S.machine_bits = mb;
    S.radius = r;
    S.fragment = k;
    NodeIndex spoke = g.add_node(S.encode());
    g.add_edge(pivot, spoke);
    NodeIndex base = g.size();
    for (std::uint64_t i = 0; i < f.h; ++i) {
        for (std::uint64_t j = 0; j < f.w; ++j) {
            TableauNodeLabel L;
            L.role = Role::FragmentGrid;
            L.machine_bits = mb;
            L.radius = r;
            L.cell = f.at(i, j);
            L.ci = std::uint8_t((f.ci0 + i) % 3);
            L.cj = std::uint8_t((f.cj0 + j) % 3);
            L.top = f.claims.top && i == 0;
            L.left = f.claims.left && j == 0;
            L.bottom = f.claims.bottom && i == f.h - 1;
            L.right = f.claims.right && j == f.w - 1;
            L.fragment = k;
            g.add_node(L.encode());
        }
    }
    auto fidx = [&](std::uint64_t i, std::uint64_t j) { return base + i * f.w + j; };
    for (std::uint64_t i = 0; i < f.h; ++i) {
        for (std::uint64_t j = 0; j < f.w; ++j) {
            if (i + 1 < f.h) g.add_edge(fidx(i, j), fidx(i + 1, j));
            if (j + 1 < f.w) g.add_edge(fidx(i, j), fidx(i, j + 1));
        }
    }
    g.add_edge(spoke, base);
    return {spoke, base};
}

inline LabelledGraph build_tableau(const TuringMachine& m, const ConstructionParams& p,
                                   std::optional<int> pivot_bit, bool with_tail) {
    p.validate();
    m.validate();
    ExecutionTable t = execution_table(m, p.tm_budget);
    std::string mb = m.encode().bits();
    std::size_t side = t.side();
    LabelledGraph g;
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            TableauNodeLabel L;
            L.role = Role::Grid;
            L.machine_bits = mb;
            L.radius = p.r;
            L.cell = t.at(i, j);
            L.ci = std::uint8_t(i % 3);
            L.cj = std::uint8_t(j % 3);
            L.top = i == 0;
            L.left = j == 0;
            L.bottom = i == side - 1;
            L.right = j == side - 1;
            L.pivot = L.top && L.left;
            if (L.pivot && pivot_bit) L.pivot_bit = pivot_bit;
            g.add_node(L.encode());
        }
    }
    auto idx = [&](std::size_t i, std::size_t j) { return i * side + j; };
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            if (i + 1 < side) g.add_edge(idx(i, j), idx(i + 1, j));
            if (j + 1 < side) g.add_edge(idx(i, j), idx(i, j + 1));
        }
    }
    NodeIndex pivot = 0;

    bool want_fragments = !p.max_fragments || *p.max_fragments > 0;
    if (want_fragments) {
        auto frags = build_fragments(m, p);
        std::size_t take = p.max_fragments
                               ? std::min<std::size_t>(std::size_t(*p.max_fragments), frags.size())
                               : frags.size();
        for (std::size_t k = 1; k <= take; ++k) attach_fragment(g, pivot, frags[k - 1], k, mb, p.r);
    }

    if (with_tail) {
        NodeIndex prev = pivot;
        for (std::uint64_t i = 1; i <= p.N; ++i) {
            TableauNodeLabel L;
            L.role = Role::Tail;
            L.index = i;
            NodeIndex cur = g.add_node(L.encode());
            g.add_edge(prev, cur);
            prev = cur;
        }
    }
    return g;
}

} // namespace detail

inline LabelledGraph build_H(const TuringMachine& m, const ConstructionParams& p) {
    if (p.pivot_bit) throw ConfigError("pivot bit only applies to the bit-carrying family");
    return detail::build_tableau(m, p, std::nullopt, false);
}

inline LabelledGraph build_G(const TuringMachine& m, const ConstructionParams& p) {
    if (p.pivot_bit) throw ConfigError("pivot bit only applies to the bit-carrying family");
    return detail::build_tableau(m, p, std::nullopt, true);
}

inline LabelledGraph build_J(const TuringMachine& m, const ConstructionParams& p) {
    if (!p.pivot_bit) throw ConfigError("the bit-carrying family needs a pivot bit");
    return detail::build_tableau(m, p, p.pivot_bit, false);
}

inline LabelledGraph build_P(std::uint64_t n) {
    if (n < 1) throw ConfigError("path size must be >= 1");
    LabelledGraph g;
    for (std::uint64_t d = 0; d < n; ++d) {
        TableauNodeLabel L;
        L.role = Role::Path;
        L.path_n = n;
        L.path_d = d;
        g.add_node(L.encode());
        if (d > 0) g.add_edge(g.size() - 2, g.size() - 1);
    }
    return g;
}

// ---- the local structure checker ----

namespace detail {

struct Delta {
    enum Kind { Up, Down, Left, Right, Other } kind = Other;
};

inline Delta::Kind classify_delta(const TableauNodeLabel& from, const TableauNodeLabel& to) {
    int dci = (3 + int(to.ci) - int(from.ci)) % 3;
    int dcj = (3 + int(to.cj) - int(from.cj)) % 3;
    if (dci == 2 && dcj == 0) return Delta::Up;
    if (dci == 1 && dcj == 0) return Delta::Down;
    if (dci == 0 && dcj == 2) return Delta::Left;
    if (dci == 0 && dcj == 1) return Delta::Right;
    return Delta::Other;
}

inline bool check_view(Family fam, const View& v) {
    std::vector<std::optional<TableauNodeLabel>> lab(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) lab[i] = TableauNodeLabel::try_decode(v.nodes[i].input);
    if (!lab[0]) return false;
    const TableauNodeLabel& root = *lab[0];

    if (fam == Family::P) {
        if (root.role != Role::Path) return false;
        int prev = 0, next = 0;
        for (std::size_t i : v.neighbors(0)) {
            if (!lab[i] || lab[i]->role != Role::Path) return false;
            const auto& L = *lab[i];
            if (L.path_n != root.path_n) return false;
            if (L.path_d + 1 == root.path_d)
                ++prev;
            else if (L.path_d == root.path_d + 1)
                ++next;
            else
                return false;
        }
        if (prev != (root.path_d > 0 ? 1 : 0)) return false;
        if (next != (root.path_d + 1 < root.path_n ? 1 : 0)) return false;
        return true;
    }
    if (root.role == Role::Path) return false;

    if (root.role == Role::Tail) {
        if (fam != Family::G) return false;
        int prev = 0, next = 0, pivots = 0;
        for (std::size_t i : v.neighbors(0)) {
            if (!lab[i]) return false;
            const auto& L = *lab[i];
            if (L.role == Role::Grid) {
                if (root.index != 1 || !L.pivot) return false;
                ++pivots;
            } else if (L.role == Role::Tail) {
                if (L.index + 1 == root.index)
                    ++prev;
                else if (L.index == root.index + 1)
                    ++next;
                else
                    return false;
            } else {
                return false;
            }
        }
        if (root.index == 1) {
            if (pivots != 1 || prev != 0) return false;
        } else {
            if (pivots != 0 || prev != 1) return false;
        }
        return next <= 1;
    }

    const TuringMachine* m = cached_machine(root.machine_bits);
    if (!m) return false;

    if (root.role == Role::Spoke) {
        int grid_pivots = 0, corners = 0, others = 0;
        for (std::size_t i : v.neighbors(0)) {
            if (!lab[i]) return false;
            const auto& L = *lab[i];
            if (L.role == Role::Grid && L.pivot && L.machine_bits == root.machine_bits &&
                L.radius == root.radius) {
                ++grid_pivots;
            } else if (L.role == Role::FragmentGrid && L.fragment == root.fragment &&
                       L.machine_bits == root.machine_bits && L.radius == root.radius) {
                // The attachment point must be the window corner: no fragment
                // neighbor above or to the left of it.
                for (std::size_t j : v.neighbors(i)) {
                    if (!lab[j]) return false;
                    if (lab[j]->role != Role::FragmentGrid) continue;
                    if (lab[j]->fragment != L.fragment) return false;
                    auto d = classify_delta(L, *lab[j]);
                    if (d == Delta::Up || d == Delta::Left) return false;
                }
                ++corners;
            } else {
                ++others;
            }
        }
        return grid_pivots == 1 && corners == 1 && others == 0;
    }

    // Grid and fragment-grid cells share the content rules.
    if (std::size_t(root.cell.head + 1) > m->num_states()) return false;
    bool is_table = root.role == Role::Grid;
    if (is_table) {
        if (root.pivot != (root.top && root.left)) return false;
        bool needs_bit = fam == Family::J && root.pivot;
        if (root.pivot_bit.has_value() != needs_bit) return false;
    } else {
        if (root.pivot) return false;
        if (root.pivot_bit) return false;
    }

    if (root.top && root.ci != 0) return false;
    if (root.left && root.cj != 0) return false;

    int up = 0, down = 0, lft = 0, rgt = 0, tails = 0;
    std::size_t spokes = 0;
    std::optional<TapeCell> down_c, left_c, right_c;
    std::set<std::uint64_t> spoke_ids;
    for (std::size_t i : v.neighbors(0)) {
        if (!lab[i]) return false;
        const auto& L = *lab[i];
        if (L.role == root.role) {
            if (L.machine_bits != root.machine_bits || L.radius != root.radius) return false;
            if (!is_table && L.fragment != root.fragment) return false;
            switch (classify_delta(root, L)) {
                case Delta::Up:
                    ++up;
                    break;
                case Delta::Down:
                    ++down;
                    down_c = L.cell;
                    break;
                case Delta::Left:
                    ++lft;
                    left_c = L.cell;
                    break;
                case Delta::Right:
                    ++rgt;
                    right_c = L.cell;
                    break;
                default:
                    return false;
            }
        } else if (L.role == Role::Tail) {
            if (fam != Family::G || !is_table || !root.pivot || L.index != 1) return false;
            ++tails;
        } else if (L.role == Role::Spoke) {
            if (L.machine_bits != root.machine_bits || L.radius != root.radius) return false;
            if (is_table) {
                if (!root.pivot) return false;
            } else {
                if (L.fragment != root.fragment) return false;
            }
            if (!spoke_ids.insert(L.fragment).second) return false;
            ++spokes;
        } else {
            return false;
        }
    }
    if (up > 1 || down > 1 || lft > 1 || rgt > 1) return false;
    if (is_table) {
        if (up != (root.top ? 0 : 1)) return false;
        if (down != (root.bottom ? 0 : 1)) return false;
        if (lft != (root.left ? 0 : 1)) return false;
        if (rgt != (root.right ? 0 : 1)) return false;
        if (fam == Family::G && root.pivot) {
            if (tails != 1) return false;
        } else if (tails != 0) {
            return false;
        }
        if (!root.pivot && spokes != 0) return false;
        // The pivot sees every spoke, so fragment ids must be 1..k.
        if (root.pivot && !spoke_ids.empty() && *spoke_ids.rbegin() != spoke_ids.size())
            return false;
    } else {
        if (root.top && up != 0) return false;
        if (root.bottom && down != 0) return false;
        if (root.left && lft != 0) return false;
        if (root.right && rgt != 0) return false;
        if (tails != 0) return false;
        bool corner = up == 0 && lft == 0;
        if (spokes != (corner ? 1u : 0u)) return false;
    }

    if (root.top) {
        if (root.cell.sym != Sym::Blank) return false;
        int want = root.left ? int(m->start) : -1;
        if (root.cell.head != want) return false;
    }
    bool has_head = root.cell.head >= 0;
    bool halt_head = has_head && m->is_halt(std::size_t(root.cell.head));
    if (halt_head && !root.bottom) return false;
    if (root.bottom && has_head && !halt_head) return false;

    Side L = root.left ? Side::border() : (left_c ? Side::of(*left_c) : Side::unknown());
    Side R = root.right ? Side::border() : (right_c ? Side::of(*right_c) : Side::unknown());
    int visible = int(has_head) + int(left_c && left_c->head >= 0) + int(right_c && right_c->head >= 0);
    if (visible > 1) return false;
    if (down == 1) {
        auto opts = below_options(*m, L, root.cell, R, visible == 0 && !is_table);
        if (!opts) return false;
        if (std::find(opts->begin(), opts->end(), *down_c) == opts->end()) return false;
    } else if (!root.bottom) {
        // Fragment cell on an unclaimed bottom window edge: the head still
        // must not walk off a claimed right table edge.
        if (has_head && !halt_head) {
            const Transition& t = m->at(std::size_t(root.cell.head), root.cell.sym);
            if (t.move == Move::R && root.right) return false;
        }
    }
    return true;
}

} // namespace detail

// Radius-2 oblivious structure checker for one instance family. Accepts at
// every node of correctly built instances; corrupted instances are rejected
// at some node.
inline LocalAlgorithm checker(Family fam) {
    LocalAlgorithm a;
    a.name = "structure-checker-" + family_name(fam);
    a.radius = 2;
    a.oblivious = true;
    a.uses_oracle_labels = false;
    a.decide = [fam](const View& v) { return detail::check_view(fam, v); };
    return a;
}

// ---- corruptions ----

struct Corruption {
    std::string name;
    std::set<Family> families;
    std::function<bool(const LabelledGraph&)> applies;
    std::function<LabelledGraph(const LabelledGraph&)> apply;
};

namespace detail {

inline std::vector<std::optional<TableauNodeLabel>> decode_all(const LabelledGraph& g) {
    std::vector<std::optional<TableauNodeLabel>> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = TableauNodeLabel::try_decode(g.nodes[i].input);
    return out;
}

inline std::optional<NodeIndex> find_node(const LabelledGraph& g,
                                          const std::function<bool(const TableauNodeLabel&)>& pred) {
    auto lab = decode_all(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (lab[i] && pred(*lab[i])) return i;
    }
    return std::nullopt;
}

inline LabelledGraph relabel(LabelledGraph g, NodeIndex v,
                             const std::function<void(TableauNodeLabel&)>& edit) {
    TableauNodeLabel L = TableauNodeLabel::decode(g.nodes[v].input);
    edit(L);
    g.nodes[v].input = L.encode();
    return g;
}

inline LabelledGraph rewire(const LabelledGraph& g,
                            const std::set<std::pair<NodeIndex, NodeIndex>>& drop,
                            const std::vector<std::pair<NodeIndex, NodeIndex>>& add) {
    LabelledGraph out;
    for (const auto& n : g.nodes) out.add_node(n.input, n.id, n.oracle);
    for (const auto& e : g.edges()) {
        if (!drop.count(e)) out.add_edge(e.first, e.second);
    }
    for (const auto& e : add) out.add_edge(e.first, e.second);
    return out;
}

} // namespace detail

inline const std::vector<Corruption>& corruption_catalog() {
    using detail::decode_all;
    using detail::find_node;
    using detail::relabel;
    using detail::rewire;
    static const std::vector<Corruption> cat = [] {
        std::vector<Corruption> c;
        std::set<Family> tab{Family::H, Family::G, Family::J};

        c.push_back({"flip-symbol", tab,
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && !l.top;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && !l.top;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) {
                             l.cell.sym = Sym((std::uint64_t(l.cell.sym) + 1) % 3);
                         });
                     }});

        c.push_back({"wrong-mod3", tab,
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) { l.ci = (l.ci + 1) % 3; });
                     }});

        c.push_back({"extra-pivot", tab,
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && !(l.top && l.left);
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && !(l.top && l.left);
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) { l.pivot = true; });
                     }});

        c.push_back({"missing-pivot", tab,
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && l.pivot;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && l.pivot;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) {
                             l.pivot = false;
                             l.pivot_bit.reset();
                         });
                     }});

        c.push_back({"detached-tail", {Family::G},
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Tail && l.index == 1;
                                }).has_value() &&
                                find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && !l.pivot;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto t1 = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Tail && l.index == 1;
                         });
                         auto pv = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && l.pivot;
                         });
                         auto other = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && !l.pivot;
                         });
                         auto e = std::minmax(pv, t1);
                         return rewire(g, {{e.first, e.second}}, {{other, t1}});
                     }});

        c.push_back({"duplicated-tail", {Family::G},
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && l.pivot;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto pv = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && l.pivot;
                         });
                         LabelledGraph out = g;
                         TableauNodeLabel L;
                         L.role = Role::Tail;
                         L.index = 1;
                         NodeIndex extra = out.add_node(L.encode(), std::nullopt,
                                                        g.nodes.front().oracle);
                         out.add_edge(pv, extra);
                         return out;
                     }});

        c.push_back({"tail-index-gap", {Family::G},
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Tail && l.index == 2;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Tail && l.index == 2;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) { l.index = 3; });
                     }});

        c.push_back({"spurious-head", tab,
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && l.cell.head < 0;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && l.cell.head < 0;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) {
                             const TuringMachine* m = cached_machine(l.machine_bits);
                             l.cell.head = m ? int(m->start) : 0;
                         });
                     }});

        c.push_back({"mixed-machine", tab,
                     [](const LabelledGraph& g) {
                         std::string loop_bits = m_loop().encode().bits();
                         return find_node(g, [&](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && l.machine_bits != loop_bits;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         std::string loop_bits = m_loop().encode().bits();
                         auto v = *find_node(g, [&](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && l.machine_bits != loop_bits;
                         });
                         return relabel(g, v, [&](TableauNodeLabel& l) { l.machine_bits = loop_bits; });
                     }});

        c.push_back({"dangling-fragment", tab,
                     [](const LabelledGraph& g) {
                         // applies when some spoke's fragment has >= 2 cells
                         auto lab = decode_all(g);
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             if (!lab[i] || lab[i]->role != Role::Spoke) continue;
                             std::uint64_t id = lab[i]->fragment;
                             std::size_t cells = 0;
                             for (const auto& l : lab) {
                                 if (l && l->role == Role::FragmentGrid && l->fragment == id) ++cells;
                             }
                             if (cells >= 2) return true;
                         }
                         return false;
                     },
                     [](const LabelledGraph& g) {
                         auto lab = decode_all(g);
                         for (std::size_t sp = 0; sp < g.size(); ++sp) {
                             if (!lab[sp] || lab[sp]->role != Role::Spoke) continue;
                             std::uint64_t id = lab[sp]->fragment;
                             std::optional<NodeIndex> corner, other;
                             for (NodeIndex nb : g.neighbors(sp)) {
                                 if (lab[nb] && lab[nb]->role == Role::FragmentGrid) corner = nb;
                             }
                             if (!corner) continue;
                             for (NodeIndex nb : g.neighbors(*corner)) {
                                 if (lab[nb] && lab[nb]->role == Role::FragmentGrid &&
                                     lab[nb]->fragment == id) {
                                     other = nb;
                                     break;
                                 }
                             }
                             if (!other) continue;
                             auto e = std::minmax(sp, *corner);
                             return detail::rewire(g, {{e.first, e.second}}, {{sp, *other}});
                         }
                         throw ConfigError("dangling-fragment does not apply");
                     }});

        c.push_back({"wrong-border-flag", tab,
                     [](const LabelledGraph& g) {
                         return find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Grid && !l.bottom;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Grid && !l.bottom;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) { l.bottom = true; });
                     }});

        c.push_back({"path-distance", {Family::P},
                     [](const LabelledGraph& g) {
                         return g.size() >= 2 &&
                                find_node(g, [](const TableauNodeLabel& l) {
                                    return l.role == Role::Path;
                                }).has_value();
                     },
                     [](const LabelledGraph& g) {
                         auto v = *find_node(g, [](const TableauNodeLabel& l) {
                             return l.role == Role::Path;
                         });
                         return relabel(g, v, [](TableauNodeLabel& l) {
                             l.path_d = (l.path_d + 1) % l.path_n;
                         });
                     }});

        return c;
    }();
    return cat;
}

// ---- whole-instance validation ----
//
// Builder-independent membership check: local checks at every node plus a
// global reconstruction of the grid, tail, and fragments, with the table
// content replayed from the machine.

struct InstanceFacts {
    bool ok = false;
    std::string reason;
    std::string machine_bits;
    std::uint64_t r = 0;
    std::size_t s = 0;
    int output = -1;
    NodeIndex pivot = 0;
    std::uint64_t tail_len = 0;
    std::optional<int> pivot_bit;
    std::uint64_t fragment_count = 0;
    std::uint64_t path_n = 0;
};

inline InstanceFacts validate_instance(const LabelledGraph& g, Family fam,
                                       std::uint64_t tm_budget = 10000) {
    InstanceFacts F;
    auto fail = [&](const std::string& why) {
        F.ok = false;
        F.reason = why;
        return F;
    };
    try {
        g.validate();
    } catch (const Error& e) {
        return fail(e.what());
    }
    auto lab = detail::decode_all(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!lab[i]) return fail("undecodable node label");
    }

    if (fam == Family::P) {
        std::uint64_t n = lab[0]->path_n;
        std::vector<char> seen_d(g.size(), 0);
        if (n != g.size()) return fail("path size label disagrees with node count");
        for (const auto& l : lab) {
            if (l->role != Role::Path) return fail("non-path node in a path instance");
            if (l->path_n != n) return fail("mixed path size labels");
            if (seen_d[l->path_d]++) return fail("duplicate path distance");
        }
        if (g.edge_count() != g.size() - 1) return fail("path has wrong edge count");
        for (const auto& [u, w] : g.edges()) {
            std::uint64_t a = lab[u]->path_d, b = lab[w]->path_d;
            if (a + 1 != b && b + 1 != a) return fail("path edge between non-consecutive distances");
        }
        F.path_n = n;
        F.ok = true;
        return F;
    }

    // Uniform machine and radius over all machine-carrying nodes.
    std::string mb;
    std::uint64_t r = 0;
    for (const auto& l : lab) {
        if (l->role == Role::Tail || l->role == Role::Path) continue;
        if (mb.empty()) {
            mb = l->machine_bits;
            r = l->radius;
        } else if (l->machine_bits != mb || l->radius != r) {
            return fail("mixed machine or radius labels");
        }
    }
    if (mb.empty()) return fail("no machine-carrying nodes");
    const TuringMachine* m = cached_machine(mb);
    if (!m) return fail("labels do not encode a machine");
    F.machine_bits = mb;
    F.r = r;

    Verdict vd = run(checker(fam), g);
    if (!vd.accepted) {
        auto bad = vd.no_nodes();
        return fail("local check failed at node " + std::to_string(bad.empty() ? 0 : bad[0]));
    }

    // Locate the pivot; local checks already force flag coherence.
    std::optional<NodeIndex> pivot;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (lab[i]->role == Role::Grid && lab[i]->pivot) {
            if (pivot) return fail("more than one pivot");
            pivot = i;
        }
    }
    if (!pivot) return fail("no pivot");
    F.pivot = *pivot;

    // Reconstruct grid coordinates from the pivot using residue deltas.
    std::map<NodeIndex, std::pair<std::int64_t, std::int64_t>> coord;
    std::map<std::pair<std::int64_t, std::int64_t>, NodeIndex> at;
    {
        std::vector<NodeIndex> queue{*pivot};
        coord[*pivot] = {0, 0};
        at[{0, 0}] = *pivot;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            NodeIndex u = queue[qi];
            auto [i, j] = coord[u];
            for (NodeIndex w : g.neighbors(u)) {
                if (lab[w]->role != Role::Grid) continue;
                std::pair<std::int64_t, std::int64_t> c;
                switch (detail::classify_delta(*lab[u], *lab[w])) {
                    case detail::Delta::Up: c = {i - 1, j}; break;
                    case detail::Delta::Down: c = {i + 1, j}; break;
                    case detail::Delta::Left: c = {i, j - 1}; break;
                    case detail::Delta::Right: c = {i, j + 1}; break;
                    default: return fail("grid edge with bad residue delta");
                }
                auto it = coord.find(w);
                if (it == coord.end()) {
                    coord[w] = c;
                    auto ins = at.insert({c, w});
                    if (!ins.second) return fail("two grid cells at one coordinate");
                    queue.push_back(w);
                } else if (it->second != c) {
                    return fail("inconsistent grid coordinates");
                }
            }
        }
    }
    std::size_t grid_nodes = 0;
    for (const auto& l : lab) {
        if (l->role == Role::Grid) ++grid_nodes;
    }
    if (coord.size() != grid_nodes) return fail("grid not connected to the pivot");
    std::int64_t max_i = 0, max_j = 0;
    for (const auto& [v, c] : coord) {
        if (c.first < 0 || c.second < 0) return fail("grid extends past the top-left corner");
        max_i = std::max(max_i, c.first);
        max_j = std::max(max_j, c.second);
    }
    if (max_i != max_j) return fail("grid is not square");
    std::size_t side = std::size_t(max_i) + 1;
    if (coord.size() != side * side) return fail("grid has holes");
    F.s = side - 1;

    // Edges among grid nodes must be exactly the lattice adjacencies.
    std::size_t grid_edges = 0;
    for (const auto& [u, w] : g.edges()) {
        if (lab[u]->role != Role::Grid || lab[w]->role != Role::Grid) continue;
        auto a = coord[u], b = coord[w];
        if (std::llabs(a.first - b.first) + std::llabs(a.second - b.second) != 1)
            return fail("non-lattice grid edge");
        ++grid_edges;
    }
    if (grid_edges != 2 * (side - 1) * side) return fail("wrong grid edge count");

    // Flags and residues against true coordinates, content against a replay.
    RunOutcome probe = run_bounded(*m, tm_budget);
    if (!probe.halted) return fail("machine does not halt within the budget");
    if (probe.steps != F.s) return fail("table size disagrees with the machine's halting time");
    ExecutionTable table = execution_table(*m, tm_budget);
    for (const auto& [v, c] : coord) {
        const auto& l = *lab[v];
        std::size_t i = std::size_t(c.first), j = std::size_t(c.second);
        if (l.ci != i % 3 || l.cj != j % 3) return fail("residue disagrees with position");
        if (l.top != (i == 0) || l.left != (j == 0) || l.bottom != (i == side - 1) ||
            l.right != (j == side - 1))
            return fail("border flag disagrees with position");
        if (l.pivot != (i == 0 && j == 0)) return fail("pivot flag disagrees with position");
        if (!(l.cell == table.at(i, j))) return fail("cell content disagrees with the run");
    }
    F.output = table.output;

    // Tail: exactly 1..N chained off the pivot in the tailed family.
    std::map<std::uint64_t, NodeIndex> tail;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (lab[i]->role != Role::Tail) continue;
        if (fam != Family::G) return fail("tail node outside the tailed family");
        if (!tail.insert({lab[i]->index, i}).second) return fail("duplicate tail index");
    }
    if (fam == Family::G) {
        if (tail.empty() || tail.begin()->first != 1) return fail("tail must start at 1");
        std::uint64_t N = tail.rbegin()->first;
        if (tail.size() != N) return fail("tail indices have gaps");
        if (!g.has_edge(*pivot, tail[1])) return fail("tail is not attached to the pivot");
        for (std::uint64_t t = 1; t < N; ++t) {
            if (!g.has_edge(tail[t], tail[t + 1])) return fail("tail chain is broken");
        }
        F.tail_len = N;
    }

    // Cross-role edges.
    for (const auto& [u, w] : g.edges()) {
        Role a = lab[u]->role, b = lab[w]->role;
        if (a > b) std::swap(a, b);
        NodeIndex x = lab[u]->role == a ? u : w, y = lab[u]->role == a ? w : u;
        if (a == Role::Grid && b == Role::Grid) continue;
        if (a == Role::FragmentGrid && b == Role::FragmentGrid) {
            if (lab[x]->fragment != lab[y]->fragment) return fail("edge between fragments");
            continue;
        }
        if (a == Role::Tail && b == Role::Tail) continue; // chained above
        if (a == Role::Grid && b == Role::Tail) {
            if (x != *pivot || lab[y]->index != 1) return fail("tail edge off the pivot");
            continue;
        }
        if (a == Role::Grid && b == Role::Spoke) {
            if (x != *pivot) return fail("spoke edge off the pivot");
            continue;
        }
        if (a == Role::FragmentGrid && b == Role::Spoke) {
            if (lab[x]->fragment != lab[y]->fragment) return fail("spoke attached to wrong fragment");
            continue;
        }
        return fail("edge between incompatible roles");
    }

    // Fragments: group cells by id, rebuild each window, revalidate.
    std::map<std::uint64_t, std::vector<NodeIndex>> groups;
    std::map<std::uint64_t, NodeIndex> spokes;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (lab[i]->role == Role::FragmentGrid) groups[lab[i]->fragment].push_back(i);
        if (lab[i]->role == Role::Spoke) {
            if (!spokes.insert({lab[i]->fragment, i}).second) return fail("duplicate spoke id");
        }
    }
    {
        std::set<std::uint64_t> gids, sids;
        for (const auto& [id, _] : groups) gids.insert(id);
        for (const auto& [id, _] : spokes) sids.insert(id);
        if (gids != sids) return fail("fragment ids and spoke ids disagree");
    }
    for (const auto& [id, members] : groups) {
        NodeIndex sp = spokes[id];
        std::optional<NodeIndex> corner;
        for (NodeIndex nb : g.neighbors(sp)) {
            if (lab[nb]->role == Role::FragmentGrid) {
                if (corner) return fail("spoke touches two fragment cells");
                corner = nb;
            }
        }
        if (!corner) return fail("spoke without a fragment cell");
        std::map<NodeIndex, std::pair<std::int64_t, std::int64_t>> fc;
        std::map<std::pair<std::int64_t, std::int64_t>, NodeIndex> fat;
        std::vector<NodeIndex> queue{*corner};
        fc[*corner] = {0, 0};
        fat[{0, 0}] = *corner;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            NodeIndex u = queue[qi];
            auto [i, j] = fc[u];
            for (NodeIndex w2 : g.neighbors(u)) {
                if (lab[w2]->role != Role::FragmentGrid) continue;
                std::pair<std::int64_t, std::int64_t> cc;
                switch (detail::classify_delta(*lab[u], *lab[w2])) {
                    case detail::Delta::Up: cc = {i - 1, j}; break;
                    case detail::Delta::Down: cc = {i + 1, j}; break;
                    case detail::Delta::Left: cc = {i, j - 1}; break;
                    case detail::Delta::Right: cc = {i, j + 1}; break;
                    default: return fail("fragment edge with bad residue delta");
                }
                auto it = fc.find(w2);
                if (it == fc.end()) {
                    fc[w2] = cc;
                    if (!fat.insert({cc, w2}).second) return fail("two fragment cells at one spot");
                    queue.push_back(w2);
                } else if (it->second != cc) {
                    return fail("inconsistent fragment coordinates");
                }
            }
        }
        if (fc.size() != members.size()) return fail("fragment is not connected");
        std::int64_t lo_i = 0, lo_j = 0, hi_i = 0, hi_j = 0;
        for (const auto& [v, cc] : fc) {
            lo_i = std::min(lo_i, cc.first);
            lo_j = std::min(lo_j, cc.second);
            hi_i = std::max(hi_i, cc.first);
            hi_j = std::max(hi_j, cc.second);
        }
        if (lo_i != 0 || lo_j != 0) return fail("spoke not attached at the window corner");
        std::uint64_t fw = std::uint64_t(hi_j) + 1, fh = std::uint64_t(hi_i) + 1;
        if (fc.size() != fw * fh) return fail("fragment is not a full rectangle");
        std::size_t fedges = 0;
        for (const auto& [u, w2] : g.edges()) {
            if (lab[u]->role != Role::FragmentGrid || lab[w2]->role != Role::FragmentGrid) continue;
            if (lab[u]->fragment != id) continue;
            auto a = fc[u], b = fc[w2];
            if (std::llabs(a.first - b.first) + std::llabs(a.second - b.second) != 1)
                return fail("non-lattice fragment edge");
            ++fedges;
        }
        if (fedges != (fw - 1) * fh + (fh - 1) * fw) return fail("wrong fragment edge count");

        Fragment f;
        f.w = fw;
        f.h = fh;
        f.ci0 = lab[*corner]->ci;
        f.cj0 = lab[*corner]->cj;
        f.cells.resize(fw * fh);
        bool any_top = false, any_left = false, any_bottom = false, any_right = false;
        for (const auto& [v, cc] : fc) {
            const auto& l = *lab[v];
            std::uint64_t i = std::uint64_t(cc.first), j = std::uint64_t(cc.second);
            if (l.ci != (f.ci0 + i) % 3 || l.cj != (f.cj0 + j) % 3)
                return fail("fragment residue disagrees with position");
            any_top |= l.top;
            any_left |= l.left;
            any_bottom |= l.bottom;
            any_right |= l.right;
            f.cells[i * fw + j] = l.cell;
        }
        f.claims = FragClaims{any_top, any_left, any_bottom, any_right};
        for (const auto& [v, cc] : fc) {
            const auto& l = *lab[v];
            std::uint64_t i = std::uint64_t(cc.first), j = std::uint64_t(cc.second);
            if (l.top != (f.claims.top && i == 0) || l.left != (f.claims.left && j == 0) ||
                l.bottom != (f.claims.bottom && i == fh - 1) ||
                l.right != (f.claims.right && j == fw - 1))
                return fail("fragment border flags are not edge-uniform");
        }
        if (!fragment_window_consistent(*m, f)) return fail("fragment window is inconsistent");
    }
    F.fragment_count = groups.size();

    if (fam == Family::J) {
        F.pivot_bit = lab[*pivot]->pivot_bit;
        if (!F.pivot_bit) return fail("bit family instance without a pivot bit");
    }
    F.ok = true;
    return F;
}

} // namespace locdec
