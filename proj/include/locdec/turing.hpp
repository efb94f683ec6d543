#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "label.hpp"

namespace locdec {

enum class Sym : std::uint8_t { Blank = 0, Zero = 1, One = 2 };
enum class Move : std::uint8_t { L = 0, R = 1, S = 2 };

inline std::string sym_str(Sym s) { return s == Sym::Blank ? "_" : (s == Sym::Zero ? "0" : "1"); }
inline Sym sym_parse(const std::string& s) {
    if (s == "_") return Sym::Blank;
    if (s == "0") return Sym::Zero;
    if (s == "1") return Sym::One;
    throw ValidationError("bad tape symbol: " + s);
}
inline std::string move_str(Move m) { return m == Move::L ? "L" : (m == Move::R ? "R" : "S"); }
inline Move move_parse(const std::string& s) {
    if (s == "L") return Move::L;
    if (s == "R") return Move::R;
    if (s == "S") return Move::S;
    throw ValidationError("bad move: " + s);
}

struct Transition {
    std::size_t next = 0;
    Sym write = Sym::Blank;
    Move move = Move::S;
    bool operator==(const Transition&) const = default;
};

// One-way infinite tape machine with dedicated halting states. The output is
// the halting state reached: halt0 means "outputs 0", halt1 means "outputs 1".
// A move left at position 0 stays at position 0.
class TuringMachine {
public:
    std::vector<std::string> state_names;
    std::size_t start = 0, halt0 = 0, halt1 = 0;
    // delta[state][symbol]; empty optionals only on halting states.
    std::vector<std::array<std::optional<Transition>, 3>> delta;

    std::size_t num_states() const { return state_names.size(); }
    bool is_halt(std::size_t q) const { return q == halt0 || q == halt1; }

    void validate() const {
        std::size_t n = num_states();
        if (n < 3) throw ValidationError("machine needs at least start, halt0, halt1");
        if (start >= n || halt0 >= n || halt1 >= n) throw ValidationError("state index out of range");
        if (halt0 == halt1) throw ValidationError("halt0 and halt1 must differ");
        if (is_halt(start)) throw ValidationError("start must not be a halting state");
        if (delta.size() != n) throw ValidationError("delta must cover every state");
        for (std::size_t q = 0; q < n; ++q) {
            for (std::size_t s = 0; s < 3; ++s) {
                bool present = delta[q][s].has_value();
                if (is_halt(q) && present) throw ValidationError("halting states take no transitions");
                if (!is_halt(q) && !present)
                    throw ValidationError("transition function must be total on non-halting states");
                if (present && delta[q][s]->next >= n) throw ValidationError("transition target out of range");
            }
        }
    }

    const Transition& at(std::size_t q, Sym s) const {
        const auto& t = delta[q][std::size_t(s)];
        if (!t) throw ValidationError("no transition from a halting state");
        return *t;
    }

    // Deterministic bit-string form: the tuple of naturals
    //   (#states, start, halt0, halt1, then next/write/move per non-halting
    //   state in index order, per symbol in order blank, 0, 1).
    LabelValue encode() const {
        validate();
        std::vector<LabelValue> fields;
        fields.push_back(LabelValue::of_nat(num_states()));
        fields.push_back(LabelValue::of_nat(start));
        fields.push_back(LabelValue::of_nat(halt0));
        fields.push_back(LabelValue::of_nat(halt1));
        for (std::size_t q = 0; q < num_states(); ++q) {
            if (is_halt(q)) continue;
            for (std::size_t s = 0; s < 3; ++s) {
                const auto& t = *delta[q][s];
                fields.push_back(LabelValue::of_nat(t.next));
                fields.push_back(LabelValue::of_nat(std::uint64_t(t.write)));
                fields.push_back(LabelValue::of_nat(std::uint64_t(t.move)));
            }
        }
        return LabelValue::of_tuple(fields);
    }

    static TuringMachine decode(const LabelValue& enc) {
        auto fields = enc.tuple_fields();
        if (fields.size() < 4) throw ValidationError("machine encoding too short");
        TuringMachine m;
        std::size_t n = fields[0].to_nat();
        if (n < 3 || n > 4096) throw ValidationError("bad state count in machine encoding");
        m.start = fields[1].to_nat();
        m.halt0 = fields[2].to_nat();
        m.halt1 = fields[3].to_nat();
        for (std::size_t q = 0; q < n; ++q) m.state_names.push_back("q" + std::to_string(q));
        m.delta.resize(n);
        std::size_t idx = 4;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == m.halt0 || q == m.halt1) continue;
            for (std::size_t s = 0; s < 3; ++s) {
                if (idx + 3 > fields.size()) throw ValidationError("machine encoding truncated");
                Transition t;
                t.next = fields[idx].to_nat();
                std::uint64_t w = fields[idx + 1].to_nat(), mv = fields[idx + 2].to_nat();
                if (w > 2 || mv > 2) throw ValidationError("bad write/move in machine encoding");
                t.write = Sym(w);
                t.move = Move(mv);
                m.delta[q][s] = t;
                idx += 3;
            }
        }
        if (idx != fields.size()) throw ValidationError("trailing data in machine encoding");
        m.validate();
        return m;
    }
};

// { "states": [...], "start": s, "halt0": h0, "halt1": h1,
//   "delta": [ [state, sym, state', sym', move], ... ] }
// States may be referenced by name or by index.
inline nlohmann::json machine_to_json(const TuringMachine& m) {
    nlohmann::json j;
    j["states"] = m.state_names;
    j["start"] = m.state_names[m.start];
    j["halt0"] = m.state_names[m.halt0];
    j["halt1"] = m.state_names[m.halt1];
    j["delta"] = nlohmann::json::array();
    for (std::size_t q = 0; q < m.num_states(); ++q) {
        for (std::size_t s = 0; s < 3; ++s) {
            if (!m.delta[q][s]) continue;
            const auto& t = *m.delta[q][s];
            j["delta"].push_back({m.state_names[q], sym_str(Sym(s)), m.state_names[t.next],
                                  sym_str(t.write), move_str(t.move)});
        }
    }
    return j;
}

inline TuringMachine machine_from_json(const nlohmann::json& j) {
    TuringMachine m;
    for (const auto& s : j.at("states")) m.state_names.push_back(s.get<std::string>());
    auto resolve = [&](const nlohmann::json& ref) -> std::size_t {
        if (ref.is_number_integer() || ref.is_number_unsigned()) {
            auto raw = ref.get<std::int64_t>();
            if (raw < 0 || std::size_t(raw) >= m.state_names.size())
                throw ValidationError("state index out of range in machine json");
            return std::size_t(raw);
        }
        std::string name = ref.get<std::string>();
        for (std::size_t q = 0; q < m.state_names.size(); ++q) {
            if (m.state_names[q] == name) return q;
        }
        throw ValidationError("unknown state in machine json: " + name);
    };
    m.start = resolve(j.at("start"));
    m.halt0 = resolve(j.at("halt0"));
    m.halt1 = resolve(j.at("halt1"));
    m.delta.resize(m.state_names.size());
    for (const auto& row : j.at("delta")) {
        if (!row.is_array() || row.size() != 5) throw ValidationError("delta rows are [q, s, q', s', move]");
        std::size_t q = resolve(row.at(0));
        Sym s = sym_parse(row.at(1).get<std::string>());
        Transition t;
        t.next = resolve(row.at(2));
        t.write = sym_parse(row.at(3).get<std::string>());
        t.move = move_parse(row.at(4).get<std::string>());
        if (m.delta[q][std::size_t(s)]) throw ValidationError("duplicate delta row");
        m.delta[q][std::size_t(s)] = t;
    }
    m.validate();
    return m;
}

struct Configuration {
    std::size_t state = 0;
    std::size_t head = 0;
    std::map<std::size_t, Sym> tape; // unset positions are blank

    Sym read() const {
        auto it = tape.find(head);
        return it == tape.end() ? Sym::Blank : it->second;
    }
};

inline Configuration initial_configuration(const TuringMachine& m) {
    Configuration c;
    c.state = m.start;
    return c;
}

// One step. Stepping a halted configuration is a caller bug.
inline void step(const TuringMachine& m, Configuration& c) {
    if (m.is_halt(c.state)) throw ValidationError("cannot step a halted configuration");
    const Transition& t = m.at(c.state, c.read());
    if (t.write == Sym::Blank)
        c.tape.erase(c.head);
    else
        c.tape[c.head] = t.write;
    c.state = t.next;
    switch (t.move) {
        case Move::L:
            if (c.head > 0) --c.head;
            break;
        case Move::R:
            ++c.head;
            break;
        case Move::S:
            break;
    }
}

struct RunOutcome {
    bool halted = false;
    int bit = -1;           // 0 or 1 when halted
    std::uint64_t steps = 0; // halting step when halted, budget otherwise
};

// Runs from the empty tape for at most `budget` steps.
inline RunOutcome run_bounded(const TuringMachine& m, std::uint64_t budget) {
    Configuration c = initial_configuration(m);
    std::uint64_t t = 0;
    while (!m.is_halt(c.state) && t < budget) {
        step(m, c);
        ++t;
    }
    RunOutcome out;
    if (m.is_halt(c.state)) {
        out.halted = true;
        out.bit = (c.state == m.halt1) ? 1 : 0;
        out.steps = t;
    } else {
        out.steps = budget;
    }
    return out;
}

// A tableau cell: tape symbol plus, when the head is here, the state.
struct TapeCell {
    Sym sym = Sym::Blank;
    int head = -1; // -1 = no head, otherwise the state index
    bool operator==(const TapeCell&) const = default;
};

// The (s+1) x (s+1) run tableau of a machine halting in s steps: row i is the
// configuration after i steps, columns are tape positions 0..s. The head
// never leaves the square (it moves at most one cell per step).
struct ExecutionTable {
    std::size_t s = 0; // halting step count
    int output = 0;
    std::vector<TapeCell> cells; // row-major, (s+1) rows x (s+1) cols

    std::size_t side() const { return s + 1; }
    const TapeCell& at(std::size_t i, std::size_t j) const { return cells[i * side() + j]; }
    TapeCell& at(std::size_t i, std::size_t j) { return cells[i * side() + j]; }
};

inline ExecutionTable execution_table(const TuringMachine& m, std::uint64_t budget) {
    RunOutcome probe = run_bounded(m, budget);
    if (!probe.halted)
        throw TimeoutError("machine did not halt within budget " + std::to_string(budget));
    ExecutionTable t;
    t.s = probe.steps;
    t.output = probe.bit;
    std::size_t side = t.s + 1;
    t.cells.assign(side * side, TapeCell{});
    Configuration c = initial_configuration(m);
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            auto it = c.tape.find(j);
            t.at(i, j).sym = it == c.tape.end() ? Sym::Blank : it->second;
        }
        if (c.head >= side) throw ValidationError("head escaped the tableau");
        t.at(i, c.head).head = int(c.state);
        if (i + 1 < side) step(m, c);
    }
    return t;
}

// ---- reference machines ----

namespace detail {
inline TuringMachine make_machine(std::vector<std::string> names, std::size_t start, std::size_t h0,
                                  std::size_t h1,
                                  std::vector<std::tuple<std::size_t, Sym, Transition>> rows) {
    TuringMachine m;
    m.state_names = std::move(names);
    m.start = start;
    m.halt0 = h0;
    m.halt1 = h1;
    m.delta.resize(m.state_names.size());
    for (auto& [q, s, t] : rows) m.delta[q][std::size_t(s)] = t;
    m.validate();
    return m;
}
} // namespace detail

// Halts after 1 step with output 0.
inline const TuringMachine& m_zero() {
    static const TuringMachine m = detail::make_machine(
        {"start", "halt0", "halt1"}, 0, 1, 2,
        {
            {0, Sym::Blank, Transition{1, Sym::Zero, Move::S}},
            {0, Sym::Zero, Transition{1, Sym::Zero, Move::S}},
            {0, Sym::One, Transition{1, Sym::One, Move::S}},
        });
    return m;
}

// Writes a 1, steps right, halts with output 1 after 2 steps.
inline const TuringMachine& m_one() {
    static const TuringMachine m = detail::make_machine(
        {"start", "mid", "halt0", "halt1"}, 0, 2, 3,
        {
            {0, Sym::Blank, Transition{1, Sym::One, Move::R}},
            {0, Sym::Zero, Transition{3, Sym::Zero, Move::S}},
            {0, Sym::One, Transition{3, Sym::One, Move::S}},
            {1, Sym::Blank, Transition{3, Sym::One, Move::S}},
            {1, Sym::Zero, Transition{3, Sym::Zero, Move::S}},
            {1, Sym::One, Transition{3, Sym::One, Move::S}},
        });
    return m;
}

// Marches right writing 1s and halts with output 0 after exactly k steps.
inline TuringMachine m_count(std::size_t k) {
    if (k < 1) throw ValidationError("m_count needs k >= 1");
    TuringMachine m;
    for (std::size_t i = 0; i < k; ++i) m.state_names.push_back("c" + std::to_string(i));
    m.state_names.push_back("halt0");
    m.state_names.push_back("halt1");
    m.start = 0;
    m.halt0 = k;
    m.halt1 = k + 1;
    m.delta.resize(m.num_states());
    for (std::size_t i = 0; i < k; ++i) {
        bool last = (i + 1 == k);
        for (std::size_t s = 0; s < 3; ++s) {
            if (last)
                m.delta[i][s] = Transition{m.halt0, Sym::Zero, Move::S};
            else
                m.delta[i][s] = Transition{i + 1, Sym::One, Move::R};
        }
    }
    m.validate();
    return m;
}

// Never halts: scans right forever.
inline const TuringMachine& m_loop() {
    static const TuringMachine m = detail::make_machine(
        {"start", "halt0", "halt1"}, 0, 1, 2,
        {
            {0, Sym::Blank, Transition{0, Sym::Blank, Move::R}},
            {0, Sym::Zero, Transition{0, Sym::Zero, Move::R}},
            {0, Sym::One, Transition{0, Sym::One, Move::R}},
        });
    return m;
}

// ---- the indexed machine universe ----
//
// The halting-bit oracle needs a total index -> machine map whose small
// indices land on buildable instances. Index i >= 1 maps to the bit string
// of i with its leading 1 removed; that string is read as a packed
// transition table over a fixed four-state universe
//   0 = start, 1 = aux, 2 = halt0, 3 = halt1,
// six bits per entry (next:2, write:2, move:2), entries in the order
// (start,_), (start,0), (start,1), (aux,_), (aux,0), (aux,1). Missing
// trailing entries default to (halt0, _, S). Strings that are not a whole
// number of entries, that exceed six entries, or that use the reserved
// write/move value 3 do not name a machine and map to the loop machine.
inline TuringMachine machine_for_index(std::uint64_t i) {
    if (i == 0) throw ValidationError("machine indices start at 1");
    std::string bits;
    {
        LabelValue v = LabelValue::of_nat(i);
        bits = v.bits().substr(1); // drop the leading 1
    }
    if (bits.size() % 6 != 0 || bits.size() > 36) return m_loop();
    TuringMachine m;
    m.state_names = {"start", "aux", "halt0", "halt1"};
    m.start = 0;
    m.halt0 = 2;
    m.halt1 = 3;
    m.delta.resize(4);
    for (std::size_t e = 0; e < 6; ++e) {
        std::size_t q = e / 3, s = e % 3;
        Transition t{2, Sym::Blank, Move::S};
        if (e * 6 < bits.size()) {
            auto field = [&](std::size_t off) {
                return std::size_t(bits[e * 6 + off] - '0') * 2 + std::size_t(bits[e * 6 + off + 1] - '0');
            };
            std::size_t nq = field(0), w = field(2), mv = field(4);
            if (w == 3 || mv == 3) return m_loop();
            t = Transition{nq, Sym(w), Move(mv)};
        }
        m.delta[q][s] = t;
    }
    m.validate();
    return m;
}

// Inverse of machine_for_index on the packed-table universe, for fixtures.
inline std::uint64_t index_of_packed(const std::string& entry_bits) {
    if (entry_bits.size() % 6 != 0 || entry_bits.size() > 36)
        throw ValidationError("packed table must be whole 6-bit entries");
    std::uint64_t i = 1;
    for (char c : entry_bits) i = (i << 1) | std::uint64_t(c - '0');
    return i;
}

} // namespace locdec
