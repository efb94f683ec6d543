#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include <locdec/canonical.hpp>
#include <locdec/constructions.hpp>

using namespace locdec;

namespace {

ConstructionParams params(std::uint64_t r, std::optional<std::uint64_t> max_frags,
                          std::uint64_t fw = 0, std::uint64_t fh = 0) {
    ConstructionParams p;
    p.r = r;
    p.max_fragments = max_frags;
    p.frag_w = fw;
    p.frag_h = fh;
    return p;
}

// every w x h window cut from the real table must appear in the enumeration
void check_slides(const TuringMachine& m, std::uint64_t w, std::uint64_t h) {
    ExecutionTable t = execution_table(m, 1000);
    auto res = enumerate_fragments(m, w, h, 1000000);
    REQUIRE(res.complete);
    std::set<std::string> keys;
    for (const auto& f : res.fragments) keys.insert(f.key());
    REQUIRE(keys.size() == res.fragments.size()); // deduplicated
    for (std::uint64_t i0 = 0; i0 + h <= t.side(); ++i0) {
        for (std::uint64_t j0 = 0; j0 + w <= t.side(); ++j0) {
            Fragment win = window_of_table(t, i0, j0, w, h);
            INFO("window at (" << i0 << "," << j0 << ") of " << m.state_names[0] << " table");
            CHECK(keys.count(win.key()) == 1);
        }
    }
}

// machine with a left move, for the direction-sensitive window rules
TuringMachine left_stepper() {
    TuringMachine m;
    m.state_names = {"s", "a", "halt0", "halt1"};
    m.start = 0;
    m.halt0 = 2;
    m.halt1 = 3;
    m.delta.resize(4);
    for (std::size_t s = 0; s < 3; ++s) {
        m.delta[0][s] = Transition{1, Sym::Zero, Move::L};
        m.delta[1][s] = Transition{2, Sym::Zero, Move::S};
    }
    m.validate();
    return m;
}

} // namespace

TEST_CASE("entering states are exactly the movers") {
    auto el1 = enter_from_left(m_one());
    REQUIRE(el1 == std::vector<std::size_t>{1}); // start steps right into mid
    CHECK(enter_from_right(m_one()).empty());

    auto el4 = enter_from_left(m_count(4));
    REQUIRE(el4 == std::vector<std::size_t>{1, 2, 3});
    CHECK(enter_from_right(m_count(4)).empty());

    CHECK(enter_from_left(m_zero()).empty());
    CHECK(enter_from_right(m_zero()).empty());

    TuringMachine ls = left_stepper();
    CHECK(enter_from_left(ls).empty());
    REQUIRE(enter_from_right(ls) == std::vector<std::size_t>{1});
}

TEST_CASE("window successor options") {
    const TuringMachine& m = m_one();
    TapeCell blank{Sym::Blank, -1};
    TapeCell start_head{Sym::Blank, 0};
    TapeCell mid_head{Sym::Blank, 1};
    TapeCell halt_head{Sym::One, 3};

    SECTION("a right move leaves the written symbol behind") {
        auto o = below_options(m, Side::border(), start_head, Side::of(blank), false);
        REQUIRE(o);
        REQUIRE(o->size() == 1);
        CHECK((*o)[0] == TapeCell{Sym::One, -1});
    }
    SECTION("the head arrives from the left") {
        auto o = below_options(m, Side::of(start_head), blank, Side::of(blank), false);
        REQUIRE(o);
        REQUIRE(o->size() == 1);
        CHECK((*o)[0] == TapeCell{Sym::Blank, 1});
    }
    SECTION("a stay move keeps the head in place") {
        auto o = below_options(m, Side::of(blank), mid_head, Side::of(blank), false);
        REQUIRE(o);
        REQUIRE(o->size() == 1);
        CHECK((*o)[0] == TapeCell{Sym::One, 3});
    }
    SECTION("running off the right table edge is impossible") {
        CHECK(!below_options(m, Side::of(blank), start_head, Side::border(), false));
    }
    SECTION("halted rows have no successor") {
        CHECK(!below_options(m, Side::of(blank), halt_head, Side::of(blank), false));
        CHECK(!below_options(m, Side::of(halt_head), blank, Side::unknown(), false));
    }
    SECTION("two visible heads cannot happen") {
        CHECK(!below_options(m, Side::of(start_head), mid_head, Side::of(blank), false));
        CHECK(!below_options(m, Side::of(start_head), blank, Side::of(mid_head), false));
    }
    SECTION("a headless triple keeps its symbol") {
        auto o = below_options(m, Side::of(blank), blank, Side::of(blank), false);
        REQUIRE(o);
        REQUIRE(o->size() == 1);
        CHECK((*o)[0] == blank);
    }
    SECTION("heads may enter across unknown sides only when allowed") {
        auto closed = below_options(m, Side::unknown(), blank, Side::of(blank), false);
        REQUIRE(closed);
        CHECK(closed->size() == 1);
        auto open = below_options(m, Side::unknown(), blank, Side::of(blank), true);
        REQUIRE(open);
        REQUIRE(open->size() == 2);
        CHECK((*open)[0] == blank);
        CHECK((*open)[1] == TapeCell{Sym::Blank, 1});
        // nothing moves left in this machine, so the right side adds nothing
        auto right = below_options(m, Side::of(blank), blank, Side::unknown(), true);
        REQUIRE(right);
        CHECK(right->size() == 1);
    }
    SECTION("a left move at the leftmost column stays put") {
        TuringMachine ls = left_stepper();
        TapeCell s_head{Sym::Blank, 0};
        auto at0 = below_options(ls, Side::border(), s_head, Side::of(blank), false);
        REQUIRE(at0);
        CHECK((*at0)[0] == TapeCell{Sym::Zero, 1});
        auto inner = below_options(ls, Side::of(blank), s_head, Side::of(blank), false);
        REQUIRE(inner);
        CHECK((*inner)[0] == TapeCell{Sym::Zero, -1});
    }
}

TEST_CASE("every real table window is enumerated") {
    check_slides(m_zero(), 1, 1);
    check_slides(m_zero(), 2, 2);
    check_slides(m_one(), 2, 2);
    check_slides(m_one(), 3, 3);
    check_slides(m_count(4), 3, 3);
}

TEST_CASE("enumerated fragments pass the window validator") {
    auto res = enumerate_fragments(m_one(), 2, 2, 1000000);
    REQUIRE(res.complete);
    REQUIRE(!res.fragments.empty());
    for (const auto& f : res.fragments) CHECK(fragment_window_consistent(m_one(), f));
    for (std::size_t i = 0; i + 1 < res.fragments.size(); ++i)
        CHECK(res.fragments[i].key() < res.fragments[i + 1].key());

    auto again = enumerate_fragments(m_one(), 2, 2, 1000000);
    REQUIRE(again.fragments.size() == res.fragments.size());
    for (std::size_t i = 0; i < res.fragments.size(); ++i)
        CHECK(again.fragments[i].key() == res.fragments[i].key());
}

TEST_CASE("the window validator rejects inconsistency") {
    const TuringMachine& m = m_one();

    Fragment f;
    f.w = 2;
    f.h = 1;
    f.claims.top = true;
    f.cells = {TapeCell{Sym::One, -1}, TapeCell{Sym::Blank, -1}};
    CHECK(!fragment_window_consistent(m, f)); // top row must be blank

    f.cells = {TapeCell{Sym::Blank, -1}, TapeCell{Sym::Blank, -1}};
    CHECK(fragment_window_consistent(m, f));
    f.ci0 = 1;
    CHECK(!fragment_window_consistent(m, f)); // top claim pins the row residue
    f.ci0 = 0;

    Fragment two_heads;
    two_heads.w = 2;
    two_heads.h = 1;
    two_heads.cells = {TapeCell{Sym::Blank, 0}, TapeCell{Sym::Blank, 1}};
    CHECK(!fragment_window_consistent(m, two_heads));

    Fragment early_halt;
    early_halt.w = 1;
    early_halt.h = 2;
    early_halt.cells = {TapeCell{Sym::One, 3}, TapeCell{Sym::One, -1}};
    CHECK(!fragment_window_consistent(m, early_halt)); // halting row must be last

    Fragment tame_halt;
    tame_halt.w = 1;
    tame_halt.h = 1;
    tame_halt.cells = {TapeCell{Sym::One, 3}};
    CHECK(!fragment_window_consistent(m, tame_halt)); // halt needs a bottom claim
    tame_halt.claims.bottom = true;
    CHECK(fragment_window_consistent(m, tame_halt));

    Fragment escape;
    escape.w = 1;
    escape.h = 1;
    escape.claims.right = true;
    escape.cells = {TapeCell{Sym::Blank, 0}}; // start moves right, off the table
    CHECK(!fragment_window_consistent(m, escape));
    escape.claims.right = false;
    CHECK(fragment_window_consistent(m, escape));
}

TEST_CASE("fragment enumeration respects its cap") {
    auto res = enumerate_fragments(m_one(), 4, 4, 10);
    CHECK(!res.complete);

    ConstructionParams p = params(1, std::nullopt, 4, 4);
    p.fragment_cap = 10;
    try {
        build_fragments(m_one(), p);
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(e.cap() == 10);
    }
}

TEST_CASE("builders produce valid instances") {
    SECTION("plain tableau") {
        auto g = build_H(m_zero(), params(1, 2));
        auto facts = validate_instance(g, Family::H);
        INFO(facts.reason);
        REQUIRE(facts.ok);
        CHECK(facts.s == 1);
        CHECK(facts.output == 0);
        CHECK(facts.fragment_count == 2);
        CHECK(facts.tail_len == 0);
        CHECK(facts.machine_bits == m_zero().encode().bits());
        CHECK(facts.r == 1);
    }
    SECTION("full fragment catalog") {
        auto g = build_H(m_zero(), params(1, std::nullopt, 2, 2));
        auto facts = validate_instance(g, Family::H);
        INFO(facts.reason);
        REQUIRE(facts.ok);
        auto all = enumerate_fragments(m_zero(), 2, 2, 1000000);
        REQUIRE(all.complete);
        CHECK(facts.fragment_count == all.fragments.size());
        CHECK(facts.fragment_count >= 4);
    }
    SECTION("tailed tableau") {
        auto g = build_G(m_one(), [&] {
            auto p = params(1, 1, 2, 2);
            p.N = 3;
            return p;
        }());
        auto facts = validate_instance(g, Family::G);
        INFO(facts.reason);
        REQUIRE(facts.ok);
        CHECK(facts.s == 2);
        CHECK(facts.output == 1);
        CHECK(facts.tail_len == 3);
        CHECK(facts.fragment_count == 1);
    }
    SECTION("bit-carrying tableau") {
        auto p = params(1, 0);
        p.pivot_bit = 1;
        auto g = build_J(m_zero(), p);
        auto facts = validate_instance(g, Family::J);
        INFO(facts.reason);
        REQUIRE(facts.ok);
        REQUIRE(facts.pivot_bit.has_value());
        CHECK(*facts.pivot_bit == 1);
        CHECK(facts.fragment_count == 0);
        CHECK(g.size() == 4); // bare 2x2 grid

        CHECK_THROWS_AS(build_J(m_zero(), params(1, 0)), ConfigError);
        CHECK_THROWS_AS(build_H(m_zero(), p), ConfigError);
        CHECK_THROWS_AS(build_G(m_zero(), p), ConfigError);
    }
    SECTION("grid without gadgets") {
        auto g = build_H(m_count(10), params(1, 0));
        CHECK(g.size() == 121);
        auto facts = validate_instance(g, Family::H);
        REQUIRE(facts.ok);
        CHECK(facts.s == 10);
    }
    SECTION("non-halting machines cannot be built") {
        auto p = params(1, 0);
        p.tm_budget = 200;
        CHECK_THROWS_AS(build_H(m_loop(), p), TimeoutError);
    }
    SECTION("paths") {
        auto facts1 = validate_instance(build_P(1), Family::P);
        REQUIRE(facts1.ok);
        CHECK(facts1.path_n == 1);
        auto facts5 = validate_instance(build_P(5), Family::P);
        REQUIRE(facts5.ok);
        CHECK(facts5.path_n == 5);
        CHECK_THROWS_AS(build_P(0), ConfigError);
    }
    SECTION("tail pieces") {
        auto t = build_tail(1, 1);
        CHECK(t.size() == 1);
        auto t2 = build_tail(2, 4);
        CHECK(t2.size() == 3);
        auto l = TableauNodeLabel::decode(t2.nodes[0].input);
        CHECK(l.role == Role::Tail);
        CHECK(l.index == 2);
        CHECK_THROWS_AS(build_tail(3, 2), ConfigError);
        CHECK_THROWS_AS(build_tail(0, 2), ConfigError);
        CHECK(!validate_instance(t2, Family::G).ok); // a bare tail is not an instance
    }
}

TEST_CASE("the checker accepts built instances everywhere") {
    struct Case {
        Family fam;
        LabelledGraph g;
    };
    std::vector<Case> cases;
    cases.push_back({Family::H, build_H(m_zero(), params(1, 2))});
    cases.push_back({Family::H, build_H(m_zero(), params(1, std::nullopt, 2, 2))});
    cases.push_back({Family::H, build_H(m_count(10), params(1, 0))});
    cases.push_back({Family::H, build_H(m_one(), params(2, 3, 3, 3))});
    {
        auto p = params(1, 1, 2, 2);
        p.N = 4;
        cases.push_back({Family::G, build_G(m_one(), p)});
        auto p1 = params(1, 0);
        p1.N = 1;
        cases.push_back({Family::G, build_G(m_zero(), p1)});
    }
    {
        auto p = params(1, 1, 2, 2);
        p.pivot_bit = 0;
        cases.push_back({Family::J, build_J(m_one(), p)});
    }
    cases.push_back({Family::P, build_P(1)});
    cases.push_back({Family::P, build_P(6)});

    for (const auto& c : cases) {
        Verdict v = run(checker(c.fam), c.g);
        INFO("family " << family_name(c.fam) << ", " << c.g.size() << " nodes");
        CHECK(v.accepted);
        CHECK(v.no_nodes().empty());
    }
}

TEST_CASE("the checker is oblivious") {
    CHECK(check_oblivious(checker(Family::H), build_H(m_zero(), params(1, 1, 2, 2)), 5));
    CHECK(check_oblivious(checker(Family::P), build_P(4), 5));
}

TEST_CASE("every catalog corruption is caught locally") {
    LabelledGraph h = build_H(m_zero(), params(1, 2, 2, 2));
    LabelledGraph g = [&] {
        auto p = params(1, 1, 2, 2);
        p.N = 3;
        return build_G(m_one(), p);
    }();
    LabelledGraph j = [&] {
        auto p = params(1, 1, 2, 2);
        p.pivot_bit = 0;
        return build_J(m_zero(), p);
    }();
    LabelledGraph path = build_P(3);

    const auto& catalog = corruption_catalog();
    REQUIRE(catalog.size() >= 12);
    std::set<std::string> names;
    for (const auto& c : catalog) names.insert(c.name);
    REQUIRE(names.size() == catalog.size());

    for (const auto& c : catalog) {
        const LabelledGraph* base = nullptr;
        Family fam{};
        for (Family f : {Family::G, Family::H, Family::J, Family::P}) {
            if (!c.families.count(f)) continue;
            const LabelledGraph* cand = f == Family::H   ? &h
                                        : f == Family::G ? &g
                                        : f == Family::J ? &j
                                                         : &path;
            if (c.applies(*cand)) {
                base = cand;
                fam = f;
                break;
            }
        }
        INFO("corruption " << c.name);
        REQUIRE(base != nullptr);
        LabelledGraph bad = c.apply(*base);
        bad.validate(); // corruption keeps the graph well formed
        Verdict v = run(checker(fam), bad);
        CHECK(!v.accepted);
        CHECK(!validate_instance(bad, fam).ok);
    }
}

TEST_CASE("instance validation replays the machine") {
    auto g = build_H(m_count(10), params(1, 0));
    auto tight = validate_instance(g, Family::H, 10000);
    REQUIRE(tight.ok);
    auto starved = validate_instance(g, Family::H, 5);
    CHECK(!starved.ok);

    // instances of one family do not validate as another
    CHECK(!validate_instance(build_P(4), Family::H).ok);
    CHECK(!validate_instance(g, Family::G).ok); // no tail
    CHECK(!validate_instance(g, Family::P).ok);

    auto p = params(1, 0);
    p.N = 2;
    auto gt = build_G(m_zero(), p);
    CHECK(validate_instance(gt, Family::G).ok);
    CHECK(!validate_instance(gt, Family::H).ok); // stray tail for this family
}

TEST_CASE("fragment interiors match deep table neighborhoods") {
    TuringMachine m = m_count(4);
    ExecutionTable t = execution_table(m, 1000);
    REQUIRE(t.side() == 5);
    std::string bits = m.encode().bits();

    LabelledGraph table = build_H(m, params(1, 0));
    Fragment win = window_of_table(t, 1, 1, 3, 3);
    CHECK(!win.claims.top);
    CHECK(!win.claims.left);
    CHECK(!win.claims.bottom);
    CHECK(!win.claims.right);
    LabelledGraph mat = materialize_fragment(win, bits, 1);

    View from_table = ball(table, 2 * 5 + 2, 1, true);
    View from_window = ball(mat, 1 * 3 + 1, 1, true);
    CHECK(canonical_key(from_table) == canonical_key(from_window));

    // a border window materializes the border cell, pivot flag included
    Fragment corner = window_of_table(t, 0, 0, 2, 2);
    CHECK(corner.claims.top);
    CHECK(corner.claims.left);
    LabelledGraph mat2 = materialize_fragment(corner, bits, 1);
    auto l00 = TableauNodeLabel::decode(mat2.nodes[0].input);
    CHECK(l00.pivot);
    CHECK(l00.top);
    CHECK(l00.left);
    // at radius 1 the corner ball fits inside the 2x2 window exactly
    CHECK(canonical_key(ball(table, 0, 1, true)) == canonical_key(ball(mat2, 0, 1, true)));
    // at radius 2 the table ball reaches past the window
    CHECK(canonical_key(ball(table, 0, 2, true)) != canonical_key(ball(mat2, 0, 2, true)));
}

TEST_CASE("node labels round-trip") {
    auto g = build_G(m_one(), [&] {
        auto p = params(2, 2, 2, 2);
        p.N = 2;
        return p;
    }());
    for (const auto& n : g.nodes) {
        auto l = TableauNodeLabel::try_decode(n.input);
        REQUIRE(l.has_value());
        CHECK(l->encode() == n.input);
    }
    auto jp = [&] {
        auto p = params(1, 0);
        p.pivot_bit = 1;
        return build_J(m_zero(), p);
    }();
    for (const auto& n : jp.nodes) {
        auto l = TableauNodeLabel::try_decode(n.input);
        REQUIRE(l.has_value());
        CHECK(l->encode() == n.input);
    }
    for (std::uint64_t n : {1, 4}) {
        for (const auto& node : build_P(n).nodes) {
            auto l = TableauNodeLabel::try_decode(node.input);
            REQUIRE(l.has_value());
            CHECK(l->encode() == node.input);
        }
    }

    CHECK(!TableauNodeLabel::try_decode(LabelValue::of_nat(7)));
    CHECK(!TableauNodeLabel::try_decode(LabelValue::of_bits("10101")));
    CHECK(!TableauNodeLabel::try_decode(LabelValue::of_tuple({LabelValue::of_nat(0)})));
    // tail indices start at 1
    CHECK(!TableauNodeLabel::try_decode(
        LabelValue::of_tuple({LabelValue::of_nat(2), LabelValue::of_nat(0)})));
    // path distance must stay below the size
    CHECK(!TableauNodeLabel::try_decode(LabelValue::of_tuple(
        {LabelValue::of_nat(4), LabelValue::of_nat(3), LabelValue::of_nat(3)})));
}
