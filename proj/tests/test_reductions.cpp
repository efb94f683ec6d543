#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "locdec/languages.hpp"
#include "locdec/reductions.hpp"

using namespace locdec;

namespace {

ConstructionParams params(std::uint64_t r, std::uint64_t N, std::uint64_t mf,
                          std::uint64_t fw = 0, std::uint64_t fh = 0) {
    ConstructionParams p;
    p.r = r;
    p.N = N;
    p.max_fragments = mf;
    p.frag_w = fw;
    p.frag_h = fh;
    return p;
}

void give_ids(LabelledGraph& g, std::uint64_t stride = 1, std::uint64_t base = 1) {
    for (std::size_t i = 0; i < g.size(); ++i) g.nodes[i].id = base + stride * i;
}

LabelledGraph bit_path(std::size_t n, const std::string& bits) {
    LabelledGraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node(LabelValue::of_bits(bits.substr(i, 1)));
    for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

LabelledGraph random_bit_graph(std::mt19937_64& rng, std::size_t n) {
    LabelledGraph g;
    for (std::size_t i = 0; i < n; ++i)
        g.add_node(LabelValue::of_bits(rng() % 2 ? "1" : "0"));
    for (std::size_t i = 1; i < n; ++i) g.add_edge(i, rng() % i);
    std::size_t extra = n > 2 ? rng() % n : 0;
    for (std::size_t e = 0; e < extra; ++e) {
        std::size_t u = rng() % n, v = rng() % n;
        if (u != v) g.add_edge(u, v);
    }
    return g;
}

} // namespace

TEST_CASE("compilation demands a capable oracle") {
    auto two = language_by_name("two-coloring").deciders.at(0).alg;

    CHECK_THROWS_AS(compile_ld_to_ldof(two, oracle_leader()), CapabilityError);

    ScalarOracle large_blind;
    large_blind.name = "large-blind";
    large_blind.declared_large = true;
    large_blind.labels_for = [](std::uint64_t n) {
        return std::vector<LabelValue>(n, LabelValue::of_nat(n));
    };
    CHECK_THROWS_AS(compile_ld_to_ldof(two, large_blind), CapabilityError);

    LocalAlgorithm compiled = compile_ld_to_ldof(two, oracle_identity());
    CHECK(compiled.radius == 2 * two.radius);
    CHECK(compiled.oblivious);
    CHECK(compiled.uses_oracle_labels);
    CHECK(compiled.name == two.name + "@identity");
}

TEST_CASE("compiled deciders preserve oblivious verdicts") {
    auto two = language_by_name("two-coloring").deciders.at(0).alg;
    auto compiled = compile_ld_to_ldof(two, oracle_identity());
    std::mt19937_64 rng(20260816);

    for (int t = 0; t < 30; ++t) {
        LabelledGraph g = random_bit_graph(rng, 2 + rng() % 6);
        give_ids(g);
        assign_oracle_labels(g, oracle_identity(), AdversaryStrategy::sorted_by_id());
        for (NodeIndex v = 0; v < g.size(); ++v) {
            bool direct = two.eval(ball(g, v, two.radius, true));
            bool lifted = compiled.eval(ball(g, v, compiled.radius, true));
            REQUIRE(direct == lifted);
        }
        CHECK(run(compiled, g).accepted == run(two, g).accepted);
    }
}

TEST_CASE("compilation enumerates every candidate naming") {
    SECTION("a rejected identifier is found whenever the bound admits it") {
        LocalAlgorithm probe;
        probe.name = "reject-id-three";
        probe.radius = 0;
        probe.oblivious = false;
        probe.decide = [](const View& v) { return !(v.nodes[0].id && *v.nodes[0].id == 3); };
        auto compiled = compile_ld_to_ldof(probe, oracle_identity());

        LabelledGraph g = bit_path(6, "000000");
        give_ids(g);
        assign_oracle_labels(g, oracle_identity(), AdversaryStrategy::sorted_by_id());
        // Node i carries label i+1, so candidate ids run over 1..i+1 and id 3
        // only comes into range from the third node on.
        for (NodeIndex v = 0; v < g.size(); ++v) {
            bool lifted = compiled.eval(ball(g, v, 0, true));
            CHECK(lifted == (v + 1 < 3));
        }
    }

    SECTION("labels too small for the view force acceptance") {
        auto compiled = compile_ld_to_ldof(decider_constant_no(1), oracle_identity());
        LabelledGraph g = bit_path(3, "000");
        for (auto& n : g.nodes) n.oracle = LabelValue::of_nat(2);
        // The middle node sees 3 nodes but only 2 candidate ids, which no
        // honest run can produce; both ends see a workable pair and reject.
        CHECK(compiled.eval(ball(g, 1, 2, true)));
        CHECK_FALSE(compiled.eval(ball(g, 0, 2, true)));
        CHECK_FALSE(compiled.eval(ball(g, 2, 2, true)));
    }
}

TEST_CASE("identifier enumeration respects its cap") {
    LocalAlgorithm yes0 = decider_constant_yes(0);
    auto compiled = compile_ld_to_ldof(yes0, oracle_identity(), 1000);

    LabelledGraph g;
    g.add_node(LabelValue::of_nat(0));
    g.nodes[0].oracle = LabelValue::of_nat(5000);
    try {
        compiled.eval(ball(g, 0, 0, true));
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(e.cap() == 1000);
        CHECK(e.reached() == 5000);
    }

    g.nodes[0].oracle = LabelValue::of_nat(900);
    CHECK(compiled.eval(ball(g, 0, 0, true)));
}

TEST_CASE("view enumeration covers every instance ball") {
    struct Case {
        TuringMachine m;
        std::uint64_t mf;
    };
    std::vector<Case> cases;
    cases.push_back({m_zero(), 0});
    cases.push_back({m_zero(), 2});
    cases.push_back({m_one(), 2});
    cases.push_back({m_count(2), 1});

    for (const auto& c : cases) {
        ConstructionParams p = params(1, 2, c.mf);
        auto Q = enumerate_Q(c.m, 1, 1000000, LabelValue::of_nat(0), p);
        CHECK(Q.complete);
        CHECK(Q.r == 1);
        CHECK(!Q.views.empty());

        LabelledGraph inst = build_G(c.m, p);
        apply_constant_oracle_labels(inst, LabelValue::of_nat(0));
        for (NodeIndex v = 0; v < inst.size(); ++v) {
            CanonicalKey key = canonical_key(ball(inst, v, 1, true));
            REQUIRE(Q.views.count(key) == 1);
        }
    }

    SECTION("a bit-carrying pivot is not an enumerable view") {
        ConstructionParams p = params(1, 2, 0);
        auto Q = enumerate_Q(m_zero(), 1, 1000000, LabelValue::of_nat(0), p);
        ConstructionParams pj = p;
        pj.pivot_bit = 1;
        LabelledGraph j = build_J(m_zero(), pj);
        apply_constant_oracle_labels(j, LabelValue::of_nat(0));
        CHECK(Q.views.count(canonical_key(ball(j, 0, 1, true))) == 0);
    }

    SECTION("the base label is part of the view") {
        ConstructionParams p = params(1, 2, 0);
        auto q0 = enumerate_Q(m_zero(), 1, 1000000, LabelValue::of_nat(0), p);
        auto q7 = enumerate_Q(m_zero(), 1, 1000000, LabelValue::of_nat(7), p);
        CHECK(q0.views.size() == q7.views.size());
        for (const auto& [key, view] : q0.views) CHECK(q7.views.count(key) == 0);
    }
}

TEST_CASE("view enumeration handles machines that never halt") {
    ConstructionParams p = params(1, 2, 0);
    auto Q = enumerate_Q(m_loop(), 1, 1000000, LabelValue::of_nat(0), p);
    CHECK(!Q.views.empty());

    auto again = enumerate_Q(m_loop(), 1, 1000000, LabelValue::of_nat(0), p);
    REQUIRE(Q.views.size() == again.views.size());
    for (const auto& [key, view] : Q.views) CHECK(again.views.count(key) == 1);

    // A deeper corner of the same unbounded tableau realizes no new views
    // near the pivot.
    auto deep = detail::build_partial_assembly(m_loop(), p, 5, std::nullopt, 2, 1);
    apply_constant_oracle_labels(deep.g, LabelValue::of_nat(0));
    for (NodeIndex v : deep.roots) {
        CanonicalKey key = canonical_key(ball(deep.g, v, 1, true));
        REQUIRE(Q.views.count(key) == 1);
    }

    SECTION("machines halting just past the window are treated as running") {
        auto Qc = enumerate_Q(m_count(10), 1, 1000000, LabelValue::of_nat(0),
                              params(1, 2, 2, 2, 2));
        CHECK(!Qc.views.empty());
    }
}

TEST_CASE("view enumeration respects its cap") {
    try {
        enumerate_Q(m_one(), 1, 3, LabelValue::of_nat(0), params(1, 2, 0));
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(e.cap() == 3);
    }
    CHECK_THROWS_AS(enumerate_Q(m_zero(), 0), ConfigError);
    CHECK_THROWS_AS(enumerate_Q(m_zero(), 2, 1000, LabelValue::of_nat(0), params(1, 2, 0)),
                    ConfigError);
}

TEST_CASE("view separation flags rejected views") {
    ConstructionParams p = params(1, 2, 0);

    auto out = separate_by_neighborhoods(decider_constant_yes(1), m_zero(), 1,
                                         LabelValue::of_nat(0), 1000000, p);
    CHECK(out.bit == 0);
    CHECK_FALSE(out.any_no);
    CHECK(out.examined > 0);
    CHECK(out.transcript.size() == out.examined);

    auto rej = separate_by_neighborhoods(decider_constant_no(1), m_zero(), 1,
                                         LabelValue::of_nat(0), 1000000, p);
    CHECK(rej.bit == 1);
    CHECK(rej.any_no);

    // The all-zeros machine never raises its accepting halt state, the
    // one-writer does so two rows down.
    auto h0 = separate_by_neighborhoods(decider_halt1_rejector(1), m_zero(), 1,
                                        LabelValue::of_nat(0), 1000000, p);
    CHECK(h0.bit == 0);
    auto h1 = separate_by_neighborhoods(decider_halt1_rejector(1), m_one(), 1,
                                        LabelValue::of_nat(0), 1000000, p);
    CHECK(h1.bit == 1);

    std::set<CanonicalKey> seen;
    for (const auto& [key, yes] : h1.transcript) seen.insert(key);
    CHECK(seen.size() == h1.transcript.size());
}

TEST_CASE("instance probes flag rejected nodes") {
    ConstructionParams p = params(1, 2, 0);

    auto ok = separate_by_instance(decider_constant_yes(1), m_zero(), 1, p);
    CHECK(ok.bit == 1);
    CHECK(ok.whole_instance);
    CHECK(ok.examined > 0);

    auto no = separate_by_instance(decider_constant_no(1), m_zero(), 1, p);
    CHECK(no.bit == 0);

    // The pivot stub refutes a bit-1 claim for the zero-writer, endorses it
    // for the one-writer, and cannot refute a machine that never halts.
    auto z = separate_by_instance(decider_pivot_stub(1), m_zero(), 1, p);
    CHECK(z.bit == 0);
    CHECK(z.whole_instance);
    auto o = separate_by_instance(decider_pivot_stub(1), m_one(), 1, p);
    CHECK(o.bit == 1);
    CHECK(o.whole_instance);
    auto l = separate_by_instance(decider_pivot_stub(1), m_loop(), 1, p);
    CHECK(l.bit == 1);
    CHECK_FALSE(l.whole_instance);
}

TEST_CASE("separators reject mismatched deciders") {
    CHECK_THROWS_AS(separate_by_neighborhoods(decider_constant_yes(2), m_zero(), 1), ConfigError);
    CHECK_THROWS_AS(separate_by_instance(decider_constant_yes(2), m_zero(), 1), ConfigError);
    CHECK_THROWS_AS(separate_by_neighborhoods(decider_pivot_stub(1), m_zero(), 1), ConfigError);
}

TEST_CASE("separators produce a bit for every machine") {
    std::vector<TuringMachine> machines = {m_zero(), m_one(), m_count(10), m_loop()};
    ConstructionParams p = params(1, 2, 2, 2, 2);
    for (const auto& m : machines) {
        auto viewbit = separate_by_neighborhoods(decider_constant_yes(1), m, 1,
                                                 LabelValue::of_nat(0), 1000000, p);
        CHECK((viewbit.bit == 0 || viewbit.bit == 1));
        CHECK(viewbit.examined == viewbit.transcript.size());

        auto instbit = separate_by_instance(decider_constant_yes(1), m, 1, p);
        CHECK((instbit.bit == 0 || instbit.bit == 1));
        CHECK(instbit.examined >= 1);
    }
}
