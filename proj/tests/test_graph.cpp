#include <catch2/catch_amalgamated.hpp>

#include <deque>
#include <map>
#include <set>

#include <locdec/graph.hpp>
#include <locdec/graph_io.hpp>

using namespace locdec;

namespace {

LabelledGraph path_graph(std::size_t n) {
    LabelledGraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node(LabelValue::of_nat(i));
    for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

LabelledGraph cycle_graph(std::size_t n) {
    LabelledGraph g = path_graph(n);
    g.add_edge(n - 1, 0);
    return g;
}

// reference BFS, independent of LabelledGraph::distances_from
std::map<NodeIndex, std::size_t> bfs_ref(const LabelledGraph& g, NodeIndex src) {
    std::map<NodeIndex, std::size_t> dist;
    std::deque<NodeIndex> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        NodeIndex v = q.front();
        q.pop_front();
        for (NodeIndex w = 0; w < g.size(); ++w) {
            if (!g.has_edge(v, w) || dist.count(w)) continue;
            dist[w] = dist[v] + 1;
            q.push_back(w);
        }
    }
    return dist;
}

} // namespace

TEST_CASE("edges normalize, reject self-loops, deduplicate") {
    LabelledGraph g;
    g.add_node(LabelValue::of_nat(0));
    g.add_node(LabelValue::of_nat(1));
    g.add_edge(1, 0);
    g.add_edge(0, 1);
    CHECK(g.edge_count() == 1);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK_THROWS_AS(g.add_edge(1, 1), ValidationError);
}

TEST_CASE("validate requires connectivity and consistent decorations") {
    LabelledGraph g = path_graph(4);
    CHECK_NOTHROW(g.validate());

    LabelledGraph disc;
    disc.add_node(LabelValue::of_nat(0));
    disc.add_node(LabelValue::of_nat(1));
    CHECK_THROWS_AS(disc.validate(), ValidationError);

    LabelledGraph empty;
    CHECK_THROWS_AS(empty.validate(), ValidationError);

    LabelledGraph part = path_graph(3);
    part.nodes[0].id = 7;
    CHECK_THROWS_AS(part.validate(), ValidationError); // ids must be all or none
    part.nodes[1].id = 8;
    part.nodes[2].id = 7; // duplicate
    CHECK_THROWS_AS(part.validate(), ValidationError);
    part.nodes[2].id = 9;
    CHECK_NOTHROW(part.validate());

    part.nodes[1].oracle = LabelValue::of_nat(1);
    CHECK_THROWS_AS(part.validate(), ValidationError); // oracle labels all or none
    part.nodes[0].oracle = LabelValue::of_nat(0);
    part.nodes[2].oracle = LabelValue::of_nat(2);
    CHECK_NOTHROW(part.validate());
}

TEST_CASE("distances match reference BFS") {
    for (std::size_t n : {2, 5, 8}) {
        LabelledGraph g = cycle_graph(n);
        g.add_edge(0, n / 2); // a chord
        for (NodeIndex src = 0; src < g.size(); ++src) {
            auto ref = bfs_ref(g, src);
            auto got = g.distances_from(src);
            for (NodeIndex v = 0; v < g.size(); ++v) REQUIRE(got[v] == ref.at(v));
        }
    }
}

TEST_CASE("ball holds exactly the radius neighborhood with induced edges") {
    LabelledGraph g = cycle_graph(8);
    for (NodeIndex v = 0; v < g.size(); ++v) g.nodes[v].id = 100 + v;
    auto ref = bfs_ref(g, 3);

    for (std::size_t r : {0, 1, 2, 3}) {
        View view = ball(g, 3, r, /*oblivious=*/false);
        CHECK(view.radius == r);
        REQUIRE(!view.nodes.empty());
        CHECK(view.nodes[0].dist == 0);
        CHECK(view.nodes[0].id == std::optional<std::uint64_t>(103));

        std::multiset<std::uint64_t> got_ids, want_ids;
        for (const auto& vn : view.nodes) got_ids.insert(*vn.id);
        for (const auto& [w, d] : ref) {
            if (d <= r) want_ids.insert(100 + w);
        }
        CHECK(got_ids == want_ids);

        for (const auto& vn : view.nodes) CHECK(vn.dist == ref.at(*vn.id - 100));

        // induced edges: every graph edge between included nodes, nothing else
        std::size_t expect_edges = 0;
        for (auto [a, b] : g.edges()) {
            if (ref.at(a) <= r && ref.at(b) <= r) ++expect_edges;
        }
        CHECK(view.edges.size() == expect_edges);
    }
}

TEST_CASE("oblivious balls carry no identifiers") {
    LabelledGraph g = path_graph(5);
    for (NodeIndex v = 0; v < g.size(); ++v) g.nodes[v].id = v + 1;
    View view = ball(g, 2, 2, /*oblivious=*/true);
    for (const auto& vn : view.nodes) CHECK(!vn.id.has_value());
    View peek = ball(g, 2, 2, /*oblivious=*/false);
    View stripped = strip_identifiers(peek);
    for (const auto& vn : stripped.nodes) CHECK(!vn.id.has_value());
}

TEST_CASE("sub_view restricts to the smaller radius") {
    LabelledGraph g = cycle_graph(9);
    g.add_edge(2, 7);
    View big = ball(g, 0, 3, true);
    for (std::size_t r2 : {0, 1, 2, 3}) {
        View small = sub_view(big, r2);
        View direct = ball(g, 0, r2, true);
        CHECK(small.size() == direct.size());
        CHECK(small.edges.size() == direct.edges.size());
        std::multiset<std::size_t> a, b;
        for (const auto& vn : small.nodes) a.insert(vn.dist);
        for (const auto& vn : direct.nodes) b.insert(vn.dist);
        CHECK(a == b);
    }
    CHECK_THROWS_AS(sub_view(big, 4), ValidationError);
}

TEST_CASE("graph json round-trips and validates") {
    LabelledGraph g = path_graph(3);
    g.nodes[0].id = 5;
    g.nodes[1].id = 2;
    g.nodes[2].id = 9;
    g.nodes[0].oracle = LabelValue::of_bits("101");
    g.nodes[1].oracle = LabelValue::of_bits("0");
    g.nodes[2].oracle = LabelValue::of_bits("11");

    auto j = graph_to_json(g);
    LabelledGraph back = graph_from_json(j);
    REQUIRE(back.size() == 3);
    CHECK(back.edge_count() == 2);
    for (NodeIndex v = 0; v < 3; ++v) {
        CHECK(back.nodes[v].input == g.nodes[v].input);
        CHECK(back.nodes[v].id == g.nodes[v].id);
        CHECK(back.nodes[v].oracle == g.nodes[v].oracle);
    }

    // pinned wire format
    CHECK(j.contains("nodes"));
    CHECK(j.contains("edges"));
    CHECK(j["nodes"][0]["label"] == "0");
    CHECK(j["nodes"][0]["id"] == 5);
    CHECK(j["nodes"][0]["oracle"] == "101");
    CHECK(j["edges"][0].is_array());

    LabelledGraph anon = path_graph(2);
    auto j2 = graph_to_json(anon);
    CHECK(j2["nodes"][0]["id"].is_null());
    CHECK(j2["nodes"][0]["oracle"].is_null());
    LabelledGraph anon2 = graph_from_json(j2);
    CHECK(!anon2.has_ids());
    CHECK(!anon2.has_oracle_labels());
}

TEST_CASE("bad graph json is rejected") {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array({{{"label", "0"}, {"id", nullptr}, {"oracle", nullptr}}});
    j["edges"] = nlohmann::json::array({{0, 5}});
    CHECK_THROWS_AS(graph_from_json(j), ValidationError);
    nlohmann::json j2;
    j2["nodes"] = nlohmann::json::array();
    j2["edges"] = nlohmann::json::array();
    CHECK_THROWS_AS(graph_from_json(j2), ValidationError);
}

TEST_CASE("dot export mentions every node once") {
    LabelledGraph g = path_graph(3);
    std::string dot = graph_to_dot(g);
    CHECK(dot.find("graph") != std::string::npos);
    CHECK(dot.find("0 --") != std::string::npos);
}
