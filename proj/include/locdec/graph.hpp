#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "label.hpp"

namespace locdec {

using NodeIndex = std::size_t;

struct NodeRecord {
    LabelValue input;
    std::optional<std::uint64_t> id;
    std::optional<LabelValue> oracle;
};

// A finite simple connected graph with per-node input labels, optional
// distinct identifiers, and optional oracle labels (all nodes or none).
// Node indices are an internal bookkeeping device; nothing semantic may
// depend on them.
class LabelledGraph {
public:
    std::vector<NodeRecord> nodes;

    NodeIndex add_node(LabelValue input,
                       std::optional<std::uint64_t> id = std::nullopt,
                       std::optional<LabelValue> oracle = std::nullopt) {
        nodes.push_back(NodeRecord{std::move(input), id, std::move(oracle)});
        adj_.emplace_back();
        return nodes.size() - 1;
    }

    void add_edge(NodeIndex u, NodeIndex v) {
        if (u >= nodes.size() || v >= nodes.size()) throw ValidationError("edge endpoint out of range");
        if (u == v) throw ValidationError("self loops are not allowed");
        auto e = std::minmax(u, v);
        if (!edges_.insert({e.first, e.second}).second) return; // already present
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }

    bool has_edge(NodeIndex u, NodeIndex v) const {
        auto e = std::minmax(u, v);
        return edges_.count({e.first, e.second}) > 0;
    }

    std::size_t size() const { return nodes.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::set<std::pair<NodeIndex, NodeIndex>>& edges() const { return edges_; }
    const std::vector<NodeIndex>& neighbors(NodeIndex v) const {
        if (v >= nodes.size()) throw ValidationError("node index out of range");
        return adj_[v];
    }

    // Throws ValidationError unless the graph satisfies all structural
    // invariants: nonempty, connected, distinct ids, oracle all-or-none.
    void validate() const {
        if (nodes.empty()) throw ValidationError("graph must have at least one node");
        std::vector<char> seen(nodes.size(), 0);
        std::queue<NodeIndex> q;
        q.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!q.empty()) {
            NodeIndex v = q.front();
            q.pop();
            for (NodeIndex u : adj_[v]) {
                if (!seen[u]) {
                    seen[u] = 1;
                    ++reached;
                    q.push(u);
                }
            }
        }
        if (reached != nodes.size()) throw ValidationError("graph is not connected");

        std::set<std::uint64_t> ids;
        std::size_t with_id = 0, with_oracle = 0;
        for (const auto& n : nodes) {
            if (n.id) {
                ++with_id;
                if (!ids.insert(*n.id).second) throw ValidationError("identifiers must be pairwise distinct");
            }
            if (n.oracle) ++with_oracle;
        }
        if (with_id != 0 && with_id != nodes.size())
            throw ValidationError("identifiers must be present on all nodes or none");
        if (with_oracle != 0 && with_oracle != nodes.size())
            throw ValidationError("oracle labels must be present on all nodes or none");
    }

    bool has_ids() const {
        return !nodes.empty() && nodes.front().id.has_value();
    }
    bool has_oracle_labels() const {
        return !nodes.empty() && nodes.front().oracle.has_value();
    }

    // Single-source distances (unbounded). Unreachable is SIZE_MAX, which
    // validate() rules out for whole graphs.
    std::vector<std::size_t> distances_from(NodeIndex root) const {
        if (root >= nodes.size()) throw ValidationError("node index out of range");
        std::vector<std::size_t> dist(nodes.size(), SIZE_MAX);
        std::queue<NodeIndex> q;
        dist[root] = 0;
        q.push(root);
        while (!q.empty()) {
            NodeIndex v = q.front();
            q.pop();
            for (NodeIndex u : adj_[v]) {
                if (dist[u] == SIZE_MAX) {
                    dist[u] = dist[v] + 1;
                    q.push(u);
                }
            }
        }
        return dist;
    }

private:
    std::vector<std::vector<NodeIndex>> adj_;
    std::set<std::pair<NodeIndex, NodeIndex>> edges_;
};

struct ViewNode {
    LabelValue input;
    std::optional<std::uint64_t> id;
    std::optional<LabelValue> oracle;
    std::size_t dist = 0; // distance from the view's root
};

// The radius-r neighborhood an algorithm actually sees: an induced subgraph
// re-indexed so the root is node 0, plus per-node distances from the root.
// source_index records where each view node came from; it is diagnostic only
// and never participates in comparisons or canonical forms.
struct View {
    std::vector<ViewNode> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t radius = 0;
    std::vector<NodeIndex> source_index;

    std::size_t size() const { return nodes.size(); }

    const std::vector<std::size_t>& neighbors(std::size_t v) const {
        ensure_adj();
        return adj_[v];
    }

private:
    mutable std::vector<std::vector<std::size_t>> adj_;
    void ensure_adj() const {
        if (!adj_.empty() || nodes.empty()) return;
        adj_.resize(nodes.size());
        for (auto [a, b] : edges) {
            adj_[a].push_back(b);
            adj_[b].push_back(a);
        }
    }
};

// Extracts ball(v, r): BFS to depth r, induced edges, deterministic order
// (by distance, then source index). With oblivious=true the identifiers are
// not copied into the view.
inline View ball(const LabelledGraph& g, NodeIndex v, std::size_t r, bool oblivious) {
    if (v >= g.size()) throw ValidationError("ball root out of range");
    std::vector<std::size_t> dist(g.size(), SIZE_MAX);
    std::vector<NodeIndex> order;
    std::queue<NodeIndex> q;
    dist[v] = 0;
    q.push(v);
    order.push_back(v);
    while (!q.empty()) {
        NodeIndex x = q.front();
        q.pop();
        if (dist[x] == r) continue;
        // Sorted exploration keeps the output order a pure function of the graph.
        std::vector<NodeIndex> nb = g.neighbors(x);
        std::sort(nb.begin(), nb.end());
        for (NodeIndex u : nb) {
            if (dist[u] == SIZE_MAX) {
                dist[u] = dist[x] + 1;
                q.push(u);
                order.push_back(u);
            }
        }
    }
    std::vector<std::size_t> local(g.size(), SIZE_MAX);
    View out;
    out.radius = r;
    for (std::size_t i = 0; i < order.size(); ++i) {
        NodeIndex src = order[i];
        local[src] = i;
        const NodeRecord& rec = g.nodes[src];
        out.nodes.push_back(ViewNode{rec.input, oblivious ? std::nullopt : rec.id, rec.oracle, dist[src]});
        out.source_index.push_back(src);
    }
    for (const auto& [a, b] : g.edges()) {
        if (local[a] != SIZE_MAX && local[b] != SIZE_MAX) out.edges.push_back({local[a], local[b]});
    }
    return out;
}

inline View strip_identifiers(View v) {
    for (auto& n : v.nodes) n.id.reset();
    return v;
}

// Restriction of a view to distance <= r2 from its root. Distances inside a
// ball agree with the source graph, so this equals the smaller ball.
inline View sub_view(const View& v, std::size_t r2) {
    if (r2 > v.radius) throw ValidationError("sub_view radius exceeds view radius");
    View out;
    out.radius = r2;
    std::vector<std::size_t> local(v.nodes.size(), SIZE_MAX);
    for (std::size_t i = 0; i < v.nodes.size(); ++i) {
        if (v.nodes[i].dist <= r2) {
            local[i] = out.nodes.size();
            out.nodes.push_back(v.nodes[i]);
            out.source_index.push_back(i < v.source_index.size() ? v.source_index[i] : i);
        }
    }
    for (auto [a, b] : v.edges) {
        if (local[a] != SIZE_MAX && local[b] != SIZE_MAX) out.edges.push_back({local[a], local[b]});
    }
    return out;
}

} // namespace locdec
