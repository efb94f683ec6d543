#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "graph.hpp"

namespace locdec {

using CanonicalKey = std::string;

namespace detail {

// Input to the canonizer: per-node content strings (everything label-like,
// already serialized) plus undirected adjacency.
struct CanonInput {
    std::vector<std::string> content;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

class Canonizer {
public:
    explicit Canonizer(const CanonInput& in) : in_(in), n_(in.content.size()) {
        adj_.resize(n_);
        for (auto [a, b] : in.edges) {
            adj_[a].push_back(b);
            adj_[b].push_back(a);
        }
        for (auto& v : adj_) std::sort(v.begin(), v.end());
    }

    std::string run() {
        if (n_ == 0) return "n:0;";
        // Initial coloring by content, ids assigned in sorted content order so
        // the numbering is a function of the multiset, not of node indices.
        std::vector<std::string> sorted = in_.content;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<int> color(n_);
        for (std::size_t v = 0; v < n_; ++v) {
            color[v] = int(std::lower_bound(sorted.begin(), sorted.end(), in_.content[v]) - sorted.begin());
        }
        best_.clear();
        search(std::move(color));
        return best_;
    }

private:
    // Iterated neighbor-color refinement to a fixpoint. Isomorphism-invariant:
    // new color ids are assigned by sorted (old color, neighbor multiset) keys.
    void refine(std::vector<int>& color) const {
        while (true) {
            std::vector<std::pair<int, std::vector<int>>> key(n_);
            for (std::size_t v = 0; v < n_; ++v) {
                std::vector<int> nb;
                nb.reserve(adj_[v].size());
                for (std::size_t u : adj_[v]) nb.push_back(color[u]);
                std::sort(nb.begin(), nb.end());
                key[v] = {color[v], std::move(nb)};
            }
            std::vector<std::pair<int, std::vector<int>>> uniq = key;
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            bool changed = false;
            for (std::size_t v = 0; v < n_; ++v) {
                int c = int(std::lower_bound(uniq.begin(), uniq.end(), key[v]) - uniq.begin());
                if (c != color[v]) changed = true;
                color[v] = c;
            }
            if (!changed || std::size_t(uniq.size()) == n_) return;
        }
    }

    void search(std::vector<int> color) {
        refine(color);
        // Find the smallest non-singleton color class.
        std::map<int, std::vector<std::size_t>> classes;
        for (std::size_t v = 0; v < n_; ++v) classes[color[v]].push_back(v);
        const std::vector<std::size_t>* target = nullptr;
        for (const auto& [c, members] : classes) {
            if (members.size() > 1) {
                target = &members;
                break;
            }
        }
        if (!target) {
            // Discrete: color order is a total order on nodes.
            std::vector<std::size_t> perm(n_);
            for (std::size_t v = 0; v < n_; ++v) perm[std::size_t(color[v])] = v;
            consider(serialize(perm));
            return;
        }
        int fresh = int(n_); // strictly above every refined color id
        for (std::size_t v : *target) {
            std::vector<int> branched = color;
            branched[v] = fresh;
            search(std::move(branched));
        }
    }

    std::string serialize(const std::vector<std::size_t>& perm) const {
        std::vector<std::size_t> pos(n_);
        for (std::size_t i = 0; i < n_; ++i) pos[perm[i]] = i;
        std::string s = "n:" + std::to_string(n_) + ";";
        for (std::size_t i = 0; i < n_; ++i) {
            s += in_.content[perm[i]];
            s += ';';
        }
        for (std::size_t i = 0; i < n_; ++i) {
            std::vector<std::size_t> fwd;
            for (std::size_t u : adj_[perm[i]]) {
                if (pos[u] > i) fwd.push_back(pos[u]);
            }
            std::sort(fwd.begin(), fwd.end());
            for (std::size_t p : fwd) {
                s += std::to_string(i);
                s += ',';
                s += std::to_string(p);
                s += ';';
            }
            s += '|';
        }
        return s;
    }

    void consider(std::string s) {
        if (best_.empty() || s < best_) best_ = std::move(s);
    }

    const CanonInput& in_;
    std::size_t n_;
    std::vector<std::vector<std::size_t>> adj_;
    std::string best_;
};

inline std::string view_node_content(const ViewNode& n, bool is_root) {
    std::string s;
    s += is_root ? "R" : "-";
    s += "d" + std::to_string(n.dist);
    s += "|i:" + n.input.bits();
    s += "|id:";
    if (n.id) s += std::to_string(*n.id);
    s += "|o:";
    if (n.oracle) s += n.oracle->bits();
    return s;
}

} // namespace detail

// Exact canonical form of a view under root-preserving, label-preserving
// isomorphism: equal keys iff such an isomorphism exists. Identifiers and
// oracle labels participate when present; source indices never do.
inline CanonicalKey canonical_key(const View& v) {
    detail::CanonInput in;
    in.content.reserve(v.nodes.size());
    for (std::size_t i = 0; i < v.nodes.size(); ++i) {
        in.content.push_back(detail::view_node_content(v.nodes[i], i == 0));
    }
    in.edges = v.edges;
    return detail::Canonizer(in).run();
}

// Canonical form of a whole labelled graph (no distinguished root).
inline CanonicalKey canonical_key(const LabelledGraph& g) {
    detail::CanonInput in;
    in.content.reserve(g.size());
    for (const auto& n : g.nodes) {
        std::string s = "|i:" + n.input.bits() + "|id:";
        if (n.id) s += std::to_string(*n.id);
        s += "|o:";
        if (n.oracle) s += n.oracle->bits();
        in.content.push_back(std::move(s));
    }
    for (const auto& e : g.edges()) in.edges.push_back(e);
    return detail::Canonizer(in).run();
}

inline bool isomorphic(const View& a, const View& b) { return canonical_key(a) == canonical_key(b); }
inline bool isomorphic(const LabelledGraph& a, const LabelledGraph& b) {
    return canonical_key(a) == canonical_key(b);
}

} // namespace locdec
