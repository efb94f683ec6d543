#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "graph.hpp"

namespace locdec {

// On-disk graph form:
//   { "nodes": [ { "label": "<bits>", "id": <nat|null>, "oracle": "<bits>"|null }, ... ],
//     "edges": [ [u, v], ... ] }
// Node order in the file fixes the indices used by "edges".
inline nlohmann::json graph_to_json(const LabelledGraph& g) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nlohmann::json nj;
        nj["label"] = n.input.bits();
        nj["id"] = n.id ? nlohmann::json(*n.id) : nlohmann::json(nullptr);
        nj["oracle"] = n.oracle ? nlohmann::json(n.oracle->bits()) : nlohmann::json(nullptr);
        j["nodes"].push_back(std::move(nj));
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& [u, v] : g.edges()) j["edges"].push_back({u, v});
    return j;
}

inline LabelledGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
        throw ValidationError("graph json must have nodes and edges");
    LabelledGraph g;
    for (const auto& nj : j.at("nodes")) {
        std::optional<std::uint64_t> id;
        if (nj.contains("id") && !nj.at("id").is_null()) id = nj.at("id").get<std::uint64_t>();
        std::optional<LabelValue> oracle;
        if (nj.contains("oracle") && !nj.at("oracle").is_null())
            oracle = LabelValue::of_bits(nj.at("oracle").get<std::string>());
        g.add_node(LabelValue::of_bits(nj.at("label").get<std::string>()), id, oracle);
    }
    for (const auto& ej : j.at("edges")) {
        if (!ej.is_array() || ej.size() != 2) throw ValidationError("edge entries must be [u, v]");
        g.add_edge(ej.at(0).get<std::size_t>(), ej.at(1).get<std::size_t>());
    }
    g.validate();
    return g;
}

inline void write_graph_file(const LabelledGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << graph_to_json(g).dump(2) << "\n";
}

inline LabelledGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad json in ") + path + ": " + e.what());
    }
    return graph_from_json(j);
}

// Rendering-only export; the JSON form is the one that round-trips.
inline std::string graph_to_dot(const LabelledGraph& g, const std::string& name = "g") {
    std::ostringstream out;
    out << "graph " << name << " {\n";
    out << "  node [shape=box, fontsize=9];\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& n = g.nodes[i];
        out << "  n" << i << " [label=\"#" << i;
        if (n.id) out << " id=" << *n.id;
        out << "\\nx=" << (n.input.size() <= 24 ? n.input.bits() : n.input.bits().substr(0, 24) + "...");
        if (n.oracle)
            out << "\\nf=" << (n.oracle->size() <= 24 ? n.oracle->bits() : n.oracle->bits().substr(0, 24) + "...");
        out << "\"];\n";
    }
    for (const auto& [u, v] : g.edges()) out << "  n" << u << " -- n" << v << ";\n";
    out << "}\n";
    return out.str();
}

} // namespace locdec
