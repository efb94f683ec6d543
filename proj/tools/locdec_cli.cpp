#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "locdec/corpus.hpp"
#include "locdec/graph_io.hpp"
#include "locdec/reductions.hpp"

using nlohmann::json;
using namespace locdec;

namespace {

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

TuringMachine machine_from_flags(const std::string& builtin, const std::string& file) {
    if (!builtin.empty() && !file.empty())
        throw ConfigError("give either --builtin or --machine, not both");
    if (!builtin.empty()) {
        if (builtin == "zero") return m_zero();
        if (builtin == "one") return m_one();
        if (builtin == "loop") return m_loop();
        if (builtin.rfind("count:", 0) == 0) return m_count(std::stoull(builtin.substr(6)));
        if (builtin.rfind("index:", 0) == 0) return machine_for_index(std::stoull(builtin.substr(6)));
        throw ConfigError("unknown builtin machine: " + builtin);
    }
    if (file.empty()) throw ConfigError("a machine is required (--builtin or --machine)");
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open machine file: " + file);
    json j;
    in >> j;
    return machine_from_json(j);
}

AdversaryStrategy parse_strategy(const std::string& s) {
    if (s.empty() || s == "sorted") return AdversaryStrategy::sorted_by_id();
    if (s.rfind("random:", 0) == 0)
        return AdversaryStrategy::random(std::stoull(s.substr(7)));
    if (s.rfind("const:", 0) == 0) {
        std::string rest = s.substr(6);
        auto at = rest.find('@');
        if (at == std::string::npos) throw ConfigError("const strategy needs const:V@i,j,...");
        std::uint64_t value = std::stoull(rest.substr(0, at));
        std::vector<NodeIndex> set;
        std::string list = rest.substr(at + 1);
        std::size_t pos = 0;
        while (pos < list.size()) {
            auto comma = list.find(',', pos);
            if (comma == std::string::npos) comma = list.size();
            set.push_back(std::stoull(list.substr(pos, comma - pos)));
            pos = comma + 1;
        }
        return AdversaryStrategy::constant_on_set(std::move(set), value);
    }
    throw ConfigError("unknown strategy: " + s + " (want sorted | random:SEED | const:V@i,j,...)");
}

LocalAlgorithm stock_decider(const std::string& name, std::uint64_t r) {
    if (name == "constant-yes") return decider_constant_yes(r);
    if (name == "constant-no") return decider_constant_no(r);
    if (name == "halt1-rejector") return decider_halt1_rejector(r);
    if (name == "pivot-stub") return decider_pivot_stub(r);
    throw ConfigError("unknown stock decider: " + name);
}

void parse_dims(const std::string& dims, ConstructionParams& p) {
    if (dims.empty()) return;
    auto x = dims.find('x');
    if (x == std::string::npos) throw ConfigError("fragment dims must look like WxH");
    p.frag_w = std::stoull(dims.substr(0, x));
    p.frag_h = std::stoull(dims.substr(x + 1));
}

json facts_to_json(const InstanceFacts& f) {
    json j{{"valid", f.ok},
           {"machine", f.machine_bits},
           {"r", f.r},
           {"steps", f.s},
           {"output", f.output},
           {"tail", f.tail_len},
           {"fragments", f.fragment_count},
           {"path-n", f.path_n}};
    j["reason"] = f.ok ? json() : json(f.reason);
    j["pivot-bit"] = f.pivot_bit ? json(*f.pivot_bit) : json();
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for tableau instances, scalar oracles, and local deciders"};
    app.require_subcommand(1);
    int rc = 0;

    // ---- build ----
    auto* b = app.add_subcommand("build", "construct an instance and write it as graph JSON");
    std::string b_family, b_builtin, b_machine, b_out, b_dims, b_oracle, b_strategy;
    std::uint64_t b_r = 1, b_tail = 1, b_n = 1, b_fragcap = 1000000;
    std::int64_t b_bit = -1;
    std::int64_t b_mf = -1;
    std::uint64_t b_oracle_n = 0;
    bool b_ids = false;
    b->add_option("--family", b_family, "instance family: H, G, J, or P")->required();
    b->add_option("--builtin", b_builtin, "builtin machine: zero|one|loop|count:K|index:I");
    b->add_option("--machine", b_machine, "machine JSON file");
    b->add_option("--r", b_r, "checking radius the instance advertises");
    b->add_option("--tail", b_tail, "tail length (family G)");
    b->add_option("--n", b_n, "path length (family P)");
    b->add_option("--pivot-bit", b_bit, "claimed output bit (family J)");
    b->add_option("--max-fragments", b_mf, "cap on attached fragments (-1 = all)");
    b->add_option("--frag-dims", b_dims, "fragment window size WxH");
    b->add_option("--fragment-cap", b_fragcap, "fragment enumeration cap")
        ->envname("LOCDEC_CAP_FRAGMENTS");
    b->add_flag("--ids", b_ids, "assign identifiers 1..n");
    b->add_option("--oracle", b_oracle, "oracle whose labels to place");
    b->add_option("--strategy", b_strategy, "placement: sorted | random:SEED | const:V@i,j,...");
    b->add_option("--oracle-n", b_oracle_n, "query the oracle at this size (>= n)");
    b->add_option("--out", b_out, "output graph file")->required();
    b->callback([&] {
        Family fam = family_from_string(b_family);
        LabelledGraph g;
        ConstructionParams p;
        p.r = b_r;
        p.N = b_tail;
        p.fragment_cap = b_fragcap;
        if (b_mf >= 0) p.max_fragments = std::uint64_t(b_mf);
        parse_dims(b_dims, p);
        std::string machine_bits;
        if (fam == Family::P) {
            g = build_P(b_n);
        } else {
            TuringMachine m = machine_from_flags(b_builtin, b_machine);
            machine_bits = m.encode().bits();
            if (fam == Family::H) g = build_H(m, p);
            if (fam == Family::G) g = build_G(m, p);
            if (fam == Family::J) {
                if (b_bit != 0 && b_bit != 1) throw ConfigError("family J needs --pivot-bit 0|1");
                p.pivot_bit = int(b_bit);
                g = build_J(m, p);
            }
        }
        if (b_ids)
            for (std::size_t i = 0; i < g.size(); ++i) g.nodes[i].id = i + 1;
        json placement;
        if (!b_oracle.empty()) {
            auto strat = parse_strategy(b_strategy);
            std::optional<std::uint64_t> N;
            if (b_oracle_n > 0) N = b_oracle_n;
            assign_oracle_labels(g, oracle_by_name(b_oracle), strat, N);
            placement = {{"oracle", b_oracle}, {"strategy", strat.name()}};
            if (N) placement["n"] = *N;
        }
        write_graph_file(g, b_out);
        json out{{"family", family_name(fam)},
                 {"nodes", g.size()},
                 {"edges", g.edges().size()},
                 {"out", b_out}};
        if (!machine_bits.empty()) out["machine"] = machine_bits;
        if (!placement.is_null()) out["placement"] = placement;
        emit(out);
        rc = 0;
    });

    // ---- check ----
    auto* c = app.add_subcommand("check", "validate an instance file against a family");
    std::string c_family, c_in;
    std::uint64_t c_budget = 10000;
    c->add_option("--family", c_family, "instance family: H, G, J, or P")->required();
    c->add_option("--in", c_in, "graph file")->required();
    c->add_option("--budget", c_budget, "replay budget for the machine")
        ->envname("LOCDEC_CAP_TM_BUDGET");
    c->callback([&] {
        Family fam = family_from_string(c_family);
        LabelledGraph g = read_graph_file(c_in);
        InstanceFacts f = validate_instance(g, fam, c_budget);
        json out = facts_to_json(f);
        out["family"] = family_name(fam);
        out["checker-accepts"] = run(checker(fam), g).accepted;
        emit(out);
        rc = f.ok ? 0 : 1;
    });

    // ---- oracle ----
    auto* o = app.add_subcommand("oracle", "query a scalar oracle");
    std::string o_name, o_invert;
    std::vector<std::uint64_t> o_classify;
    std::uint64_t o_dump = 0;
    o->add_option("--name", o_name, "oracle name")->required();
    o->add_option("--classify", o_classify, "largeness check: threshold C and horizon NMAX")
        ->expected(2);
    o->add_option("--dump", o_dump, "print the labels for size N");
    o->add_option("--invert", o_invert, "index bound for a label, given as bits");
    o->callback([&] {
        ScalarOracle oracle = oracle_by_name(o_name);
        json out{{"oracle", oracle.name}, {"declared-large", oracle.declared_large}};
        int actions = int(!o_classify.empty()) + int(o_dump > 0) + int(!o_invert.empty());
        if (actions != 1)
            throw ConfigError("pick exactly one of --classify, --dump, --invert");
        if (!o_classify.empty()) {
            auto witness = largeness_witness(oracle, o_classify[0], o_classify[1]);
            out["threshold"] = o_classify[0];
            out["horizon"] = o_classify[1];
            out["witnessed"] = witness.has_value();
            out["witness"] = witness ? json(*witness) : json();
        } else if (o_dump > 0) {
            json labels = json::array();
            for (const auto& l : oracle.labels(o_dump)) labels.push_back(l.bits());
            out["n"] = o_dump;
            out["labels"] = labels;
        } else {
            out["label"] = o_invert;
            out["bound"] = invert_bound(oracle, LabelValue::of_bits(o_invert));
        }
        emit(out);
        rc = 0;
    });

    // ---- decide ----
    auto* d = app.add_subcommand("decide", "run a registered language's decider on a graph");
    std::string d_lang, d_in;
    std::size_t d_idx = 0;
    d->add_option("--lang", d_lang, "language name")->required();
    d->add_option("--in", d_in, "graph file")->required();
    d->add_option("--decider", d_idx, "decider index (default 0)");
    d->callback([&] {
        const Language& lang = language_by_name(d_lang);
        if (d_idx >= lang.deciders.size())
            throw ConfigError("language " + lang.name + " has no decider #" + std::to_string(d_idx));
        const DeciderEntry& entry = lang.deciders[d_idx];
        LabelledGraph g = read_graph_file(d_in);
        bool member = lang.membership(g);
        Verdict v = run(entry.alg, g);
        emit(json{{"language", lang.name},
                  {"decider", entry.alg.name},
                  {"class", entry.class_tag},
                  {"member", member},
                  {"accepted", v.accepted},
                  {"rejecting-nodes", v.no_nodes().size()},
                  {"agree", v.accepted == member}});
        rc = v.accepted ? 0 : 1;
    });

    // ---- compile ----
    auto* k = app.add_subcommand("compile", "lift an identifier-using decider to oracle labels");
    std::string k_oracle, k_in, k_stock, k_lang;
    std::uint64_t k_radius = 1, k_cap = 1000000;
    std::size_t k_idx = 0;
    k->add_option("--oracle", k_oracle, "large oracle with an index bound")->required();
    k->add_option("--in", k_in, "graph file (must carry oracle labels)")->required();
    k->add_option("--stock", k_stock, "stock decider name");
    k->add_option("--radius", k_radius, "stock decider radius");
    k->add_option("--lang", k_lang, "take the decider from this language instead");
    k->add_option("--decider", k_idx, "decider index within --lang");
    k->add_option("--enum-cap", k_cap, "cap on identifier assignments per view")
        ->envname("LOCDEC_CAP_ENUM");
    k->callback([&] {
        LocalAlgorithm inner;
        if (!k_lang.empty()) {
            const Language& lang = language_by_name(k_lang);
            if (k_idx >= lang.deciders.size())
                throw ConfigError("language " + lang.name + " has no decider #" + std::to_string(k_idx));
            inner = lang.deciders[k_idx].alg;
        } else if (!k_stock.empty()) {
            inner = stock_decider(k_stock, k_radius);
        } else {
            throw ConfigError("pick a decider with --stock or --lang");
        }
        LocalAlgorithm lifted = compile_ld_to_ldof(inner, oracle_by_name(k_oracle), k_cap);
        LabelledGraph g = read_graph_file(k_in);
        Verdict v = run(lifted, g);
        emit(json{{"decider", lifted.name},
                  {"radius", lifted.radius},
                  {"accepted", v.accepted},
                  {"rejecting-nodes", v.no_nodes().size()}});
        rc = v.accepted ? 0 : 1;
    });

    // ---- separate ----
    auto* s = app.add_subcommand("separate", "probe a decider against a machine's tableau family");
    std::string s_mode, s_builtin, s_machine, s_stock, s_base = "0", s_dims;
    std::uint64_t s_r = 1, s_cap = 1000000, s_tail = 0, s_fragcap = 1000000;
    std::int64_t s_mf = -1;
    bool s_transcript = false;
    s->add_option("--mode", s_mode, "views | instance")->required();
    s->add_option("--builtin", s_builtin, "builtin machine: zero|one|loop|count:K|index:I");
    s->add_option("--machine", s_machine, "machine JSON file");
    s->add_option("--stock", s_stock, "stock decider name")->required();
    s->add_option("--r", s_r, "decider radius");
    s->add_option("--base-label", s_base, "constant oracle label bits (views mode)");
    s->add_option("--cap", s_cap, "view enumeration cap")->envname("LOCDEC_CAP_ENUM");
    s->add_option("--tail", s_tail, "tail length override (0 = default)");
    s->add_option("--max-fragments", s_mf, "cap on fragments (-1 = all)");
    s->add_option("--frag-dims", s_dims, "fragment window size WxH");
    s->add_option("--fragment-cap", s_fragcap, "fragment enumeration cap")
        ->envname("LOCDEC_CAP_FRAGMENTS");
    s->add_flag("--transcript", s_transcript, "include the per-view transcript (views mode)");
    s->callback([&] {
        TuringMachine m = machine_from_flags(s_builtin, s_machine);
        LocalAlgorithm alg = stock_decider(s_stock, s_r);
        ConstructionParams p;
        p.r = s_r;
        p.N = s_tail > 0 ? s_tail : 2 * s_r;
        p.fragment_cap = s_fragcap;
        if (s_mf >= 0) p.max_fragments = std::uint64_t(s_mf);
        parse_dims(s_dims, p);
        SeparatorOutcome outcome;
        if (s_mode == "views") {
            outcome = separate_by_neighborhoods(alg, m, s_r, LabelValue::of_bits(s_base), s_cap, p);
        } else if (s_mode == "instance") {
            outcome = separate_by_instance(alg, m, s_r, p);
        } else {
            throw ConfigError("mode must be views or instance");
        }
        json out{{"mode", s_mode},
                 {"decider", alg.name},
                 {"machine", m.encode().bits()},
                 {"bit", outcome.bit},
                 {"any-no", outcome.any_no},
                 {"examined", outcome.examined},
                 {"whole-instance", outcome.whole_instance}};
        if (s_transcript) {
            json t = json::array();
            for (const auto& [key, yes] : outcome.transcript) t.push_back({{"view", key}, {"yes", yes}});
            out["transcript"] = t;
        }
        emit(out);
        rc = 0;
    });

    // ---- table ----
    auto* t = app.add_subcommand("table", "dump a halting machine's run tableau");
    std::string t_builtin, t_machine;
    std::uint64_t t_budget = 10000;
    t->add_option("--builtin", t_builtin, "builtin machine: zero|one|loop|count:K|index:I");
    t->add_option("--machine", t_machine, "machine JSON file");
    t->add_option("--budget", t_budget, "step budget")->envname("LOCDEC_CAP_TM_BUDGET");
    t->callback([&] {
        TuringMachine m = machine_from_flags(t_builtin, t_machine);
        ExecutionTable tab = execution_table(m, t_budget);
        json rows = json::array();
        for (std::size_t i = 0; i < tab.side(); ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < tab.side(); ++j) {
                const TapeCell& cell = tab.at(i, j);
                row.push_back({{"sym", sym_str(cell.sym)}, {"head", cell.head}});
            }
            rows.push_back(row);
        }
        emit(json{{"machine", m.encode().bits()},
                  {"steps", tab.s},
                  {"output", tab.output},
                  {"rows", rows}});
        rc = 0;
    });

    // ---- corpus ----
    auto* cp = app.add_subcommand("corpus", "list the bundled instances, optionally re-verifying");
    bool cp_verify = false;
    std::uint64_t cp_budget = 10000;
    cp->add_flag("--verify", cp_verify, "re-run validation and membership against expectations");
    cp->add_option("--budget", cp_budget, "replay budget for verification")
        ->envname("LOCDEC_CAP_TM_BUDGET");
    cp->callback([&] {
        if (!cp_verify) {
            emit(corpus_manifest());
            rc = 0;
            return;
        }
        json rows = json::array();
        std::size_t mismatches = 0;
        for (const auto& e : corpus()) {
            bool valid = validate_instance(e.graph, e.family, cp_budget).ok;
            bool member = language_by_name(family_language(e.family)).membership(e.graph);
            bool ok = valid == e.valid && member == e.member;
            if (!ok) ++mismatches;
            rows.push_back({{"name", e.name},
                            {"valid", valid},
                            {"valid-expected", e.valid},
                            {"member", member},
                            {"member-expected", e.member},
                            {"ok", ok}});
        }
        emit(json{{"entries", rows}, {"total", rows.size()}, {"mismatches", mismatches}});
        rc = mismatches == 0 ? 0 : 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
