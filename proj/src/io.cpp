#include "io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace molred {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, true, /*ignore_comments=*/false);
    return j;
}

void check_version(const json& j) {
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"] != 1)
        throw FormatError("unsupported or missing format version");
}

json tree_to_json(const SignedTree& t, int node) {
    json j;
    j["sign"] = t.nodes[node].sign > 0 ? "+" : "-";
    if (!t.is_leaf(node)) {
        json children = json::array();
        for (int k = 0; k < 3; ++k) children.push_back(tree_to_json(t, t.child(node, k)));
        j["children"] = std::move(children);
    }
    return j;
}

void tree_from_json(const json& j, SignedTree& t, int node) {
    if (!j.contains("sign") || !j["sign"].is_string())
        throw FormatError("tree node without a sign");
    std::string sign = j["sign"].get<std::string>();
    if (sign != "+" && sign != "-") throw FormatError("tree node sign must be '+' or '-'");
    int s = sign == "+" ? +1 : -1;
    if (t.nodes[node].sign != s)
        throw FormatError("tree node sign contradicts the (s,-s,s) rule");
    if (!j.contains("children")) return;
    const json& children = j["children"];
    if (!children.is_array() || children.size() != 3)
        throw FormatError("internal tree node must have exactly 3 children");
    t.expand_leaf(node);
    for (int k = 0; k < 3; ++k) tree_from_json(children[k], t, t.child(node, k));
}

}  // namespace

std::string couple_to_json(const Couple& c, bool compact) {
    json j;
    j["version"] = 1;
    j["plus"] = tree_to_json(c.plus, 0);
    j["minus"] = tree_to_json(c.minus, 0);
    json pairing = json::array();
    for (const auto& [a, b] : c.pairing)
        pairing.push_back(json::array({path_string(c.tree(a.tree), a.tree, a.node),
                                       path_string(c.tree(b.tree), b.tree, b.node)}));
    j["pairing"] = std::move(pairing);
    return compact ? j.dump() : j.dump(2) + "\n";
}

Couple couple_from_json(const std::string& text) {
    json j = parse(text);
    check_version(j);
    if (!j.contains("plus") || !j.contains("minus") || !j.contains("pairing"))
        throw FormatError("couple file needs plus, minus and pairing");
    Couple c;
    c.plus = SignedTree::single(+1);
    c.minus = SignedTree::single(-1);
    if (j["plus"]["sign"] != "+" || j["minus"]["sign"] != "-")
        throw FormatError("root signs must be + and -");
    tree_from_json(j["plus"], c.plus, 0);
    tree_from_json(j["minus"], c.minus, 0);
    for (const json& pair : j["pairing"]) {
        if (!pair.is_array() || pair.size() != 2) throw FormatError("pairing entry must be a pair");
        auto a = parse_path_string(pair[0].get<std::string>(), c.plus, c.minus);
        auto b = parse_path_string(pair[1].get<std::string>(), c.plus, c.minus);
        if (!a || !b) throw FormatError("pairing references an unknown leaf path");
        c.pairing.push_back({*a, *b});
    }
    return c;
}

std::string molecule_to_json(const Molecule& m) {
    json j;
    j["version"] = 1;
    j["dimension"] = m.dimension;
    json atoms = json::array();
    for (int a = 0; a < m.atom_slots(); ++a) {
        if (!m.atom_alive(a)) continue;
        atoms.push_back({{"id", m.atom(a).id}, {"degenerate", m.atom(a).degenerate}});
    }
    j["atoms"] = std::move(atoms);
    json bonds = json::array();
    for (int b = 0; b < m.bond_slots(); ++b) {
        if (!m.bond_alive(b)) continue;
        const Bond& bond = m.bond(b);
        bonds.push_back({{"id", bond.id},
                         {"tail", m.atom(bond.tail).id},
                         {"head", m.atom(bond.head).id},
                         {"kind", bond_kind_name(bond.kind)}});
    }
    j["bonds"] = std::move(bonds);
    return j.dump(2) + "\n";
}

Molecule molecule_from_json(const std::string& text) {
    json j = parse(text);
    check_version(j);
    Molecule m;
    if (j.contains("dimension")) m.dimension = j["dimension"].get<int>();
    if (m.dimension < 3) throw FormatError("dimension must be at least 3");
    if (!j.contains("atoms") || !j.contains("bonds"))
        throw FormatError("molecule file needs atoms and bonds");
    for (const json& atom : j["atoms"]) {
        bool degenerate = atom.contains("degenerate") && atom["degenerate"].get<bool>();
        m.add_atom(atom.at("id").get<std::string>(), degenerate);
    }
    // bonds must arrive with ids 0..n-1 in order: ids give the greedy order
    std::vector<std::tuple<int, std::string, std::string, std::string>> bonds;
    for (const json& bond : j["bonds"])
        bonds.push_back({bond.at("id").get<int>(), bond.at("tail").get<std::string>(),
                         bond.at("head").get<std::string>(),
                         bond.contains("kind") ? bond["kind"].get<std::string>() : "PC"});
    std::sort(bonds.begin(), bonds.end());
    for (std::size_t i = 0; i < bonds.size(); ++i) {
        auto& [id, tail, head, kind] = bonds[i];
        if (id != static_cast<int>(i)) throw FormatError("bond ids must be dense from 0");
        int t = m.find_atom(tail), h = m.find_atom(head);
        if (t < 0 || h < 0) throw FormatError("bond endpoint references an unknown atom");
        BondKind k = BondKind::PC;
        if (kind == "LP") k = BondKind::LP;
        else if (kind == "INJECTED") k = BondKind::INJECTED;
        else if (kind != "PC") throw FormatError("unknown bond kind '" + kind + "'");
        try {
            m.add_bond(t, h, k);
        } catch (const std::exception& e) {
            throw FormatError(std::string("invalid bond: ") + e.what());
        }
    }
    return m;
}

std::string script_to_json(const Script& s) {
    json steps = json::array();
    for (const auto& step : s.steps) {
        json st;
        st["kind"] = step_kind_name(step.kind);
        const char* key = step.kind == StepKind::BR ? "bond" : "at";
        st[key] = step.targets;
        steps.push_back(std::move(st));
    }
    json j;
    j["version"] = 1;
    j["steps"] = std::move(steps);
    return j.dump(2) + "\n";
}

Script script_from_json(const std::string& text) {
    json j = parse(text);
    check_version(j);
    Script s;
    for (const json& step : j.at("steps")) {
        auto kind = step_kind_from_name(step.at("kind").get<std::string>());
        if (!kind) throw FormatError("unknown step kind '" + step["kind"].get<std::string>() + "'");
        ScriptStep out{*kind, {}};
        const char* key = step.contains("bond") ? "bond" : "at";
        if (!step.contains(key)) throw FormatError("script step without targets");
        for (const json& t : step[key]) out.targets.push_back(t.get<std::string>());
        s.steps.push_back(std::move(out));
    }
    return s;
}

void trace_to_jsonl(const Molecule& m, const Trace& t, bool spanning, int edges,
                    std::ostream& out) {
    for (const StepRecord& r : t.steps()) {
        json j;
        j["index"] = r.index;
        j["kind"] = step_kind_name(r.kind);
        json atoms = json::array();
        for (int a : r.atoms_removed) atoms.push_back(m.atom(a).id);
        j["atoms_removed"] = std::move(atoms);
        j["bonds_removed"] = r.bonds_removed;
        json injected = json::array();
        for (const Bond& b : r.bonds_injected)
            injected.push_back({{"id", b.id},
                                {"tail", m.atom(b.tail).id},
                                {"head", m.atom(b.head).id},
                                {"kind", bond_kind_name(b.kind)}});
        j["bonds_injected"] = std::move(injected);
        j["g_edges_added"] = r.g_edges_added;
        j["g_edges_rejected"] = r.g_edges_rejected;
        j["delta_chi_computed"] = r.delta_chi_computed;
        j["delta_gamma"] = r.delta_gamma.str();
        j["delta_kappa"] = r.delta_kappa.str();
        if (r.checkpoint >= 0) j["checkpoint"] = r.checkpoint == 0 ? "first" : "second";
        if (r.table_unchecked) j["table_unchecked"] = true;
        out << j.dump() << "\n";
    }
    json summary;
    summary["summary"] = true;
    summary["dimension"] = t.dimension;
    summary["gamma_total"] = t.gamma_total.str();
    summary["kappa_total"] = t.kappa_total.str();
    summary["spanning_tree"] = spanning;
    summary["edges"] = edges;
    out << summary.dump() << "\n";
}

LoadedTrace trace_from_jsonl(const Molecule& m, const std::string& text) {
    LoadedTrace loaded;
    loaded.trace.reset(m.dimension);
    std::istringstream in(text);
    std::string line;
    bool saw_summary = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = parse(line);
        if (j.contains("summary")) {
            saw_summary = true;
            loaded.trace.dimension = j.at("dimension").get<int>();
            loaded.trace.gamma_total = Rat::parse(j.at("gamma_total").get<std::string>());
            loaded.trace.kappa_total = Rat::parse(j.at("kappa_total").get<std::string>());
            loaded.summary_spanning = j.at("spanning_tree").get<bool>();
            loaded.summary_edges = j.at("edges").get<int>();
            continue;
        }
        StepRecord& r = loaded.trace.push();
        auto kind = step_kind_from_name(j.at("kind").get<std::string>());
        if (!kind) throw FormatError("trace with unknown step kind");
        r.kind = *kind;
        for (const json& id : j.at("atoms_removed")) {
            int a = m.find_atom(id.get<std::string>());
            if (a < 0) throw FormatError("trace references unknown atom '" + id.get<std::string>() + "'");
            r.atoms_removed.push_back(a);
        }
        r.bonds_removed = j.at("bonds_removed").get<std::vector<int>>();
        for (const json& b : j.at("bonds_injected")) {
            Bond bond;
            bond.id = b.at("id").get<int>();
            bond.tail = m.find_atom(b.at("tail").get<std::string>());
            bond.head = m.find_atom(b.at("head").get<std::string>());
            if (bond.tail < 0 || bond.head < 0)
                throw FormatError("injected bond references unknown atoms");
            bond.kind = BondKind::INJECTED;
            bond.alive = true;
            r.bonds_injected.push_back(bond);
        }
        r.g_edges_added = j.at("g_edges_added").get<std::vector<int>>();
        r.g_edges_rejected = j.at("g_edges_rejected").get<std::vector<int>>();
        r.delta_chi_computed = j.at("delta_chi_computed").get<int>();
        r.delta_gamma = Rat::parse(j.at("delta_gamma").get<std::string>());
        r.delta_kappa = Rat::parse(j.at("delta_kappa").get<std::string>());
        if (j.contains("checkpoint")) r.checkpoint = j["checkpoint"] == "first" ? 0 : 1;
        if (j.contains("table_unchecked")) r.table_unchecked = j["table_unchecked"].get<bool>();
    }
    if (!saw_summary) throw FormatError("trace file without a summary line");
    return loaded;
}

std::string weighted_graph_to_json(const WeightedGraph& g) {
    json j;
    j["version"] = 1;
    j["vertices"] = g.vertices;
    json edges = json::array();
    for (const auto& e : g.edges)
        edges.push_back(json::array({g.vertices[e.u], g.vertices[e.v], e.weight.str()}));
    j["edges"] = std::move(edges);
    return j.dump(2) + "\n";
}

WeightedGraph weighted_graph_from_json(const std::string& text) {
    json j = parse(text);
    check_version(j);
    WeightedGraph g;
    for (const json& v : j.at("vertices")) g.add_vertex(v.get<std::string>());
    for (const json& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw FormatError("edge must be [u, v, weight]");
        g.add_edge(e[0].get<std::string>(), e[1].get<std::string>(),
                   Rat::parse(e[2].get<std::string>()));
    }
    return g;
}

std::string verification_report_to_json(const VerificationReport& r) {
    json j;
    j["spanning_tree_ok"] = r.spanning_tree_ok;
    j["replay_ok"] = r.replay_ok;
    j["table_ok"] = r.table_ok;
    j["maximality_ok"] = r.maximality_ok;
    j["injected_ok"] = r.injected_ok;
    json failures = json::array();
    for (const auto& [idx, msg] : r.failures)
        failures.push_back({{"step", idx}, {"message", msg}});
    j["failures"] = std::move(failures);
    return j.dump(2) + "\n";
}

std::map<std::string, std::string> name_map_from_json(const std::string& text) {
    json j = parse(text);
    check_version(j);
    std::map<std::string, std::string> out;
    for (auto& [key, value] : j.at("map").items()) out[key] = value.get<std::string>();
    return out;
}

std::string export_dot(const Molecule& m, const std::vector<int>& g_bond_ids) {
    std::vector<int> tree_bonds = g_bond_ids;
    std::sort(tree_bonds.begin(), tree_bonds.end());
    std::vector<int> atoms;
    for (int a = 0; a < m.atom_slots(); ++a)
        if (m.atom_alive(a)) atoms.push_back(a);
    std::sort(atoms.begin(), atoms.end(),
              [&](int a, int b) { return m.atom(a).id < m.atom(b).id; });
    std::ostringstream out;
    out << "digraph molecule {\n";
    out << "  node [shape=circle];\n";
    for (int a : atoms) {
        out << "  \"" << m.atom(a).id << "\"";
        if (m.atom(a).degenerate) out << " [style=filled]";
        out << ";\n";
    }
    for (int b = 0; b < m.bond_slots(); ++b) {
        if (!m.bond_alive(b)) continue;
        const Bond& bond = m.bond(b);
        out << "  \"" << m.atom(bond.tail).id << "\" -> \"" << m.atom(bond.head).id
            << "\" [label=\"" << bond.id << "\"";
        if (std::binary_search(tree_bonds.begin(), tree_bonds.end(), b)) out << ", color=red";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw FormatError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw FormatError("cannot move '" + tmp + "' into place");
}

}  // namespace molred
