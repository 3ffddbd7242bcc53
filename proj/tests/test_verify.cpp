#include <doctest.h>

#include <algorithm>

#include "io.hpp"
#include "mst.hpp"
#include "reduction.hpp"
#include "verify.hpp"

using namespace molred;

namespace {

std::string fixture(const std::string& name) {
    return read_file(std::string(MOLRED_FIXTURE_DIR) + "/" + name);
}

struct ScriptedRun {
    Molecule original;
    ForestState forest;
    Trace trace;
};

ScriptedRun worked_example() {
    ScriptedRun run;
    run.original = molecule_from_json(fixture("dh-example.molecule.json"));
    Script script = script_from_json(fixture("dh-example.script.json"));
    Molecule m = run.original;
    RunResult r = run_scripted(m, run.forest, run.trace, script, {}, 3);
    REQUIRE(r.ok());
    return run;
}

// small molecule with one 3S2G step: a cycle carrying a degree-3/degree-2 pair
Trace one_3s2g_trace(Molecule& original) {
    original.clear();
    int v1 = original.add_atom("v1"), v2 = original.add_atom("v2"), a = original.add_atom("a"),
        b = original.add_atom("b"), c = original.add_atom("c");
    original.add_bond(a, v1, BondKind::PC);
    original.add_bond(v1, b, BondKind::PC);
    original.add_bond(v2, v1, BondKind::PC);
    original.add_bond(c, v2, BondKind::PC);
    original.add_bond(a, b, BondKind::PC);
    original.add_bond(b, c, BondKind::PC);
    Script s;
    s.steps.push_back({StepKind::S3S2G, {"v1", "v2"}});
    Molecule m = original;
    ForestState f;
    Trace t;
    RunResult r = run_scripted(m, f, t, s, {}, 3, /*continue_after=*/false);
    REQUIRE(r.ok());
    REQUIRE(t.size() == 1);
    REQUIRE(t.steps()[0].delta_chi_computed == -2);
    return t;
}

}  // namespace

TEST_CASE("the worked-example trace verifies and tampering is caught") {
    ScriptedRun run = worked_example();
    CHECK(verify_trace(run.original, run.trace, 3).all_ok());

    SUBCASE("dropping a tree edge breaks the spanning check") {
        Trace tampered = run.trace;
        for (StepRecord& r : tampered.steps()) {
            if (!r.g_edges_added.empty()) {
                int moved = r.g_edges_added.back();
                r.g_edges_added.pop_back();
                r.g_edges_rejected.push_back(moved);
                std::sort(r.g_edges_rejected.begin(), r.g_edges_rejected.end());
                break;
            }
        }
        VerificationReport report = verify_trace(run.original, tampered, 3);
        CHECK(!report.all_ok());
        CHECK(!report.spanning_tree_ok);
    }
    SUBCASE("forged gamma on a table step breaks table_ok") {
        Trace tampered = run.trace;
        for (StepRecord& r : tampered.steps()) {
            if (r.kind == StepKind::D3D4G) {
                r.delta_gamma = r.delta_gamma + Rat(1, 24);
                break;
            }
        }
        VerificationReport report = verify_trace(run.original, tampered, 3);
        CHECK(!report.table_ok);
    }
}

TEST_CASE("forged gamma on a 3S2G record") {
    Molecule original;
    Trace t = one_3s2g_trace(original);
    CHECK(verify_trace(original, t, 3).table_ok);
    t.steps()[0].delta_gamma = Rat(-2);  // drops the good-step increment
    t.gamma_total = Rat(-2);
    VerificationReport report = verify_trace(original, t, 3);
    CHECK(!report.table_ok);
}

TEST_CASE("brute force spanning trees") {
    SUBCASE("triangle has three") {
        auto trees = brute_force_spanning_trees(3, {{0, 1}, {1, 2}, {0, 2}});
        CHECK(trees.size() == 3);
    }
    SUBCASE("a tree input has exactly one") {
        auto trees = brute_force_spanning_trees(4, {{0, 1}, {1, 2}, {1, 3}});
        REQUIRE(trees.size() == 1);
        CHECK(trees[0] == std::vector<int>{0, 1, 2});
    }
    SUBCASE("intro graph contains the kruskal output") {
        WeightedGraph g = weighted_graph_from_json(fixture("intro-graph.json"));
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : g.edges) edges.push_back({e.u, e.v});
        auto trees = brute_force_spanning_trees(static_cast<int>(g.vertices.size()), edges);
        std::vector<int> chosen = kruskal(g);
        std::sort(chosen.begin(), chosen.end());
        CHECK(std::find(trees.begin(), trees.end(), chosen) != trees.end());
    }
    SUBCASE("size limits") {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < 10; ++i) edges.push_back({i, i + 1});
        CHECK_THROWS(brute_force_spanning_trees(11, edges));
    }
    SUBCASE("the parallel-bond pair has two") {
        auto trees = brute_force_spanning_trees(2, {{0, 1}, {0, 1}});
        CHECK(trees.size() == 2);
    }
}

TEST_CASE("multiple components witness on the intro kruskal run") {
    // kruskal picks CE then AB: after the second pick two components of
    // size two exist
    WeightedGraph g = weighted_graph_from_json(fixture("intro-graph.json"));
    std::vector<int> order = kruskal(g);
    DisjointSet dsu;
    dsu.reset(static_cast<int>(g.vertices.size()));
    std::vector<int> size(g.vertices.size(), 1);
    int non_singleton = 0, witness = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const WeightedEdge& e = g.edges[order[i]];
        int ru = dsu.find(e.u), rv = dsu.find(e.v);
        REQUIRE(ru != rv);
        non_singleton += (size[ru] == 1 && size[rv] == 1) ? 1
                         : (size[ru] > 1 && size[rv] > 1) ? -1
                                                          : 0;
        dsu.unite(e.u, e.v);
        size[dsu.find(e.u)] = size[ru] + size[rv];
        if (non_singleton >= 2 && witness < 0) witness = static_cast<int>(i);
    }
    CHECK(witness == 1);  // after step 2 (0-based index 1): {C,E} and {A,B}
}
