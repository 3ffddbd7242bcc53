#include <doctest.h>

#include <set>

#include <json.hpp>

#include "io.hpp"
#include "reduction.hpp"
#include "verify.hpp"

using namespace molred;

namespace {

std::string fixture(const std::string& name) {
    return read_file(std::string(MOLRED_FIXTURE_DIR) + "/" + name);
}

Molecule minimal_molecule() {
    Couple c;
    c.plus = SignedTree::single(+1);
    c.plus.expand_leaf(0);
    c.minus = SignedTree::single(-1);
    c.minus.expand_leaf(0);
    auto leaf = [&](int tag, int k) {
        const SignedTree& t = tag > 0 ? c.plus : c.minus;
        return NodeRef{static_cast<std::int8_t>(tag), t.child(0, k)};
    };
    c.pairing = {{leaf(+1, 0), leaf(-1, 0)}, {leaf(+1, 1), leaf(-1, 1)}, {leaf(+1, 2), leaf(-1, 2)}};
    return molecule_from_couple(c);
}

std::set<std::pair<std::string, std::string>> tree_pairs(const Molecule& m, const ForestState& f) {
    std::set<std::pair<std::string, std::string>> out;
    for (const ForestEdge& e : f.edges()) {
        std::string u = m.atom(e.u).id, v = m.atom(e.v).id;
        out.insert({std::min(u, v), std::max(u, v)});
    }
    return out;
}

}  // namespace

TEST_CASE("table rows carry the ledger increments") {
    auto row = step_table_row(StepKind::S3S3_2G, 3);
    REQUIRE(row.has_value());
    CHECK(row->chi_set == std::vector<int>{-2});
    CHECK(row->increment(3) == Rat(1, 12));
    CHECK(row->kappa == Rat(-2));

    CHECK(step_table_row(StepKind::R2_2G, 3)->increment(3) == Rat(1, 6));
    CHECK(step_table_row(StepKind::D3D4G, 3)->increment(3) == Rat(1, 8));
    CHECK(step_table_row(StepKind::D3D3_6G, 3)->chi_set == std::vector<int>{-5, -4});
    CHECK(!step_table_row(StepKind::BR, 3).has_value());
    CHECK(!step_table_row(StepKind::DA, 3).has_value());
    CHECK(good_step_threshold(3) == Rat(1, 12));
}

TEST_CASE("step kind names round trip") {
    for (const char* name : {"DA", "TB1", "TB2", "BR", "3S3-1", "3S3-2G", "3S3-3G", "3S3-4G",
                             "3S3-5G", "3D3-1", "3D3-2G", "3D3-3G", "3D3-4G", "3D3-5G", "3D3-6G",
                             "3D4G", "3S2G", "3R-1", "3R-2G", "2R-1", "2R-2G", "2R-3", "2R-4",
                             "2R-5"}) {
        auto kind = step_kind_from_name(name);
        REQUIRE(kind.has_value());
        CHECK(std::string(step_kind_name(*kind)) == name);
    }
    CHECK(!step_kind_from_name("nope").has_value());
}

TEST_CASE("minimal molecule reduces by TB1 under the triple-bond extension") {
    Molecule m = minimal_molecule();
    ForestState f;
    Trace t;
    ReductionConfig cfg;

    SUBCASE("rejected without the flag") {
        RunResult r = run_reduction(m, f, t, cfg, Policy::First, 0, 3);
        CHECK(r.status == RunStatus::InitialTripleBond);
    }
    SUBCASE("one TB1 step with the flag") {
        cfg.allow_initial_triple_bonds = true;
        RunResult r = run_reduction(m, f, t, cfg, Policy::First, 0, 3);
        REQUIRE(r.ok());
        REQUIRE(t.size() == 1);
        const StepRecord& step = t.steps()[0];
        CHECK(step.kind == StepKind::TB1);
        CHECK(step.bonds_removed.size() == 3);
        CHECK(step.atoms_removed.size() == 2);
        CHECK(step.g_edges_added.size() == 1);
        CHECK(step.g_edges_rejected.size() == 2);
        CHECK(step.delta_chi_computed == -2);
        CHECK(f.is_spanning_tree());
        CHECK(f.edges().size() == 1);
        CHECK(verify_trace(minimal_molecule(), t, 3).all_ok());
    }
}

TEST_CASE("phase 1 removes degenerate atoms") {
    SUBCASE("triple-bond pair with one degenerate atom") {
        Molecule m = minimal_molecule();
        m.set_degenerate(0, true);
        ForestState f;
        f.init(m.atom_slots());
        Trace t;
        t.reset(3);
        Reducer reducer;
        reducer.phase1(m, f, t);
        REQUIRE(t.size() == 1);
        CHECK(t.steps()[0].kind == StepKind::DA);
        CHECK(t.steps()[0].bonds_removed.size() == 3);
        CHECK(t.steps()[0].g_edges_added.size() == 1);
        CHECK(t.steps()[0].g_edges_rejected.size() == 2);
        CHECK(t.steps()[0].table_unchecked);
        CHECK(m.bond_count() == 0);
    }
    SUBCASE("two adjacent degenerate atoms on a path") {
        Molecule m;
        int x = m.add_atom("x"), a = m.add_atom("a", true), b = m.add_atom("b", true),
            y = m.add_atom("y");
        m.add_bond(x, a, BondKind::PC);
        m.add_bond(a, b, BondKind::PC);
        m.add_bond(b, y, BondKind::PC);
        ForestState f;
        f.init(m.atom_slots());
        Trace t;
        t.reset(3);
        Reducer reducer;
        reducer.phase1(m, f, t);
        REQUIRE(t.size() == 2);
        CHECK(t.steps()[0].kind == StepKind::DA);
        CHECK(t.steps()[0].bonds_removed.size() == 2);
        CHECK(t.steps()[1].bonds_removed.size() == 1);  // only the remaining bond
        CHECK(m.bond_count() == 0);
    }
}

TEST_CASE("the worked example replays step by step") {
    Molecule original = molecule_from_json(fixture("dh-example.molecule.json"));
    Script script = script_from_json(fixture("dh-example.script.json"));
    Molecule m = original;
    ForestState f;
    Trace t;
    ReductionConfig cfg;
    RunResult r = run_scripted(m, f, t, script, cfg, 3);
    REQUIRE(r.ok());

    // 15 captioned steps, then exactly four 2R-5 completions adding nothing
    REQUIRE(t.size() == 19);
    for (std::size_t i = 0; i < script.steps.size(); ++i)
        CHECK(t.steps()[i].kind == script.steps[i].kind);
    for (std::size_t i = 15; i < 19; ++i) {
        CHECK(t.steps()[i].kind == StepKind::R2_5);
        CHECK(t.steps()[i].g_edges_added.empty());
    }

    // step 1 adds exactly the three bonds at 1t
    auto first_added = t.steps()[0].g_edges_added;
    CHECK(first_added == std::vector<int>{0, 1, 4});
    CHECK(t.steps()[0].atoms_removed.size() == 1);
    CHECK(original.atom(t.steps()[0].atoms_removed[0]).id == "1t");

    // the tree grows figure by figure: these are the red edges each step
    // picks up in the captioned pictures
    const std::vector<std::vector<int>> growth = {
        {0, 1, 4}, {24}, {16}, {9, 12, 13}, {17, 21}, {5, 6, 25, 27}, {}, {28}, {45}, {},
        {46},      {37}, {},   {30, 33, 34}, {38, 42}, {},            {}, {},   {}};
    REQUIRE(t.size() == growth.size());
    for (std::size_t i = 0; i < growth.size(); ++i)
        CHECK(t.steps()[i].g_edges_added == growth[i]);

    // final tree equals the red edge set of the last figure
    CHECK(f.is_spanning_tree());
    CHECK(f.edges().size() == 23);
    std::set<std::pair<std::string, std::string>> expected;
    {
        auto text = fixture("dh-example.expected-tree.json");
        auto j = nlohmann::json::parse(text);
        for (const auto& e : j.at("edges")) {
            std::string u = e[0].get<std::string>(), v = e[1].get<std::string>();
            expected.insert({std::min(u, v), std::max(u, v)});
        }
    }
    CHECK(tree_pairs(original, f) == expected);

    // ledger totals, frozen from the table rows of the steps taken
    CHECK(t.gamma_total == Rat(-565, 24));
    CHECK(t.kappa_total == Rat(-16));
    int chi_sum = 0;
    for (const StepRecord& s : t.steps()) chi_sum += s.delta_chi_computed;
    CHECK(chi_sum == -24);
    CHECK(ledger_check(t, 3).ok());
    CHECK(verify_trace(original, t, 3).all_ok());

    // the forest grows several components before they join
    auto witness = multiple_components_witness(original, t);
    REQUIRE(witness.has_value());
    CHECK(*witness <= 6);
}

TEST_CASE("scripts with broken preconditions fail with the step index") {
    Molecule m = molecule_from_json(fixture("dh-example.molecule.json"));
    SUBCASE("BR on a cycle bond between high-degree atoms") {
        Script s;
        s.steps.push_back({StepKind::BR, {"2t", "3t"}});
        ForestState f;
        Trace t;
        RunResult r = run_scripted(m, f, t, s, {}, 3);
        CHECK(r.status == RunStatus::ScriptPrecondition);
        CHECK(r.at_index == 0);
    }
    SUBCASE("BR on a triple bond") {
        Molecule tiny = minimal_molecule();
        Script s;
        s.steps.push_back({StepKind::BR, {"+", "-"}});
        ForestState f;
        Trace t;
        RunResult r = run_scripted(tiny, f, t, s, {}, 3);
        CHECK(r.status == RunStatus::ScriptPrecondition);
    }
    SUBCASE("unknown atom") {
        Script s;
        s.steps.push_back({StepKind::R3_1, {"zz"}});
        ForestState f;
        Trace t;
        RunResult r = run_scripted(m, f, t, s, {}, 3);
        CHECK(r.status == RunStatus::ScriptPrecondition);
    }
}

TEST_CASE("automatic reduction of the worked example") {
    Molecule original = molecule_from_json(fixture("dh-example.molecule.json"));
    for (Policy policy : {Policy::First, Policy::Second}) {
        Molecule m = original;
        ForestState f;
        Trace t;
        RunResult r = run_reduction(m, f, t, {}, policy, 0, 3);
        REQUIRE(r.ok());
        CHECK(f.is_spanning_tree());
        CHECK(f.edges().size() == 23);
        CHECK(verify_trace(original, t, 3).all_ok());
    }
}

TEST_CASE("spanning tree theorem on the small enumeration") {
    ReductionConfig cfg;
    cfg.allow_initial_triple_bonds = true;
    Reducer reducer;
    reducer.config = cfg;
    CoupleEnumerator it(4);
    Couple c;
    ForestState f;
    Trace t;
    while (it.next(c)) {
        Molecule original = molecule_from_couple(c);
        for (Policy policy : {Policy::First, Policy::Second}) {
            Molecule m = original;
            RunResult r = reducer.run(m, f, t, policy, 0, 3);
            REQUIRE(r.ok());
            REQUIRE(f.is_spanning_tree());
            REQUIRE(t.size() <= 2 * static_cast<std::size_t>(original.atom_count()));
            VerificationReport report = verify_trace(original, t, 3);
            REQUIRE(report.all_ok());
        }
    }
}

TEST_CASE("exhaustive policy explores both checkpoint branches") {
    // find an enumerated couple whose first-policy trace hits a checkpoint
    ReductionConfig cfg;
    cfg.allow_initial_triple_bonds = true;
    Reducer reducer;
    reducer.config = cfg;
    CoupleEnumerator it(5);
    Couple c;
    ForestState f;
    Trace t;
    bool found = false;
    while (!found && it.next(c)) {
        Molecule m = molecule_from_couple(c);
        Molecule work = m;
        if (!reducer.run(work, f, t, Policy::First, 0, 3).ok()) continue;
        bool has_checkpoint = false;
        for (const StepRecord& r : t.steps()) has_checkpoint |= r.checkpoint >= 0;
        if (!has_checkpoint) continue;
        found = true;
        auto all = reducer.run_exhaustive(m, 3, 64);
        CHECK(!all.cap_exceeded);
        CHECK(all.paths.size() >= 2);
        for (const auto& path : all.paths) {
            CHECK(path.result.ok());
            CHECK(path.forest.is_spanning_tree());
            CHECK(verify_trace(m, path.trace, 3).all_ok());
        }
        auto capped = reducer.run_exhaustive(m, 3, 1);
        CHECK(capped.cap_exceeded);
        CHECK(capped.paths.size() == 1);
    }
    CHECK(found);
}

TEST_CASE("ledger check accepts honest and rejects forged records") {
    Trace t;
    t.reset(3);
    {
        StepRecord& r = t.push();
        r.kind = StepKind::S3S3_2G;
        r.delta_chi_computed = -2;
        r.delta_gamma = Rat(-2) + Rat(1, 12);
        r.delta_kappa = Rat(-2);
        t.gamma_total += r.delta_gamma;
        t.kappa_total += r.delta_kappa;
    }
    {
        StepRecord& r = t.push();
        r.kind = StepKind::R3_1;
        r.delta_chi_computed = -2;
        r.delta_gamma = Rat(-2);
        r.delta_kappa = Rat(-1);
        t.gamma_total += r.delta_gamma;
        t.kappa_total += r.delta_kappa;
    }
    CHECK(ledger_check(t, 3).ok());

    // a 3D4G record with delta_chi -2 contradicts the table's -3
    {
        StepRecord& r = t.push();
        r.kind = StepKind::D3D4G;
        r.delta_chi_computed = -2;
        r.delta_gamma = Rat(-2) + Rat(1, 8);
        r.delta_kappa = Rat(-2);
        t.gamma_total += r.delta_gamma;
        t.kappa_total += r.delta_kappa;
    }
    LedgerReport report = ledger_check(t, 3);
    CHECK(!report.ok());
    CHECK(report.violations[0].first == 2);
}

TEST_CASE("bound exponents sum the per-step ledger") {
    Trace empty;
    empty.reset(3);
    CHECK(bound_exponents(empty) == std::make_pair(Rat(0), Rat(0)));

    Trace one;
    one.reset(3);
    StepRecord& a = one.push();
    a.kind = StepKind::S3S3_1;
    a.delta_chi_computed = -2;
    a.delta_gamma = Rat(-2);
    a.delta_kappa = Rat(-1);
    CHECK(bound_exponents(one) == std::make_pair(Rat(-2), Rat(-1)));

    Trace two;
    two.reset(3);
    StepRecord& b = two.push();
    b.kind = StepKind::R2_2G;
    b.delta_chi_computed = -1;
    b.delta_gamma = Rat(-1) + Rat(1, 6);
    b.delta_kappa = Rat(-1);
    CHECK(bound_exponents(two) == std::make_pair(Rat(-5, 6), Rat(-1)));
}

TEST_CASE("after scripted step 1 the bridges into the minus side appear") {
    Molecule m = molecule_from_json(fixture("dh-example.molecule.json"));
    Script script = script_from_json(fixture("dh-example.script.json"));
    script.steps.resize(1);
    ForestState f;
    Trace t;
    REQUIRE(run_scripted(m, f, t, script, {}, 3, /*continue_after=*/false).ok());
    std::set<std::pair<std::string, std::string>> bridges;
    for (int b : m.find_bridges()) {
        std::string u = m.atom(m.bond(b).tail).id, v = m.atom(m.bond(b).head).id;
        bridges.insert({std::min(u, v), std::max(u, v)});
    }
    CHECK(bridges.count({"-1b", "1b"}) == 1);
    CHECK(bridges.count({"-4b", "-4t"}) == 1);
}

TEST_CASE("after scripted step 7 the degree-2 atom 3b starts a type I chain") {
    Molecule original = molecule_from_json(fixture("dh-example.molecule.json"));
    Script script = script_from_json(fixture("dh-example.script.json"));
    script.steps.resize(7);  // up to and including BR on (3b,2b)
    Molecule m = original;
    ForestState f;
    Trace t;
    REQUIRE(run_scripted(m, f, t, script, {}, 3, /*continue_after=*/false).ok());
    CHECK(m.degree(m.find_atom("3b")) == 2);
    CHECK(m.degree(m.find_atom("4b")) == 4);
    bool chain_at_3b = false;
    for (const auto& chain : m.detect_chains()) {
        if (chain.type != 1) continue;
        bool has3b = false, has4b = false;
        for (int a : chain.atoms) {
            has3b |= m.atom(a).id == "3b";
            has4b |= m.atom(a).id == "4b";
        }
        chain_at_3b |= has3b && has4b;
    }
    CHECK(chain_at_3b);
}

TEST_CASE("scripted 3R-2G removes the center and the primed pair") {
    // center v with three degree-4 single neighbors; elsewhere the primed
    // pattern x-y with outward double bonds
    Molecule m;
    int v = m.add_atom("v");
    int w1 = m.add_atom("w1"), w2 = m.add_atom("w2"), w3 = m.add_atom("w3");
    int x = m.add_atom("x"), y = m.add_atom("y");
    int x2 = m.add_atom("x2"), y2 = m.add_atom("y2");
    m.add_bond(v, w1, BondKind::PC);
    m.add_bond(v, w2, BondKind::PC);
    m.add_bond(w3, v, BondKind::PC);
    // make w1..w3 degree 4 through a ring among themselves and the primed side
    m.add_bond(w1, w2, BondKind::PC);
    m.add_bond(w2, w3, BondKind::PC);
    m.add_bond(w1, w3, BondKind::PC);
    m.add_bond(x2, w1, BondKind::PC);
    m.add_bond(w2, y2, BondKind::PC);
    m.add_bond(w3, x2, BondKind::PC);
    m.add_bond(x, y, BondKind::PC);        // the special single bond
    m.add_bond(x, x2, BondKind::PC);       // double x = x2
    m.add_bond(x2, x, BondKind::PC);
    m.add_bond(y2, y, BondKind::PC);       // double y = y2
    m.add_bond(y, y2, BondKind::PC);
    REQUIRE(m.degree(v) == 3);
    REQUIRE(m.degree(w1) == 4);
    REQUIRE(m.degree(w2) == 4);
    REQUIRE(m.degree(w3) == 4);
    REQUIRE(m.degree(x) == 3);
    REQUIRE(m.degree(y) == 3);

    Script s;
    s.steps.push_back({StepKind::R3_2G, {"v", "x", "y"}});
    Molecule work = m;
    ForestState f;
    Trace t;
    RunResult r = run_scripted(work, f, t, s, {}, 3, /*continue_after=*/false);
    REQUIRE(r.ok());
    const StepRecord& step = t.steps()[0];
    CHECK(step.kind == StepKind::R3_2G);
    CHECK(step.atoms_removed.size() == 3);
    CHECK(step.bonds_removed.size() == 8);  // v's three plus l1'..l5'
    CHECK(!work.atom_alive(v));
    CHECK(!work.atom_alive(x));
    CHECK(!work.atom_alive(y));
    auto row = step_table_row(StepKind::R3_2G, 3);
    bool chi_in_set = std::find(row->chi_set.begin(), row->chi_set.end(),
                                step.delta_chi_computed) != row->chi_set.end();
    CHECK(chi_in_set);
}

TEST_CASE("multiple components witness is absent for the minimal molecule") {
    Molecule m = minimal_molecule();
    Molecule work = m;
    ForestState f;
    Trace t;
    ReductionConfig cfg;
    cfg.allow_initial_triple_bonds = true;
    REQUIRE(run_reduction(work, f, t, cfg, Policy::First, 0, 3).ok());
    CHECK(!multiple_components_witness(m, t).has_value());
}

TEST_CASE("degenerate atoms are eliminated first and traces still verify") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Couple c = random_couple(2 + seed % 5, 2 + (seed / 2) % 5, seed);
        Molecule original = molecule_from_couple(c);
        // flag a couple of atoms as degenerate
        original.set_degenerate(static_cast<int>(seed) % original.atom_slots(), true);
        original.set_degenerate(static_cast<int>(seed * 7 + 1) % original.atom_slots(), true);
        Molecule m = original;
        ForestState f;
        Trace t;
        ReductionConfig cfg;
        cfg.allow_initial_triple_bonds = true;
        RunResult r = run_reduction(m, f, t, cfg, Policy::First, 0, 3);
        REQUIRE(r.ok());
        REQUIRE(t.size() >= 1);
        CHECK(t.steps()[0].kind == StepKind::DA);
        CHECK(f.is_spanning_tree());
        CHECK(verify_trace(original, t, 3).all_ok());
    }
}
