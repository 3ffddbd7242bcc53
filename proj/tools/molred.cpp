#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "io.hpp"
#include "mst.hpp"
#include "reduction.hpp"
#include "sweep.hpp"
#include "verify.hpp"

using namespace molred;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitStuck = 3;
constexpr int kExitInvariant = 4;
constexpr int kExitIo = 5;

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file_atomic(path, content);
}

void print_violations(const ValidationReport& report) {
    for (const auto& v : report.violations)
        std::cerr << "invalid: " << v.where << ": " << v.message << "\n";
}

int status_code(const RunResult& r) {
    switch (r.status) {
        case RunStatus::Ok: return kExitOk;
        case RunStatus::Stuck:
        case RunStatus::PathCapExceeded: return kExitStuck;
        default: return kExitValidation;
    }
}

std::string pretty(const molred::Rat& r) {
    return r.den() == 1 ? std::to_string(r.num()) : r.str();
}

void write_dot_series(const std::string& dir, const Molecule& original, const Trace& trace) {
    std::filesystem::create_directories(dir);
    std::vector<int> tree;
    write_file_atomic(dir + "/step_000.dot", export_dot(original, tree));
    int n = 0;
    for (const StepRecord& r : trace.steps()) {
        for (int b : r.g_edges_added) tree.push_back(b);
        std::ostringstream name;
        name << dir << "/step_" << std::setfill('0') << std::setw(3) << ++n << ".dot";
        write_file_atomic(name.str(), export_dot(original, tree));
    }
}

std::string trace_text(const Molecule& original, const Trace& t, const ForestState& f) {
    std::ostringstream out;
    trace_to_jsonl(original, t, f.is_spanning_tree(), static_cast<int>(f.edges().size()), out);
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"molecule reduction toolkit"};
    app.require_subcommand(1);

    // ---- couple ------------------------------------------------------------
    auto* couple_cmd = app.add_subcommand("couple", "signed ternary trees and couples");
    couple_cmd->require_subcommand(1);

    std::string couple_file, out_file;
    auto* couple_validate = couple_cmd->add_subcommand("validate", "validate a couple file");
    couple_validate->add_option("file", couple_file)->required();

    int rand_plus = 1, rand_minus = 1;
    std::uint64_t rand_seed = 0;
    auto* couple_random = couple_cmd->add_subcommand("random", "generate a seeded random couple");
    couple_random->add_option("--plus", rand_plus)->required();
    couple_random->add_option("--minus", rand_minus)->required();
    couple_random->add_option("--seed", rand_seed);
    couple_random->add_option("-o,--out", out_file);

    int enum_max = 4;
    std::uint64_t enum_cap = 1000000;
    auto* couple_enum = couple_cmd->add_subcommand("enumerate", "enumerate couples as JSON lines");
    couple_enum->add_option("--max", enum_max)->required();
    couple_enum->add_option("--cap", enum_cap);
    couple_enum->add_option("-o,--out", out_file);

    // ---- molecule ----------------------------------------------------------
    auto* molecule_cmd = app.add_subcommand("molecule", "molecules and their structure");
    molecule_cmd->require_subcommand(1);

    std::string molecule_file;
    auto* mol_from = molecule_cmd->add_subcommand("from-couple", "build the base molecule");
    mol_from->add_option("file", couple_file)->required();
    mol_from->add_option("-o,--out", out_file);

    auto* mol_check = molecule_cmd->add_subcommand("check", "validate and report base structure");
    mol_check->add_option("file", molecule_file)->required();

    // ---- reduce --------------------------------------------------------------
    std::string policy_name = "first", script_file, trace_file, dot_dir;
    std::uint64_t reduce_seed = 0;
    int path_cap = 64;
    int dimension = 0;
    bool no_continue = false, allow_triple = false;
    auto* reduce_cmd = app.add_subcommand("reduce", "run the reduction to a spanning tree");
    reduce_cmd->add_option("molecule", molecule_file)->required();
    reduce_cmd->add_option("--policy", policy_name)
        ->check(CLI::IsMember({"first", "second", "random", "exhaustive"}));
    reduce_cmd->add_option("--seed", reduce_seed);
    reduce_cmd->add_option("--path-cap", path_cap);
    reduce_cmd->add_option("--script", script_file);
    reduce_cmd->add_flag("--no-continue", no_continue,
                         "stop after the scripted steps instead of reducing to the end");
    reduce_cmd->add_option("--dimension", dimension);
    reduce_cmd->add_option("--trace", trace_file);
    reduce_cmd->add_option("--dot-dir", dot_dir);
    reduce_cmd->add_flag("--allow-initial-triple-bonds", allow_triple);

    // ---- verify ----------------------------------------------------------------
    std::string verify_molecule, verify_trace_file;
    auto* verify_cmd = app.add_subcommand("verify", "independently verify a trace");
    verify_cmd->add_option("molecule", verify_molecule)->required();
    verify_cmd->add_option("trace", verify_trace_file)->required();
    verify_cmd->add_option("--dimension", dimension);

    // ---- mst --------------------------------------------------------------------
    auto* mst_cmd = app.add_subcommand("mst", "reference weighted-graph algorithms");
    mst_cmd->require_subcommand(1);
    std::string graph_file, prim_root;
    auto* mst_kruskal = mst_cmd->add_subcommand("kruskal", "Kruskal selection order");
    mst_kruskal->add_option("graph", graph_file)->required();
    auto* mst_prim = mst_cmd->add_subcommand("prim", "Prim selection order");
    mst_prim->add_option("graph", graph_file)->required();
    mst_prim->add_option("--root", prim_root)->required();
    auto* mst_oracle = mst_cmd->add_subcommand("oracle", "brute-force minimum weight");
    mst_oracle->add_option("graph", graph_file)->required();

    // ---- sweep ---------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "reduce and verify a whole couple corpus");
    int sweep_max = 4;
    int sweep_random_count = 0;
    bool sweep_serial = false;
    sweep_cmd->add_option("--max", sweep_max, "enumerate couples up to this total internal count");
    sweep_cmd->add_option("--random", sweep_random_count, "additional seeded random couples");
    sweep_cmd->add_flag("--serial", sweep_serial, "use the serial reference kernel");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*couple_validate) {
            Couple c = couple_from_json(read_file(couple_file));
            ValidationReport r1 = validate_tree(c.plus);
            ValidationReport r2 = validate_tree(c.minus);
            ValidationReport r3 = validate_couple(c);
            print_violations(r1);
            print_violations(r2);
            print_violations(r3);
            if (!r1.ok() || !r2.ok() || !r3.ok()) return kExitValidation;
            std::cout << "ok\n";
            return kExitOk;
        }
        if (*couple_random) {
            if (rand_plus < 1 || rand_minus < 1) {
                std::cerr << "each tree needs at least one internal node\n";
                return kExitValidation;
            }
            emit(out_file, couple_to_json(random_couple(rand_plus, rand_minus, rand_seed)));
            return kExitOk;
        }
        if (*couple_enum) {
            std::ostringstream out;
            try {
                CoupleEnumerator it(enum_max, enum_cap);
                Couple c;
                while (it.next(c)) out << couple_to_json(c, /*compact=*/true) << "\n";
            } catch (const EnumerationCapExceeded&) {
                std::cerr << "enumeration cap of " << enum_cap << " couples exceeded\n";
                return kExitValidation;
            }
            emit(out_file, out.str());
            return kExitOk;
        }
        if (*mol_from) {
            Couple c = couple_from_json(read_file(couple_file));
            ValidationReport report = validate_couple(c);
            if (!report.ok()) {
                print_violations(report);
                return kExitValidation;
            }
            emit(out_file, molecule_to_json(molecule_from_couple(c)));
            return kExitOk;
        }
        if (*mol_check) {
            Molecule m = molecule_from_json(read_file(molecule_file));
            ValidationReport report = m.validate();
            print_violations(report);
            auto base = m.is_base_molecule();
            std::cout << "atoms=" << m.atom_count() << " bonds=" << m.bond_count()
                      << " chi=" << m.euler_characteristic() << " connected=" << base.connected
                      << " degree_profile=2:" << base.degree2 << ",3:" << base.degree3
                      << ",4:" << base.degree4 << " is_base=" << (base.is_base ? "true" : "false")
                      << "\n";
            return report.ok() ? kExitOk : kExitValidation;
        }
        if (*reduce_cmd) {
            Molecule original = molecule_from_json(read_file(molecule_file));
            ValidationReport report = original.validate();
            if (!report.ok()) {
                print_violations(report);
                return kExitValidation;
            }
            int d = dimension > 0 ? dimension : original.dimension;
            ReductionConfig cfg;
            cfg.allow_initial_triple_bonds = allow_triple;

            if (!script_file.empty()) {
                Script script = script_from_json(read_file(script_file));
                Molecule m = original;
                ForestState f;
                Trace t;
                RunResult r = run_scripted(m, f, t, script, cfg, d, !no_continue);
                if (!r.ok()) {
                    std::cerr << r.message << "\n";
                    return status_code(r);
                }
                if (!trace_file.empty()) write_file_atomic(trace_file, trace_text(original, t, f));
                if (!dot_dir.empty()) write_dot_series(dot_dir, original, t);
                std::cout << "spanning_tree=" << (f.is_spanning_tree() ? "true" : "false")
                          << " edges=" << f.edges().size() << " steps=" << t.size()
                          << " gamma=" << t.gamma_total.str() << " kappa=" << t.kappa_total.str()
                          << "\n";
                return kExitOk;
            }

            if (policy_name == "exhaustive") {
                Reducer reducer;
                reducer.config = cfg;
                auto all = reducer.run_exhaustive(original, d, path_cap);
                int idx = 0;
                for (const auto& path : all.paths) {
                    if (!path.result.ok()) {
                        std::cerr << "path " << idx << ": " << path.result.message << "\n";
                        return status_code(path.result);
                    }
                    if (!trace_file.empty())
                        write_file_atomic(trace_file + "." + std::to_string(idx),
                                          trace_text(original, path.trace, path.forest));
                    std::cout << "path " << idx << ": spanning_tree="
                              << (path.forest.is_spanning_tree() ? "true" : "false")
                              << " edges=" << path.forest.edges().size()
                              << " steps=" << path.trace.size() << "\n";
                    ++idx;
                }
                if (all.cap_exceeded) {
                    std::cerr << "path cap of " << path_cap << " exceeded\n";
                    return kExitStuck;
                }
                return kExitOk;
            }

            Policy policy = policy_name == "second"  ? Policy::Second
                            : policy_name == "random" ? Policy::Random
                                                      : Policy::First;
            Molecule m = original;
            ForestState f;
            Trace t;
            RunResult r = run_reduction(m, f, t, cfg, policy, reduce_seed, d);
            if (!r.ok()) {
                std::cerr << r.message << "\n";
                return status_code(r);
            }
            if (!trace_file.empty()) write_file_atomic(trace_file, trace_text(original, t, f));
            if (!dot_dir.empty()) write_dot_series(dot_dir, original, t);
            std::cout << "spanning_tree=" << (f.is_spanning_tree() ? "true" : "false")
                      << " edges=" << f.edges().size() << " steps=" << t.size()
                      << " gamma=" << t.gamma_total.str() << " kappa=" << t.kappa_total.str()
                      << "\n";
            return kExitOk;
        }
        if (*verify_cmd) {
            Molecule original = molecule_from_json(read_file(verify_molecule));
            LoadedTrace loaded = trace_from_jsonl(original, read_file(verify_trace_file));
            int d = dimension > 0 ? dimension : loaded.trace.dimension;
            VerificationReport report = verify_trace(original, loaded.trace, d);
            std::cout << verification_report_to_json(report);
            bool summary_ok = loaded.summary_edges == report.tree_edges &&
                              loaded.summary_spanning == report.spanning_tree_ok;
            if (!summary_ok) std::cerr << "trace summary contradicts the replay\n";
            return report.all_ok() && summary_ok ? kExitOk : kExitInvariant;
        }
        if (*mst_kruskal || *mst_prim || *mst_oracle) {
            WeightedGraph g = weighted_graph_from_json(read_file(graph_file));
            if (*mst_oracle) {
                std::cout << "weight " << pretty(brute_force_mst(g)) << "\n";
                return kExitOk;
            }
            std::vector<int> chosen = *mst_kruskal ? kruskal(g) : prim(g, prim_root);
            for (std::size_t i = 0; i < chosen.size(); ++i)
                std::cout << (i ? " " : "") << g.vertices[g.edges[chosen[i]].u]
                          << g.vertices[g.edges[chosen[i]].v];
            std::cout << "\nweight " << pretty(g.total_weight(chosen)) << "\n";
            return kExitOk;
        }
        if (*sweep_cmd) {
            SweepConfig cfg;
            cfg.max_total_internal = sweep_max;
            cfg.random_count = sweep_random_count;
            cfg.parallel = !sweep_serial;
            SweepStats stats = sweep_enumeration(cfg);
            if (sweep_random_count > 0) {
                SweepStats rnd = sweep_random(cfg);
                stats.merge(rnd, cfg.max_failure_samples);
            }
            std::cout << "couples=" << stats.couples << " runs=" << stats.runs
                      << " verified=" << stats.verified << " failures=" << stats.failures << "\n";
            for (const auto& s : stats.failure_samples) std::cerr << s << "\n";
            return stats.ok() ? kExitOk : kExitInvariant;
        }
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const EnumerationCapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
