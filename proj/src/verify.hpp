#pragma once

#include <optional>
#include <string>
#include <vector>

#include "molecule.hpp"
#include "reduction.hpp"

namespace molred {

struct VerificationReport {
    bool spanning_tree_ok = true;
    bool replay_ok = true;
    bool table_ok = true;
    bool maximality_ok = true;
    bool injected_ok = true;
    int tree_edges = 0;  // size of the replayed forest
    std::vector<std::pair<int, std::string>> failures;  // step index (-1 global), message

    bool all_ok() const {
        return spanning_tree_ok && replay_ok && table_ok && maximality_ok && injected_ok;
    }
};

// Replays a trace against a copy of the original molecule with a DFS-backed
// forest (no disjoint-set), re-deciding every add/reject. This is the oracle
// side of the cycle-detection cross-check: any disagreement with the recorded
// disjoint-set answers shows up as a replay failure.
class TraceVerifier {
public:
    VerificationReport verify(const Molecule& original, const Trace& trace, int d);

private:
    // forest as an adjacency list, cycle queries by DFS
    Molecule work_;
    std::vector<std::vector<int>> forest_adj_;
    std::vector<int> mark_;
    std::vector<int> stack_;
    int epoch_ = 0;
    int forest_edges_ = 0;
    bool forest_connected(int a, int b);
};

inline VerificationReport verify_trace(const Molecule& original, const Trace& trace, int d) {
    TraceVerifier v;
    return v.verify(original, trace, d);
}

// All spanning trees of a small undirected multigraph by exhaustive search
// over edge subsets of size |V|-1. Edges are (u, v) pairs over 0..n-1; the
// result lists subsets of edge indices, each sorted. Throws when the graph
// exceeds 10 vertices or 20 edges or is disconnected.
std::vector<std::vector<int>> brute_force_spanning_trees(
    int n_vertices, const std::vector<std::pair<int, int>>& edges);

// Convenience over a molecule: edge indices are bond ids.
std::vector<std::vector<int>> brute_force_spanning_trees(const Molecule& m);

// First step index after which the growing forest has at least two
// non-singleton components; documents the Kruskal (not Prim) character.
std::optional<int> multiple_components_witness(const Molecule& original, const Trace& trace);

}  // namespace molred
