#pragma once

#include <vector>

#include "molecule.hpp"

namespace molred {

// Union by size with path compression.
class DisjointSet {
public:
    void reset(int n);
    int find(int x);
    // Returns false when both are already in the same set.
    bool unite(int x, int y);
    int components() const { return components_; }
    int size() const { return static_cast<int>(parent_.size()); }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
    int components_ = 0;
};

struct ForestEdge {
    int u, v;
    int bond_id;
};

// The growing acyclic graph G over the original atom set. Vertices are fixed
// at initialization; edges carry the source bond id.
class ForestState {
public:
    void init(int n_vertices);

    enum class Add { Added, Rejected };
    Add add_edge_if_safe(int u, int v, int bond_id);

    // Greedy pass in the given order. The number added is order-invariant
    // (graphic matroid); which edges get added is not. Appends the accepted
    // bond ids to `added` and the refused ones to `rejected`.
    void add_safe_edges_max(const Molecule& m, const std::vector<int>& candidate_bonds,
                            std::vector<int>& added, std::vector<int>& rejected);

    bool is_spanning_tree() const {
        return vertices_ > 0 && components() == 1 &&
               static_cast<int>(edges_.size()) == vertices_ - 1;
    }

    int vertices() const { return vertices_; }
    int components() const { return dsu_.components(); }
    bool same_component(int u, int v) { return dsu_.find(u) == dsu_.find(v); }
    const std::vector<ForestEdge>& edges() const { return edges_; }

private:
    int vertices_ = 0;
    DisjointSet dsu_;
    std::vector<ForestEdge> edges_;
};

inline ForestState init_forest(const Molecule& m) {
    ForestState f;
    f.init(m.atom_slots());
    return f;
}

}  // namespace molred
