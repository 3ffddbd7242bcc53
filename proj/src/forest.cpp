#include "forest.hpp"

#include <stdexcept>

namespace molred {

void DisjointSet::reset(int n) {
    parent_.resize(n);
    size_.assign(n, 1);
    for (int i = 0; i < n; ++i) parent_[i] = i;
    components_ = n;
}

int DisjointSet::find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
        int next = parent_[x];
        parent_[x] = root;
        x = next;
    }
    return root;
}

bool DisjointSet::unite(int x, int y) {
    int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    if (size_[rx] < size_[ry]) std::swap(rx, ry);
    parent_[ry] = rx;
    size_[rx] += size_[ry];
    --components_;
    return true;
}

void ForestState::init(int n_vertices) {
    vertices_ = n_vertices;
    dsu_.reset(n_vertices);
    edges_.clear();
}

ForestState::Add ForestState::add_edge_if_safe(int u, int v, int bond_id) {
    if (u < 0 || u >= vertices_ || v < 0 || v >= vertices_)
        throw std::out_of_range("forest vertex out of range");
    if (!dsu_.unite(u, v)) return Add::Rejected;
    edges_.push_back({u, v, bond_id});
    return Add::Added;
}

void ForestState::add_safe_edges_max(const Molecule& m, const std::vector<int>& candidate_bonds,
                                     std::vector<int>& added, std::vector<int>& rejected) {
    for (int bond_id : candidate_bonds) {
        const Bond& b = m.bond(bond_id);
        if (add_edge_if_safe(b.tail, b.head, bond_id) == Add::Added)
            added.push_back(bond_id);
        else
            rejected.push_back(bond_id);
    }
}

}  // namespace molred
