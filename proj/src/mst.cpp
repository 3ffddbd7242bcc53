#include "mst.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "forest.hpp"
#include "verify.hpp"

namespace molred {

int WeightedGraph::vertex(const std::string& label) const {
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
        if (vertices[i] == label) return i;
    return -1;
}

int WeightedGraph::add_vertex(const std::string& label) {
    int i = vertex(label);
    if (i >= 0) return i;
    vertices.push_back(label);
    return static_cast<int>(vertices.size()) - 1;
}

void WeightedGraph::add_edge(const std::string& u, const std::string& v, Rat w) {
    if (u == v) throw std::invalid_argument("self-loop edge");
    edges.push_back({add_vertex(u), add_vertex(v), w});
}

Rat WeightedGraph::total_weight(const std::vector<int>& edge_indices) const {
    Rat total(0);
    for (int e : edge_indices) total += edges[e].weight;
    return total;
}

std::vector<int> kruskal(const WeightedGraph& g) {
    std::vector<int> order(g.edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (g.edges[a].weight != g.edges[b].weight) return g.edges[a].weight < g.edges[b].weight;
        return a < b;
    });
    DisjointSet dsu;
    dsu.reset(static_cast<int>(g.vertices.size()));
    std::vector<int> chosen;
    for (int e : order)
        if (dsu.unite(g.edges[e].u, g.edges[e].v)) chosen.push_back(e);
    if (!g.vertices.empty() && dsu.components() != 1)
        throw std::runtime_error("kruskal: graph is not connected");
    return chosen;
}

std::vector<int> prim(const WeightedGraph& g, const std::string& root) {
    int r = g.vertex(root);
    if (r < 0) throw std::runtime_error("prim: unknown root vertex '" + root + "'");
    std::vector<char> in_tree(g.vertices.size(), 0);
    in_tree[r] = 1;
    std::vector<int> chosen;
    for (std::size_t round = 1; round + 0 < g.vertices.size(); ++round) {
        int best = -1;
        for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
            if (in_tree[g.edges[e].u] == in_tree[g.edges[e].v]) continue;  // frontier only
            if (best < 0 || g.edges[e].weight < g.edges[best].weight) best = e;
        }
        if (best < 0) throw std::runtime_error("prim: graph is not connected");
        in_tree[g.edges[best].u] = in_tree[g.edges[best].v] = 1;
        chosen.push_back(best);
    }
    return chosen;
}

Rat brute_force_mst(const WeightedGraph& g) {
    if (g.vertices.size() > 8) throw std::invalid_argument("brute force limited to 8 vertices");
    std::vector<std::pair<int, int>> plain;
    for (const auto& e : g.edges) plain.push_back({e.u, e.v});
    auto trees = brute_force_spanning_trees(static_cast<int>(g.vertices.size()), plain);
    if (trees.empty()) throw std::runtime_error("brute_force_mst: graph is not connected");
    bool first = true;
    Rat best(0);
    for (const auto& tree : trees) {
        Rat w = g.total_weight(tree);
        if (first || w < best) best = w;
        first = false;
    }
    return best;
}

}  // namespace molred
