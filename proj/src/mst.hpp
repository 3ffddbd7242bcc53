#pragma once

#include <string>
#include <vector>

#include "rational.hpp"

namespace molred {

struct WeightedEdge {
    int u, v;
    Rat weight;
};

struct WeightedGraph {
    std::vector<std::string> vertices;
    std::vector<WeightedEdge> edges;

    int vertex(const std::string& label) const;  // -1 if absent
    int add_vertex(const std::string& label);
    void add_edge(const std::string& u, const std::string& v, Rat w);
    Rat total_weight(const std::vector<int>& edge_indices) const;
};

// Selected edge indices in selection order; ties broken by input edge index.
// Throws std::runtime_error on disconnected input (or unknown root for prim).
std::vector<int> kruskal(const WeightedGraph& g);
std::vector<int> prim(const WeightedGraph& g, const std::string& root);

// Minimum spanning tree weight by exhaustive search; at most 8 vertices.
Rat brute_force_mst(const WeightedGraph& g);

}  // namespace molred
