#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

namespace molred {

// Signed ternary trees. A node of sign s has children signed (s, -s, s) from
// left to right. Nodes live in a pool; the root is node 0 and the children of
// an internal node occupy three consecutive slots.
struct TreeNode {
    std::int8_t sign = +1;          // +1 or -1
    std::int32_t first_child = -1;  // -1 for a leaf
    std::int32_t parent = -1;
    std::int8_t child_slot = -1;    // 0..2 within the parent, -1 for the root
};

struct SignedTree {
    std::vector<TreeNode> nodes;

    bool empty() const { return nodes.empty(); }
    int root_sign() const { return nodes[0].sign; }
    bool is_leaf(int n) const { return nodes[n].first_child < 0; }
    int child(int n, int k) const { return nodes[n].first_child + k; }

    int internal_count() const;
    int leaf_count() const;

    // Expands the leaf `n` into an internal node with the forced child signs.
    void expand_leaf(int n);

    // Child-index path from the root; empty for the root.
    std::vector<int> path_of(int n) const;
    std::optional<int> node_at(const std::vector<int>& path) const;

    static SignedTree single(int root_sign);
};

// A node reference that survives serialization: tree tag + node index.
struct NodeRef {
    std::int8_t tree = +1;  // +1 for the plus tree, -1 for the minus tree
    std::int32_t node = 0;

    bool operator==(const NodeRef&) const = default;
};

// "+/0/2" form: tree tag, then child indices from the root.
std::string path_string(const SignedTree& tree, int tree_tag, int node);
std::optional<NodeRef> parse_path_string(const std::string& s, const SignedTree& plus,
                                         const SignedTree& minus);

struct Couple {
    SignedTree plus;   // root sign +
    SignedTree minus;  // root sign -
    std::vector<std::pair<NodeRef, NodeRef>> pairing;

    const SignedTree& tree(int tag) const { return tag > 0 ? plus : minus; }
    int total_internal() const { return plus.internal_count() + minus.internal_count(); }
};

struct Violation {
    std::string where;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_tree(const SignedTree& tree);
ValidationReport validate_couple(const Couple& couple);

// #(+ leaves) - #(- leaves); equals the root sign for every valid tree.
int leaf_sign_balance(const SignedTree& tree);

// ---- enumeration ----------------------------------------------------------
//
// Tree shapes are encoded in preorder, 1 for an internal node followed by its
// three children, 0 for a leaf. Shapes with the same internal count are
// ordered lexicographically by that encoding; couples by (total internal,
// plus internal, plus shape, minus shape, matching). A matching is ordered by
// the partner sequence of the plus-signed leaves taken in preorder (plus-tree
// leaves first), partners numbered over the minus-signed leaves in the same
// order. Matchings that pair two leaves of the same parent are skipped: they
// would force a self-loop bond in the associated molecule.

using Shape = std::vector<std::uint8_t>;

const std::vector<Shape>& shapes_with_internal(int n);
SignedTree tree_from_shape(const Shape& shape, int root_sign);

struct ShapeBlock {
    int n_plus = 0;
    int n_minus = 0;
    const Shape* plus = nullptr;
    const Shape* minus = nullptr;
};

std::vector<ShapeBlock> enumerate_shape_blocks(int max_total_internal);

class EnumerationCapExceeded : public std::exception {
public:
    const char* what() const noexcept override { return "couple enumeration cap exceeded"; }
};

// Calls fn(couple) for every admissible matching of the block, in order.
// The same Couple object is reused between calls.
template <typename Fn>
void for_each_matching(const ShapeBlock& block, Fn&& fn);

// Streaming enumerator over all couples with total internal count <= max.
class CoupleEnumerator {
public:
    explicit CoupleEnumerator(int max_total_internal, std::uint64_t cap = UINT64_MAX);
    // Returns false when exhausted; throws EnumerationCapExceeded past the cap.
    bool next(Couple& out);

private:
    std::vector<ShapeBlock> blocks_;
    std::size_t block_ = 0;
    std::vector<Couple> buffer_;
    std::size_t cursor_ = 0;
    std::uint64_t produced_ = 0;
    std::uint64_t cap_;
};

std::uint64_t count_couples(int max_total_internal, std::uint64_t cap = UINT64_MAX);

// Seeded generator: grows each tree by expanding a uniformly chosen leaf until
// the requested internal count, then samples a matching by randomized greedy
// assignment with backtracking. Deterministic for fixed arguments; the
// distribution over couples is NOT uniform and is not meant to be.
Couple random_couple(int n_plus, int n_minus, std::uint64_t seed);

// ---- implementation of the templated matching walk ------------------------

namespace detail {

struct MatchingWalk {
    std::vector<NodeRef> plus_leaves;   // +-signed leaves, canonical order
    std::vector<NodeRef> minus_leaves;  // --signed leaves, canonical order

    void collect(const SignedTree& plus, const SignedTree& minus);
    static bool same_parent(const Couple& c, const NodeRef& a, const NodeRef& b) {
        return a.tree == b.tree && c.tree(a.tree).nodes[a.node].parent ==
                                       c.tree(b.tree).nodes[b.node].parent;
    }
};

}  // namespace detail

template <typename Fn>
void for_each_matching(const ShapeBlock& block, Fn&& fn) {
    Couple couple;
    couple.plus = tree_from_shape(*block.plus, +1);
    couple.minus = tree_from_shape(*block.minus, -1);

    detail::MatchingWalk walk;
    walk.collect(couple.plus, couple.minus);
    const int m = static_cast<int>(walk.plus_leaves.size());
    couple.pairing.resize(m);

    std::vector<int> partner(m, -1);
    std::vector<bool> used(m, false);
    auto rec = [&](auto&& self, int level) -> void {
        if (level == m) {
            for (int i = 0; i < m; ++i)
                couple.pairing[i] = {walk.plus_leaves[i], walk.minus_leaves[partner[i]]};
            fn(static_cast<const Couple&>(couple));
            return;
        }
        for (int c = 0; c < m; ++c) {
            if (used[c]) continue;
            if (detail::MatchingWalk::same_parent(couple, walk.plus_leaves[level],
                                                  walk.minus_leaves[c]))
                continue;
            partner[level] = c;
            used[c] = true;
            self(self, level + 1);
            used[c] = false;
        }
    };
    rec(rec, 0);
}

}  // namespace molred
