#include "couple.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <random>
#include <stdexcept>

namespace molred {

int SignedTree::internal_count() const {
    int n = 0;
    for (const auto& node : nodes) n += node.first_child >= 0;
    return n;
}

int SignedTree::leaf_count() const {
    int n = 0;
    for (const auto& node : nodes) n += node.first_child < 0;
    return n;
}

void SignedTree::expand_leaf(int n) {
    if (!is_leaf(n)) throw std::logic_error("expand_leaf on an internal node");
    int base = static_cast<int>(nodes.size());
    nodes[n].first_child = base;
    std::int8_t s = nodes[n].sign;
    for (int k = 0; k < 3; ++k) {
        TreeNode child;
        child.sign = (k == 1) ? static_cast<std::int8_t>(-s) : s;
        child.parent = n;
        child.child_slot = static_cast<std::int8_t>(k);
        nodes.push_back(child);
    }
}

std::vector<int> SignedTree::path_of(int n) const {
    std::vector<int> rev;
    while (nodes[n].parent >= 0) {
        rev.push_back(nodes[n].child_slot);
        n = nodes[n].parent;
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

std::optional<int> SignedTree::node_at(const std::vector<int>& path) const {
    if (nodes.empty()) return std::nullopt;
    int n = 0;
    for (int k : path) {
        if (k < 0 || k > 2 || is_leaf(n)) return std::nullopt;
        n = child(n, k);
    }
    return n;
}

SignedTree SignedTree::single(int root_sign) {
    SignedTree t;
    TreeNode root;
    root.sign = static_cast<std::int8_t>(root_sign);
    t.nodes.push_back(root);
    return t;
}

std::string path_string(const SignedTree& tree, int tree_tag, int node) {
    std::string out(1, tree_tag > 0 ? '+' : '-');
    for (int k : tree.path_of(node)) {
        out += '/';
        out += static_cast<char>('0' + k);
    }
    return out;
}

std::optional<NodeRef> parse_path_string(const std::string& s, const SignedTree& plus,
                                         const SignedTree& minus) {
    if (s.empty() || (s[0] != '+' && s[0] != '-')) return std::nullopt;
    int tag = s[0] == '+' ? +1 : -1;
    std::vector<int> path;
    std::size_t i = 1;
    while (i < s.size()) {
        if (s[i] != '/' || i + 1 >= s.size() || s[i + 1] < '0' || s[i + 1] > '2')
            return std::nullopt;
        path.push_back(s[i + 1] - '0');
        i += 2;
    }
    const SignedTree& tree = tag > 0 ? plus : minus;
    auto node = tree.node_at(path);
    if (!node) return std::nullopt;
    return NodeRef{static_cast<std::int8_t>(tag), *node};
}

ValidationReport validate_tree(const SignedTree& tree) {
    ValidationReport report;
    if (tree.empty()) {
        report.violations.push_back({"", "tree has no nodes"});
        return report;
    }
    for (int n = 0; n < static_cast<int>(tree.nodes.size()); ++n) {
        if (tree.is_leaf(n)) continue;
        std::int8_t s = tree.nodes[n].sign;
        const std::int8_t want[3] = {s, static_cast<std::int8_t>(-s), s};
        for (int k = 0; k < 3; ++k) {
            int c = tree.child(n, k);
            if (tree.nodes[c].sign != want[k])
                report.violations.push_back(
                    {path_string(tree, tree.root_sign(), c),
                     "child sign violates the (s,-s,s) rule at slot " + std::to_string(k)});
        }
    }
    return report;
}

int leaf_sign_balance(const SignedTree& tree) {
    int balance = 0;
    for (int n = 0; n < static_cast<int>(tree.nodes.size()); ++n)
        if (tree.is_leaf(n)) balance += tree.nodes[n].sign;
    return balance;
}

ValidationReport validate_couple(const Couple& couple) {
    ValidationReport report;
    if (couple.plus.empty() || couple.minus.empty()) {
        report.violations.push_back({"", "couple with an empty tree"});
        return report;
    }
    if (couple.plus.root_sign() != +1)
        report.violations.push_back({"+", "plus tree root is not +"});
    if (couple.minus.root_sign() != -1)
        report.violations.push_back({"-", "minus tree root is not -"});

    auto leaf_key = [&](const NodeRef& r) {
        return (r.tree > 0 ? 0 : couple.plus.nodes.size()) + r.node;
    };
    std::vector<int> seen(couple.plus.nodes.size() + couple.minus.nodes.size(), 0);
    for (const auto& [a, b] : couple.pairing) {
        const SignedTree& ta = couple.tree(a.tree);
        const SignedTree& tb = couple.tree(b.tree);
        auto name = [&](const NodeRef& r) {
            return path_string(couple.tree(r.tree), r.tree, r.node);
        };
        if (!ta.is_leaf(a.node) || !tb.is_leaf(b.node)) {
            report.violations.push_back({name(a), "pair references a non-leaf node"});
            continue;
        }
        if (ta.nodes[a.node].sign == tb.nodes[b.node].sign)
            report.violations.push_back({name(a) + "," + name(b), "paired leaves have the same sign"});
        for (const NodeRef* r : {&a, &b}) {
            if (++seen[leaf_key(*r)] == 2)
                report.violations.push_back({name(*r), "leaf matched more than once"});
        }
    }
    auto check_unmatched = [&](const SignedTree& t, int tag, std::size_t offset) {
        for (int n = 0; n < static_cast<int>(t.nodes.size()); ++n)
            if (t.is_leaf(n) && seen[offset + n] == 0)
                report.violations.push_back({path_string(t, tag, n), "leaf is unmatched"});
    };
    check_unmatched(couple.plus, +1, 0);
    check_unmatched(couple.minus, -1, couple.plus.nodes.size());
    return report;
}

// ---- shapes ----------------------------------------------------------------

namespace {

std::deque<std::vector<Shape>> g_shapes = {{Shape{0}}};  // g_shapes[n]
std::mutex g_shapes_mutex;

void build_shapes_up_to(int n) {
    for (int k = static_cast<int>(g_shapes.size()); k <= n; ++k) {
        std::vector<Shape> out;
        for (int a = 0; a < k; ++a)
            for (int b = 0; a + b < k; ++b) {
                int c = k - 1 - a - b;
                for (const Shape& sa : g_shapes[a])
                    for (const Shape& sb : g_shapes[b])
                        for (const Shape& sc : g_shapes[c]) {
                            Shape s;
                            s.reserve(1 + sa.size() + sb.size() + sc.size());
                            s.push_back(1);
                            s.insert(s.end(), sa.begin(), sa.end());
                            s.insert(s.end(), sb.begin(), sb.end());
                            s.insert(s.end(), sc.begin(), sc.end());
                            out.push_back(std::move(s));
                        }
            }
        std::sort(out.begin(), out.end());
        g_shapes.push_back(std::move(out));
    }
}

}  // namespace

const std::vector<Shape>& shapes_with_internal(int n) {
    std::lock_guard<std::mutex> lock(g_shapes_mutex);
    build_shapes_up_to(n);
    return g_shapes[n];
}

SignedTree tree_from_shape(const Shape& shape, int root_sign) {
    SignedTree t = SignedTree::single(root_sign);
    std::size_t pos = 0;
    auto rec = [&](auto&& self, int node) -> void {
        if (pos >= shape.size()) throw std::invalid_argument("truncated shape encoding");
        if (shape[pos++] == 0) return;
        t.expand_leaf(node);
        for (int k = 0; k < 3; ++k) self(self, t.child(node, k));
    };
    rec(rec, 0);
    if (pos != shape.size()) throw std::invalid_argument("trailing data in shape encoding");
    return t;
}

std::vector<ShapeBlock> enumerate_shape_blocks(int max_total_internal) {
    std::vector<ShapeBlock> blocks;
    for (int total = 2; total <= max_total_internal; ++total)
        for (int np = 1; np < total; ++np) {
            int nm = total - np;
            const auto& sp = shapes_with_internal(np);
            const auto& sm = shapes_with_internal(nm);
            for (const Shape& a : sp)
                for (const Shape& b : sm) blocks.push_back({np, nm, &a, &b});
        }
    return blocks;
}

void detail::MatchingWalk::collect(const SignedTree& plus, const SignedTree& minus) {
    plus_leaves.clear();
    minus_leaves.clear();
    auto walk = [&](const SignedTree& t, std::int8_t tag) {
        // preorder: node indices are not preorder, so walk explicitly
        auto rec = [&](auto&& self, int n) -> void {
            if (t.is_leaf(n)) {
                (t.nodes[n].sign > 0 ? plus_leaves : minus_leaves).push_back({tag, n});
                return;
            }
            for (int k = 0; k < 3; ++k) self(self, t.child(n, k));
        };
        rec(rec, 0);
    };
    walk(plus, +1);
    walk(minus, -1);
}

CoupleEnumerator::CoupleEnumerator(int max_total_internal, std::uint64_t cap)
    : blocks_(enumerate_shape_blocks(max_total_internal)), cap_(cap) {}

bool CoupleEnumerator::next(Couple& out) {
    while (cursor_ >= buffer_.size()) {
        if (block_ >= blocks_.size()) return false;
        buffer_.clear();
        cursor_ = 0;
        for_each_matching(blocks_[block_++], [&](const Couple& c) { buffer_.push_back(c); });
    }
    if (++produced_ > cap_) throw EnumerationCapExceeded();
    out = buffer_[cursor_++];
    return true;
}

std::uint64_t count_couples(int max_total_internal, std::uint64_t cap) {
    std::uint64_t n = 0;
    for (const auto& block : enumerate_shape_blocks(max_total_internal)) {
        for_each_matching(block, [&](const Couple&) { ++n; });
        if (n > cap) throw EnumerationCapExceeded();
    }
    return n;
}

// ---- random generation -----------------------------------------------------

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SignedTree grow_random_tree(int n_internal, int root_sign, std::mt19937_64& rng) {
    SignedTree t = SignedTree::single(root_sign);
    t.expand_leaf(0);
    std::vector<int> leaves = {t.child(0, 0), t.child(0, 1), t.child(0, 2)};
    for (int grown = 1; grown < n_internal; ++grown) {
        std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
        std::size_t i = pick(rng);
        int leaf = leaves[i];
        leaves[i] = leaves.back();
        leaves.pop_back();
        t.expand_leaf(leaf);
        for (int k = 0; k < 3; ++k) leaves.push_back(t.child(leaf, k));
    }
    return t;
}

}  // namespace

Couple random_couple(int n_plus, int n_minus, std::uint64_t seed) {
    if (n_plus < 1 || n_minus < 1)
        throw std::invalid_argument("random_couple needs at least one internal node per tree");
    std::mt19937_64 rng(mix64(seed) ^ mix64(0x706c7573ULL * n_plus + 0x6d696e75ULL * n_minus));

    Couple couple;
    couple.plus = grow_random_tree(n_plus, +1, rng);
    couple.minus = grow_random_tree(n_minus, -1, rng);

    detail::MatchingWalk walk;
    walk.collect(couple.plus, couple.minus);
    const int m = static_cast<int>(walk.plus_leaves.size());

    // Randomized candidate order per plus leaf, then deterministic backtracking;
    // a sibling-free perfect matching always exists, so this terminates.
    std::vector<std::vector<int>> order(m);
    for (int i = 0; i < m; ++i) {
        order[i].resize(m);
        for (int c = 0; c < m; ++c) order[i][c] = c;
        std::shuffle(order[i].begin(), order[i].end(), rng);
    }
    std::vector<int> partner(m, -1);
    std::vector<bool> used(m, false);
    auto rec = [&](auto&& self, int level) -> bool {
        if (level == m) return true;
        for (int c : order[level]) {
            if (used[c]) continue;
            if (detail::MatchingWalk::same_parent(couple, walk.plus_leaves[level],
                                                  walk.minus_leaves[c]))
                continue;
            partner[level] = c;
            used[c] = true;
            if (self(self, level + 1)) return true;
            used[c] = false;
        }
        return false;
    };
    if (!rec(rec, 0)) throw std::logic_error("no admissible matching found");
    couple.pairing.resize(m);
    for (int i = 0; i < m; ++i)
        couple.pairing[i] = {walk.plus_leaves[i], walk.minus_leaves[partner[i]]};
    return couple;
}

}  // namespace molred
