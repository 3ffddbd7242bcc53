#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "couple.hpp"
#include "io.hpp"

using namespace molred;

namespace {

// Independent shape generator for the enumeration oracle: plain recursion,
// no sharing with shapes_with_internal.
std::vector<std::vector<int>> oracle_shapes(int n) {
    if (n == 0) return {{0}};
    std::vector<std::vector<int>> out;
    for (int a = 0; a < n; ++a)
        for (int b = 0; a + b < n; ++b) {
            int c = n - 1 - a - b;
            for (const auto& sa : oracle_shapes(a))
                for (const auto& sb : oracle_shapes(b))
                    for (const auto& sc : oracle_shapes(c)) {
                        std::vector<int> e = {1};
                        e.insert(e.end(), sa.begin(), sa.end());
                        e.insert(e.end(), sb.begin(), sb.end());
                        e.insert(e.end(), sc.begin(), sc.end());
                        out.push_back(std::move(e));
                    }
        }
    return out;
}

SignedTree tree_from_int_shape(const std::vector<int>& enc, int root_sign) {
    Shape s(enc.begin(), enc.end());
    return tree_from_shape(s, root_sign);
}

// Oracle count of couples for one tree pair: all bijections from + leaves to
// - leaves, filtered to skip same-parent pairs.
std::uint64_t oracle_matchings(const SignedTree& plus, const SignedTree& minus) {
    struct Leaf {
        int tree;  // +1 / -1
        int node;
        int parent;
    };
    std::vector<Leaf> pos, neg;
    auto collect = [&](const SignedTree& t, int tag) {
        for (int n = 0; n < static_cast<int>(t.nodes.size()); ++n)
            if (t.is_leaf(n))
                (t.nodes[n].sign > 0 ? pos : neg).push_back({tag, n, t.nodes[n].parent});
    };
    collect(plus, +1);
    collect(minus, -1);
    if (pos.size() != neg.size()) return 0;
    std::vector<int> perm(neg.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::sort(perm.begin(), perm.end());
    std::uint64_t count = 0;
    do {
        bool ok = true;
        for (std::size_t i = 0; i < perm.size() && ok; ++i)
            ok = !(pos[i].tree == neg[perm[i]].tree && pos[i].parent == neg[perm[i]].parent);
        count += ok;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

std::uint64_t oracle_couple_count(int max_total) {
    std::uint64_t total = 0;
    for (int np = 1; np < max_total; ++np)
        for (int nm = 1; np + nm <= max_total; ++nm)
            for (const auto& a : oracle_shapes(np))
                for (const auto& b : oracle_shapes(nm))
                    total += oracle_matchings(tree_from_int_shape(a, +1),
                                              tree_from_int_shape(b, -1));
    return total;
}

}  // namespace

TEST_CASE("leaves = 2 internal + 1 for every shape") {
    for (int n = 0; n <= 5; ++n)
        for (const Shape& s : shapes_with_internal(n)) {
            SignedTree t = tree_from_shape(s, +1);
            CHECK(t.internal_count() == n);
            CHECK(t.leaf_count() == 2 * n + 1);
        }
}

TEST_CASE("leaf sign balance equals the root sign") {
    CHECK(leaf_sign_balance(SignedTree::single(+1)) == +1);
    SignedTree one = SignedTree::single(+1);
    one.expand_leaf(0);
    CHECK(leaf_sign_balance(one) == +1);
    for (int n = 0; n <= 3; ++n)
        for (const Shape& s : shapes_with_internal(n))
            for (int sign : {+1, -1})
                CHECK(leaf_sign_balance(tree_from_shape(s, sign)) == sign);
}

TEST_CASE("tree validation flags sign-rule breaks") {
    CHECK(validate_tree(SignedTree::single(+1)).ok());
    SignedTree t = SignedTree::single(+1);
    t.expand_leaf(0);
    CHECK(validate_tree(t).ok());
    t.nodes[t.child(0, 1)].sign = +1;  // middle child must be -
    ValidationReport r = validate_tree(t);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].where == "+/1");
}

TEST_CASE("couple validation") {
    Couple c;
    c.plus = SignedTree::single(+1);
    c.plus.expand_leaf(0);
    c.minus = SignedTree::single(-1);
    c.minus.expand_leaf(0);
    auto leaf = [&](int tag, int k) {
        const SignedTree& t = tag > 0 ? c.plus : c.minus;
        return NodeRef{static_cast<std::int8_t>(tag), t.child(0, k)};
    };
    c.pairing = {{leaf(+1, 1), leaf(-1, 1)}, {leaf(+1, 0), leaf(-1, 0)}, {leaf(+1, 2), leaf(-1, 2)}};
    CHECK(validate_couple(c).ok());

    SUBCASE("same-sign pair") {
        c.pairing[1] = {leaf(+1, 0), leaf(-1, 1)};  // both +
        ValidationReport r = validate_couple(c);
        CHECK(!r.ok());
        bool same_sign = false, unmatched = false;
        for (const auto& v : r.violations) {
            same_sign |= v.message.find("same sign") != std::string::npos;
            unmatched |= v.message.find("unmatched") != std::string::npos;
        }
        CHECK(same_sign);
        CHECK(unmatched);  // -/0 lost its partner
    }
    SUBCASE("duplicate match") {
        c.pairing.push_back({leaf(+1, 1), leaf(-1, 1)});
        ValidationReport r = validate_couple(c);
        bool dup = false;
        for (const auto& v : r.violations)
            dup |= v.message.find("more than once") != std::string::npos;
        CHECK(dup);
    }
}

TEST_CASE("enumeration counts match the brute-force oracle") {
    CHECK(count_couples(1) == 0);
    CHECK(count_couples(2) == 2);
    CHECK(count_couples(2) == oracle_couple_count(2));
    CHECK(count_couples(3) == oracle_couple_count(3));
    CHECK(count_couples(4) == oracle_couple_count(4));
    CHECK(count_couples(5) == oracle_couple_count(5));
}

TEST_CASE("enumeration yields valid, distinct couples") {
    CoupleEnumerator it(4);
    Couple c;
    std::set<std::string> seen;
    std::uint64_t n = 0;
    while (it.next(c)) {
        ++n;
        CHECK(validate_tree(c.plus).ok());
        CHECK(validate_tree(c.minus).ok());
        CHECK(validate_couple(c).ok());
        CHECK(seen.insert(couple_to_json(c)).second);
    }
    CHECK(n == count_couples(4));
}

TEST_CASE("enumeration cap") {
    CHECK_THROWS_AS(count_couples(4, 10), EnumerationCapExceeded);
    CoupleEnumerator it(4, 5);
    Couple c;
    for (int i = 0; i < 5; ++i) CHECK(it.next(c));
    CHECK_THROWS_AS(it.next(c), EnumerationCapExceeded);
}

TEST_CASE("random couples are valid and deterministic") {
    Couple a = random_couple(3, 3, 7);
    Couple b = random_couple(3, 3, 7);
    CHECK(couple_to_json(a) == couple_to_json(b));
    CHECK(validate_couple(a).ok());

    Couple c = random_couple(1, 1, 0);
    CHECK(validate_couple(c).ok());
    CHECK(c.total_internal() == 2);

    Couple d = random_couple(5, 2, 1);
    CHECK(leaf_sign_balance(d.plus) + leaf_sign_balance(d.minus) == 0);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Couple r = random_couple(2 + seed % 4, 1 + seed % 5, seed);
        CHECK(validate_couple(r).ok());
        for (const auto& [x, y] : r.pairing) {
            bool same_parent = x.tree == y.tree && r.tree(x.tree).nodes[x.node].parent ==
                                                       r.tree(y.tree).nodes[y.node].parent;
            CHECK(!same_parent);
        }
    }
}

TEST_CASE("path strings round trip") {
    Couple c = random_couple(4, 3, 11);
    for (const auto& [a, b] : c.pairing) {
        std::string sa = path_string(c.tree(a.tree), a.tree, a.node);
        auto back = parse_path_string(sa, c.plus, c.minus);
        REQUIRE(back.has_value());
        CHECK(back->tree == a.tree);
        CHECK(back->node == a.node);
        (void)b;
    }
    CHECK(!parse_path_string("+/9", c.plus, c.minus).has_value());
    CHECK(!parse_path_string("x/0", c.plus, c.minus).has_value());
}
