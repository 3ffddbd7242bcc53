#include "verify.hpp"

#include <algorithm>

namespace molred {

bool TraceVerifier::forest_connected(int a, int b) {
    if (a == b) return true;
    int stamp = ++epoch_;
    stack_.assign(1, a);
    std::vector<int>& stack = stack_;
    mark_[a] = stamp;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : forest_adj_[v]) {
            if (mark_[w] == stamp) continue;
            if (w == b) return true;
            mark_[w] = stamp;
            stack.push_back(w);
        }
    }
    return false;
}

VerificationReport TraceVerifier::verify(const Molecule& original, const Trace& trace, int d) {
    VerificationReport rep;
    auto fail = [&](int idx, bool& flag, std::string msg) {
        flag = false;
        rep.failures.push_back({idx, std::move(msg)});
    };

    work_ = original;
    const int n = work_.atom_slots();
    forest_adj_.assign(n, {});
    forest_edges_ = 0;
    mark_.assign(n, 0);
    epoch_ = 0;

    const int chi0 = work_.euler_characteristic();
    int chi_sum = 0;
    std::vector<int> sorted;

    bool replay_alive = true;
    for (const StepRecord& r : trace.steps()) {
        if (!replay_alive) break;
        const int idx = r.index;

        for (int b : r.bonds_removed)
            if (b < 0 || b >= work_.bond_slots() || !work_.bond_alive(b)) {
                fail(idx, rep.replay_ok, "removed bond is not a live bond: " + std::to_string(b));
                replay_alive = false;
            }
        for (int a : r.atoms_removed)
            if (a < 0 || a >= work_.atom_slots() || !work_.atom_alive(a)) {
                fail(idx, rep.replay_ok, "removed atom is not a live atom: " + std::to_string(a));
                replay_alive = false;
            }
        if (!replay_alive) break;

        const int chi_before = work_.euler_characteristic();
        for (int b : r.bonds_removed) work_.remove_bond(b);
        for (int a : r.atoms_removed) {
            if (!work_.incident(a).empty()) {
                fail(idx, rep.replay_ok, "atom removed while bonds remain");
                replay_alive = false;
                break;
            }
            work_.remove_atom(a);
        }
        if (!replay_alive) break;

        for (const Bond& inj : r.bonds_injected) {
            if (inj.id != work_.bond_slots()) {
                fail(idx, rep.replay_ok, "injected bond id is not fresh");
                replay_alive = false;
                break;
            }
            try {
                work_.add_bond(inj.tail, inj.head, BondKind::INJECTED);
            } catch (const std::exception& e) {
                fail(idx, rep.replay_ok, std::string("injected bond rejected: ") + e.what());
                replay_alive = false;
                break;
            }
        }
        if (!replay_alive) break;

        if (work_.euler_characteristic() - chi_before != r.delta_chi_computed)
            fail(idx, rep.replay_ok, "recorded delta_chi does not match the replay");
        chi_sum += r.delta_chi_computed;

        // Re-decide every candidate by DFS and compare against the recorded
        // disjoint-set decisions, in the same ascending-id order. The forest
        // itself follows the trace's claims, so a tampered trace surfaces both
        // as a disagreement here and in the final spanning-tree check.
        sorted = r.bonds_removed;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != r.bonds_removed)
            fail(idx, rep.replay_ok, "bonds_removed are not in ascending order");
        std::size_t ia = 0, ir = 0;
        for (int b : sorted) {
            const Bond& bond = work_.bond(b);
            bool dfs_addable = !forest_connected(bond.tail, bond.head);
            bool claimed_added = ia < r.g_edges_added.size() && r.g_edges_added[ia] == b;
            bool claimed_rejected = ir < r.g_edges_rejected.size() && r.g_edges_rejected[ir] == b;
            if (claimed_added)
                ++ia;
            else if (claimed_rejected)
                ++ir;
            else {
                fail(idx, rep.replay_ok,
                     "bond " + std::to_string(b) + " is in neither g_edges list");
                continue;
            }
            if (claimed_added != dfs_addable)
                fail(idx, rep.replay_ok,
                     "disjoint-set and DFS disagree: bond " + std::to_string(b) +
                         (dfs_addable ? " should have been added" : " closes a cycle"));
            if (claimed_added && bond.kind == BondKind::INJECTED)
                fail(idx, rep.injected_ok,
                     "injected bond " + std::to_string(b) + " entered the forest");
            if (claimed_added && dfs_addable) {
                forest_adj_[bond.tail].push_back(bond.head);
                forest_adj_[bond.head].push_back(bond.tail);
                ++forest_edges_;
            }
        }
        if (ia != r.g_edges_added.size() || ir != r.g_edges_rejected.size())
            fail(idx, rep.replay_ok, "g_edges_added/rejected do not partition bonds_removed");

        // maximality: after the step every removed bond closes a forest path
        for (int b : sorted) {
            const Bond& bond = work_.bond(b);
            if (!forest_connected(bond.tail, bond.head)) {
                fail(idx, rep.maximality_ok,
                     "bond " + std::to_string(b) + " was left out of the forest but is safe");
                break;
            }
        }
    }

    if (replay_alive) {
        if (work_.bond_count() != 0)
            fail(-1, rep.replay_ok, "bonds remain after the trace");
        if (chi_sum != -chi0)
            fail(-1, rep.replay_ok, "sum of delta_chi is not -chi(initial)");
    }

    LedgerReport ledger = ledger_check(trace, d);
    for (const auto& [idx, msg] : ledger.violations) fail(idx, rep.table_ok, msg);

    // spanning tree of the original atom set
    {
        int comps = 0;
        int stamp = ++epoch_;
        std::vector<int> stack;
        for (int s = 0; s < n; ++s) {
            if (mark_[s] == stamp) continue;
            ++comps;
            mark_[s] = stamp;
            stack.push_back(s);
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int w : forest_adj_[v])
                    if (mark_[w] != stamp) {
                        mark_[w] = stamp;
                        stack.push_back(w);
                    }
            }
        }
        if (!(n > 0 && comps == 1 && forest_edges_ == n - 1))
            fail(-1, rep.spanning_tree_ok,
                 "forest is not a spanning tree: " + std::to_string(forest_edges_) + " edges, " +
                     std::to_string(comps) + " components over " + std::to_string(n) + " atoms");
    }
    rep.tree_edges = forest_edges_;
    return rep;
}

std::vector<std::vector<int>> brute_force_spanning_trees(
    int n_vertices, const std::vector<std::pair<int, int>>& edges) {
    if (n_vertices > 10) throw std::invalid_argument("brute force limited to 10 vertices");
    if (edges.size() > 20) throw std::invalid_argument("brute force limited to 20 edges");
    std::vector<std::vector<int>> trees;
    if (n_vertices == 0) return trees;
    const int k = n_vertices - 1;
    const int e = static_cast<int>(edges.size());
    if (k == 0) {
        trees.push_back({});
        return trees;
    }
    if (e < k) return trees;

    std::vector<int> pick(k);
    std::vector<int> parent(n_vertices);
    auto root = [&](int x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    auto rec = [&](auto&& self, int level, int start) -> void {
        if (level == k) {
            for (int i = 0; i < n_vertices; ++i) parent[i] = i;
            int merged = 0;
            for (int i = 0; i < k; ++i) {
                auto [u, v] = edges[pick[i]];
                int ru = root(u), rv = root(v);
                if (ru == rv) return;  // cycle
                parent[ru] = rv;
                ++merged;
            }
            if (merged == k) trees.push_back(pick);
            return;
        }
        for (int i = start; i <= e - (k - level); ++i) {
            pick[level] = i;
            self(self, level + 1, i + 1);
        }
    };
    rec(rec, 0, 0);
    return trees;
}

std::vector<std::vector<int>> brute_force_spanning_trees(const Molecule& m) {
    // compress alive atoms; report subsets of bond ids
    std::vector<int> compact(m.atom_slots(), -1);
    int n = 0;
    for (int a = 0; a < m.atom_slots(); ++a)
        if (m.atom_alive(a)) compact[a] = n++;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> bond_ids;
    for (int b = 0; b < m.bond_slots(); ++b) {
        if (!m.bond_alive(b)) continue;
        edges.push_back({compact[m.bond(b).tail], compact[m.bond(b).head]});
        bond_ids.push_back(b);
    }
    auto trees = brute_force_spanning_trees(n, edges);
    for (auto& tree : trees)
        for (int& e : tree) e = bond_ids[e];
    return trees;
}

std::optional<int> multiple_components_witness(const Molecule& original, const Trace& trace) {
    const int n = original.atom_slots();
    std::vector<int> parent(n), size(n, 1);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto root = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    // endpoints of injected bonds come from the records
    std::vector<std::pair<int, int>> injected_ends;
    std::vector<int> injected_ids;
    int non_singleton = 0;
    for (const StepRecord& r : trace.steps()) {
        for (const Bond& inj : r.bonds_injected) {
            injected_ids.push_back(inj.id);
            injected_ends.push_back({inj.tail, inj.head});
        }
        for (int b : r.g_edges_added) {
            int u, v;
            if (b < original.bond_slots()) {
                u = original.bond(b).tail;
                v = original.bond(b).head;
            } else {
                auto it = std::find(injected_ids.begin(), injected_ids.end(), b);
                if (it == injected_ids.end()) return std::nullopt;  // malformed trace
                auto [iu, iv] = injected_ends[it - injected_ids.begin()];
                u = iu;
                v = iv;
            }
            int ru = root(u), rv = root(v);
            if (ru == rv) continue;
            bool au = size[ru] > 1, av = size[rv] > 1;
            non_singleton += (!au && !av) ? 1 : (au && av) ? -1 : 0;
            parent[ru] = rv;
            size[rv] += size[ru];
        }
        if (non_singleton >= 2) return r.index;
    }
    return std::nullopt;
}

}  // namespace molred
