#include "molecule.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace molred {

const char* bond_kind_name(BondKind k) {
    switch (k) {
        case BondKind::PC: return "PC";
        case BondKind::LP: return "LP";
        case BondKind::INJECTED: return "INJECTED";
    }
    return "?";
}

void Molecule::clear() {
    atoms_.clear();
    bonds_.clear();
    adj_.clear();
    live_atoms_ = live_bonds_ = 0;
    mark_.clear();
    epoch_ = 0;
    dimension = 3;
}

int Molecule::add_atom(std::string id, bool degenerate) {
    Atom a;
    a.id = std::move(id);
    a.degenerate = degenerate;
    a.alive = true;
    atoms_.push_back(std::move(a));
    adj_.emplace_back();
    ++live_atoms_;
    return static_cast<int>(atoms_.size()) - 1;
}

int Molecule::in_degree(int atom) const {
    int n = 0;
    for (int b : adj_[atom]) n += bonds_[b].head == atom;
    return n;
}

int Molecule::out_degree(int atom) const {
    int n = 0;
    for (int b : adj_[atom]) n += bonds_[b].tail == atom;
    return n;
}

int Molecule::add_bond(int tail, int head, BondKind kind) {
    if (tail == head) throw std::runtime_error("self-loop bond rejected");
    if (!atoms_[tail].alive || !atoms_[head].alive)
        throw std::runtime_error("bond endpoint is not a live atom");
    if (out_degree(tail) >= 2) throw std::runtime_error("atom " + atoms_[tail].id + " already has 2 outgoing bonds");
    if (in_degree(head) >= 2) throw std::runtime_error("atom " + atoms_[head].id + " already has 2 incoming bonds");
    Bond b;
    b.id = static_cast<int>(bonds_.size());
    b.tail = tail;
    b.head = head;
    b.kind = kind;
    b.alive = true;
    bonds_.push_back(b);
    adj_[tail].push_back(b.id);
    adj_[head].push_back(b.id);
    ++live_bonds_;
    return b.id;
}

void Molecule::remove_bond(int bond_id) {
    Bond& b = bonds_[bond_id];
    if (!b.alive) throw std::logic_error("bond removed twice");
    b.alive = false;
    --live_bonds_;
    for (int atom : {b.tail, b.head}) {
        auto& inc = adj_[atom];
        inc.erase(std::find(inc.begin(), inc.end(), bond_id));
    }
}

void Molecule::remove_atom(int atom) {
    if (!atoms_[atom].alive) throw std::logic_error("atom removed twice");
    if (!adj_[atom].empty()) throw std::logic_error("atom removed while bonds remain");
    atoms_[atom].alive = false;
    --live_atoms_;
}

int Molecule::multiplicity(int a, int b) const {
    int n = 0;
    for (int bond : adj_[a]) n += other_end(bond, a) == b;
    return n;
}

void Molecule::bonds_between(int a, int b, std::vector<int>& out) const {
    out.clear();
    for (int bond : adj_[a])
        if (other_end(bond, a) == b) out.push_back(bond);
    std::sort(out.begin(), out.end());
}

int Molecule::find_atom(const std::string& id) const {
    for (int i = 0; i < static_cast<int>(atoms_.size()); ++i)
        if (atoms_[i].alive && atoms_[i].id == id) return i;
    return -1;
}

int Molecule::next_mark_epoch() const {
    mark_.resize(atoms_.size(), 0);
    return ++epoch_;
}

int Molecule::component_count() const {
    int stamp = next_mark_epoch();
    int count = 0;
    std::vector<int>& stack = stack_;
    stack.clear();
    for (int s = 0; s < static_cast<int>(atoms_.size()); ++s) {
        if (!atoms_[s].alive || mark_[s] == stamp) continue;
        ++count;
        mark_[s] = stamp;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int b : adj_[v]) {
                int w = other_end(b, v);
                if (mark_[w] != stamp) {
                    mark_[w] = stamp;
                    stack.push_back(w);
                }
            }
        }
    }
    return count;
}

std::vector<std::vector<int>> Molecule::components() const {
    int stamp = next_mark_epoch();
    std::vector<std::vector<int>> out;
    std::vector<int>& stack = stack_;
    stack.clear();
    for (int s = 0; s < static_cast<int>(atoms_.size()); ++s) {
        if (!atoms_[s].alive || mark_[s] == stamp) continue;
        out.emplace_back();
        mark_[s] = stamp;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            out.back().push_back(v);
            for (int b : adj_[v]) {
                int w = other_end(b, v);
                if (mark_[w] != stamp) {
                    mark_[w] = stamp;
                    stack.push_back(w);
                }
            }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

bool Molecule::has_all_degree4_component() const {
    int stamp = next_mark_epoch();
    std::vector<int>& stack = stack_;
    stack.clear();
    for (int s = 0; s < static_cast<int>(atoms_.size()); ++s) {
        if (!atoms_[s].alive || mark_[s] == stamp) continue;
        bool all4 = true;
        mark_[s] = stamp;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            all4 &= degree(v) == 4;
            for (int b : adj_[v]) {
                int w = other_end(b, v);
                if (mark_[w] != stamp) {
                    mark_[w] = stamp;
                    stack.push_back(w);
                }
            }
        }
        if (all4) return true;
    }
    return false;
}

bool Molecule::connected(int a, int b) const {
    return connected_excluding(a, b, {});
}

bool Molecule::connected_excluding(int a, int b, std::span<const int> excluded) const {
    if (a == b) return true;
    int stamp = next_mark_epoch();
    for (int x : excluded) mark_[x] = stamp;
    if (mark_[a] == stamp || mark_[b] == stamp) return false;
    std::vector<int>& stack = stack_;
    stack.assign(1, a);
    mark_[a] = stamp;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int bond : adj_[v]) {
            int w = other_end(bond, v);
            if (mark_[w] == stamp) continue;
            if (w == b) return true;
            mark_[w] = stamp;
            stack.push_back(w);
        }
    }
    return false;
}

bool Molecule::connected_avoiding_bonds(int a, int b, std::span<const int> skipped) const {
    if (a == b) return true;
    int stamp = next_mark_epoch();
    std::vector<int>& stack = stack_;
    stack.assign(1, a);
    mark_[a] = stamp;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int bond : adj_[v]) {
            if (std::binary_search(skipped.begin(), skipped.end(), bond)) continue;
            int w = other_end(bond, v);
            if (mark_[w] == stamp) continue;
            if (w == b) return true;
            mark_[w] = stamp;
            stack.push_back(w);
        }
    }
    return false;
}

int Molecule::component_count_excluding(std::span<const int> excluded) const {
    int stamp = next_mark_epoch();
    for (int x : excluded) mark_[x] = stamp;
    int count = 0;
    std::vector<int>& stack = stack_;
    stack.clear();
    for (int s = 0; s < static_cast<int>(atoms_.size()); ++s) {
        if (!atoms_[s].alive || mark_[s] == stamp) continue;
        ++count;
        mark_[s] = stamp;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int b : adj_[v]) {
                int w = other_end(b, v);
                if (mark_[w] != stamp) {
                    mark_[w] = stamp;
                    stack.push_back(w);
                }
            }
        }
    }
    return count;
}

std::vector<int> Molecule::find_bridges() const {
    std::vector<int> bridges;
    find_bridges(bridges);
    return bridges;
}

void Molecule::find_bridges(std::vector<int>& bridges) const {
    // Iterative lowlink on the undirected multigraph. Only the specific bond
    // instance used to reach a vertex is skipped, so parallel bonds are never
    // reported as bridges.
    bridges.clear();
    int n = static_cast<int>(atoms_.size());
    disc_.assign(n, -1);
    low_.assign(n, 0);
    std::vector<int>& disc = disc_;
    std::vector<int>& low = low_;
    int timer = 0;
    struct Frame {
        int v;
        int via_bond;
        std::size_t next;
    };
    std::vector<Frame> stack;
    stack.reserve(n);
    for (int s = 0; s < n; ++s) {
        if (!atoms_[s].alive || disc[s] != -1) continue;
        stack.push_back({s, -1, 0});
        disc[s] = low[s] = timer++;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < adj_[f.v].size()) {
                int bond = adj_[f.v][f.next++];
                if (bond == f.via_bond) continue;
                int w = other_end(bond, f.v);
                if (disc[w] == -1) {
                    disc[w] = low[w] = timer++;
                    stack.push_back({w, bond, 0});
                } else {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
            } else {
                int v = f.v;
                int via = f.via_bond;
                stack.pop_back();
                if (!stack.empty()) {
                    int p = stack.back().v;
                    low[p] = std::min(low[p], low[v]);
                    if (low[v] > disc[p]) bridges.push_back(via);
                }
            }
        }
    }
    std::sort(bridges.begin(), bridges.end());
}

std::vector<Molecule::Multiplicity> Molecule::find_multiplicities() const {
    std::vector<Multiplicity> out;
    std::unordered_map<std::int64_t, std::size_t> index;
    for (const Bond& b : bonds_) {
        if (!b.alive) continue;
        int a = std::min(b.tail, b.head), c = std::max(b.tail, b.head);
        std::int64_t key = static_cast<std::int64_t>(a) << 32 | static_cast<std::uint32_t>(c);
        auto [it, fresh] = index.emplace(key, out.size());
        if (fresh) out.push_back({a, c, 0, 0, 0});
        Multiplicity& m = out[it->second];
        ++m.count;
        (b.tail == a ? m.forward : m.backward) += 1;
    }
    std::sort(out.begin(), out.end(),
              [](const Multiplicity& x, const Multiplicity& y) {
                  return std::tie(x.a, x.b) < std::tie(y.a, y.b);
              });
    return out;
}

Molecule::BaseReport Molecule::is_base_molecule() const {
    BaseReport r;
    r.bond_count = live_bonds_;
    r.connected = live_atoms_ > 0 && component_count() == 1;
    for (int i = 0; i < static_cast<int>(atoms_.size()); ++i) {
        if (!atoms_[i].alive) continue;
        switch (degree(i)) {
            case 2: ++r.degree2; break;
            case 3: ++r.degree3; break;
            case 4: ++r.degree4; break;
            default: ++r.degree_other; break;
        }
    }
    bool profile = r.degree_other == 0 &&
                   ((r.degree3 == 2 && r.degree2 == 0) || (r.degree2 == 1 && r.degree3 == 0));
    r.is_base = r.connected && live_bonds_ == 2 * live_atoms_ - 1 && profile;
    return r;
}

std::vector<Molecule::Chain> Molecule::detect_chains() const {
    std::vector<Chain> out;
    auto mult_info = find_multiplicities();

    // Type I: maximal paths of atoms joined by opposite-direction double bonds.
    {
        std::vector<std::vector<int>> link(atoms_.size());
        for (const auto& m : mult_info)
            if (m.count == 2 && m.forward == 1 && m.backward == 1) {
                link[m.a].push_back(m.b);
                link[m.b].push_back(m.a);
            }
        std::vector<char> done(atoms_.size(), 0);
        for (int s = 0; s < static_cast<int>(atoms_.size()); ++s) {
            if (done[s] || link[s].empty() || link[s].size() > 1) continue;
            // endpoint of a path
            Chain chain{1, {}};
            int prev = -1, v = s;
            while (v != -1) {
                chain.atoms.push_back(v);
                done[v] = 1;
                int next = -1;
                for (int w : link[v])
                    if (w != prev) next = w;
                prev = v;
                v = (next != -1 && !done[next]) ? next : -1;
            }
            if (chain.atoms.size() >= 2) out.push_back(std::move(chain));
        }
    }

    // Type II: ladders of double-bonded pairs whose rungs are joined by single
    // bonds top-to-top and bottom-to-bottom.
    {
        struct Rung {
            int a, b;
        };
        std::vector<Rung> rungs;
        std::vector<int> rung_of(atoms_.size(), -1);
        for (const auto& m : mult_info)
            if (m.count == 2 && !(m.forward == 1 && m.backward == 1)) {
                rung_of[m.a] = rung_of[m.b] = static_cast<int>(rungs.size());
                rungs.push_back({m.a, m.b});
            }
        if (!rungs.empty()) {
            auto single_between = [&](int a, int b) {
                return a != b && multiplicity(a, b) == 1;
            };
            std::vector<std::vector<int>> next(rungs.size());
            for (std::size_t i = 0; i < rungs.size(); ++i)
                for (std::size_t j = 0; j < rungs.size(); ++j) {
                    if (i == j) continue;
                    // either orientation of rung j can face rung i
                    if ((single_between(rungs[i].a, rungs[j].a) &&
                         single_between(rungs[i].b, rungs[j].b)) ||
                        (single_between(rungs[i].a, rungs[j].b) &&
                         single_between(rungs[i].b, rungs[j].a)))
                        next[i].push_back(static_cast<int>(j));
                }
            std::vector<char> done(rungs.size(), 0);
            for (std::size_t s = 0; s < rungs.size(); ++s) {
                if (done[s] || next[s].size() > 1) continue;
                std::vector<int> path;
                int prev = -1, v = static_cast<int>(s);
                while (v != -1 && !done[v]) {
                    path.push_back(v);
                    done[v] = 1;
                    int nxt = -1;
                    for (int w : next[v])
                        if (w != prev) nxt = w;
                    prev = v;
                    v = nxt;
                }
                if (path.size() >= 2) {
                    Chain chain{2, {}};
                    for (int r : path) {
                        chain.atoms.push_back(rungs[r].a);
                        chain.atoms.push_back(rungs[r].b);
                    }
                    out.push_back(std::move(chain));
                }
            }
        }
    }
    return out;
}

ValidationReport Molecule::validate() const {
    ValidationReport report;
    std::unordered_set<std::string> ids;
    for (int i = 0; i < static_cast<int>(atoms_.size()); ++i) {
        if (!atoms_[i].alive) continue;
        if (!ids.insert(atoms_[i].id).second)
            report.violations.push_back({atoms_[i].id, "duplicate atom id"});
        if (in_degree(i) > 2)
            report.violations.push_back({atoms_[i].id, "more than 2 incoming bonds"});
        if (out_degree(i) > 2)
            report.violations.push_back({atoms_[i].id, "more than 2 outgoing bonds"});
    }
    for (const Bond& b : bonds_) {
        if (!b.alive) continue;
        if (b.tail == b.head)
            report.violations.push_back({"bond " + std::to_string(b.id), "self-loop"});
    }
    for (const auto& m : find_multiplicities())
        if (m.count > 3)
            report.violations.push_back(
                {atoms_[m.a].id + "," + atoms_[m.b].id, "more than a triple bond between two atoms"});
    for (const auto& comp : components()) {
        bool all4 = !comp.empty();
        for (int v : comp)
            if (degree(v) != 4) all4 = false;
        if (all4)
            report.violations.push_back(
                {atoms_[comp.front()].id, "component in which every atom has 4 bonds"});
    }
    return report;
}

Molecule molecule_from_couple(const Couple& couple) {
    Molecule m;
    // atom per internal node, plus tree first, preorder
    std::vector<int> atom_of_plus(couple.plus.nodes.size(), -1);
    std::vector<int> atom_of_minus(couple.minus.nodes.size(), -1);
    auto add_atoms = [&](const SignedTree& t, int tag, std::vector<int>& atom_of) {
        auto rec = [&](auto&& self, int n) -> void {
            if (t.is_leaf(n)) return;
            atom_of[n] = m.add_atom(path_string(t, tag, n));
            for (int k = 0; k < 3; ++k) self(self, t.child(n, k));
        };
        rec(rec, 0);
    };
    add_atoms(couple.plus, +1, atom_of_plus);
    add_atoms(couple.minus, -1, atom_of_minus);

    // PC bonds: for an internal node n with internal parent p, the bond runs
    // atom(n) -> atom(p) when the sign of n is +, and atom(p) -> atom(n) otherwise.
    auto add_pc = [&](const SignedTree& t, std::vector<int>& atom_of) {
        auto rec = [&](auto&& self, int n) -> void {
            if (t.is_leaf(n)) return;
            int p = t.nodes[n].parent;
            if (p >= 0) {
                if (t.nodes[n].sign > 0)
                    m.add_bond(atom_of[n], atom_of[p], BondKind::PC);
                else
                    m.add_bond(atom_of[p], atom_of[n], BondKind::PC);
            }
            for (int k = 0; k < 3; ++k) self(self, t.child(n, k));
        };
        rec(rec, 0);
    };
    add_pc(couple.plus, atom_of_plus);
    add_pc(couple.minus, atom_of_minus);

    // LP bonds: from the atom holding the minus leaf to the atom holding the
    // plus leaf of each pair.
    for (const auto& [a, b] : couple.pairing) {
        const SignedTree& ta = couple.tree(a.tree);
        const NodeRef& plus_leaf = ta.nodes[a.node].sign > 0 ? a : b;
        const NodeRef& minus_leaf = ta.nodes[a.node].sign > 0 ? b : a;
        auto atom_of = [&](const NodeRef& r) {
            int parent = couple.tree(r.tree).nodes[r.node].parent;
            return r.tree > 0 ? atom_of_plus[parent] : atom_of_minus[parent];
        };
        m.add_bond(atom_of(minus_leaf), atom_of(plus_leaf), BondKind::LP);
    }
    return m;
}

}  // namespace molred
