#include "reduction.hpp"

#include <algorithm>
#include <array>

namespace molred {

namespace {

struct KindName {
    StepKind kind;
    const char* name;
};

constexpr std::array<KindName, 24> kKindNames = {{
    {StepKind::DA, "DA"},
    {StepKind::TB1, "TB1"},
    {StepKind::TB2, "TB2"},
    {StepKind::BR, "BR"},
    {StepKind::S3S3_1, "3S3-1"},
    {StepKind::S3S3_2G, "3S3-2G"},
    {StepKind::S3S3_3G, "3S3-3G"},
    {StepKind::S3S3_4G, "3S3-4G"},
    {StepKind::S3S3_5G, "3S3-5G"},
    {StepKind::D3D3_1, "3D3-1"},
    {StepKind::D3D3_2G, "3D3-2G"},
    {StepKind::D3D3_3G, "3D3-3G"},
    {StepKind::D3D3_4G, "3D3-4G"},
    {StepKind::D3D3_5G, "3D3-5G"},
    {StepKind::D3D3_6G, "3D3-6G"},
    {StepKind::D3D4G, "3D4G"},
    {StepKind::S3S2G, "3S2G"},
    {StepKind::R3_1, "3R-1"},
    {StepKind::R3_2G, "3R-2G"},
    {StepKind::R2_1, "2R-1"},
    {StepKind::R2_2G, "2R-2G"},
    {StepKind::R2_3, "2R-3"},
    {StepKind::R2_4, "2R-4"},
    {StepKind::R2_5, "2R-5"},
}};

}  // namespace

const char* step_kind_name(StepKind k) {
    for (const auto& e : kKindNames)
        if (e.kind == k) return e.name;
    return "?";
}

std::optional<StepKind> step_kind_from_name(const std::string& name) {
    for (const auto& e : kKindNames)
        if (name == e.name) return e.kind;
    return std::nullopt;
}

std::optional<TableRow> step_table_row(StepKind k, int d) {
    (void)d;
    switch (k) {
        case StepKind::S3S3_1: return TableRow{{-2}, 0, 1, Rat(-1)};
        case StepKind::S3S3_2G: return TableRow{{-2}, 1, 6, Rat(-2)};
        case StepKind::S3S3_3G: return TableRow{{-1}, 1, 6, Rat(-1)};
        case StepKind::S3S3_4G:
        case StepKind::S3S3_5G: return TableRow{{-3, -2}, 1, 6, Rat(-2)};
        case StepKind::D3D3_1: return TableRow{{-2}, 0, 1, Rat(-1)};
        case StepKind::D3D3_2G:
        case StepKind::D3D3_4G:
        case StepKind::D3D3_5G: return TableRow{{-2}, 1, 4, Rat(-2)};
        case StepKind::D3D3_3G: return TableRow{{-1}, 1, 4, Rat(-1)};
        case StepKind::D3D3_6G: return TableRow{{-5, -4}, 1, 6, Rat(-4)};
        case StepKind::D3D4G: return TableRow{{-3}, 1, 4, Rat(-2)};
        case StepKind::S3S2G: return TableRow{{-2}, 1, 4, Rat(-2)};
        case StepKind::R3_1: return TableRow{{-2}, 0, 1, Rat(-1)};
        case StepKind::R3_2G: return TableRow{{-5, -4}, 1, 4, Rat(-4)};
        case StepKind::R2_1:
        case StepKind::R2_3: return TableRow{{-1}, 0, 1, Rat(-1)};
        case StepKind::R2_2G: return TableRow{{-1}, 1, 3, Rat(-1)};
        case StepKind::R2_4: return TableRow{{-1}, 0, 1, Rat(-1)};
        case StepKind::R2_5: return TableRow{{-1}, 0, 1, Rat(-1)};
        default: return std::nullopt;  // DA, BR, TB1, TB2
    }
}

// ---- matching ---------------------------------------------------------------

Reducer::PairInfo Reducer::pair_info(const Molecule& m, int a, int b) const {
    PairInfo info;
    for (int bond : m.incident(a)) {
        if (m.other_end(bond, a) == b) continue;
        if (info.l2 < 0) {
            info.l2 = bond;
            info.v3 = m.other_end(bond, a);
        } else if (info.l3 < 0) {
            info.l3 = bond;
            info.v4 = m.other_end(bond, a);
        }
    }
    for (int bond : m.incident(b)) {
        if (m.other_end(bond, b) == a) continue;
        if (info.l4 < 0) {
            info.l4 = bond;
            info.v5 = m.other_end(bond, b);
        } else if (info.l5 < 0) {
            info.l5 = bond;
            info.v6 = m.other_end(bond, b);
        }
    }
    return info;
}

int Reducer::removal_delta_chi(const Molecule& m, std::span<const int> atoms) const {
    int removed_bonds = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        for (int bond : m.incident(atoms[i])) {
            int w = m.other_end(bond, atoms[i]);
            bool shared = false;
            for (std::size_t j = 0; j < i; ++j) shared |= atoms[j] == w;
            if (!shared) ++removed_bonds;  // counted once, at its first doomed endpoint
        }
    }
    int comps_before = m.component_count();
    int comps_after = m.component_count_excluding(atoms);
    return -removed_bonds + static_cast<int>(atoms.size()) + (comps_after - comps_before);
}

bool Reducer::injection_fits(const Molecule& m, int from, int to,
                             std::span<const int> doomed_atoms) const {
    auto doomed = [&](int atom) {
        for (int x : doomed_atoms)
            if (x == atom) return true;
        return false;
    };
    int out_after = 0;
    for (int bond : m.incident(from))
        if (m.bond(bond).tail == from && !doomed(m.other_end(bond, from))) ++out_after;
    int in_after = 0;
    for (int bond : m.incident(to))
        if (m.bond(bond).head == to && !doomed(m.other_end(bond, to))) ++in_after;
    return out_after < 2 && in_after < 2;
}

void Reducer::classify_3s3(const Molecule& m, int v1, int v2, std::vector<StepDescriptor>& out) {
    if (config.functional_group_matcher && config.functional_group_matcher(m, v1, v2)) {
        out.push_back({StepKind::S3S3_5G, v1, v2});
        return;
    }
    PairInfo p = pair_info(m, v1, v2);
    std::array<int, 2> doomed = {v1, v2};
    int plain_chi = removal_delta_chi(m, doomed);
    bool conds = config.cond_i && config.cond_ii;

    bool neighbors_distinct = p.v3 != p.v4 && p.v3 != p.v5 && p.v3 != p.v6 && p.v4 != p.v5 &&
                              p.v4 != p.v6 && p.v5 != p.v6;
    bool all_four = m.degree(p.v3) == 4 && m.degree(p.v4) == 4 && m.degree(p.v5) == 4 &&
                    m.degree(p.v6) == 4;
    if (plain_chi == -2 && conds && neighbors_distinct && all_four) {
        out.push_back({StepKind::S3S3_1, v1, v2, -1, -1, 0});
        out.push_back({StepKind::S3S3_2G, v1, v2, -1, -1, 1});
        return;
    }
    bool three_g_ok = p.v3 != p.v5 && m.multiplicity(p.v3, p.v5) <= 2 &&
                      m.connected_excluding(p.v3, p.v5, doomed);
    if (three_g_ok) {
        int from = m.bond(p.l2).tail == p.v3 ? p.v3 : p.v5;
        int to = from == p.v3 ? p.v5 : p.v3;
        three_g_ok = injection_fits(m, from, to, doomed);
    }
    if (plain_chi == -2 && conds && three_g_ok) {
        out.push_back({StepKind::S3S3_2G, v1, v2, -1, -1, 0});
        out.push_back({StepKind::S3S3_3G, v1, v2, -1, -1, 1});
        return;
    }
    if (plain_chi == -2 && conds) {
        out.push_back({StepKind::S3S3_2G, v1, v2});
        return;
    }
    out.push_back({StepKind::S3S3_4G, v1, v2});
}

bool Reducer::match_fig30(const Molecule& m, int v1, int v2, int v3, int v4) const {
    if (v3 < 0 || v4 < 0 || v3 == v4) return false;
    if (m.degree(v3) != 4 || m.degree(v4) != 4) return false;
    if (m.multiplicity(v3, v4) != 1) return false;
    auto outer_double = [&](int v, int skip_a, int skip_b, int skip_c) {
        int partner = -1;
        int count = 0;
        for (int bond : m.incident(v)) {
            int w = m.other_end(bond, v);
            if (w == skip_a || w == skip_b || w == skip_c) continue;
            if (partner == -1) partner = w;
            if (w != partner) return -1;
            ++count;
        }
        return count == 2 ? partner : -1;
    };
    int v5 = outer_double(v3, v1, v2, v4);
    int v6 = outer_double(v4, v1, v2, v3);
    return v5 >= 0 && v6 >= 0 && v5 != v6;
}

void Reducer::classify_3d3(const Molecule& m, int v1, int v2, std::vector<StepDescriptor>& out) {
    PairInfo p = pair_info(m, v1, v2);
    int v3 = p.v3, v4 = p.v5;  // single extra neighbor on each side
    int l3 = p.l2;

    // type II chain continuing: v3=v4 double-bonded, each with an onward
    // single bond, the two onward bonds facing opposite ways
    bool chain = v3 != v4 && v3 >= 0 && v4 >= 0 && m.multiplicity(v3, v4) == 2;
    if (chain) {
        int bx = -1, by = -1, x = -1, y = -1;
        for (int bond : m.incident(v3)) {
            int w = m.other_end(bond, v3);
            if (w == v1 || w == v2 || w == v4) continue;
            if (m.multiplicity(v3, w) == 1) {
                bx = bond;
                x = w;
                break;
            }
        }
        for (int bond : m.incident(v4)) {
            int w = m.other_end(bond, v4);
            if (w == v1 || w == v2 || w == v3) continue;
            if (m.multiplicity(v4, w) == 1) {
                by = bond;
                y = w;
                break;
            }
        }
        chain = bx >= 0 && by >= 0 && x != y &&
                (m.bond(bx).tail == v3) != (m.bond(by).tail == v4);
    }
    if (chain) {
        out.push_back({StepKind::D3D3_1, v1, v2, -1, -1, 0});
        out.push_back({StepKind::D3D3_2G, v1, v2, -1, -1, 1});
        return;
    }

    bool three_g_ok = v3 >= 0 && v4 >= 0 && v3 != v4 && m.degree(v3) != 4 && m.degree(v4) != 4 &&
                      m.multiplicity(v3, v4) <= 2 &&
                      m.connected_excluding(v3, v4, std::array<int, 2>{v1, v2});
    if (three_g_ok) {
        int from = m.bond(l3).tail == v1 ? v4 : v3;  // l5 runs v4->v3 when l3 runs v1->v3
        int to = from == v3 ? v4 : v3;
        three_g_ok = injection_fits(m, from, to, std::array<int, 2>{v1, v2});
    }
    if (three_g_ok) {
        out.push_back({StepKind::D3D3_2G, v1, v2, -1, -1, 0});
        out.push_back({StepKind::D3D3_3G, v1, v2, -1, -1, 1});
        return;
    }
    if (match_fig30(m, v1, v2, v3, v4)) {
        out.push_back({StepKind::D3D3_6G, v1, v2, v3, v4});
        return;
    }
    out.push_back({StepKind::D3D3_1, v1, v2, -1, -1, 0});
    out.push_back({StepKind::D3D3_2G, v1, v2, -1, -1, 1});
}

Reducer::Match Reducer::match_next(const Molecule& m, std::vector<StepDescriptor>& out) {
    out.clear();
    if (m.bond_count() == 0) return Match::Done;

    // triple bonds are cleared as soon as their degrees allow (TB), both for
    // the allow_initial_triple_bonds extension and after 3G injections
    for (int id = 0; id < m.bond_slots(); ++id) {
        if (!m.bond_alive(id)) continue;
        const Bond& b = m.bond(id);
        if (m.multiplicity(b.tail, b.head) != 3) continue;
        int da = m.degree(b.tail), db = m.degree(b.head);
        if (da == 3 && db == 3) {
            out.push_back({StepKind::TB1, b.tail, b.head});
            return Match::Step;
        }
        if (da == 3 && db == 4) {
            out.push_back({StepKind::TB2, b.tail, b.head});
            return Match::Step;
        }
        if (da == 4 && db == 3) {
            out.push_back({StepKind::TB2, b.head, b.tail});
            return Match::Step;
        }
        // a (4,4) triple waits for its neighborhood to reduce
    }

    // rule 1: bridges first
    m.find_bridges(scratch_bonds2_);
    if (!scratch_bonds2_.empty()) {
        const Bond& b = m.bond(scratch_bonds2_.front());
        out.push_back({StepKind::BR, b.tail, b.head});
        return Match::Step;
    }

    // rule 2: two degree-3 atoms joined by a single bond
    for (int id = 0; id < m.bond_slots(); ++id) {
        if (!m.bond_alive(id)) continue;
        const Bond& b = m.bond(id);
        if (m.degree(b.tail) == 3 && m.degree(b.head) == 3 &&
            m.multiplicity(b.tail, b.head) == 1) {
            classify_3s3(m, b.tail, b.head, out);
            return Match::Step;
        }
    }

    // rule 3: two degree-3 atoms joined by a double bond
    for (int id = 0; id < m.bond_slots(); ++id) {
        if (!m.bond_alive(id)) continue;
        const Bond& b = m.bond(id);
        if (m.degree(b.tail) == 3 && m.degree(b.head) == 3 &&
            m.multiplicity(b.tail, b.head) == 2) {
            classify_3d3(m, b.tail, b.head, out);
            return Match::Step;
        }
    }

    // rule 4: degree 3 and degree 4 joined by a double bond
    for (int id = 0; id < m.bond_slots(); ++id) {
        if (!m.bond_alive(id)) continue;
        const Bond& b = m.bond(id);
        int da = m.degree(b.tail), db = m.degree(b.head);
        if (((da == 3 && db == 4) || (da == 4 && db == 3)) &&
            m.multiplicity(b.tail, b.head) == 2) {
            out.push_back({StepKind::D3D4G, da == 3 ? b.tail : b.head, da == 3 ? b.head : b.tail});
            return Match::Step;
        }
    }

    // rule 5: degree 3 and degree 2 joined by a single bond
    for (int id = 0; id < m.bond_slots(); ++id) {
        if (!m.bond_alive(id)) continue;
        const Bond& b = m.bond(id);
        int da = m.degree(b.tail), db = m.degree(b.head);
        if (((da == 3 && db == 2) || (da == 2 && db == 3)) &&
            m.multiplicity(b.tail, b.head) == 1) {
            out.push_back({StepKind::S3S2G, da == 3 ? b.tail : b.head, da == 3 ? b.head : b.tail});
            return Match::Step;
        }
    }

    // rule 6: degree-3 atom with three single bonds to degree-4 atoms
    for (int v = 0; v < m.atom_slots(); ++v) {
        if (!m.atom_alive(v) || m.degree(v) != 3) continue;
        const auto& inc = m.incident(v);
        int w0 = m.other_end(inc[0], v), w1 = m.other_end(inc[1], v), w2 = m.other_end(inc[2], v);
        if (w0 == w1 || w0 == w2 || w1 == w2) continue;
        if (m.degree(w0) != 4 || m.degree(w1) != 4 || m.degree(w2) != 4) continue;
        if (config.has_special_bond) {
            // the special-bond rule removes a distinguished double-double pair
            int p1 = -1, p2 = -1;
            for (int id = 0; id < m.bond_slots() && p1 < 0; ++id) {
                if (!m.bond_alive(id)) continue;
                const Bond& b = m.bond(id);
                int x = b.tail, y = b.head;
                if (x == v || y == v || x == w0 || x == w1 || x == w2 || y == w0 || y == w1 ||
                    y == w2)
                    continue;
                if (m.multiplicity(x, y) != 1 || m.degree(x) != 3 || m.degree(y) != 3) continue;
                auto double_partner = [&](int atom, int skip) {
                    int partner = -1;
                    for (int bond : m.incident(atom)) {
                        int w = m.other_end(bond, atom);
                        if (w == skip) continue;
                        if (partner == -1) partner = w;
                        if (w != partner) return -1;
                    }
                    return partner;
                };
                int x_partner = double_partner(x, y);
                int y_partner = double_partner(y, x);
                if (x_partner >= 0 && y_partner >= 0 && x_partner != y &&
                    y_partner != x) {
                    p1 = x;
                    p2 = y;
                }
            }
            if (p1 >= 0) {
                out.push_back({StepKind::R3_2G, v, -1, p1, p2});
                return Match::Step;
            }
        }
        out.push_back({StepKind::R3_1, v});
        return Match::Step;
    }

    // rules 7 and 8 require only degrees 0, 2 and 4 to remain; anything else
    // here means a pattern outside the catalogue
    for (int v = 0; v < m.atom_slots(); ++v)
        if (m.atom_alive(v) && (m.degree(v) == 1 || m.degree(v) == 3)) return Match::Stuck;

    // rule 7: the 2R cases other than 2R-1
    for (int v = 0; v < m.atom_slots(); ++v) {
        if (!m.atom_alive(v) || m.degree(v) != 2) continue;
        const auto& inc = m.incident(v);
        int w0 = m.other_end(inc[0], v), w1 = m.other_end(inc[1], v);
        if (w0 == w1) {
            bool same_dir = (m.bond(inc[0]).tail == v) == (m.bond(inc[1]).tail == v);
            int dw = m.degree(w0);
            if (dw == 4 && same_dir) {
                out.push_back({StepKind::R2_2G, v, w0});
                return Match::Step;
            }
            if (dw == 2) {
                out.push_back({StepKind::R2_5, v, w0});
                return Match::Step;
            }
            continue;  // opposite-direction double to degree 4 is rule 8
        }
        int d0 = m.degree(w0), d1 = m.degree(w1);
        if ((d0 == 4 || d1 == 4) && (d0 == 2 || d0 == 4) && (d1 == 2 || d1 == 4)) {
            out.push_back({StepKind::R2_3, v, d0 == 4 ? w0 : w1, d0 == 4 ? w1 : w0});
            return Match::Step;
        }
        if (d0 == 2 && d1 == 2) {
            bool near_deg3 = false;
            for (int w : {w0, w1})
                for (int bond : m.incident(w))
                    near_deg3 |= m.degree(m.other_end(bond, w)) == 3;
            if (!near_deg3) {
                out.push_back({StepKind::R2_4, v, -1, w0, w1});
                return Match::Step;
            }
        }
    }

    // rule 8: type I chains, peeled one 2R-1 at a time
    for (int v = 0; v < m.atom_slots(); ++v) {
        if (!m.atom_alive(v) || m.degree(v) != 2) continue;
        const auto& inc = m.incident(v);
        int w0 = m.other_end(inc[0], v), w1 = m.other_end(inc[1], v);
        if (w0 != w1 || m.degree(w0) != 4) continue;
        bool same_dir = (m.bond(inc[0]).tail == v) == (m.bond(inc[1]).tail == v);
        if (!same_dir) {
            out.push_back({StepKind::R2_1, v, w0});
            return Match::Step;
        }
    }

    return Match::Stuck;
}

// ---- application ------------------------------------------------------------

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw PreconditionError(what);
}

}  // namespace

void Reducer::finish_record(const Molecule& m, ForestState& f, Trace& t, StepRecord& r,
                            int chi_before) {
    // the molecule definition excludes components in which every atom has four
    // bonds, and no step of the catalogue can handle one
    if (m.has_all_degree4_component())
        throw std::logic_error("reduction produced an all-degree-4 component");
    r.delta_chi_computed = m.euler_characteristic() - chi_before;
    f.add_safe_edges_max(m, r.bonds_removed, r.g_edges_added, r.g_edges_rejected);
    auto row = step_table_row(r.kind, t.dimension);
    if (row) {
        r.delta_gamma = Rat(r.delta_chi_computed) + row->increment(t.dimension);
        r.delta_kappa = row->kappa;
    } else {
        r.delta_gamma = Rat(r.delta_chi_computed);
        r.delta_kappa = Rat(0);
        r.table_unchecked = true;
    }
    t.chi_history.push_back(chi_before + r.delta_chi_computed);
    t.gamma_total += r.delta_gamma;
    t.kappa_total += r.delta_kappa;
}

const StepRecord& Reducer::apply_step(Molecule& m, ForestState& f, const StepDescriptor& d,
                                      Trace& t) {
    removal_bonds_.clear();
    removal_atoms_.clear();
    auto alive_atom = [&](int v) { return v >= 0 && v < m.atom_slots() && m.atom_alive(v); };
    auto collect_incident = [&](std::initializer_list<int> atoms) {
        for (int v : atoms) {
            removal_atoms_.push_back(v);
            for (int bond : m.incident(v)) removal_bonds_.push_back(bond);
        }
        std::sort(removal_bonds_.begin(), removal_bonds_.end());
        removal_bonds_.erase(std::unique(removal_bonds_.begin(), removal_bonds_.end()),
                             removal_bonds_.end());
    };

    int inject_from = -1, inject_to = -1;

    switch (d.kind) {
        case StepKind::DA:
            require(alive_atom(d.a), "DA: unknown atom");
            require(m.atom(d.a).degenerate, "DA: atom is not degenerate");
            require(m.degree(d.a) >= 1, "DA: atom is isolated");
            collect_incident({d.a});
            break;
        case StepKind::TB1:
        case StepKind::TB2: {
            require(alive_atom(d.a) && alive_atom(d.b), "TB: unknown atom");
            require(m.multiplicity(d.a, d.b) == 3, "TB: atoms are not joined by a triple bond");
            int da = m.degree(d.a), db = m.degree(d.b);
            if (d.kind == StepKind::TB1)
                require(da == 3 && db == 3, "TB1: degrees are not (3,3)");
            else
                require(da == 3 && db == 4, "TB2: degrees are not (3,4)");
            collect_incident({d.a, d.b});
            break;
        }
        case StepKind::BR: {
            require(alive_atom(d.a) && alive_atom(d.b), "BR: unknown atom");
            m.bonds_between(d.a, d.b, scratch_bonds_);
            require(!scratch_bonds_.empty(), "BR: no bond between the atoms");
            require(scratch_bonds_.size() <= 2, "BR: triple bond is not a bridge");
            bool disconnects = !m.connected_avoiding_bonds(d.a, d.b, scratch_bonds_);
            bool chain_end = m.degree(d.a) <= 2 || m.degree(d.b) <= 2;
            require(disconnects || chain_end, "BR: bond is not a bridge");
            removal_bonds_ = scratch_bonds_;
            break;
        }
        case StepKind::S3S3_1:
        case StepKind::S3S3_2G:
        case StepKind::S3S3_3G:
        case StepKind::S3S3_4G:
        case StepKind::S3S3_5G: {
            require(alive_atom(d.a) && alive_atom(d.b), "3S3: unknown atom");
            require(m.degree(d.a) == 3 && m.degree(d.b) == 3, "3S3: degrees are not (3,3)");
            require(m.multiplicity(d.a, d.b) == 1, "3S3: atoms are not joined by a single bond");
            if (d.kind == StepKind::S3S3_3G) {
                PairInfo p = pair_info(m, d.a, d.b);
                require(p.v3 != p.v5, "3S3-3G: injected bond would be a self-loop");
                require(m.multiplicity(p.v3, p.v5) <= 2,
                        "3S3-3G: injection would exceed a triple bond");
                inject_from = m.bond(p.l2).tail == p.v3 ? p.v3 : p.v5;
                inject_to = inject_from == p.v3 ? p.v5 : p.v3;
                require(injection_fits(m, inject_from, inject_to, std::array<int, 2>{d.a, d.b}),
                        "3S3-3G: injection would break the degree caps");
            }
            collect_incident({d.a, d.b});
            break;
        }
        case StepKind::D3D3_1:
        case StepKind::D3D3_2G:
        case StepKind::D3D3_3G:
        case StepKind::D3D3_4G:
        case StepKind::D3D3_5G: {
            require(alive_atom(d.a) && alive_atom(d.b), "3D3: unknown atom");
            require(m.degree(d.a) == 3 && m.degree(d.b) == 3, "3D3: degrees are not (3,3)");
            require(m.multiplicity(d.a, d.b) == 2, "3D3: atoms are not joined by a double bond");
            if (d.kind == StepKind::D3D3_3G) {
                PairInfo p = pair_info(m, d.a, d.b);
                int v3 = p.v3, v4 = p.v5;
                require(v3 != v4, "3D3-3G: injected bond would be a self-loop");
                require(m.multiplicity(v3, v4) <= 2, "3D3-3G: injection would exceed a triple bond");
                inject_from = m.bond(p.l2).tail == d.a ? v4 : v3;
                inject_to = inject_from == v3 ? v4 : v3;
                require(injection_fits(m, inject_from, inject_to, std::array<int, 2>{d.a, d.b}),
                        "3D3-3G: injection would break the degree caps");
            }
            collect_incident({d.a, d.b});
            break;
        }
        case StepKind::D3D3_6G: {
            require(alive_atom(d.a) && alive_atom(d.b), "3D3-6G: unknown atom");
            require(m.degree(d.a) == 3 && m.degree(d.b) == 3, "3D3-6G: degrees are not (3,3)");
            require(m.multiplicity(d.a, d.b) == 2, "3D3-6G: atoms are not joined by a double bond");
            PairInfo p = pair_info(m, d.a, d.b);
            require(match_fig30(m, d.a, d.b, p.v3, p.v5), "3D3-6G: pattern does not match");
            collect_incident({d.a, d.b, p.v3, p.v5});
            break;
        }
        case StepKind::D3D4G: {
            require(alive_atom(d.a) && alive_atom(d.b), "3D4G: unknown atom");
            require(m.degree(d.a) == 3 && m.degree(d.b) == 4, "3D4G: degrees are not (3,4)");
            require(m.multiplicity(d.a, d.b) == 2, "3D4G: atoms are not joined by a double bond");
            collect_incident({d.a, d.b});
            break;
        }
        case StepKind::S3S2G: {
            require(alive_atom(d.a) && alive_atom(d.b), "3S2G: unknown atom");
            require(m.degree(d.a) == 3 && m.degree(d.b) == 2, "3S2G: degrees are not (3,2)");
            require(m.multiplicity(d.a, d.b) == 1, "3S2G: atoms are not joined by a single bond");
            collect_incident({d.a, d.b});
            break;
        }
        case StepKind::R3_1:
        case StepKind::R3_2G: {
            require(alive_atom(d.a), "3R: unknown atom");
            require(m.degree(d.a) == 3, "3R: atom degree is not 3");
            const auto& inc = m.incident(d.a);
            int w0 = m.other_end(inc[0], d.a), w1 = m.other_end(inc[1], d.a),
                w2 = m.other_end(inc[2], d.a);
            require(w0 != w1 && w0 != w2 && w1 != w2, "3R: bonds are not three single bonds");
            require(m.degree(w0) == 4 && m.degree(w1) == 4 && m.degree(w2) == 4,
                    "3R: neighbors are not all degree 4");
            if (d.kind == StepKind::R3_2G) {
                require(alive_atom(d.aux0) && alive_atom(d.aux1), "3R-2G: unknown primed atom");
                require(d.aux0 != d.a && d.aux1 != d.a && d.aux0 != d.aux1,
                        "3R-2G: primed atoms must be distinct from the center");
                require(m.multiplicity(d.aux0, d.aux1) == 1,
                        "3R-2G: primed atoms are not joined by a single bond");
                collect_incident({d.a, d.aux0, d.aux1});
            } else {
                collect_incident({d.a});
            }
            break;
        }
        case StepKind::R2_1:
        case StepKind::R2_2G: {
            require(alive_atom(d.a), "2R: unknown atom");
            require(m.degree(d.a) == 2, "2R: atom degree is not 2");
            const auto& inc = m.incident(d.a);
            int w0 = m.other_end(inc[0], d.a), w1 = m.other_end(inc[1], d.a);
            require(w0 == w1, "2R: atom is not joined by a double bond");
            require(m.degree(w0) == 4, "2R: partner degree is not 4");
            bool same_dir = (m.bond(inc[0]).tail == d.a) == (m.bond(inc[1]).tail == d.a);
            if (d.kind == StepKind::R2_1)
                require(!same_dir, "2R-1: double bond directions are not opposite");
            else
                require(same_dir, "2R-2G: double bond directions are not equal");
            collect_incident({d.a});
            break;
        }
        case StepKind::R2_3: {
            require(alive_atom(d.a), "2R-3: unknown atom");
            require(m.degree(d.a) == 2, "2R-3: atom degree is not 2");
            const auto& inc = m.incident(d.a);
            int w0 = m.other_end(inc[0], d.a), w1 = m.other_end(inc[1], d.a);
            require(w0 != w1, "2R-3: atom is joined by a double bond");
            int d0 = m.degree(w0), d1 = m.degree(w1);
            require(d0 == 4 || d1 == 4, "2R-3: no degree-4 neighbor");
            require((d0 == 2 || d0 == 4) && (d1 == 2 || d1 == 4),
                    "2R-3: neighbor degrees are not in {2,4}");
            collect_incident({d.a});
            break;
        }
        case StepKind::R2_4: {
            require(alive_atom(d.a), "2R-4: unknown atom");
            require(m.degree(d.a) == 2, "2R-4: atom degree is not 2");
            const auto& inc = m.incident(d.a);
            int w0 = m.other_end(inc[0], d.a), w1 = m.other_end(inc[1], d.a);
            require(w0 != w1, "2R-4: atom is joined by a double bond");
            require(m.degree(w0) == 2 && m.degree(w1) == 2, "2R-4: neighbors are not degree 2");
            for (int w : {w0, w1})
                for (int bond : m.incident(w))
                    require(m.degree(m.other_end(bond, w)) != 3,
                            "2R-4: a neighbor touches a degree-3 atom");
            collect_incident({d.a, w0, w1});
            break;
        }
        case StepKind::R2_5: {
            require(alive_atom(d.a), "2R-5: unknown atom");
            int partner = d.b;
            if (partner < 0) {
                const auto& inc = m.incident(d.a);
                require(m.degree(d.a) == 2, "2R-5: atom degree is not 2");
                partner = m.other_end(inc[0], d.a);
            }
            require(alive_atom(partner), "2R-5: unknown partner atom");
            require(m.degree(d.a) == 2 && m.degree(partner) == 2, "2R-5: degrees are not (2,2)");
            require(m.multiplicity(d.a, partner) == 2, "2R-5: atoms are not joined by a double bond");
            collect_incident({d.a, partner});
            break;
        }
    }

    int chi_before = m.euler_characteristic();

    StepRecord& r = t.push();
    r.kind = d.kind;
    r.checkpoint = d.checkpoint;
    r.bonds_removed = removal_bonds_;
    r.atoms_removed = removal_atoms_;
    for (int bond : removal_bonds_) m.remove_bond(bond);
    for (int atom : removal_atoms_) m.remove_atom(atom);
    if (inject_from >= 0) {
        int id = m.add_bond(inject_from, inject_to, BondKind::INJECTED);
        r.bonds_injected.push_back(m.bond(id));
    }
    finish_record(m, f, t, r, chi_before);
    return r;
}

// ---- drivers ----------------------------------------------------------------

void Reducer::phase1(Molecule& m, ForestState& f, Trace& t) {
    while (true) {
        int target = -1;
        for (int v = 0; v < m.atom_slots() && target < 0; ++v)
            if (m.atom_alive(v) && m.atom(v).degenerate && m.degree(v) >= 1) target = v;
        if (target < 0) break;
        apply_step(m, f, {StepKind::DA, target}, t);
    }
    for (int v = 0; v < m.atom_slots(); ++v)
        if (m.atom_alive(v) && m.atom(v).degenerate && m.degree(v) != 0)
            throw std::logic_error("phase 1 left a non-isolated degenerate atom");
}

RunResult Reducer::loop(Molecule& m, ForestState& f, Trace& t, Policy policy) {
    // generous bound; every step removes at least one bond
    int guard = 2 * m.atom_count() + m.bond_count() + 16;
    while (true) {
        Match status = match_next(m, options_);
        if (status == Match::Done) return {};
        if (status == Match::Stuck)
            return {RunStatus::Stuck,
                    "no rule applies but " + std::to_string(m.bond_count()) + " bonds remain",
                    static_cast<int>(t.size())};
        std::size_t pick = 0;
        if (options_.size() > 1) {
            switch (policy) {
                case Policy::First: pick = 0; break;
                case Policy::Second: pick = options_.size() - 1; break;
                case Policy::Random: pick = rng_() % options_.size(); break;
            }
        }
        apply_step(m, f, options_[pick], t);
        if (--guard < 0)
            return {RunStatus::Stuck, "step budget exceeded", static_cast<int>(t.size())};
    }
}

RunResult Reducer::run(Molecule& m, ForestState& f, Trace& t, Policy policy, std::uint64_t seed,
                       int dimension) {
    if (dimension < 3) throw std::invalid_argument("dimension must be at least 3");
    t.reset(dimension);
    f.init(m.atom_slots());
    rng_.seed(seed);
    if (!config.allow_initial_triple_bonds) {
        for (const auto& mult : m.find_multiplicities())
            if (mult.count >= 3)
                return {RunStatus::InitialTripleBond,
                        "molecule has a triple bond between " + m.atom(mult.a).id + " and " +
                            m.atom(mult.b).id,
                        -1};
    }
    phase1(m, f, t);
    return loop(m, f, t, policy);
}

StepDescriptor Reducer::resolve_script_step(const Molecule& m, const ScriptStep& s) const {
    std::vector<int> atoms;
    for (const auto& id : s.targets) {
        int a = m.find_atom(id);
        if (a < 0) throw PreconditionError("unknown atom id '" + id + "'");
        atoms.push_back(a);
    }
    auto need = [&](std::size_t n, const char* what) {
        if (atoms.size() != n) throw PreconditionError(what);
    };
    StepDescriptor d;
    d.kind = s.kind;
    switch (s.kind) {
        case StepKind::DA:
        case StepKind::R3_1:
        case StepKind::R2_1:
        case StepKind::R2_2G:
        case StepKind::R2_3:
        case StepKind::R2_4:
            need(1, "step takes exactly one atom");
            d.a = atoms[0];
            break;
        case StepKind::R2_5:
            if (atoms.size() == 1) {
                d.a = atoms[0];
            } else {
                need(2, "2R-5 takes one or two atoms");
                d.a = atoms[0];
                d.b = atoms[1];
            }
            break;
        case StepKind::R3_2G:
            need(3, "3R-2G takes the center and the two primed atoms");
            d.a = atoms[0];
            d.aux0 = atoms[1];
            d.aux1 = atoms[2];
            break;
        case StepKind::TB2:
            need(2, "step takes two atoms");
            d.a = m.degree(atoms[0]) == 3 ? atoms[0] : atoms[1];
            d.b = d.a == atoms[0] ? atoms[1] : atoms[0];
            break;
        case StepKind::D3D4G:
            need(2, "step takes two atoms");
            d.a = m.degree(atoms[0]) == 3 ? atoms[0] : atoms[1];
            d.b = d.a == atoms[0] ? atoms[1] : atoms[0];
            break;
        case StepKind::S3S2G:
            need(2, "step takes two atoms");
            d.a = m.degree(atoms[0]) == 3 ? atoms[0] : atoms[1];
            d.b = d.a == atoms[0] ? atoms[1] : atoms[0];
            break;
        default:
            need(2, "step takes two atoms");
            d.a = atoms[0];
            d.b = atoms[1];
            break;
    }
    return d;
}

RunResult Reducer::run_scripted(Molecule& m, ForestState& f, Trace& t, const Script& script,
                                int dimension, bool continue_after) {
    if (dimension < 3) throw std::invalid_argument("dimension must be at least 3");
    t.reset(dimension);
    f.init(m.atom_slots());
    rng_.seed(0);
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        try {
            StepDescriptor d = resolve_script_step(m, script.steps[i]);
            apply_step(m, f, d, t);
        } catch (const PreconditionError& e) {
            return {RunStatus::ScriptPrecondition,
                    "script step " + std::to_string(i) + " (" +
                        step_kind_name(script.steps[i].kind) + "): " + e.what(),
                    static_cast<int>(i)};
        }
    }
    if (!continue_after) return {};
    phase1(m, f, t);
    return loop(m, f, t, Policy::First);
}

Reducer::ExhaustiveResult Reducer::run_exhaustive(const Molecule& m0, int dimension,
                                                  int path_cap) {
    if (path_cap < 1) throw std::invalid_argument("path cap must be at least 1");
    ExhaustiveResult result;

    Molecule m = m0;
    ForestState f;
    f.init(m.atom_slots());
    Trace t;
    t.reset(dimension);

    if (!config.allow_initial_triple_bonds) {
        for (const auto& mult : m.find_multiplicities())
            if (mult.count >= 3) {
                result.paths.push_back(
                    {{RunStatus::InitialTripleBond, "molecule has a triple bond", -1},
                     std::move(t), std::move(f)});
                return result;
            }
    }

    auto explore = [&](auto&& self, Molecule mol, ForestState forest, Trace trace) -> void {
        if (result.cap_exceeded) return;
        while (true) {
            std::vector<StepDescriptor> options;
            Match status = match_next(mol, options);
            if (status != Match::Step) {
                RunResult r;
                if (status == Match::Stuck)
                    r = {RunStatus::Stuck, "no rule applies", static_cast<int>(trace.size())};
                if (static_cast<int>(result.paths.size()) >= path_cap) {
                    result.cap_exceeded = true;
                    return;
                }
                result.paths.push_back({r, std::move(trace), std::move(forest)});
                return;
            }
            if (options.size() == 1) {
                apply_step(mol, forest, options[0], trace);
                continue;
            }
            for (const auto& option : options) {
                if (result.cap_exceeded) return;
                Molecule mc = mol;
                ForestState fc = forest;
                Trace tc = trace;
                apply_step(mc, fc, option, tc);
                self(self, std::move(mc), std::move(fc), std::move(tc));
            }
            return;
        }
    };

    phase1(m, f, t);
    explore(explore, std::move(m), std::move(f), std::move(t));
    return result;
}

RunResult run_reduction(Molecule& m, ForestState& f, Trace& t, const ReductionConfig& cfg,
                        Policy policy, std::uint64_t seed, int dimension) {
    Reducer reducer;
    reducer.config = cfg;
    return reducer.run(m, f, t, policy, seed, dimension);
}

RunResult run_scripted(Molecule& m, ForestState& f, Trace& t, const Script& script,
                       const ReductionConfig& cfg, int dimension, bool continue_after) {
    Reducer reducer;
    reducer.config = cfg;
    return reducer.run_scripted(m, f, t, script, dimension, continue_after);
}

// ---- ledger -----------------------------------------------------------------

LedgerReport ledger_check(const Trace& trace, int d) {
    LedgerReport report;
    Rat gamma_sum(0), kappa_sum(0);
    Rat threshold = good_step_threshold(d);
    for (const StepRecord& r : trace.steps()) {
        gamma_sum += r.delta_gamma;
        kappa_sum += r.delta_kappa;
        auto row = step_table_row(r.kind, d);
        if (!row) {
            if (!r.table_unchecked)
                report.violations.push_back({r.index, "step kind outside the table must be flagged"});
            if (r.delta_gamma != Rat(r.delta_chi_computed) || r.delta_kappa != Rat(0))
                report.violations.push_back(
                    {r.index, "unchecked step must carry delta_gamma = delta_chi, delta_kappa = 0"});
        } else {
            if (r.table_unchecked)
                report.violations.push_back({r.index, "table-listed step flagged unchecked"});
            if (std::find(row->chi_set.begin(), row->chi_set.end(), r.delta_chi_computed) ==
                row->chi_set.end())
                report.violations.push_back(
                    {r.index, std::string("delta_chi ") + std::to_string(r.delta_chi_computed) +
                                  " outside the table set for " + step_kind_name(r.kind)});
            if (r.delta_gamma != Rat(r.delta_chi_computed) + row->increment(d))
                report.violations.push_back(
                    {r.index, std::string("delta_gamma does not match the table for ") +
                                  step_kind_name(r.kind)});
            if (r.delta_kappa != row->kappa)
                report.violations.push_back(
                    {r.index, std::string("delta_kappa does not match the table for ") +
                                  step_kind_name(r.kind)});
        }
        bool normal = r.delta_gamma == Rat(r.delta_chi_computed);
        bool good = r.delta_gamma >= Rat(r.delta_chi_computed) + threshold;
        if (!normal && !good)
            report.violations.push_back({r.index, "step is neither normal nor good"});
    }
    if (gamma_sum != trace.gamma_total)
        report.violations.push_back({-1, "gamma_total does not match the step sum"});
    if (kappa_sum != trace.kappa_total)
        report.violations.push_back({-1, "kappa_total does not match the step sum"});
    return report;
}

std::pair<Rat, Rat> bound_exponents(const Trace& trace) {
    Rat gamma(0), kappa(0);
    for (const StepRecord& r : trace.steps()) {
        gamma += r.delta_gamma;
        kappa += r.delta_kappa;
    }
    return {gamma, kappa};
}

}  // namespace molred
