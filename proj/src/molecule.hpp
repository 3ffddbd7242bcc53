#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "couple.hpp"

namespace molred {

enum class BondKind : std::uint8_t { PC, LP, INJECTED };

const char* bond_kind_name(BondKind k);

struct Bond {
    int id = -1;
    int tail = -1;  // atom index
    int head = -1;
    BondKind kind = BondKind::PC;
    bool alive = false;
};

struct Atom {
    std::string id;
    bool degenerate = false;
    bool alive = false;
};

// Directed multigraph of atoms and bonds. Atoms are addressed by index, bonds
// by id; both are dense and never reused after removal. Every atom has at
// most 2 incoming and 2 outgoing bonds.
class Molecule {
public:
    int dimension = 3;

    void clear();

    int add_atom(std::string id, bool degenerate = false);
    // Throws if the bond is a self-loop or would break the in/out caps.
    int add_bond(int tail, int head, BondKind kind);

    void remove_bond(int bond_id);
    // The atom must have no live bonds left.
    void remove_atom(int atom);

    int atom_count() const { return live_atoms_; }
    int bond_count() const { return live_bonds_; }
    int atom_slots() const { return static_cast<int>(atoms_.size()); }
    int bond_slots() const { return static_cast<int>(bonds_.size()); }

    const Atom& atom(int i) const { return atoms_[i]; }
    const Bond& bond(int id) const { return bonds_[id]; }
    bool atom_alive(int i) const { return atoms_[i].alive; }
    bool bond_alive(int id) const { return bonds_[id].alive; }
    void set_degenerate(int atom, bool flag) { atoms_[atom].degenerate = flag; }

    // Live bond ids incident to the atom, ascending.
    const std::vector<int>& incident(int atom) const { return adj_[atom]; }
    int other_end(int bond_id, int atom) const {
        const Bond& b = bonds_[bond_id];
        return b.tail == atom ? b.head : b.tail;
    }

    int degree(int atom) const { return static_cast<int>(adj_[atom].size()); }
    int in_degree(int atom) const;
    int out_degree(int atom) const;

    // Number of live bonds between the two atoms.
    int multiplicity(int a, int b) const;
    void bonds_between(int a, int b, std::vector<int>& out) const;

    int find_atom(const std::string& id) const;  // -1 if absent

    // Undirected connected components over live atoms; isolated atoms count.
    int component_count() const;
    std::vector<std::vector<int>> components() const;
    // True when some component consists solely of atoms with four bonds.
    bool has_all_degree4_component() const;
    bool connected(int a, int b) const;
    // Connectivity of a with b pretending the listed atoms are absent.
    bool connected_excluding(int a, int b, std::span<const int> excluded) const;
    // Connectivity of a with b ignoring the listed bonds (must be sorted).
    bool connected_avoiding_bonds(int a, int b, std::span<const int> skipped) const;
    // Component count pretending the listed atoms are absent.
    int component_count_excluding(std::span<const int> excluded) const;

    // chi = |bonds| - |atoms| + #components, the number of independent cycles.
    int euler_characteristic() const { return live_bonds_ - live_atoms_ + component_count(); }

    std::vector<int> find_bridges() const;
    void find_bridges(std::vector<int>& out) const;

    struct Multiplicity {
        int a, b;        // a < b
        int count;       // 1..3
        int forward;     // bonds directed a->b
        int backward;    // bonds directed b->a
    };
    std::vector<Multiplicity> find_multiplicities() const;

    struct BaseReport {
        bool is_base = false;
        bool connected = false;
        int bond_count = 0;
        int degree2 = 0, degree3 = 0, degree4 = 0, degree_other = 0;
    };
    BaseReport is_base_molecule() const;

    struct Chain {
        int type;                // 1 or 2
        std::vector<int> atoms;  // type I: path order; type II: t0,b0,t1,b1,...
    };
    std::vector<Chain> detect_chains() const;

    // Structural validation: unique ids, caps, no self-loops, multiplicity <= 3,
    // no component in which every atom has four bonds.
    ValidationReport validate() const;

private:
    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::vector<std::vector<int>> adj_;
    int live_atoms_ = 0;
    int live_bonds_ = 0;

    // DFS scratch, epoch-stamped; queries are const but not concurrent.
    mutable std::vector<int> mark_;
    mutable std::vector<int> stack_;
    mutable std::vector<int> disc_;
    mutable std::vector<int> low_;
    mutable int epoch_ = 0;
    int next_mark_epoch() const;
};

// One atom per internal node of the couple, a PC bond per parent-child
// incidence between internal nodes, an LP bond per leaf pair, directions
// determined by the signs. Atom ids are the node path strings ("+", "-/1/0").
// Throws on couples whose pairing forces a self-loop.
Molecule molecule_from_couple(const Couple& couple);

}  // namespace molred
