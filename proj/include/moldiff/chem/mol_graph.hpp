#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moldiff/error.hpp"

namespace moldiff::chem {

// Fixed heavy-atom vocabulary. Hydrogens are implicit everywhere.
enum class Element : std::uint8_t { C, N, O, F, P, S, Cl, Br, I };
inline constexpr int kElementCount = 9;

enum class BondType : std::uint8_t { none, single, double_bond, triple, aromatic };
inline constexpr int kBondTypeCount = 5;  // including the explicit no-edge class

const char* element_symbol(Element e);
int max_valence(Element e);
double atomic_mass(Element e);
// Aromatic flags are restricted to the aromatizable subset {C,N,O,P,S}.
bool aromatic_allowed(Element e);
// integer bond order of a resolved (non-aromatic) bond
int bond_order(BondType b);

struct Atom {
    Element element = Element::C;
    bool aromatic = false;

    bool operator==(const Atom&) const = default;
};

// Undirected molecular graph with typed bonds, at most kMaxAtoms atoms.
// The bond matrix is kept symmetric by construction.
class MolGraph {
  public:
    static constexpr int kMaxAtoms = 30;

    MolGraph() = default;
    explicit MolGraph(int n);

    int atom_count() const { return static_cast<int>(atoms_.size()); }
    const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
    Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }

    BondType bond(int i, int j) const { return bonds_[idx(i, j)]; }
    void set_bond(int i, int j, BondType t);

    int degree(int i) const;
    std::vector<int> neighbors(int i) const;  // ascending
    int bond_count() const;

    // Throws Error(data) on any structural invariant violation: asymmetry
    // is impossible by construction, checked are: atom count bounds,
    // aromatic flags on non-aromatizable elements, aromatic bonds with a
    // non-aromatic endpoint, self bonds.
    void validate() const;

    std::vector<std::vector<int>> components() const;
    MolGraph induced(const std::vector<int>& atoms) const;
    // perm[old] = new position; result has atoms relabeled accordingly
    MolGraph permuted(const std::vector<int>& perm) const;

    bool operator==(const MolGraph&) const = default;

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * atoms_.size() + static_cast<std::size_t>(j);
    }
    std::vector<Atom> atoms_;
    std::vector<BondType> bonds_;
};

}  // namespace moldiff::chem
