#include "moldiff/chem/mol_graph.hpp"

#include <algorithm>

namespace moldiff::chem {

const char* element_symbol(Element e) {
    switch (e) {
        case Element::C: return "C";
        case Element::N: return "N";
        case Element::O: return "O";
        case Element::F: return "F";
        case Element::P: return "P";
        case Element::S: return "S";
        case Element::Cl: return "Cl";
        case Element::Br: return "Br";
        case Element::I: return "I";
    }
    return "?";
}

int max_valence(Element e) {
    switch (e) {
        case Element::C: return 4;
        case Element::N: return 3;
        case Element::O: return 2;
        case Element::F: return 1;
        case Element::P: return 5;
        case Element::S: return 6;
        case Element::Cl: return 1;
        case Element::Br: return 1;
        case Element::I: return 1;
    }
    return 0;
}

double atomic_mass(Element e) {
    switch (e) {
        case Element::C: return 12.011;
        case Element::N: return 14.007;
        case Element::O: return 15.999;
        case Element::F: return 18.998403163;
        case Element::P: return 30.973761998;
        case Element::S: return 32.06;
        case Element::Cl: return 35.45;
        case Element::Br: return 79.904;
        case Element::I: return 126.90447;
    }
    return 0.0;
}

bool aromatic_allowed(Element e) {
    switch (e) {
        case Element::C:
        case Element::N:
        case Element::O:
        case Element::P:
        case Element::S:
            return true;
        default:
            return false;
    }
}

int bond_order(BondType b) {
    switch (b) {
        case BondType::none: return 0;
        case BondType::single: return 1;
        case BondType::double_bond: return 2;
        case BondType::triple: return 3;
        case BondType::aromatic: return 0;  // resolved via Kekule assignment
    }
    return 0;
}

MolGraph::MolGraph(int n) {
    if (n < 1 || n > kMaxAtoms)
        fail(ErrorCategory::data, "molecule must have 1.." + std::to_string(kMaxAtoms) +
                                      " atoms, got " + std::to_string(n));
    atoms_.resize(static_cast<std::size_t>(n));
    bonds_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), BondType::none);
}

void MolGraph::set_bond(int i, int j, BondType t) {
    if (i == j) fail(ErrorCategory::data, "self bond on atom " + std::to_string(i));
    bonds_[idx(i, j)] = t;
    bonds_[idx(j, i)] = t;
}

int MolGraph::degree(int i) const {
    int d = 0;
    for (int j = 0; j < atom_count(); ++j)
        if (bond(i, j) != BondType::none) ++d;
    return d;
}

std::vector<int> MolGraph::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < atom_count(); ++j)
        if (bond(i, j) != BondType::none) out.push_back(j);
    return out;
}

int MolGraph::bond_count() const {
    int c = 0;
    for (int i = 0; i < atom_count(); ++i)
        for (int j = i + 1; j < atom_count(); ++j)
            if (bond(i, j) != BondType::none) ++c;
    return c;
}

void MolGraph::validate() const {
    int n = atom_count();
    if (n < 1 || n > kMaxAtoms)
        fail(ErrorCategory::data, "atom count " + std::to_string(n) + " out of 1.." +
                                      std::to_string(kMaxAtoms));
    for (int i = 0; i < n; ++i) {
        if (atom(i).aromatic && !aromatic_allowed(atom(i).element))
            fail(ErrorCategory::data, std::string("aromatic flag on ") +
                                          element_symbol(atom(i).element) + " at atom " +
                                          std::to_string(i));
        if (bond(i, i) != BondType::none)
            fail(ErrorCategory::data, "self bond on atom " + std::to_string(i));
        for (int j = i + 1; j < n; ++j) {
            if (bond(i, j) == BondType::aromatic &&
                !(atom(i).aromatic && atom(j).aromatic))
                fail(ErrorCategory::data, "aromatic bond between non-aromatic atoms " +
                                              std::to_string(i) + "-" + std::to_string(j));
        }
    }
}

std::vector<std::vector<int>> MolGraph::components() const {
    int n = atom_count();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        std::vector<int> stack{s}, members;
        comp[static_cast<std::size_t>(s)] = static_cast<int>(out.size());
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (int u : neighbors(v)) {
                if (comp[static_cast<std::size_t>(u)] < 0) {
                    comp[static_cast<std::size_t>(u)] = static_cast<int>(out.size());
                    stack.push_back(u);
                }
            }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

MolGraph MolGraph::induced(const std::vector<int>& atoms) const {
    MolGraph g(static_cast<int>(atoms.size()));
    for (std::size_t a = 0; a < atoms.size(); ++a) g.atom(static_cast<int>(a)) = atom(atoms[a]);
    for (std::size_t a = 0; a < atoms.size(); ++a)
        for (std::size_t b = a + 1; b < atoms.size(); ++b)
            g.set_bond(static_cast<int>(a), static_cast<int>(b), bond(atoms[a], atoms[b]));
    return g;
}

MolGraph MolGraph::permuted(const std::vector<int>& perm) const {
    int n = atom_count();
    MolGraph g(n);
    for (int i = 0; i < n; ++i) g.atom(perm[static_cast<std::size_t>(i)]) = atom(i);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (bond(i, j) != BondType::none)
                g.set_bond(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)],
                           bond(i, j));
    return g;
}

}  // namespace moldiff::chem
