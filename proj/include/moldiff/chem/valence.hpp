#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "moldiff/chem/mol_graph.hpp"

namespace moldiff::chem {

// Kekule assignment: a perfect matching over the aromatic-bond subgraph
// (every atom incident to an aromatic bond is matched exactly once; the
// matched bonds become double, unmatched aromatic bonds single). Returns
// the matched pairs or nullopt when no assignment exists.
std::optional<std::vector<std::pair<int, int>>> kekulize(const MolGraph& g);

// Sum of resolved bond orders at atom i, counting an atom with k > 0
// aromatic bonds as k + 1 (exactly one of them is double in any Kekule
// assignment, so the sum is assignment-independent).
int resolved_order_sum(const MolGraph& g, int i);

// True iff a Kekule assignment exists and every atom's resolved bond
// order sum is within its element's max valence (implicit hydrogens fill
// the remainder).
bool check_valence(const MolGraph& g);

// Deterministic repair: aromatic components without a Kekule assignment
// collapse to single bonds, then bond orders are downgraded
// (triple -> double -> single) and finally bonds deleted, always working
// on the atom with the largest valence excess (ties by atom index).
// Never adds atoms or bonds; valid inputs are returned unchanged.
MolGraph valence_repair(const MolGraph& g);

}  // namespace moldiff::chem
