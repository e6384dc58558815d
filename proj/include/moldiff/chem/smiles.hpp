#pragma once

#include <string>
#include <vector>

#include "moldiff/chem/mol_graph.hpp"

namespace moldiff::chem {

// Distinguishes ingestion drop reasons; all map to ErrorCategory::data.
enum class SmilesErrorKind { syntax, element, atom_count, unsupported, empty };

class SmilesError : public Error {
  public:
    SmilesError(SmilesErrorKind kind, const std::string& msg)
        : Error(ErrorCategory::data, msg), kind_(kind) {}
    SmilesErrorKind kind() const { return kind_; }

  private:
    SmilesErrorKind kind_;
};

struct ParseResult {
    MolGraph graph;
    bool stereo_skipped = false;  // /, \, @ markers were dropped
    bool hcount_skipped = false;  // bracket H counts were dropped
};

// Accepted grammar subset: organic-subset atoms C N O F P S I Cl Br,
// aromatic c n o p s, bracket atoms limited to one vocabulary element
// plus an optional ignored H count, bond symbols - = # :, branches,
// ring closures 1-9 and %nn. Stereo markers / \ @ are skipped with a
// flag. Charges and isotopes are rejected. Implicit hydrogens are never
// materialized.
ParseResult parse_smiles(const std::string& text);

struct CanonicalSmiles {
    std::string smiles;
    int dropped_components = 0;  // nonzero when the input was disconnected
};

// Unique string per isomorphism class: neighborhood-refinement ranks
// (with individualization where refinement alone leaves ties), then a
// lowest-rank-first depth-first traversal. Disconnected inputs serialize
// the largest component and flag the rest.
CanonicalSmiles write_canonical_smiles_ex(const MolGraph& g);
std::string write_canonical_smiles(const MolGraph& g);

// Canonical atom ranks of a connected graph: rank[i] = position of atom
// i in the canonical traversal emission order.
std::vector<int> canonical_order(const MolGraph& g);

// Atoms reordered into canonical traversal order (connected graphs).
MolGraph canonicalized(const MolGraph& g);

// Relabeling-invariant signature of the whole graph (component
// signatures, sorted); equal signatures <=> isomorphic graphs.
std::vector<int> canonical_signature(const MolGraph& g);
bool isomorphic(const MolGraph& a, const MolGraph& b);

}  // namespace moldiff::chem
