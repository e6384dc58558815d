#pragma once

#include <Eigen/Dense>

#include "moldiff/chem/mol_graph.hpp"

namespace moldiff::chem {

// Node classes: 9 plain elements followed by the 5 aromatic variants
// (C, N, O, P, S). Edge classes follow BondType order with the explicit
// no-edge class at index 0.
inline constexpr int kNodeClassCount = kElementCount + 5;  // 14

int node_class_of(const Atom& a);
Atom atom_from_node_class(int cls);

struct GraphFeatures {
    Eigen::MatrixXd X;  // n x kNodeClassCount, one-hot rows
    Eigen::MatrixXd A;  // (n*n) x kBondTypeCount, one-hot fibers, row-major pairs
    int n = 0;

    // n x n 0/1 adjacency of one bond type
    Eigen::MatrixXd type_adjacency(BondType t) const;
};

GraphFeatures to_feature_tensors(const MolGraph& g);

// Inverse realization: argmax over node classes / symmetrized edge
// fibers (elementwise max of the (i,j) and (j,i) fibers). Rows where
// node_mask is false are dropped. Aromatic bonds whose endpoints did not
// both come out aromatic are downgraded to single so the result always
// satisfies the MolGraph invariants.
MolGraph from_feature_tensors(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A,
                              const std::vector<bool>& node_mask);

}  // namespace moldiff::chem
