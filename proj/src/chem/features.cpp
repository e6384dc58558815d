#include "moldiff/chem/features.hpp"

namespace moldiff::chem {

namespace {

// aromatic variants in element order: C N O P S
constexpr Element kAromaticElements[5] = {Element::C, Element::N, Element::O, Element::P,
                                          Element::S};

}  // namespace

int node_class_of(const Atom& a) {
    if (!a.aromatic) return static_cast<int>(a.element);
    for (int k = 0; k < 5; ++k)
        if (kAromaticElements[k] == a.element) return kElementCount + k;
    fail(ErrorCategory::data, std::string("aromatic ") + element_symbol(a.element));
}

Atom atom_from_node_class(int cls) {
    if (cls < 0 || cls >= kNodeClassCount)
        fail(ErrorCategory::data, "node class " + std::to_string(cls) + " out of range");
    if (cls < kElementCount) return Atom{static_cast<Element>(cls), false};
    return Atom{kAromaticElements[cls - kElementCount], true};
}

Eigen::MatrixXd GraphFeatures::type_adjacency(BondType t) const {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = A(i * n + j, static_cast<int>(t));
    return m;
}

GraphFeatures to_feature_tensors(const MolGraph& g) {
    g.validate();
    int n = g.atom_count();
    GraphFeatures f;
    f.n = n;
    f.X = Eigen::MatrixXd::Zero(n, kNodeClassCount);
    f.A = Eigen::MatrixXd::Zero(n * n, kBondTypeCount);
    for (int i = 0; i < n; ++i) f.X(i, node_class_of(g.atom(i))) = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            BondType t = (i == j) ? BondType::none : g.bond(i, j);
            f.A(i * n + j, static_cast<int>(t)) = 1.0;
        }
    return f;
}

MolGraph from_feature_tensors(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A,
                              const std::vector<bool>& node_mask) {
    if (X.cols() != kNodeClassCount)
        fail(ErrorCategory::shape,
             "node matrix must have " + std::to_string(kNodeClassCount) + " columns, got " +
                 std::to_string(X.cols()));
    Eigen::Index n = X.rows();
    if (static_cast<Eigen::Index>(node_mask.size()) != n)
        fail(ErrorCategory::shape, "node mask length mismatch");
    if (A.rows() != n * n || A.cols() != kBondTypeCount)
        fail(ErrorCategory::shape, "edge tensor must be (n*n) x " +
                                       std::to_string(kBondTypeCount) + ", got " +
                                       std::to_string(A.rows()) + "x" + std::to_string(A.cols()));

    std::vector<int> kept;
    for (Eigen::Index i = 0; i < n; ++i)
        if (node_mask[static_cast<std::size_t>(i)]) kept.push_back(static_cast<int>(i));
    if (kept.empty()) fail(ErrorCategory::data, "empty node mask");
    if (static_cast<int>(kept.size()) > MolGraph::kMaxAtoms)
        fail(ErrorCategory::data, "too many unmasked nodes");

    MolGraph g(static_cast<int>(kept.size()));
    for (std::size_t a = 0; a < kept.size(); ++a) {
        Eigen::Index cls;
        X.row(kept[a]).maxCoeff(&cls);
        g.atom(static_cast<int>(a)) = atom_from_node_class(static_cast<int>(cls));
    }
    for (std::size_t a = 0; a < kept.size(); ++a) {
        for (std::size_t b = a + 1; b < kept.size(); ++b) {
            Eigen::Index i = kept[a], j = kept[b];
            Eigen::VectorXd fiber = A.row(i * n + j).cwiseMax(A.row(j * n + i));
            Eigen::Index cls;
            fiber.maxCoeff(&cls);
            BondType t = static_cast<BondType>(cls);
            if (t == BondType::aromatic && !(g.atom(static_cast<int>(a)).aromatic &&
                                             g.atom(static_cast<int>(b)).aromatic))
                t = BondType::single;
            if (t != BondType::none) g.set_bond(static_cast<int>(a), static_cast<int>(b), t);
        }
    }
    g.validate();
    return g;
}

}  // namespace moldiff::chem
