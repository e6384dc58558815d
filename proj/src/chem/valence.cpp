#include "moldiff/chem/valence.hpp"

#include <algorithm>

namespace moldiff::chem {

namespace {

// Backtracking perfect matching. Vertices are local indices; adj lists
// only contain aromatic-bond neighbors. Small inputs (<= 30 atoms), with
// min-degree-first selection the search is effectively instant on
// molecular graphs.
bool match_rec(const std::vector<std::vector<int>>& adj, std::vector<int>& mate, int unmatched) {
    if (unmatched == 0) return true;
    // pick the unmatched vertex with the fewest unmatched neighbors
    int best = -1, best_count = -1;
    for (int v = 0; v < static_cast<int>(adj.size()); ++v) {
        if (mate[static_cast<std::size_t>(v)] >= 0) continue;
        int c = 0;
        for (int u : adj[static_cast<std::size_t>(v)])
            if (mate[static_cast<std::size_t>(u)] < 0) ++c;
        if (c == 0) return false;
        if (best < 0 || c < best_count) {
            best = v;
            best_count = c;
        }
    }
    for (int u : adj[static_cast<std::size_t>(best)]) {
        if (mate[static_cast<std::size_t>(u)] >= 0) continue;
        mate[static_cast<std::size_t>(best)] = u;
        mate[static_cast<std::size_t>(u)] = best;
        if (match_rec(adj, mate, unmatched - 2)) return true;
        mate[static_cast<std::size_t>(best)] = -1;
        mate[static_cast<std::size_t>(u)] = -1;
    }
    return false;
}

}  // namespace

std::optional<std::vector<std::pair<int, int>>> kekulize(const MolGraph& g) {
    int n = g.atom_count();
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    std::vector<int> vertices;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j != i && g.bond(i, j) == BondType::aromatic) {
                local[static_cast<std::size_t>(i)] = static_cast<int>(vertices.size());
                vertices.push_back(i);
                break;
            }
        }
    }
    if (vertices.empty()) return std::vector<std::pair<int, int>>{};
    if (vertices.size() % 2 != 0) return std::nullopt;

    std::vector<std::vector<int>> adj(vertices.size());
    for (std::size_t a = 0; a < vertices.size(); ++a)
        for (std::size_t b = a + 1; b < vertices.size(); ++b)
            if (g.bond(vertices[a], vertices[b]) == BondType::aromatic) {
                adj[a].push_back(static_cast<int>(b));
                adj[b].push_back(static_cast<int>(a));
            }

    std::vector<int> mate(vertices.size(), -1);
    if (!match_rec(adj, mate, static_cast<int>(vertices.size()))) return std::nullopt;

    std::vector<std::pair<int, int>> pairs;
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        int u = mate[v];
        if (u >= 0 && static_cast<std::size_t>(u) > v)
            pairs.emplace_back(vertices[v], vertices[static_cast<std::size_t>(u)]);
    }
    return pairs;
}

int resolved_order_sum(const MolGraph& g, int i) {
    int sum = 0, arom = 0;
    for (int j = 0; j < g.atom_count(); ++j) {
        if (j == i) continue;
        BondType b = g.bond(i, j);
        if (b == BondType::aromatic)
            ++arom;
        else
            sum += bond_order(b);
    }
    if (arom > 0) sum += arom + 1;
    return sum;
}

bool check_valence(const MolGraph& g) {
    if (!kekulize(g).has_value()) return false;
    for (int i = 0; i < g.atom_count(); ++i)
        if (resolved_order_sum(g, i) > max_valence(g.atom(i).element)) return false;
    return true;
}

namespace {

// Components of the aromatic-bond subgraph, as atom index lists.
std::vector<std::vector<int>> aromatic_components(const MolGraph& g) {
    int n = g.atom_count();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        bool has_arom = false;
        for (int j = 0; j < n; ++j)
            if (j != s && g.bond(s, j) == BondType::aromatic) has_arom = true;
        if (!has_arom) continue;
        std::vector<int> stack{s}, members;
        comp[static_cast<std::size_t>(s)] = static_cast<int>(out.size());
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (int u = 0; u < n; ++u) {
                if (u != v && g.bond(v, u) == BondType::aromatic &&
                    comp[static_cast<std::size_t>(u)] < 0) {
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

// Collapse aromatic components that cannot kekulize to single bonds.
// Returns true if anything changed.
bool resolve_unkekulizable(MolGraph& g) {
    bool changed = false;
    for (const std::vector<int>& comp : aromatic_components(g)) {
        MolGraph sub = g.induced(comp);
        if (kekulize(sub).has_value()) continue;
        for (std::size_t a = 0; a < comp.size(); ++a)
            for (std::size_t b = a + 1; b < comp.size(); ++b)
                if (g.bond(comp[a], comp[b]) == BondType::aromatic) {
                    g.set_bond(comp[a], comp[b], BondType::single);
                    changed = true;
                }
    }
    return changed;
}

int excess(const MolGraph& g, int i) {
    return resolved_order_sum(g, i) - max_valence(g.atom(i).element);
}

}  // namespace

MolGraph valence_repair(const MolGraph& g) {
    MolGraph h = g;
    for (;;) {
        resolve_unkekulizable(h);

        int worst = -1, worst_excess = 0;
        for (int i = 0; i < h.atom_count(); ++i) {
            int e = excess(h, i);
            if (e > worst_excess) {
                worst_excess = e;
                worst = i;
            }
        }
        if (worst < 0) return h;

        // downgrade highest-order non-aromatic bond first (smallest
        // neighbor index among candidates)
        int target = -1;
        for (BondType want : {BondType::triple, BondType::double_bond}) {
            for (int j = 0; j < h.atom_count() && target < 0; ++j)
                if (j != worst && h.bond(worst, j) == want) target = j;
            if (target >= 0) {
                h.set_bond(worst, target,
                           want == BondType::triple ? BondType::double_bond : BondType::single);
                break;
            }
        }
        if (target >= 0) continue;

        // deletion: remove the single bond toward the neighbor with the
        // largest excess (ties by atom index)
        int victim = -1, victim_excess = 0;
        for (int j = 0; j < h.atom_count(); ++j) {
            if (j == worst || h.bond(worst, j) != BondType::single) continue;
            int e = excess(h, j);
            if (victim < 0 || e > victim_excess) {
                victim = j;
                victim_excess = e;
            }
        }
        if (victim >= 0) {
            h.set_bond(worst, victim, BondType::none);
            continue;
        }

        // only aromatic bonds left on an overloaded atom: collapse them
        for (int j = 0; j < h.atom_count(); ++j)
            if (j != worst && h.bond(worst, j) == BondType::aromatic)
                h.set_bond(worst, j, BondType::single);
    }
}

}  // namespace moldiff::chem
