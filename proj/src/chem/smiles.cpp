#include "moldiff/chem/smiles.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace moldiff::chem {

// ---------------------------------------------------------------- parse

namespace {

[[noreturn]] void syntax_error(const std::string& msg) {
    throw SmilesError(SmilesErrorKind::syntax, msg);
}

struct AtomToken {
    Element element;
    bool aromatic;
};

std::optional<AtomToken> organic_atom(const std::string& s, std::size_t& i) {
    // two-letter symbols first
    if (s.compare(i, 2, "Cl") == 0) {
        i += 2;
        return AtomToken{Element::Cl, false};
    }
    if (s.compare(i, 2, "Br") == 0) {
        i += 2;
        return AtomToken{Element::Br, false};
    }
    switch (s[i]) {
        case 'C': ++i; return AtomToken{Element::C, false};
        case 'N': ++i; return AtomToken{Element::N, false};
        case 'O': ++i; return AtomToken{Element::O, false};
        case 'F': ++i; return AtomToken{Element::F, false};
        case 'P': ++i; return AtomToken{Element::P, false};
        case 'S': ++i; return AtomToken{Element::S, false};
        case 'I': ++i; return AtomToken{Element::I, false};
        case 'c': ++i; return AtomToken{Element::C, true};
        case 'n': ++i; return AtomToken{Element::N, true};
        case 'o': ++i; return AtomToken{Element::O, true};
        case 'p': ++i; return AtomToken{Element::P, true};
        case 's': ++i; return AtomToken{Element::S, true};
        default: return std::nullopt;
    }
}

}  // namespace

ParseResult parse_smiles(const std::string& text) {
    if (text.empty()) throw SmilesError(SmilesErrorKind::empty, "empty SMILES");

    struct PendingAtom {
        AtomToken tok;
    };
    std::vector<AtomToken> atoms;
    struct BondRec {
        int a, b;
        BondType t;
    };
    std::vector<BondRec> bonds;
    struct RingOpen {
        int atom;
        BondType bond;  // none = unspecified
    };

    std::map<int, RingOpen> open_rings;
    std::vector<int> branch_stack;
    int prev = -1;
    BondType pending = BondType::none;  // none = no explicit bond symbol
    bool have_pending = false;
    ParseResult result;

    auto add_bond = [&](int a, int b, BondType explicit_bond, bool has_explicit) {
        for (const BondRec& r : bonds)
            if ((r.a == a && r.b == b) || (r.a == b && r.b == a))
                syntax_error("duplicate bond between atoms " + std::to_string(a) + " and " +
                             std::to_string(b));
        BondType t;
        if (has_explicit)
            t = explicit_bond;
        else
            t = (atoms[static_cast<std::size_t>(a)].aromatic &&
                 atoms[static_cast<std::size_t>(b)].aromatic)
                    ? BondType::aromatic
                    : BondType::single;
        if (t == BondType::aromatic && !(atoms[static_cast<std::size_t>(a)].aromatic &&
                                         atoms[static_cast<std::size_t>(b)].aromatic))
            syntax_error("aromatic bond between non-aromatic atoms");
        bonds.push_back({a, b, t});
    };

    auto new_atom = [&](AtomToken tok) {
        if (static_cast<int>(atoms.size()) >= MolGraph::kMaxAtoms)
            throw SmilesError(SmilesErrorKind::atom_count,
                              "atom count exceeds " + std::to_string(MolGraph::kMaxAtoms));
        if (tok.aromatic && !aromatic_allowed(tok.element))
            throw SmilesError(SmilesErrorKind::element,
                              std::string("aromatic ") + element_symbol(tok.element) +
                                  " not supported");
        atoms.push_back(tok);
        int id = static_cast<int>(atoms.size()) - 1;
        if (prev >= 0) add_bond(prev, id, pending, have_pending);
        else if (have_pending)
            syntax_error("bond symbol before first atom of a chain");
        prev = id;
        pending = BondType::none;
        have_pending = false;
    };

    auto ring_closure = [&](int number) {
        if (prev < 0) syntax_error("ring closure digit before any atom");
        auto it = open_rings.find(number);
        if (it == open_rings.end()) {
            open_rings[number] = RingOpen{prev, have_pending ? pending : BondType::none};
            if (have_pending && pending == BondType::none)
                syntax_error("invalid ring bond");
        } else {
            RingOpen open = it->second;
            open_rings.erase(it);
            if (open.atom == prev) syntax_error("ring bond to the same atom");
            BondType t;
            bool has_explicit = false;
            if (open.bond != BondType::none && have_pending) {
                if (open.bond != pending) syntax_error("conflicting ring bond symbols");
                t = pending;
                has_explicit = true;
            } else if (open.bond != BondType::none) {
                t = open.bond;
                has_explicit = true;
            } else if (have_pending) {
                t = pending;
                has_explicit = true;
            } else {
                t = BondType::none;
            }
            add_bond(open.atom, prev, t, has_explicit);
        }
        pending = BondType::none;
        have_pending = false;
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char ch = text[i];
        if (auto tok = organic_atom(text, i)) {
            new_atom(*tok);
            continue;
        }
        switch (ch) {
            case '-': pending = BondType::single; have_pending = true; ++i; break;
            case '=': pending = BondType::double_bond; have_pending = true; ++i; break;
            case '#': pending = BondType::triple; have_pending = true; ++i; break;
            case ':': pending = BondType::aromatic; have_pending = true; ++i; break;
            case '/':
            case '\\':
                result.stereo_skipped = true;
                pending = BondType::single;
                have_pending = true;
                ++i;
                break;
            case '(':
                if (prev < 0) syntax_error("branch before any atom");
                if (have_pending) syntax_error("bond symbol before '('");
                branch_stack.push_back(prev);
                ++i;
                break;
            case ')':
                if (branch_stack.empty()) syntax_error("unmatched closing parenthesis");
                prev = branch_stack.back();
                branch_stack.pop_back();
                ++i;
                break;
            case '%': {
                if (i + 2 >= n || !isdigit(static_cast<unsigned char>(text[i + 1])) ||
                    !isdigit(static_cast<unsigned char>(text[i + 2])))
                    syntax_error("'%' must be followed by two digits");
                ring_closure((text[i + 1] - '0') * 10 + (text[i + 2] - '0'));
                i += 3;
                break;
            }
            case '[': {
                ++i;
                if (i >= n) syntax_error("unterminated bracket atom");
                if (isdigit(static_cast<unsigned char>(text[i])))
                    throw SmilesError(SmilesErrorKind::unsupported,
                                      "isotope labels not supported");
                auto tok = organic_atom(text, i);
                if (!tok) {
                    // something element-shaped but outside the vocabulary
                    std::size_t j = i;
                    while (j < n && isalpha(static_cast<unsigned char>(text[j]))) ++j;
                    throw SmilesError(SmilesErrorKind::element,
                                      "unknown atom symbol '" + text.substr(i, j - i) + "'");
                }
                while (i < n && text[i] == '@') {
                    result.stereo_skipped = true;
                    ++i;
                }
                if (i < n && text[i] == 'H') {
                    result.hcount_skipped = true;
                    ++i;
                    while (i < n && isdigit(static_cast<unsigned char>(text[i]))) ++i;
                }
                if (i < n && (text[i] == '+' || text[i] == '-'))
                    throw SmilesError(SmilesErrorKind::unsupported, "charges not supported");
                if (i >= n || text[i] != ']') syntax_error("expected ']'");
                ++i;
                new_atom(*tok);
                break;
            }
            default:
                if (isdigit(static_cast<unsigned char>(ch))) {
                    ring_closure(ch - '0');
                    ++i;
                    break;
                }
                if (isalpha(static_cast<unsigned char>(ch)))
                    throw SmilesError(SmilesErrorKind::element,
                                      std::string("unknown atom symbol '") + ch + "'");
                syntax_error(std::string("unexpected character '") + ch + "'");
        }
    }
    if (!branch_stack.empty()) syntax_error("unmatched opening parenthesis");
    if (!open_rings.empty())
        syntax_error("unclosed ring bond " + std::to_string(open_rings.begin()->first));
    if (atoms.empty()) throw SmilesError(SmilesErrorKind::empty, "no atoms");

    MolGraph g(static_cast<int>(atoms.size()));
    for (std::size_t k = 0; k < atoms.size(); ++k)
        g.atom(static_cast<int>(k)) = Atom{atoms[k].element, atoms[k].aromatic};
    for (const BondRec& r : bonds) g.set_bond(r.a, r.b, r.t);
    g.validate();
    result.graph = std::move(g);
    return result;
}

// ----------------------------------------------------- canonical ranks

namespace {

int bond_code(BondType t) { return static_cast<int>(t); }

std::vector<int> densify(std::vector<std::pair<std::vector<int>, int>>& keyed) {
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> ranks(keyed.size());
    int rank = -1;
    const std::vector<int>* prev = nullptr;
    for (const auto& [key, atom] : keyed) {
        if (!prev || key != *prev) ++rank;
        ranks[static_cast<std::size_t>(atom)] = rank;
        prev = &key;
    }
    return ranks;
}

int distinct_count(const std::vector<int>& ranks) {
    return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

std::vector<int> refine(const MolGraph& g, std::vector<int> ranks) {
    int n = g.atom_count();
    for (;;) {
        std::vector<std::pair<std::vector<int>, int>> keyed;
        keyed.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            std::vector<int> key{ranks[static_cast<std::size_t>(i)]};
            std::vector<std::pair<int, int>> nb;
            for (int j : g.neighbors(i))
                nb.emplace_back(bond_code(g.bond(i, j)), ranks[static_cast<std::size_t>(j)]);
            std::sort(nb.begin(), nb.end());
            for (auto [b, r] : nb) {
                key.push_back(b);
                key.push_back(r);
            }
            keyed.emplace_back(std::move(key), i);
        }
        std::vector<int> next = densify(keyed);
        if (distinct_count(next) == distinct_count(ranks)) return next;
        ranks = std::move(next);
    }
}

std::vector<int> initial_ranks(const MolGraph& g) {
    int n = g.atom_count();
    std::vector<std::pair<std::vector<int>, int>> keyed;
    for (int i = 0; i < n; ++i) {
        std::vector<int> key{static_cast<int>(g.atom(i).element), g.atom(i).aromatic ? 1 : 0,
                             g.degree(i)};
        std::vector<int> bc;
        for (int j : g.neighbors(i)) bc.push_back(bond_code(g.bond(i, j)));
        std::sort(bc.begin(), bc.end());
        key.insert(key.end(), bc.begin(), bc.end());
        keyed.emplace_back(std::move(key), i);
    }
    return densify(keyed);
}

std::vector<int> signature_for(const MolGraph& g, const std::vector<int>& ranks) {
    int n = g.atom_count();
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(ranks[static_cast<std::size_t>(i)])] = i;
    std::vector<int> sig{n};
    for (int r = 0; r < n; ++r) {
        const Atom& a = g.atom(pos[static_cast<std::size_t>(r)]);
        sig.push_back(static_cast<int>(a.element));
        sig.push_back(a.aromatic ? 1 : 0);
    }
    std::vector<std::array<int, 3>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (g.bond(i, j) != BondType::none) {
                int ri = ranks[static_cast<std::size_t>(i)], rj = ranks[static_cast<std::size_t>(j)];
                edges.push_back({std::min(ri, rj), std::max(ri, rj), bond_code(g.bond(i, j))});
            }
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) {
        sig.push_back(e[0]);
        sig.push_back(e[1]);
        sig.push_back(e[2]);
    }
    return sig;
}

struct CanonBest {
    std::vector<int> ranks;
    std::vector<int> signature;
    bool set = false;
};

// Individualization-refinement: where refinement leaves ties, branch on
// every member of the first tied class and keep the labeling with the
// smallest signature. Molecular graphs are tiny, so the automorphic
// branching this explores stays negligible.
void canon_branch(const MolGraph& g, std::vector<int> ranks, CanonBest& best) {
    ranks = refine(g, std::move(ranks));
    int n = g.atom_count();
    if (distinct_count(ranks) == n) {
        std::vector<int> sig = signature_for(g, ranks);
        if (!best.set || sig < best.signature) {
            best.ranks = std::move(ranks);
            best.signature = std::move(sig);
            best.set = true;
        }
        return;
    }
    int cell_rank = -1;
    for (int r = 0; r < n && cell_rank < 0; ++r) {
        int count = 0;
        for (int i = 0; i < n; ++i)
            if (ranks[static_cast<std::size_t>(i)] == r) ++count;
        if (count > 1) cell_rank = r;
    }
    for (int m = 0; m < n; ++m) {
        if (ranks[static_cast<std::size_t>(m)] != cell_rank) continue;
        std::vector<std::pair<std::vector<int>, int>> keyed;
        for (int i = 0; i < n; ++i) {
            int r = ranks[static_cast<std::size_t>(i)];
            keyed.emplace_back(std::vector<int>{r * 2 + ((r == cell_rank && i != m) ? 1 : 0)}, i);
        }
        canon_branch(g, densify(keyed), best);
    }
}

std::vector<int> canonical_ranks(const MolGraph& g) {
    CanonBest best;
    canon_branch(g, initial_ranks(g), best);
    return best.ranks;
}

// ------------------------------------------------------------- writer

struct RingEntry {
    int number;
    int other;
    BondType bond;
    bool opening;
};

struct Traversal {
    std::vector<int> visit_order;          // atom -> emission position
    std::vector<std::vector<int>> children;  // tree children in rank order
    std::vector<std::vector<RingEntry>> rings;
    int root = -1;
};

Traversal traverse(const MolGraph& g, const std::vector<int>& ranks) {
    int n = g.atom_count();
    Traversal t;
    t.visit_order.assign(static_cast<std::size_t>(n), -1);
    t.children.resize(static_cast<std::size_t>(n));
    t.rings.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        if (ranks[static_cast<std::size_t>(i)] == 0) t.root = i;

    struct BackEdge {
        int from, to;  // to was visited earlier
    };
    std::vector<BackEdge> back_edges;
    std::vector<std::vector<bool>> edge_done(static_cast<std::size_t>(n),
                                             std::vector<bool>(static_cast<std::size_t>(n), false));
    int counter = 0;

    // iterative DFS to keep deep chains safe
    struct Frame {
        int atom, parent;
        std::vector<int> nbrs;
        std::size_t next = 0;
    };
    auto sorted_neighbors = [&](int u) {
        std::vector<int> nb = g.neighbors(u);
        std::sort(nb.begin(), nb.end(), [&](int a, int b) {
            return ranks[static_cast<std::size_t>(a)] < ranks[static_cast<std::size_t>(b)];
        });
        return nb;
    };
    std::vector<Frame> stack;
    t.visit_order[static_cast<std::size_t>(t.root)] = counter++;
    stack.push_back({t.root, -1, sorted_neighbors(t.root), 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next >= f.nbrs.size()) {
            stack.pop_back();
            continue;
        }
        int v = f.nbrs[f.next++];
        if (t.visit_order[static_cast<std::size_t>(v)] < 0) {
            edge_done[static_cast<std::size_t>(f.atom)][static_cast<std::size_t>(v)] = true;
            edge_done[static_cast<std::size_t>(v)][static_cast<std::size_t>(f.atom)] = true;
            t.children[static_cast<std::size_t>(f.atom)].push_back(v);
            t.visit_order[static_cast<std::size_t>(v)] = counter++;
            stack.push_back({v, f.atom, sorted_neighbors(v), 0});
        } else if (v != f.parent &&
                   !edge_done[static_cast<std::size_t>(f.atom)][static_cast<std::size_t>(v)]) {
            edge_done[static_cast<std::size_t>(f.atom)][static_cast<std::size_t>(v)] = true;
            edge_done[static_cast<std::size_t>(v)][static_cast<std::size_t>(f.atom)] = true;
            back_edges.push_back({f.atom, v});
        }
    }

    std::sort(back_edges.begin(), back_edges.end(), [&](const BackEdge& a, const BackEdge& b) {
        int ao = t.visit_order[static_cast<std::size_t>(a.to)];
        int bo = t.visit_order[static_cast<std::size_t>(b.to)];
        if (ao != bo) return ao < bo;
        return t.visit_order[static_cast<std::size_t>(a.from)] <
               t.visit_order[static_cast<std::size_t>(b.from)];
    });
    int number = 1;
    for (const BackEdge& e : back_edges) {
        BondType b = g.bond(e.from, e.to);
        t.rings[static_cast<std::size_t>(e.to)].push_back({number, e.from, b, true});
        t.rings[static_cast<std::size_t>(e.from)].push_back({number, e.to, b, false});
        ++number;
    }
    return t;
}

std::string atom_symbol(const Atom& a) {
    std::string s = element_symbol(a.element);
    if (a.aromatic)
        for (char& c : s) c = static_cast<char>(tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string bond_symbol(const MolGraph& g, int a, int b) {
    BondType t = g.bond(a, b);
    BondType def = (g.atom(a).aromatic && g.atom(b).aromatic) ? BondType::aromatic
                                                              : BondType::single;
    if (t == def) return "";
    switch (t) {
        case BondType::single: return "-";
        case BondType::double_bond: return "=";
        case BondType::triple: return "#";
        case BondType::aromatic: return ":";
        case BondType::none: break;
    }
    return "";
}

std::string ring_token(int number) {
    if (number <= 9) return std::string(1, static_cast<char>('0' + number));
    return "%" + std::string(1, static_cast<char>('0' + number / 10)) +
           std::string(1, static_cast<char>('0' + number % 10));
}

std::string emit(const MolGraph& g, const Traversal& t) {
    std::string out;
    struct Frame {
        int atom;
        std::size_t child = 0;
        bool opened_paren = false;
    };
    std::vector<Frame> stack;

    auto write_atom = [&](int u) {
        out += atom_symbol(g.atom(u));
        for (const RingEntry& r : t.rings[static_cast<std::size_t>(u)]) {
            if (r.opening) out += bond_symbol(g, u, r.other);
            out += ring_token(r.number);
        }
    };

    write_atom(t.root);
    stack.push_back({t.root});
    while (!stack.empty()) {
        Frame& f = stack.back();
        const std::vector<int>& kids = t.children[static_cast<std::size_t>(f.atom)];
        if (f.child >= kids.size()) {
            if (f.opened_paren) out += ')';
            stack.pop_back();
            continue;
        }
        int v = kids[f.child];
        bool last = (f.child + 1 == kids.size());
        ++f.child;
        if (!last) out += '(';
        out += bond_symbol(g, f.atom, v);
        write_atom(v);
        stack.push_back({v, 0, !last});
    }
    return out;
}

}  // namespace

CanonicalSmiles write_canonical_smiles_ex(const MolGraph& g) {
    g.validate();
    std::vector<std::vector<int>> comps = g.components();
    CanonicalSmiles result;
    result.dropped_components = static_cast<int>(comps.size()) - 1;

    std::size_t largest = 0;
    for (const auto& c : comps) largest = std::max(largest, c.size());

    std::string best;
    bool have = false;
    for (const auto& c : comps) {
        if (c.size() != largest) continue;
        MolGraph sub = g.induced(c);
        std::vector<int> ranks = canonical_ranks(sub);
        std::string s = emit(sub, traverse(sub, ranks));
        if (!have || s < best) {
            best = std::move(s);
            have = true;
        }
    }
    result.smiles = std::move(best);
    return result;
}

std::string write_canonical_smiles(const MolGraph& g) {
    return write_canonical_smiles_ex(g).smiles;
}

std::vector<int> canonical_order(const MolGraph& g) {
    if (g.components().size() != 1)
        fail(ErrorCategory::data, "canonical_order requires a connected graph");
    Traversal t = traverse(g, canonical_ranks(g));
    return t.visit_order;
}

MolGraph canonicalized(const MolGraph& g) { return g.permuted(canonical_order(g)); }

std::vector<int> canonical_signature(const MolGraph& g) {
    std::vector<std::vector<int>> sigs;
    for (const auto& c : g.components()) {
        MolGraph sub = g.induced(c);
        CanonBest best;
        canon_branch(sub, initial_ranks(sub), best);
        sigs.push_back(std::move(best.signature));
    }
    std::sort(sigs.begin(), sigs.end());
    std::vector<int> out{static_cast<int>(sigs.size())};
    for (const auto& s : sigs) {
        out.push_back(static_cast<int>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

bool isomorphic(const MolGraph& a, const MolGraph& b) {
    return canonical_signature(a) == canonical_signature(b);
}

}  // namespace moldiff::chem
