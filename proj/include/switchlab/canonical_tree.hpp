#pragma once

#include <optional>

#include "switchlab/dist_block.hpp"
#include "switchlab/dist_php.hpp"
#include "switchlab/formula.hpp"

namespace switchlab {

// Full-tree materialization guard; lemma checks use the pruned search below
// and never build whole trees.
inline constexpr int kMaxTreeDepth = 20;

struct Query {
    enum class Kind : unsigned char { Var, Block, Pigeon, Hole };
    Kind kind = Kind::Var;
    int index = -1;         // variable, block, pigeon, or hole id
    VarId queried_var = -1; // block queries only: the surviving star that is asked

    friend bool operator==(const Query& a, const Query& b) {
        return a.kind == b.kind && a.index == b.index && a.queried_var == b.queried_var;
    }
};

struct DecisionTree {
    static constexpr int kErrorLeaf = 2;

    struct Node {
        int label = -1;  // 0, 1, kErrorLeaf at leaves; -1 at query nodes
        Query query{};
        std::vector<std::pair<int, int>> children;  // (answer, node index)
    };

    std::vector<Node> nodes;
    int root = -1;

    bool leaf_only() const { return nodes[root].label >= 0; }

    int depth() const {
        int best = 0;
        walk_depth(root, 0, best);
        return best;
    }

    // fn(path, label) with path listing (query, answer) pairs root-to-leaf.
    template <typename Fn>
    void for_each_branch(Fn&& fn) const {
        std::vector<std::pair<Query, int>> path;
        walk(root, path, fn);
    }

private:
    void walk_depth(int node, int d, int& best) const {
        const Node& nd = nodes[node];
        if (nd.label >= 0) {
            best = std::max(best, d);
            return;
        }
        for (auto [ans, child] : nd.children) walk_depth(child, d + 1, best);
    }

    template <typename Fn>
    void walk(int node, std::vector<std::pair<Query, int>>& path, Fn&& fn) const {
        const Node& nd = nodes[node];
        if (nd.label >= 0) {
            fn(path, nd.label);
            return;
        }
        for (auto [ans, child] : nd.children) {
            path.emplace_back(nd.query, ans);
            walk(child, path, fn);
            path.pop_back();
        }
    }
};

// ---------------------------------------------------------------------------
// Scanning for the first live term
// ---------------------------------------------------------------------------

enum class ScanKind { AllFalsified, SatisfiedFirst, Live };

struct Scan {
    ScanKind kind = ScanKind::AllFalsified;
    int term = -1;
    Term residual;               // unset literals of the live term, in order
    std::vector<int> locations;  // their positions in the term as written
};

inline Scan scan_restriction(const Dnf& f, const Restriction& rho) {
    for (int i = 0; i < static_cast<int>(f.terms.size()); ++i) {
        const Term& t = f.terms[i];
        Scan sc;
        sc.term = i;
        bool falsified = false;
        for (int j = 0; j < t.size() && !falsified; ++j) {
            Value v = rho[t.literals[j].var];
            if (v == Value::Star) {
                sc.residual.literals.push_back(t.literals[j]);
                sc.locations.push_back(j);
            } else if ((v == Value::One) != t.literals[j].positive) {
                falsified = true;
            }
        }
        if (falsified) continue;
        sc.kind = sc.residual.literals.empty() ? ScanKind::SatisfiedFirst : ScanKind::Live;
        return sc;
    }
    return {};
}

// Same scan over the partial-injection view; fprime must be positive-only.
inline Scan scan_php(const Dnf& fprime, const PhpInstance& inst, const PartialInjection& rho) {
    for (int i = 0; i < static_cast<int>(fprime.terms.size()); ++i) {
        const Term& t = fprime.terms[i];
        Scan sc;
        sc.term = i;
        bool falsified = false;
        for (int j = 0; j < t.size() && !falsified; ++j) {
            Value v = php_literal_value(rho, inst, t.literals[j].var);
            if (!t.literals[j].positive)
                throw std::invalid_argument("scan_php: formula must be preprocessed (positive literals)");
            if (v == Value::Star) {
                sc.residual.literals.push_back(t.literals[j]);
                sc.locations.push_back(j);
            } else if (v == Value::Zero) {
                falsified = true;
            }
        }
        if (falsified) continue;
        sc.kind = sc.residual.literals.empty() ? ScanKind::SatisfiedFirst : ScanKind::Live;
        return sc;
    }
    return {};
}

// ---------------------------------------------------------------------------
// Traces: the per-branch record (C_i, beta_i, pi_i) consumed by the codecs,
// trimmed so the total query count is exactly s.
// ---------------------------------------------------------------------------

struct TraceRoundIndep {
    int term = -1;
    std::vector<VarId> beta;
    std::vector<bool> replies;
};

struct TraceIndep {
    std::vector<TraceRoundIndep> rounds;

    int query_count() const {
        int c = 0;
        for (const auto& r : rounds) c += static_cast<int>(r.beta.size());
        return c;
    }
};

struct TraceRoundBlock {
    int term = -1;
    std::vector<int> beta;           // block indices, in order of appearance
    std::vector<VarId> queried;      // the surviving star asked per block
    std::vector<bool> replies;
};

struct TraceBlock {
    std::vector<TraceRoundBlock> rounds;

    int query_count() const {
        int c = 0;
        for (const auto& r : rounds) c += static_cast<int>(r.beta.size());
        return c;
    }
};

struct PhpLiteralRecord {
    int loc = -1;
    int pigeon = -1;
    int hole = -1;
    std::optional<int> pigeon_reply;  // hole assigned to the pigeon, if queried
    std::optional<int> hole_reply;    // pigeon assigned to the hole, if queried
};

struct TraceRoundPhp {
    int term = -1;
    std::vector<PhpLiteralRecord> literals;
};

struct TracePhp {
    std::vector<TraceRoundPhp> rounds;

    int query_count() const {
        int c = 0;
        for (const auto& r : rounds)
            for (const auto& l : r.literals)
                c += static_cast<int>(l.pigeon_reply.has_value()) +
                     static_cast<int>(l.hole_reply.has_value());
        return c;
    }
};

// ---------------------------------------------------------------------------
// Lemma 1 trees: query the starred variables of the first live term.
// ---------------------------------------------------------------------------

namespace detail {

struct TreeBuilderIndep {
    const Dnf& f;
    DecisionTree& tree;

    int build(Restriction& rho, int depth) {
        Scan sc = scan_restriction(f, rho);
        if (sc.kind == ScanKind::AllFalsified) return leaf(0);
        if (sc.kind == ScanKind::SatisfiedFirst) return leaf(1);
        return round(rho, depth, sc, 0);
    }

    int round(Restriction& rho, int depth, const Scan& sc, std::size_t j) {
        if (j == sc.residual.literals.size()) {
            TermStatus st = restrict_term(f.terms[sc.term], rho);
            if (st.state == TermState::Satisfied) return leaf(1);
            return build(rho, depth);
        }
        if (depth >= kMaxTreeDepth) throw std::length_error("decision tree exceeds depth guard");
        VarId v = sc.residual.literals[j].var;
        int me = node({Query::Kind::Var, v, -1});
        for (int ans = 0; ans <= 1; ++ans) {
            rho[v] = ans ? Value::One : Value::Zero;
            int child = round(rho, depth + 1, sc, j + 1);
            tree.nodes[me].children.emplace_back(ans, child);
            rho[v] = Value::Star;
        }
        return me;
    }

    int leaf(int label) {
        tree.nodes.push_back({label, {}, {}});
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    int node(Query q) {
        tree.nodes.push_back({-1, q, {}});
        return static_cast<int>(tree.nodes.size()) - 1;
    }
};

struct LongBranchIndep {
    const Dnf& f;
    int s;
    TraceIndep trace;

    bool search(Restriction& rho, int count) {
        Scan sc = scan_restriction(f, rho);
        if (sc.kind != ScanKind::Live) return false;
        trace.rounds.push_back({sc.term, {}, {}});
        if (round(rho, count, sc, 0)) return true;
        trace.rounds.pop_back();
        return false;
    }

    // trace.rounds.back() is re-fetched after every recursive call; recursion
    // pushes and pops rounds and may reallocate the vector.
    bool round(Restriction& rho, int count, const Scan& sc, std::size_t j) {
        if (j == sc.residual.literals.size()) {
            TermStatus st = restrict_term(f.terms[sc.term], rho);
            if (st.state == TermState::Satisfied) return false;
            return search(rho, count);
        }
        VarId v = sc.residual.literals[j].var;
        trace.rounds.back().beta.push_back(v);
        if (count + 1 == s) {
            trace.rounds.back().replies.push_back(false);  // the first branch answers 0 here
            return true;
        }
        for (int ans = 0; ans <= 1; ++ans) {
            rho[v] = ans ? Value::One : Value::Zero;
            trace.rounds.back().replies.push_back(ans == 1);
            if (round(rho, count + 1, sc, j + 1)) return true;
            trace.rounds.back().replies.pop_back();
            rho[v] = Value::Star;
        }
        trace.rounds.back().beta.pop_back();
        return false;
    }
};

}  // namespace detail

inline DecisionTree build_tree_indep(const Dnf& f, const Restriction& rho) {
    if (rho.n() != f.n) throw std::invalid_argument("build_tree_indep: universe mismatch");
    DecisionTree tree;
    Restriction work = rho;
    detail::TreeBuilderIndep builder{f, tree};
    tree.root = builder.build(work, 0);
    return tree;
}

// Trace of the first root-to-leaf path with s or more queries (depth-first,
// answer 0 before 1), trimmed to exactly s queries; nullopt if the tree is
// shallower than s.
inline std::optional<TraceIndep> first_long_branch_indep(const Dnf& f, const Restriction& rho,
                                                         int s) {
    if (s < 1) throw std::invalid_argument("first_long_branch_indep: s must be >= 1");
    if (rho.n() != f.n) throw std::invalid_argument("first_long_branch_indep: universe mismatch");
    detail::LongBranchIndep search{f, s, {}};
    Restriction work = rho;
    if (!search.search(work, 0)) return std::nullopt;
    return std::move(search.trace);
}

inline bool depth_at_least_indep(const Dnf& f, const Restriction& rho, int s) {
    return first_long_branch_indep(f, rho, s).has_value();
}

// ---------------------------------------------------------------------------
// Lemma 2 trees: per live term, query one surviving star per touched block;
// answering a query fixes the whole block.
// ---------------------------------------------------------------------------

namespace detail {

// Blocks with a starred variable in the residual, ordered by first appearance.
inline std::vector<int> blocks_of_residual(const Scan& sc, const BlockStructure& bs) {
    std::vector<int> out;
    for (const Literal& l : sc.residual.literals) {
        int b = bs.block_of[l.var];
        bool seen = false;
        for (int have : out) seen |= (have == b);
        if (!seen) out.push_back(b);
    }
    return out;
}

inline VarId surviving_star(const Restriction& rho, const BlockStructure& bs, int b) {
    for (VarId v : bs.blocks[b])
        if (rho[v] == Value::Star) return v;
    throw std::logic_error("block has no starred variable");
}

// Sets a whole block: stars become 1 except the queried variable, which takes
// the answer. Returns an undo list.
inline std::vector<VarId> assign_block(Restriction& rho, const BlockStructure& bs, int b,
                                       VarId queried, bool answer) {
    std::vector<VarId> undo;
    for (VarId v : bs.blocks[b]) {
        if (rho[v] != Value::Star) continue;
        rho[v] = (v == queried && !answer) ? Value::Zero : Value::One;
        undo.push_back(v);
    }
    return undo;
}

struct TreeBuilderBlock {
    const Dnf& f;
    const BlockStructure& bs;
    DecisionTree& tree;

    int build(Restriction& rho, int depth) {
        Scan sc = scan_restriction(f, rho);
        if (sc.kind == ScanKind::AllFalsified) return leaf(0);
        if (sc.kind == ScanKind::SatisfiedFirst) return leaf(1);
        return round(rho, depth, sc, blocks_of_residual(sc, bs), 0);
    }

    int round(Restriction& rho, int depth, const Scan& sc, const std::vector<int>& beta,
              std::size_t j) {
        if (j == beta.size()) {
            TermStatus st = restrict_term(f.terms[sc.term], rho);
            if (st.state == TermState::Satisfied) return leaf(1);
            return build(rho, depth);
        }
        if (depth >= kMaxTreeDepth) throw std::length_error("decision tree exceeds depth guard");
        int b = beta[j];
        VarId queried = surviving_star(rho, bs, b);
        int me = node({Query::Kind::Block, b, queried});
        for (int ans = 0; ans <= 1; ++ans) {
            auto undo = assign_block(rho, bs, b, queried, ans == 1);
            int child = round(rho, depth + 1, sc, beta, j + 1);
            tree.nodes[me].children.emplace_back(ans, child);
            for (VarId v : undo) rho[v] = Value::Star;
        }
        return me;
    }

    int leaf(int label) {
        tree.nodes.push_back({label, {}, {}});
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    int node(Query q) {
        tree.nodes.push_back({-1, q, {}});
        return static_cast<int>(tree.nodes.size()) - 1;
    }
};

struct LongBranchBlock {
    const Dnf& f;
    const BlockStructure& bs;
    int s;
    TraceBlock trace;

    bool search(Restriction& rho, int count) {
        Scan sc = scan_restriction(f, rho);
        if (sc.kind != ScanKind::Live) return false;
        trace.rounds.push_back({sc.term, {}, {}, {}});
        if (round(rho, count, sc, blocks_of_residual(sc, bs), 0)) return true;
        trace.rounds.pop_back();
        return false;
    }

    bool round(Restriction& rho, int count, const Scan& sc, const std::vector<int>& beta,
               std::size_t j) {
        if (j == beta.size()) {
            TermStatus st = restrict_term(f.terms[sc.term], rho);
            if (st.state == TermState::Satisfied) return false;
            return search(rho, count);
        }
        int b = beta[j];
        VarId queried = surviving_star(rho, bs, b);
        trace.rounds.back().beta.push_back(b);
        trace.rounds.back().queried.push_back(queried);
        if (count + 1 == s) {
            trace.rounds.back().replies.push_back(false);
            return true;
        }
        for (int ans = 0; ans <= 1; ++ans) {
            auto undo = assign_block(rho, bs, b, queried, ans == 1);
            trace.rounds.back().replies.push_back(ans == 1);
            if (round(rho, count + 1, sc, beta, j + 1)) return true;
            trace.rounds.back().replies.pop_back();
            for (VarId v : undo) rho[v] = Value::Star;
        }
        trace.rounds.back().beta.pop_back();
        trace.rounds.back().queried.pop_back();
        return false;
    }
};

}  // namespace detail

inline DecisionTree build_tree_block(const Dnf& f, const BlockOutcome& rho,
                                     const BlockStructure& bs) {
    if (rho.values.n() != f.n || bs.n != f.n)
        throw std::invalid_argument("build_tree_block: universe mismatch");
    for (int b = 0; b < bs.block_count(); ++b) detail::check_block_consistency(rho, bs, b);
    DecisionTree tree;
    Restriction work = rho.values;
    detail::TreeBuilderBlock builder{f, bs, tree};
    tree.root = builder.build(work, 0);
    return tree;
}

inline std::optional<TraceBlock> first_long_branch_block(const Dnf& f, const BlockOutcome& rho,
                                                         const BlockStructure& bs, int s) {
    if (s < 1) throw std::invalid_argument("first_long_branch_block: s must be >= 1");
    if (rho.values.n() != f.n || bs.n != f.n)
        throw std::invalid_argument("first_long_branch_block: universe mismatch");
    detail::LongBranchBlock search{f, bs, s, {}};
    Restriction work = rho.values;
    if (!search.search(work, 0)) return std::nullopt;
    return std::move(search.trace);
}

inline bool depth_at_least_block(const Dnf& f, const BlockOutcome& rho, const BlockStructure& bs,
                                 int s) {
    return first_long_branch_block(f, rho, bs, s).has_value();
}

// ---------------------------------------------------------------------------
// Lemma 3 trees: per literal p_xy of the first live term, ask which hole
// pigeon x takes and which pigeon takes hole y. A query whose answer is
// already forced by the branch's injection is skipped and not counted.
// Queries with no legal reply end the branch in an error leaf.
// ---------------------------------------------------------------------------

namespace detail {

inline bool php_term_satisfied(const Term& t, const PhpInstance& inst,
                               const PartialInjection& rho) {
    for (const Literal& l : t.literals)
        if (php_literal_value(rho, inst, l.var) != Value::One) return false;
    return true;
}

struct TreeBuilderPhp {
    const Dnf& fprime;
    const PhpInstance& inst;
    DecisionTree& tree;

    int build(PartialInjection& inj, int depth) {
        Scan sc = scan_php(fprime, inst, inj);
        if (sc.kind == ScanKind::AllFalsified) return leaf(0);
        if (sc.kind == ScanKind::SatisfiedFirst) return leaf(1);
        return literal(inj, depth, sc, 0, false);
    }

    int literal(PartialInjection& inj, int depth, const Scan& sc, std::size_t j, bool hole_phase) {
        if (j == sc.residual.literals.size()) {
            if (php_term_satisfied(fprime.terms[sc.term], inst, inj)) return leaf(1);
            return build(inj, depth);
        }
        int x = inst.pigeon_of(sc.residual.literals[j].var);
        int y = inst.hole_of(sc.residual.literals[j].var);
        if (!hole_phase) {
            if (inj.pigeon_set(x)) return literal(inj, depth, sc, j, true);
            if (depth >= kMaxTreeDepth) throw std::length_error("decision tree exceeds depth guard");
            int me = node({Query::Kind::Pigeon, x, -1});
            bool any = false;
            for (int h = 0; h < inj.holes(); ++h) {
                if (inj.hole_set(h)) continue;
                any = true;
                inj.assign(x, h);
                int child = literal(inj, depth + 1, sc, j, true);
                tree.nodes[me].children.emplace_back(h, child);
                inj.unassign(x);
            }
            if (!any) {
                tree.nodes.pop_back();
                return leaf(DecisionTree::kErrorLeaf);
            }
            return me;
        }
        if (inj.hole_set(y)) return literal(inj, depth, sc, j + 1, false);
        if (depth >= kMaxTreeDepth) throw std::length_error("decision tree exceeds depth guard");
        int me = node({Query::Kind::Hole, y, -1});
        bool any = false;
        for (int p = 0; p < inj.pigeons(); ++p) {
            if (inj.pigeon_set(p)) continue;
            any = true;
            inj.assign(p, y);
            int child = literal(inj, depth + 1, sc, j + 1, false);
            tree.nodes[me].children.emplace_back(p, child);
            inj.unassign(p);
        }
        if (!any) {
            tree.nodes.pop_back();
            return leaf(DecisionTree::kErrorLeaf);
        }
        return me;
    }

    int leaf(int label) {
        tree.nodes.push_back({label, {}, {}});
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    int node(Query q) {
        tree.nodes.push_back({-1, q, {}});
        return static_cast<int>(tree.nodes.size()) - 1;
    }
};

struct LongBranchPhp {
    const Dnf& fprime;
    const PhpInstance& inst;
    int s;
    TracePhp trace;

    bool search(PartialInjection& inj, int count) {
        Scan sc = scan_php(fprime, inst, inj);
        if (sc.kind != ScanKind::Live) return false;
        trace.rounds.push_back({sc.term, {}});
        if (literal(inj, count, sc, 0, false)) return true;
        trace.rounds.pop_back();
        return false;
    }

    // trace.rounds.back() is re-fetched after every recursive call; recursion
    // pushes and pops rounds and may reallocate the vector.
    bool literal(PartialInjection& inj, int count, const Scan& sc, std::size_t j,
                 bool hole_phase) {
        if (j == sc.residual.literals.size()) {
            if (php_term_satisfied(fprime.terms[sc.term], inst, inj)) return false;
            return search(inj, count);
        }
        int x = inst.pigeon_of(sc.residual.literals[j].var);
        int y = inst.hole_of(sc.residual.literals[j].var);
        if (!hole_phase) {
            trace.rounds.back().literals.push_back(
                {sc.locations[j], x, y, std::nullopt, std::nullopt});
            if (!inj.pigeon_set(x)) {
                int first = -1;
                for (int h = 0; h < inj.holes(); ++h)
                    if (!inj.hole_set(h)) {
                        first = h;
                        break;
                    }
                if (first == -1) {  // error leaf
                    trace.rounds.back().literals.pop_back();
                    return false;
                }
                if (count + 1 == s) {
                    trace.rounds.back().literals.back().pigeon_reply = first;
                    return true;
                }
                for (int h = 0; h < inj.holes(); ++h) {
                    if (inj.hole_set(h)) continue;
                    inj.assign(x, h);
                    trace.rounds.back().literals.back().pigeon_reply = h;
                    if (literal(inj, count + 1, sc, j, true)) return true;
                    trace.rounds.back().literals.back().pigeon_reply.reset();
                    inj.unassign(x);
                }
                trace.rounds.back().literals.pop_back();
                return false;
            }
            if (literal(inj, count, sc, j, true)) return true;
            trace.rounds.back().literals.pop_back();
            return false;
        }
        if (!inj.hole_set(y)) {
            int first = -1;
            for (int p = 0; p < inj.pigeons(); ++p)
                if (!inj.pigeon_set(p)) {
                    first = p;
                    break;
                }
            if (first == -1) return false;  // error leaf (cannot happen: pigeons > holes)
            if (count + 1 == s) {
                trace.rounds.back().literals.back().hole_reply = first;
                return true;
            }
            for (int p = 0; p < inj.pigeons(); ++p) {
                if (inj.pigeon_set(p)) continue;
                inj.assign(p, y);
                trace.rounds.back().literals.back().hole_reply = p;
                if (literal(inj, count + 1, sc, j + 1, false)) return true;
                trace.rounds.back().literals.back().hole_reply.reset();
                inj.unassign(p);
            }
            return false;
        }
        return literal(inj, count, sc, j + 1, false);
    }
};

}  // namespace detail

inline DecisionTree build_tree_php(const Dnf& fprime, const PhpInstance& inst,
                                   const PartialInjection& rho) {
    if (fprime.n != inst.n_vars() || rho.holes() != inst.holes)
        throw std::invalid_argument("build_tree_php: universe mismatch");
    DecisionTree tree;
    PartialInjection work = rho;
    detail::TreeBuilderPhp builder{fprime, inst, tree};
    tree.root = builder.build(work, 0);
    return tree;
}

inline std::optional<TracePhp> first_long_branch_php(const Dnf& fprime, const PhpInstance& inst,
                                                     const PartialInjection& rho, int s) {
    if (s < 1) throw std::invalid_argument("first_long_branch_php: s must be >= 1");
    if (fprime.n != inst.n_vars() || rho.holes() != inst.holes)
        throw std::invalid_argument("first_long_branch_php: universe mismatch");
    detail::LongBranchPhp search{fprime, inst, s, {}};
    PartialInjection work = rho;
    if (!search.search(work, 0)) return std::nullopt;
    return std::move(search.trace);
}

inline bool depth_at_least_php(const Dnf& fprime, const PhpInstance& inst,
                               const PartialInjection& rho, int s) {
    return first_long_branch_php(fprime, inst, rho, s).has_value();
}

}  // namespace switchlab
