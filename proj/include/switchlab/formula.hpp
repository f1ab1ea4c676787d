#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace switchlab {

using VarId = int;

enum class Value : unsigned char { Zero, One, Star };

struct Literal {
    VarId var = 0;
    bool positive = true;

    friend bool operator==(const Literal& a, const Literal& b) {
        return a.var == b.var && a.positive == b.positive;
    }
};

// A conjunction of at most r literals. The position of a literal within the
// term (its "location") is meaningful: witness codecs address literals by it.
struct Term {
    std::vector<Literal> literals;

    int size() const { return static_cast<int>(literals.size()); }

    // Location of the literal on `v`, or -1. Variables are unique per term.
    int find_var(VarId v) const {
        for (int i = 0; i < size(); ++i)
            if (literals[i].var == v) return i;
        return -1;
    }

    friend bool operator==(const Term& a, const Term& b) { return a.literals == b.literals; }
};

// An r-DNF: disjunction of width-<=r terms over variables [0, n). Term order
// is load-bearing; the canonical trees scan for the first live term.
struct Dnf {
    int n = 0;
    int r = 0;
    std::vector<Term> terms;

    void validate() const {
        if (n < 0 || r < 0) throw std::invalid_argument("Dnf: negative n or r");
        for (const Term& t : terms) {
            if (t.size() > r) throw std::invalid_argument("Dnf: term wider than r");
            for (int i = 0; i < t.size(); ++i) {
                const Literal& l = t.literals[i];
                if (l.var < 0 || l.var >= n) throw std::invalid_argument("Dnf: variable out of range");
                for (int j = i + 1; j < t.size(); ++j)
                    if (t.literals[j].var == l.var)
                        throw std::invalid_argument("Dnf: variable repeated in term");
            }
        }
    }
};

// Total map from variables to {0, 1, *}.
struct Restriction {
    std::vector<Value> values;

    Restriction() = default;
    explicit Restriction(int n, Value fill = Value::Star) : values(n, fill) {}

    int n() const { return static_cast<int>(values.size()); }
    Value operator[](VarId v) const { return values[static_cast<std::size_t>(v)]; }
    Value& operator[](VarId v) { return values[static_cast<std::size_t>(v)]; }

    int count(Value w) const {
        int c = 0;
        for (Value v : values)
            if (v == w) ++c;
        return c;
    }

    bool total() const { return count(Value::Star) == 0; }

    std::string to_string() const {
        std::string s;
        s.reserve(values.size());
        for (Value v : values)
            s.push_back(v == Value::Zero ? '0' : v == Value::One ? '1' : '*');
        return s;
    }

    friend bool operator==(const Restriction& a, const Restriction& b) {
        return a.values == b.values;
    }
};

struct VarAssignment {
    VarId var;
    bool value;
};

enum class TermState { Falsified, Satisfied, Residual };

struct TermStatus {
    TermState state;
    Term residual;  // the unset literals, in original order (Residual only)
};

// A term is falsified iff some literal is set against its polarity; otherwise
// satisfied literals are dropped and an empty residue means satisfied.
inline TermStatus restrict_term(const Term& t, const Restriction& rho) {
    TermStatus out{TermState::Satisfied, {}};
    for (const Literal& l : t.literals) {
        Value v = rho[l.var];
        if (v == Value::Star) {
            out.residual.literals.push_back(l);
        } else if ((v == Value::One) != l.positive) {
            return {TermState::Falsified, {}};
        }
    }
    if (!out.residual.literals.empty()) out.state = TermState::Residual;
    return out;
}

struct RestrictedDnf {
    bool constant_zero = false;
    bool constant_one = false;
    Dnf formula;  // surviving residual terms in original order (empty when constant)
};

// Drops falsified terms; any satisfied term collapses the whole formula to 1;
// no surviving terms means 0.
inline RestrictedDnf restrict_dnf(const Dnf& f, const Restriction& rho) {
    RestrictedDnf out;
    out.formula.n = f.n;
    out.formula.r = f.r;
    for (const Term& t : f.terms) {
        TermStatus st = restrict_term(t, rho);
        if (st.state == TermState::Satisfied) {
            out.constant_one = true;
            out.formula.terms.clear();
            return out;
        }
        if (st.state == TermState::Residual) out.formula.terms.push_back(st.residual);
    }
    if (out.formula.terms.empty()) out.constant_zero = true;
    return out;
}

// Extends rho by pi; pi may only touch starred variables.
inline Restriction compose(const Restriction& rho, const std::vector<VarAssignment>& pi) {
    Restriction out = rho;
    for (const VarAssignment& a : pi) {
        if (out[a.var] != Value::Star)
            throw std::logic_error("compose: variable already set");
        out[a.var] = a.value ? Value::One : Value::Zero;
    }
    return out;
}

// Evaluates F under a total assignment.
inline bool evaluate_dnf(const Dnf& f, const Restriction& assignment) {
    if (!assignment.total()) throw std::logic_error("evaluate_dnf: assignment not total");
    for (const Term& t : f.terms) {
        bool ok = true;
        for (const Literal& l : t.literals) {
            if ((assignment[l.var] == Value::One) != l.positive) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

// Ordered partition of [0, n) into nonempty blocks, each with a fixed internal
// variable order (the order given in the blocks file).
struct BlockStructure {
    int n = 0;
    std::vector<std::vector<VarId>> blocks;
    std::vector<int> block_of;  // var -> block index

    BlockStructure() = default;

    BlockStructure(int n_, std::vector<std::vector<VarId>> blocks_)
        : n(n_), blocks(std::move(blocks_)) {
        block_of.assign(n, -1);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].empty()) throw std::invalid_argument("BlockStructure: empty block");
            for (VarId v : blocks[b]) {
                if (v < 0 || v >= n) throw std::invalid_argument("BlockStructure: variable out of range");
                if (block_of[v] != -1) throw std::invalid_argument("BlockStructure: variable in two blocks");
                block_of[v] = static_cast<int>(b);
            }
        }
        for (int v = 0; v < n; ++v)
            if (block_of[v] == -1)
                throw std::invalid_argument("BlockStructure: variable not covered by any block");
    }

    int block_count() const { return static_cast<int>(blocks.size()); }
};

// Variables p_xy for the pigeonhole principle with `holes` holes and holes+1
// pigeons, packed row-major: var(x, y) = x*holes + y.
struct PhpInstance {
    int holes = 0;

    explicit PhpInstance(int holes_) : holes(holes_) {
        if (holes <= 0) throw std::invalid_argument("PhpInstance: need at least one hole");
    }

    int pigeons() const { return holes + 1; }
    int n_vars() const { return pigeons() * holes; }
    VarId var(int pigeon, int hole) const { return pigeon * holes + hole; }
    int pigeon_of(VarId v) const { return v / holes; }
    int hole_of(VarId v) const { return v % holes; }
};

struct parse_error : std::runtime_error {
    int line;
    parse_error(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline long long parse_int(const std::string& tok, int line) {
    std::size_t pos = 0;
    long long v;
    try {
        v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
        throw parse_error(line, "expected integer, got \"" + tok + "\"");
    }
    if (pos != tok.size()) throw parse_error(line, "trailing characters in \"" + tok + "\"");
    return v;
}

// Parses the term lines shared by parse_dnf and parse_php_dnf.
inline void parse_terms(std::istream& in, int first_line, Dnf& f) {
    std::string row;
    int lineno = first_line;
    while (std::getline(in, row)) {
        ++lineno;
        auto toks = split_ws(row);
        if (toks.empty()) continue;
        Term t;
        for (const auto& tok : toks) {
            long long k = parse_int(tok, lineno);
            if (k == 0) throw parse_error(lineno, "literal 0 is not allowed");
            Literal l;
            l.positive = k > 0;
            l.var = static_cast<VarId>(l.positive ? k - 1 : -k - 1);
            if (l.var >= f.n)
                throw parse_error(lineno, "variable " + std::to_string(l.var + 1) +
                                              " exceeds universe size " + std::to_string(f.n));
            if (t.find_var(l.var) != -1)
                throw parse_error(lineno, "variable " + std::to_string(l.var + 1) +
                                              " appears twice in one term");
            t.literals.push_back(l);
        }
        if (t.size() > f.r)
            throw parse_error(lineno, "term width " + std::to_string(t.size()) + " > r=" +
                                          std::to_string(f.r));
        f.terms.push_back(std::move(t));
    }
}

}  // namespace detail

// Text format: header "dnf <n> <r>"; one term per nonempty line, space
// separated nonzero integers: k > 0 is x_{k-1}, k < 0 is the negation of
// x_{-k-1}. Line order is term order.
inline Dnf parse_dnf(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string row;
    int lineno = 0;
    while (std::getline(in, row)) {
        ++lineno;
        auto toks = detail::split_ws(row);
        if (toks.empty()) continue;
        if (toks[0] != "dnf" || toks.size() != 3)
            throw parse_error(lineno, "expected header \"dnf <n> <r>\"");
        Dnf f;
        f.n = static_cast<int>(detail::parse_int(toks[1], lineno));
        f.r = static_cast<int>(detail::parse_int(toks[2], lineno));
        if (f.n < 0 || f.r < 0) throw parse_error(lineno, "n and r must be nonnegative");
        detail::parse_terms(in, lineno, f);
        return f;
    }
    throw parse_error(lineno, "missing \"dnf\" header");
}

inline std::string serialize_dnf(const Dnf& f) {
    std::ostringstream out;
    out << "dnf " << f.n << " " << f.r << "\n";
    for (const Term& t : f.terms) {
        if (t.literals.empty())
            throw std::invalid_argument("serialize_dnf: empty term has no text form");
        for (int i = 0; i < t.size(); ++i) {
            const Literal& l = t.literals[i];
            if (i) out << " ";
            out << (l.positive ? l.var + 1 : -(l.var + 1));
        }
        out << "\n";
    }
    return out.str();
}

// Blocks file: header "blocks <n>"; each nonempty line lists the 1-based
// variable indices of one block, in the block's fixed internal order.
inline BlockStructure parse_blocks(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string row;
    int lineno = 0;
    int n = -1;
    std::vector<std::vector<VarId>> blocks;
    while (std::getline(in, row)) {
        ++lineno;
        auto toks = detail::split_ws(row);
        if (toks.empty()) continue;
        if (n < 0) {
            if (toks[0] != "blocks" || toks.size() != 2)
                throw parse_error(lineno, "expected header \"blocks <n>\"");
            n = static_cast<int>(detail::parse_int(toks[1], lineno));
            if (n < 0) throw parse_error(lineno, "n must be nonnegative");
            continue;
        }
        std::vector<VarId> block;
        for (const auto& tok : toks) {
            long long k = detail::parse_int(tok, lineno);
            if (k < 1 || k > n)
                throw parse_error(lineno, "variable index " + tok + " out of range 1.." +
                                              std::to_string(n));
            block.push_back(static_cast<VarId>(k - 1));
        }
        blocks.push_back(std::move(block));
    }
    if (n < 0) throw parse_error(lineno, "missing \"blocks\" header");
    try {
        return BlockStructure(n, std::move(blocks));
    } catch (const std::invalid_argument& e) {
        throw parse_error(lineno, e.what());
    }
}

// PHP formula files: a "php <n>" line, then an ordinary DNF whose universe
// must be (n+1)*n.
inline std::pair<PhpInstance, Dnf> parse_php_dnf(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string row;
    int lineno = 0;
    int holes = -1;
    while (std::getline(in, row)) {
        ++lineno;
        auto toks = detail::split_ws(row);
        if (toks.empty()) continue;
        if (holes < 0) {
            if (toks[0] != "php" || toks.size() != 2)
                throw parse_error(lineno, "expected header \"php <n>\"");
            holes = static_cast<int>(detail::parse_int(toks[1], lineno));
            if (holes < 1) throw parse_error(lineno, "php instance needs n >= 1");
            continue;
        }
        if (toks[0] != "dnf" || toks.size() != 3)
            throw parse_error(lineno, "expected header \"dnf <n_vars> <r>\" after \"php <n>\"");
        PhpInstance inst(holes);
        Dnf f;
        f.n = static_cast<int>(detail::parse_int(toks[1], lineno));
        f.r = static_cast<int>(detail::parse_int(toks[2], lineno));
        if (f.n != inst.n_vars())
            throw parse_error(lineno, "php n=" + std::to_string(holes) + " requires " +
                                          std::to_string(inst.n_vars()) + " variables, header says " +
                                          std::to_string(f.n));
        if (f.r < 0) throw parse_error(lineno, "r must be nonnegative");
        detail::parse_terms(in, lineno, f);
        return {inst, f};
    }
    throw parse_error(lineno, "missing \"php\" header");
}

// The F -> F' preprocessing: each negated p_xy is expanded into the choice of
// p_xy' over holes y' != y (ascending), choices distribute lexicographically
// across literals, and terms asserting two pigeons in one hole or one pigeon
// in two holes are dropped. Repeated identical literals collapse to one.
inline Dnf php_preprocess(const Dnf& f, const PhpInstance& inst) {
    if (f.n != inst.n_vars())
        throw std::invalid_argument("php_preprocess: formula universe does not match instance");
    Dnf out;
    out.n = f.n;
    out.r = f.r;
    for (const Term& t : f.terms) {
        // Per-literal expansion choices, each a positive literal.
        std::vector<std::vector<Literal>> choices;
        bool dead = false;
        for (const Literal& l : t.literals) {
            if (l.positive) {
                choices.push_back({l});
                continue;
            }
            std::vector<Literal> alt;
            int x = inst.pigeon_of(l.var), y = inst.hole_of(l.var);
            for (int y2 = 0; y2 < inst.holes; ++y2)
                if (y2 != y) alt.push_back({inst.var(x, y2), true});
            if (alt.empty()) {
                dead = true;  // no other hole exists; the term expands to nothing
                break;
            }
            choices.push_back(std::move(alt));
        }
        if (dead) continue;
        std::vector<std::size_t> pick(choices.size(), 0);
        for (;;) {
            Term cand;
            bool contradictory = false;
            for (std::size_t i = 0; i < choices.size() && !contradictory; ++i) {
                Literal l = choices[i][pick[i]];
                bool duplicate = false;
                for (const Literal& prev : cand.literals) {
                    if (prev.var == l.var) {
                        duplicate = true;
                        break;
                    }
                    if (inst.pigeon_of(prev.var) == inst.pigeon_of(l.var) ||
                        inst.hole_of(prev.var) == inst.hole_of(l.var)) {
                        contradictory = true;
                        break;
                    }
                }
                if (!duplicate && !contradictory) cand.literals.push_back(l);
            }
            if (!contradictory) out.terms.push_back(std::move(cand));
            // Odometer: last literal fastest, so choices enumerate
            // lexicographically with ascending hole order per literal.
            std::size_t i = choices.size();
            while (i > 0) {
                --i;
                if (++pick[i] < choices[i].size()) break;
                pick[i] = 0;
                if (i == 0) {
                    i = SIZE_MAX;
                    break;
                }
            }
            if (choices.empty() || i == SIZE_MAX) break;
        }
    }
    return out;
}

}  // namespace switchlab
