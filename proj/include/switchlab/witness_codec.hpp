#pragma once

#include <algorithm>
#include <sstream>
#include <string>

#include "switchlab/canonical_tree.hpp"

namespace switchlab {

// One beta' code unit: the literal location inside the round's term, plus the
// end-of-round marker. Kept as explicit pairs rather than packed integers so
// malformed witnesses stay detectable.
struct BetaEntry {
    int location = -1;
    bool last = false;

    friend bool operator==(const BetaEntry& a, const BetaEntry& b) {
        return a.location == b.location && a.last == b.last;
    }
};

// ---------------------------------------------------------------------------
// Lemma 1 codec (independent restrictions)
// ---------------------------------------------------------------------------

struct WitnessIndep {
    Restriction rho_sigma;
    std::vector<BetaEntry> beta;
    std::vector<bool> pi;
    std::vector<int> round_terms;  // derived, for reports

    friend bool operator==(const WitnessIndep& a, const WitnessIndep& b) {
        return a.rho_sigma == b.rho_sigma && a.beta == b.beta && a.pi == b.pi &&
               a.round_terms == b.round_terms;
    }
};

// sigma_i assigns each queried variable the polarity it has in C_i, so rho
// sigma sets exactly s variables that were unset in rho.
inline WitnessIndep encode_indep(const Dnf& f, const Restriction& rho, int s) {
    auto trace = first_long_branch_indep(f, rho, s);
    if (!trace) throw std::invalid_argument("encode_indep: T(F,rho) is shallower than s");
    WitnessIndep w;
    w.rho_sigma = rho;
    for (const TraceRoundIndep& round : trace->rounds) {
        const Term& c = f.terms[round.term];
        w.round_terms.push_back(round.term);
        for (std::size_t k = 0; k < round.beta.size(); ++k) {
            VarId v = round.beta[k];
            int loc = c.find_var(v);
            w.beta.push_back({loc, k + 1 == round.beta.size()});
            w.pi.push_back(round.replies[k]);
            w.rho_sigma[v] = c.literals[loc].positive ? Value::One : Value::Zero;
        }
    }
    return w;
}

inline std::optional<Restriction> decode_indep(const Dnf& f, const WitnessIndep& w, int s,
                                               std::string* why = nullptr) {
    auto fail = [&](const char* msg) -> std::optional<Restriction> {
        if (why) *why = msg;
        return std::nullopt;
    };
    if (w.rho_sigma.n() != f.n) return fail("rho_sigma universe mismatch");
    if (static_cast<int>(w.beta.size()) != s || w.pi.size() != w.beta.size())
        return fail("beta/pi length is not s");
    Restriction tau = w.rho_sigma;
    std::vector<VarId> changed;
    std::size_t pos = 0;
    while (pos < w.beta.size()) {
        Scan sc = scan_restriction(f, tau);
        if (sc.kind == ScanKind::AllFalsified) return fail("no live term during decode");
        const Term& c = f.terms[sc.term];
        std::size_t start = pos;
        for (;;) {
            if (pos == w.beta.size()) return fail("round not closed by a last flag");
            const BetaEntry& e = w.beta[pos];
            if (e.location < 0 || e.location >= c.size()) return fail("beta location out of term");
            const Literal& lit = c.literals[e.location];
            if (tau[lit.var] == Value::Star) return fail("beta names an unset variable");
            if ((tau[lit.var] == Value::One) != lit.positive)
                return fail("beta names a falsified literal");
            for (VarId seen : changed)
                if (seen == lit.var) return fail("variable repeated across rounds");
            changed.push_back(lit.var);
            ++pos;
            if (e.last) break;
        }
        // Swap sigma_i for pi_i and continue with rho pi_1..pi_i sigma_{i+1}..
        for (std::size_t k = start; k < pos; ++k) {
            VarId v = f.terms[sc.term].literals[w.beta[k].location].var;
            tau[v] = w.pi[k] ? Value::One : Value::Zero;
        }
    }
    Restriction rho = tau;
    for (VarId v : changed) rho[v] = Value::Star;
    // A witness is in theta's image exactly when re-encoding reproduces it.
    try {
        if (!(encode_indep(f, rho, s) == w)) return fail("witness is not the code of its decode");
    } catch (const std::invalid_argument&) {
        return fail("decoded restriction is not in S");
    }
    return rho;
}

// ---------------------------------------------------------------------------
// Lemma 2 codec (block restrictions)
// ---------------------------------------------------------------------------

struct WitnessBlock {
    BlockOutcome rho_sigma;
    std::vector<BetaEntry> beta;           // per block: location of its first starred variable
    std::vector<bool> pi;
    std::vector<std::vector<bool>> gamma;  // per round, one bit per literal of C_i
    std::vector<int> round_terms;

    friend bool operator==(const WitnessBlock& a, const WitnessBlock& b) {
        return a.rho_sigma == b.rho_sigma && a.beta == b.beta && a.pi == b.pi &&
               a.gamma == b.gamma && a.round_terms == b.round_terms;
    }
};

// sigma_i sends each starred variable of a touched block to 1 when it occurs
// positively in C_i and to 0 otherwise; gamma_i records the positive ones.
inline WitnessBlock encode_block(const Dnf& f, const BlockOutcome& rho, const BlockStructure& bs,
                                 int s) {
    auto trace = first_long_branch_block(f, rho, bs, s);
    if (!trace) throw std::invalid_argument("encode_block: T(F,rho) is shallower than s");
    WitnessBlock w;
    w.rho_sigma = rho;
    for (const TraceRoundBlock& round : trace->rounds) {
        const Term& c = f.terms[round.term];
        w.round_terms.push_back(round.term);
        std::vector<bool> gamma_bits(c.size(), false);
        for (std::size_t k = 0; k < round.beta.size(); ++k) {
            int b = round.beta[k];
            int first_loc = -1;
            for (int j = 0; j < c.size(); ++j) {
                VarId v = c.literals[j].var;
                if (bs.block_of[v] == b && rho.values[v] == Value::Star) {
                    first_loc = j;
                    break;
                }
            }
            if (first_loc < 0) throw std::logic_error("encode_block: block without starred literal");
            w.beta.push_back({first_loc, k + 1 == round.beta.size()});
            w.pi.push_back(round.replies[k]);
            // Positive starred occurrences drive both gamma and sigma.
            std::vector<VarId> to_one;
            for (int j = 0; j < c.size(); ++j) {
                const Literal& lit = c.literals[j];
                if (bs.block_of[lit.var] != b) continue;
                if (rho.values[lit.var] != Value::Star) continue;
                if (!lit.positive) continue;
                gamma_bits[j] = true;
                to_one.push_back(lit.var);
            }
            bool all_ones = true;
            for (VarId v : bs.blocks[b]) {
                if (w.rho_sigma.values[v] != Value::Star) continue;
                bool one = std::find(to_one.begin(), to_one.end(), v) != to_one.end();
                w.rho_sigma.values[v] = one ? Value::One : Value::Zero;
                all_ones &= one;
            }
            w.rho_sigma.classes[b] = all_ones ? BlockClass::AllOnes : BlockClass::ZeroBlock;
        }
        w.gamma.push_back(std::move(gamma_bits));
    }
    return w;
}

inline std::optional<BlockOutcome> decode_block(const Dnf& f, const BlockStructure& bs,
                                                const WitnessBlock& w, int s,
                                                std::string* why = nullptr) {
    auto fail = [&](const char* msg) -> std::optional<BlockOutcome> {
        if (why) *why = msg;
        return std::nullopt;
    };
    if (w.rho_sigma.values.n() != f.n) return fail("rho_sigma universe mismatch");
    if (static_cast<int>(w.beta.size()) != s || w.pi.size() != w.beta.size())
        return fail("beta/pi length is not s");
    Restriction tau = w.rho_sigma.values;
    BlockOutcome out = w.rho_sigma;
    std::vector<int> touched;
    std::size_t pos = 0;
    std::size_t round_idx = 0;
    while (pos < w.beta.size()) {
        Scan sc = scan_restriction(f, tau);
        if (sc.kind == ScanKind::AllFalsified) return fail("no live term during decode");
        const Term& c = f.terms[sc.term];
        if (round_idx >= w.gamma.size()) return fail("missing gamma round");
        const std::vector<bool>& gamma_bits = w.gamma[round_idx];
        if (static_cast<int>(gamma_bits.size()) != c.size())
            return fail("gamma length does not match term");
        ++round_idx;
        // Variables the round's sigma turned to 1.
        std::vector<VarId> gamma_vars;
        for (int j = 0; j < c.size(); ++j)
            if (gamma_bits[j]) gamma_vars.push_back(c.literals[j].var);
        for (;;) {
            if (pos == w.beta.size()) return fail("round not closed by a last flag");
            const BetaEntry& e = w.beta[pos];
            if (e.location < 0 || e.location >= c.size()) return fail("beta location out of term");
            int b = bs.block_of[c.literals[e.location].var];
            for (int seen : touched)
                if (seen == b) return fail("block repeated across rounds");
            touched.push_back(b);
            // Undo sigma on block b: gamma-mentioned variables and 0s were stars.
            std::vector<VarId> stars;
            for (VarId v : bs.blocks[b]) {
                bool was_star = tau[v] == Value::Zero ||
                                std::find(gamma_vars.begin(), gamma_vars.end(), v) !=
                                    gamma_vars.end();
                if (was_star) stars.push_back(v);
            }
            if (stars.empty()) return fail("round touches a block with no recovered stars");
            for (VarId v : stars) out.values[v] = Value::Star;
            out.classes[b] = BlockClass::StarBlock;
            // pi_i on block b: all recovered stars become 1 except the first,
            // which takes the reply bit.
            for (std::size_t k = 0; k < stars.size(); ++k)
                tau[stars[k]] = (k == 0 && !w.pi[pos]) ? Value::Zero : Value::One;
            ++pos;
            if (e.last) break;
        }
    }
    if (round_idx != w.gamma.size()) return fail("unused gamma rounds");
    try {
        if (!(encode_block(f, out, bs, s) == w)) return fail("witness is not the code of its decode");
    } catch (const std::invalid_argument&) {
        return fail("decoded outcome is not in S");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lemma 3 codec (partial injections)
// ---------------------------------------------------------------------------

// Reply code: either "the queried pigeon landed exactly on the literal's hole"
// (resp. the hole took the literal's pigeon), or an index into the reply pool.
struct PhpReplyCode {
    bool matches = false;
    int index = -1;

    friend bool operator==(const PhpReplyCode& a, const PhpReplyCode& b) {
        return a.matches == b.matches && a.index == b.index;
    }
};

struct WitnessPhp {
    PartialInjection rho_sigma;
    std::vector<BetaEntry> beta;   // literal locations, one entry per beta literal
    std::vector<PhpReplyCode> pi;  // one code per asked query, s in total
    std::vector<int> round_terms;

    friend bool operator==(const WitnessPhp& a, const WitnessPhp& b) {
        return a.rho_sigma == b.rho_sigma && a.beta == b.beta && a.pi == b.pi &&
               a.round_terms == b.round_terms;
    }
};

namespace detail {

// Pool of holes an off-literal pigeon reply can name: unset holes of rho sigma
// plus the holes of this round's still-pending literals, minus holes already
// filled by recovered replies; ascending. Pending sigma holes are needed
// because a reply may land on a hole that a later literal's sigma then claims,
// taking it out of B.
inline std::vector<int> php_hole_pool(const std::vector<int>& b_set,
                                      const std::vector<PhpLiteralRecord>& round,
                                      std::size_t after, const std::vector<bool>& hole_filled) {
    std::vector<int> pool;
    for (int h : b_set)
        if (!hole_filled[h]) pool.push_back(h);
    for (std::size_t u = after; u < round.size(); ++u)
        if (!hole_filled[round[u].hole]) pool.push_back(round[u].hole);
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline std::vector<int> php_pigeon_pool(const std::vector<int>& a_set,
                                        const std::vector<PhpLiteralRecord>& round,
                                        std::size_t after, const std::vector<bool>& pigeon_used) {
    std::vector<int> pool;
    for (int p : a_set)
        if (!pigeon_used[p]) pool.push_back(p);
    for (std::size_t u = after; u < round.size(); ++u)
        if (!pigeon_used[round[u].pigeon]) pool.push_back(round[u].pigeon);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace detail

// trim_limit, when given, enforces the lemma's Chernoff trim: rho must leave
// fewer than trim_limit pigeons and holes unset. Pass nullopt to encode any
// rho in S (used by the component-level verification).
inline WitnessPhp encode_php(const Dnf& fprime, const PhpInstance& inst,
                             const PartialInjection& rho, int s,
                             const std::optional<Rational>& trim_limit = std::nullopt) {
    if (trim_limit) {
        if (Rational(rho.unset_pigeons()) >= *trim_limit ||
            Rational(rho.unset_holes()) >= *trim_limit)
            throw std::invalid_argument("encode_php: rho leaves too many pigeons or holes unset");
    }
    auto trace = first_long_branch_php(fprime, inst, rho, s);
    if (!trace) throw std::invalid_argument("encode_php: T(F,rho) is shallower than s");
    WitnessPhp w;
    w.rho_sigma = rho;
    for (const TraceRoundPhp& round : trace->rounds) {
        w.round_terms.push_back(round.term);
        for (std::size_t k = 0; k < round.literals.size(); ++k)
            w.rho_sigma.assign(round.literals[k].pigeon, round.literals[k].hole);
    }
    std::vector<int> a_set, b_set;
    for (int p = 0; p < w.rho_sigma.pigeons(); ++p)
        if (!w.rho_sigma.pigeon_set(p)) a_set.push_back(p);
    for (int h = 0; h < w.rho_sigma.holes(); ++h)
        if (!w.rho_sigma.hole_set(h)) b_set.push_back(h);
    // Replay the branch to emit the reply codes.
    std::vector<bool> pigeon_used(rho.pigeons(), false), hole_filled(rho.holes(), false);
    for (int p = 0; p < rho.pigeons(); ++p) pigeon_used[p] = rho.pigeon_set(p);
    for (int h = 0; h < rho.holes(); ++h) hole_filled[h] = rho.hole_set(h);
    for (const TraceRoundPhp& round : trace->rounds) {
        for (std::size_t k = 0; k < round.literals.size(); ++k) {
            const PhpLiteralRecord& rec = round.literals[k];
            w.beta.push_back({rec.loc, k + 1 == round.literals.size()});
            if (rec.pigeon_reply) {
                int h = *rec.pigeon_reply;
                if (h == rec.hole) {
                    w.pi.push_back({true, -1});
                } else {
                    auto pool = detail::php_hole_pool(b_set, round.literals, k + 1, hole_filled);
                    auto it = std::find(pool.begin(), pool.end(), h);
                    if (it == pool.end()) throw std::logic_error("encode_php: reply outside pool");
                    w.pi.push_back({false, static_cast<int>(it - pool.begin())});
                }
                pigeon_used[rec.pigeon] = true;
                hole_filled[h] = true;
            }
            if (rec.hole_reply) {
                int p = *rec.hole_reply;
                if (p == rec.pigeon) {
                    w.pi.push_back({true, -1});
                } else {
                    auto pool = detail::php_pigeon_pool(a_set, round.literals, k + 1, pigeon_used);
                    auto it = std::find(pool.begin(), pool.end(), p);
                    if (it == pool.end()) throw std::logic_error("encode_php: reply outside pool");
                    w.pi.push_back({false, static_cast<int>(it - pool.begin())});
                }
                pigeon_used[p] = true;
                hole_filled[rec.hole] = true;
            }
        }
    }
    return w;
}

inline std::optional<PartialInjection> decode_php(const Dnf& fprime, const PhpInstance& inst,
                                                  const WitnessPhp& w, int s,
                                                  std::string* why = nullptr) {
    auto fail = [&](const char* msg) -> std::optional<PartialInjection> {
        if (why) *why = msg;
        return std::nullopt;
    };
    if (w.rho_sigma.holes() != inst.holes) return fail("rho_sigma size mismatch");
    if (static_cast<int>(w.pi.size()) != s) return fail("pi length is not s");
    std::vector<int> a_set, b_set;
    for (int p = 0; p < w.rho_sigma.pigeons(); ++p)
        if (!w.rho_sigma.pigeon_set(p)) a_set.push_back(p);
    for (int h = 0; h < w.rho_sigma.holes(); ++h)
        if (!w.rho_sigma.hole_set(h)) b_set.push_back(h);
    PartialInjection tau = w.rho_sigma;
    // Recovered replies; sigma pigeons never occur in rho, so "assigned on the
    // branch" is computable from the replies alone.
    std::vector<bool> pigeon_used(tau.pigeons(), false), hole_filled(tau.holes(), false);
    std::vector<std::pair<int, int>> sigma_pairs;
    std::size_t bpos = 0, ppos = 0;
    while (bpos < w.beta.size()) {
        Scan sc = scan_php(fprime, inst, tau);
        if (sc.kind == ScanKind::AllFalsified) return fail("no live term during decode");
        const Term& c = fprime.terms[sc.term];
        // Collect the round's literals from beta.
        std::vector<PhpLiteralRecord> round;
        for (;;) {
            if (bpos == w.beta.size()) return fail("round not closed by a last flag");
            const BetaEntry& e = w.beta[bpos];
            if (e.location < 0 || e.location >= c.size()) return fail("beta location out of term");
            VarId v = c.literals[e.location].var;
            round.push_back({e.location, inst.pigeon_of(v), inst.hole_of(v), std::nullopt,
                             std::nullopt});
            ++bpos;
            if (e.last) break;
        }
        for (auto& rec : round) {
            // sigma_i put this literal's assignment into rho sigma, so tau
            // must still carry it when the round is reached.
            if (!tau.pigeon_set(rec.pigeon) || tau.hole_of(rec.pigeon) != rec.hole)
                return fail("beta literal not set by sigma under tau");
            sigma_pairs.emplace_back(rec.pigeon, rec.hole);
        }
        // Recover the round's replies.
        for (std::size_t k = 0; k < round.size(); ++k) {
            PhpLiteralRecord& rec = round[k];
            if (!pigeon_used[rec.pigeon]) {
                if (ppos < w.pi.size()) {
                    const PhpReplyCode& code = w.pi[ppos++];
                    int h;
                    if (code.matches) {
                        h = rec.hole;
                    } else {
                        auto pool = detail::php_hole_pool(b_set, round, k + 1, hole_filled);
                        if (code.index < 0 || code.index >= static_cast<int>(pool.size()))
                            return fail("pi hole index outside pool");
                        h = pool[code.index];
                    }
                    if (hole_filled[h]) return fail("reply hole already filled");
                    rec.pigeon_reply = h;
                    pigeon_used[rec.pigeon] = true;
                    hole_filled[h] = true;
                }
            }
            if (!hole_filled[rec.hole]) {
                if (ppos < w.pi.size()) {
                    const PhpReplyCode& code = w.pi[ppos++];
                    int p;
                    if (code.matches) {
                        p = rec.pigeon;
                    } else {
                        auto pool = detail::php_pigeon_pool(a_set, round, k + 1, pigeon_used);
                        if (code.index < 0 || code.index >= static_cast<int>(pool.size()))
                            return fail("pi pigeon index outside pool");
                        p = pool[code.index];
                    }
                    if (pigeon_used[p]) return fail("reply pigeon already used");
                    rec.hole_reply = p;
                    pigeon_used[p] = true;
                    hole_filled[rec.hole] = true;
                }
            }
        }
        // tau becomes rho pi_1..pi_i sigma_{i+1}..: drop the round's sigma,
        // then add the recovered replies.
        for (const auto& rec : round) tau.unassign(rec.pigeon);
        for (const auto& rec : round) {
            if (rec.pigeon_reply) {
                if (tau.pigeon_set(rec.pigeon) || tau.hole_set(*rec.pigeon_reply))
                    return fail("recovered replies are not an injection");
                tau.assign(rec.pigeon, *rec.pigeon_reply);
            }
            if (rec.hole_reply) {
                if (tau.pigeon_set(*rec.hole_reply) || tau.hole_set(rec.hole))
                    return fail("recovered replies are not an injection");
                tau.assign(*rec.hole_reply, rec.hole);
            }
        }
    }
    if (ppos != w.pi.size()) return fail("unused pi codes");
    // rho is rho sigma without the sigma pigeons.
    PartialInjection rho = w.rho_sigma;
    for (auto [x, y] : sigma_pairs) {
        if (!rho.pigeon_set(x) || rho.hole_of(x) != y)
            return fail("rho_sigma does not contain the round sigmas");
        rho.unassign(x);
    }
    try {
        if (!(encode_php(fprime, inst, rho, s) == w))
            return fail("witness is not the code of its decode");
    } catch (const std::invalid_argument&) {
        return fail("decoded injection is not in S");
    }
    return rho;
}

// ---------------------------------------------------------------------------
// Code-space accounting used by the union bounds
// ---------------------------------------------------------------------------

struct CodeSpace {
    Rational beta_strings;
    Rational pi_strings;
    std::optional<Rational> gamma_strings;
};

inline CodeSpace code_space_indep(int r, int s) {
    return {Rational(2LL * r).pow(s), Rational(2).pow(s), std::nullopt};
}

inline CodeSpace code_space_block(int r, int s) {
    return {Rational(2LL * r).pow(s), Rational(2).pow(s),
            Rational(2).pow(static_cast<long long>(r) * s)};
}

inline CodeSpace code_space_php(int r, int s, const Rational& l) {
    return {Rational(2LL * r).pow(s), (Rational(2) * l).pow(s), std::nullopt};
}

// ---------------------------------------------------------------------------
// Line-oriented text form (CLI round-trip reports), one round per line.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_round_line(std::ostringstream& out, int term,
                              const std::vector<BetaEntry>& beta, std::size_t lo, std::size_t hi) {
    out << "round term=" << term << " beta=";
    for (std::size_t k = lo; k < hi; ++k) {
        if (k > lo) out << ",";
        out << beta[k].location;
    }
}

}  // namespace detail

inline std::string witness_text(const WitnessIndep& w) {
    std::ostringstream out;
    out << "witness lemma=1\nrho_sigma " << w.rho_sigma.to_string() << "\n";
    std::size_t lo = 0, round = 0;
    for (std::size_t k = 0; k < w.beta.size(); ++k) {
        if (!w.beta[k].last) continue;
        detail::append_round_line(out, w.round_terms[round], w.beta, lo, k + 1);
        out << " pi=";
        for (std::size_t j = lo; j <= k; ++j) out << (w.pi[j] ? '1' : '0');
        out << "\n";
        lo = k + 1;
        ++round;
    }
    return out.str();
}

inline std::string witness_text(const WitnessBlock& w) {
    std::ostringstream out;
    out << "witness lemma=2\nrho_sigma " << w.rho_sigma.to_string() << "\n";
    std::size_t lo = 0, round = 0;
    for (std::size_t k = 0; k < w.beta.size(); ++k) {
        if (!w.beta[k].last) continue;
        detail::append_round_line(out, w.round_terms[round], w.beta, lo, k + 1);
        out << " pi=";
        for (std::size_t j = lo; j <= k; ++j) out << (w.pi[j] ? '1' : '0');
        out << " gamma=";
        for (bool bit : w.gamma[round]) out << (bit ? '1' : '0');
        out << "\n";
        lo = k + 1;
        ++round;
    }
    return out.str();
}

inline std::string witness_text(const WitnessPhp& w) {
    std::ostringstream out;
    out << "witness lemma=3\nrho_sigma " << w.rho_sigma.to_string() << "\n";
    std::size_t lo = 0, round = 0;
    for (std::size_t k = 0; k < w.beta.size(); ++k) {
        if (!w.beta[k].last) continue;
        detail::append_round_line(out, w.round_terms[round], w.beta, lo, k + 1);
        lo = k + 1;
        ++round;
        out << "\n";
    }
    out << "pi ";
    for (std::size_t j = 0; j < w.pi.size(); ++j) {
        if (j) out << " ";
        if (w.pi[j].matches)
            out << "1";
        else
            out << "0:" << w.pi[j].index;
    }
    out << "\n";
    return out.str();
}

}  // namespace switchlab
