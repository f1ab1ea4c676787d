#pragma once

#include "switchlab/formula.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

// Canonical terms over [0, n): variables strictly ascending within a term,
// widths 1..r, listed by width, then variable tuple, then polarity pattern
// (all-positive first, sign bit per position).
inline std::vector<Term> canonical_terms(int n, int r) {
    std::vector<Term> out;
    for (int w = 1; w <= r && w <= n; ++w) {
        std::vector<int> vars(w);
        for (int i = 0; i < w; ++i) vars[i] = i;
        for (;;) {
            for (unsigned mask = 0; mask < (1u << w); ++mask) {
                Term t;
                for (int i = 0; i < w; ++i)
                    t.literals.push_back({vars[i], ((mask >> i) & 1u) == 0});
                out.push_back(std::move(t));
            }
            int i = w - 1;
            while (i >= 0 && vars[i] == n - w + i) --i;
            if (i < 0) break;
            ++vars[i];
            for (int j = i + 1; j < w; ++j) vars[j] = vars[j - 1] + 1;
        }
    }
    return out;
}

// All DNFs whose term list is a strictly increasing sequence of canonical
// term indices, up to max_terms terms; includes the empty formula.
inline std::vector<Dnf> canonical_dnfs(int n, int r, int max_terms) {
    std::vector<Term> terms = canonical_terms(n, r);
    std::vector<Dnf> out;
    out.push_back({n, r, {}});
    int total = static_cast<int>(terms.size());
    std::vector<int> idx;
    for (int len = 1; len <= max_terms && len <= total; ++len) {
        idx.assign(len, 0);
        for (int i = 0; i < len; ++i) idx[i] = i;
        for (;;) {
            Dnf f{n, r, {}};
            for (int i : idx) f.terms.push_back(terms[i]);
            out.push_back(std::move(f));
            int i = len - 1;
            while (i >= 0 && idx[i] == total - len + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < len; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

// Canonical terms over PHP variables. positive_only additionally drops terms
// that assert two pigeons in one hole or one pigeon in two holes, i.e. the
// fixpoints of php_preprocess.
inline std::vector<Term> canonical_php_terms(const PhpInstance& inst, int r, bool positive_only) {
    std::vector<Term> raw = canonical_terms(inst.n_vars(), r);
    std::vector<Term> out;
    for (Term& t : raw) {
        bool keep = true;
        for (int i = 0; i < t.size() && keep; ++i) {
            if (positive_only && !t.literals[i].positive) keep = false;
            for (int j = i + 1; j < t.size() && keep && positive_only; ++j) {
                VarId a = t.literals[i].var, b = t.literals[j].var;
                if (inst.pigeon_of(a) == inst.pigeon_of(b) || inst.hole_of(a) == inst.hole_of(b))
                    keep = false;
            }
        }
        if (keep) out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<Dnf> canonical_php_dnfs(const PhpInstance& inst, int r, int max_terms,
                                           bool positive_only) {
    std::vector<Term> terms = canonical_php_terms(inst, r, positive_only);
    std::vector<Dnf> out;
    out.push_back({inst.n_vars(), r, {}});
    int total = static_cast<int>(terms.size());
    std::vector<int> idx;
    for (int len = 1; len <= max_terms && len <= total; ++len) {
        idx.assign(len, 0);
        for (int i = 0; i < len; ++i) idx[i] = i;
        for (;;) {
            Dnf f{inst.n_vars(), r, {}};
            for (int i : idx) f.terms.push_back(terms[i]);
            out.push_back(std::move(f));
            int i = len - 1;
            while (i >= 0 && idx[i] == total - len + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < len; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

// Seed-controlled random formula: terms drawn uniformly from the canonical
// width-<=r terms (no variable repeats within a term).
inline Dnf random_dnf(int n, int r, int num_terms, Rng& rng) {
    std::vector<Term> terms = canonical_terms(n, r);
    if (terms.empty()) throw std::invalid_argument("random_dnf: no terms available");
    Dnf f{n, r, {}};
    for (int i = 0; i < num_terms; ++i)
        f.terms.push_back(terms[static_cast<std::size_t>(rng.uniform(terms.size()))]);
    return f;
}

}  // namespace switchlab
