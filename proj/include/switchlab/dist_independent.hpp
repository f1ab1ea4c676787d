#pragma once

#include "switchlab/formula.hpp"
#include "switchlab/rational.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

// Each variable is independently 0 with probability (1-p)/2, 1 with
// probability (1-p)/2, and * with probability p.
struct IndepParams {
    int n = 0;
    Rational p;

    // Degenerate p in {0, 1} is allowed for sampling; lemma checks impose
    // their own stricter preconditions.
    void validate() const {
        if (n < 0) throw std::invalid_argument("IndepParams: negative n");
        if (p < Rational(0) || p > Rational(1))
            throw std::invalid_argument("IndepParams: p outside [0, 1]");
    }
};

inline Rational weight_indep(const Restriction& rho, const IndepParams& params) {
    if (rho.n() != params.n) throw std::invalid_argument("weight_indep: universe mismatch");
    int stars = rho.count(Value::Star);
    int fixed = params.n - stars;
    Rational half_rest = (Rational(1) - params.p) / Rational(2);
    return half_rest.pow(fixed) * params.p.pow(stars);
}

inline Restriction sample_indep(const IndepParams& params, Rng& rng) {
    params.validate();
    Restriction rho(params.n);
    for (VarId v = 0; v < params.n; ++v) {
        if (rng.bernoulli(params.p))
            rho[v] = Value::Star;
        else
            rho[v] = rng.bernoulli(Rational(1, 2)) ? Value::One : Value::Zero;
    }
    return rho;
}

// Enumeration is ternary counting with variable 0 least significant;
// digit 0 -> 0, 1 -> 1, 2 -> *. Index-addressable so ranges can be
// partitioned across workers.
inline long long indep_outcome_count(int n) {
    long long c = 1;
    for (int i = 0; i < n; ++i) c *= 3;
    return c;
}

inline Restriction indep_outcome(int n, long long index) {
    Restriction rho(n);
    for (VarId v = 0; v < n; ++v) {
        int digit = static_cast<int>(index % 3);
        index /= 3;
        rho[v] = digit == 0 ? Value::Zero : digit == 1 ? Value::One : Value::Star;
    }
    return rho;
}

template <typename Fn>
void enumerate_indep(int n, Fn&& fn) {
    long long total = indep_outcome_count(n);
    for (long long i = 0; i < total; ++i) fn(indep_outcome(n, i));
}

}  // namespace switchlab
