#pragma once

#include "switchlab/formula.hpp"
#include "switchlab/rational.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

// Distribution over partial injections of n+1 pigeons into n holes: each hole
// enters the range independently with probability 1-q, then a uniformly
// random injection of pigeons covers exactly that range.
struct PhpParams {
    int holes = 0;
    Rational q;

    void validate() const {
        if (holes < 1) throw std::invalid_argument("PhpParams: need at least one hole");
        if (q < Rational(0) || q > Rational(1))
            throw std::invalid_argument("PhpParams: q outside [0, 1]");
    }

    // l = 2qn, the unset-count trim used by the lemma.
    Rational trim_limit() const { return Rational(2) * q * Rational(holes); }
};

// Injective partial map pigeons -> holes.
class PartialInjection {
public:
    PartialInjection() = default;

    explicit PartialInjection(int holes)
        : holes_(holes), hole_of_(holes + 1, -1), pigeon_of_(holes, -1) {}

    int holes() const { return holes_; }
    int pigeons() const { return holes_ + 1; }
    int size() const { return size_; }

    bool pigeon_set(int x) const { return hole_of_[x] != -1; }
    bool hole_set(int y) const { return pigeon_of_[y] != -1; }
    int hole_of(int x) const { return hole_of_[x]; }
    int pigeon_of(int y) const { return pigeon_of_[y]; }

    void assign(int x, int y) {
        if (hole_of_[x] != -1 || pigeon_of_[y] != -1)
            throw std::logic_error("PartialInjection: assignment violates injectivity");
        hole_of_[x] = y;
        pigeon_of_[y] = x;
        ++size_;
    }

    void unassign(int x) {
        int y = hole_of_[x];
        if (y == -1) throw std::logic_error("PartialInjection: pigeon not set");
        hole_of_[x] = -1;
        pigeon_of_[y] = -1;
        --size_;
    }

    int unset_pigeons() const { return pigeons() - size_; }
    int unset_holes() const { return holes_ - size_; }

    std::string to_string() const {
        if (size_ == 0) return "-";
        std::string s;
        for (int x = 0; x < pigeons(); ++x) {
            if (hole_of_[x] == -1) continue;
            if (!s.empty()) s += " ";
            s += std::to_string(x) + ">" + std::to_string(hole_of_[x]);
        }
        return s;
    }

    friend bool operator==(const PartialInjection& a, const PartialInjection& b) {
        return a.holes_ == b.holes_ && a.hole_of_ == b.hole_of_;
    }

private:
    int holes_ = 0;
    int size_ = 0;
    std::vector<int> hole_of_;
    std::vector<int> pigeon_of_;
};

// weight(rho) = (1-q)^m q^{n-m} (n+1-m)!/(n+1)! for an injection setting m
// pigeons. The q exponent is n-m so the weights of all outcomes of the
// sampling procedure sum to exactly 1; see weight_php_alt for the variant
// with exponent n+1-m.
inline Rational weight_php(const PartialInjection& rho, const PhpParams& params) {
    if (rho.holes() != params.holes) throw std::invalid_argument("weight_php: size mismatch");
    int n = params.holes;
    int m = rho.size();
    Rational w = (Rational(1) - params.q).pow(m) * params.q.pow(n - m);
    // (n+1-m)!/(n+1)! as a product of m factors.
    for (int i = 0; i < m; ++i) w /= Rational(n + 1 - i);
    return w;
}

inline Rational weight_php_alt(const PartialInjection& rho, const PhpParams& params) {
    return weight_php(rho, params) * params.q;
}

inline PartialInjection sample_php(const PhpParams& params, Rng& rng) {
    params.validate();
    int n = params.holes;
    Rational not_q = Rational(1) - params.q;
    std::vector<int> range;
    for (int y = 0; y < n; ++y)
        if (rng.bernoulli(not_q)) range.push_back(y);
    PartialInjection rho(n);
    std::vector<int> free_pigeons;
    for (int x = 0; x <= n; ++x) free_pigeons.push_back(x);
    for (int y : range) {
        std::size_t k = static_cast<std::size_t>(rng.uniform(free_pigeons.size()));
        rho.assign(free_pigeons[k], y);
        free_pigeons.erase(free_pigeons.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return rho;
}

// All partial injections, ordered by range bitmask then by the pigeon choices
// per hole (ascending, odometer with the last range hole fastest).
inline std::vector<PartialInjection> enumerate_php(int holes) {
    std::vector<PartialInjection> out;
    int n = holes;
    for (long long mask = 0; mask < (1LL << n); ++mask) {
        std::vector<int> range;
        for (int y = 0; y < n; ++y)
            if ((mask >> y) & 1) range.push_back(y);
        PartialInjection rho(n);
        // Depth-first assignment of pigeons to the range holes in order.
        std::vector<int> pick(range.size(), -1);
        std::size_t level = 0;
        if (range.empty()) {
            out.push_back(rho);
            continue;
        }
        for (;;) {
            int y = range[level];
            int x = pick[level];
            if (x != -1) rho.unassign(x);
            ++x;
            while (x <= n && rho.pigeon_set(x)) ++x;
            if (x > n) {
                pick[level] = -1;
                if (level == 0) break;
                --level;
                continue;
            }
            pick[level] = x;
            rho.assign(x, y);
            if (level + 1 == range.size()) {
                out.push_back(rho);
            } else {
                ++level;
            }
        }
    }
    return out;
}

// The assignment view: pigeon x in hole y sets p_xy = 1, p_xy' = 0 for every
// other hole y', p_x'y = 0 for every other pigeon x'; all else stays *.
inline Restriction php_view(const PartialInjection& rho, const PhpInstance& inst) {
    if (rho.holes() != inst.holes) throw std::invalid_argument("php_view: size mismatch");
    Restriction view(inst.n_vars());
    for (int x = 0; x < inst.pigeons(); ++x) {
        int y = rho.hole_of(x);
        if (y == -1) continue;
        for (int y2 = 0; y2 < inst.holes; ++y2)
            view[inst.var(x, y2)] = (y2 == y) ? Value::One : Value::Zero;
        for (int x2 = 0; x2 < inst.pigeons(); ++x2)
            if (x2 != x) view[inst.var(x2, y)] = Value::Zero;
    }
    return view;
}

// Literal truth value under the identification above, without materializing
// the whole view.
inline Value php_literal_value(const PartialInjection& rho, const PhpInstance& inst, VarId v) {
    int x = inst.pigeon_of(v), y = inst.hole_of(v);
    if (rho.pigeon_set(x)) return rho.hole_of(x) == y ? Value::One : Value::Zero;
    if (rho.hole_set(y)) return Value::Zero;
    return Value::Star;
}

}  // namespace switchlab
