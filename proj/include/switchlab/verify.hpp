#pragma once

#include <cmath>
#include <map>
#include <thread>

#include "switchlab/canonical_tree.hpp"
#include "switchlab/dist_block.hpp"
#include "switchlab/dist_independent.hpp"
#include "switchlab/dist_php.hpp"
#include "switchlab/witness_codec.hpp"

namespace switchlab {

// ---------------------------------------------------------------------------
// Work partitioning. Exact sums are rationals, so combination order does not
// affect results; Monte Carlo trials are seeded per index, so neither does
// thread count.
// ---------------------------------------------------------------------------

template <typename R, typename ChunkFn>
R parallel_reduce(long long count, int threads, R init, ChunkFn chunk) {
    if (threads > count) threads = static_cast<int>(count);
    if (threads <= 1) {
        R part = chunk(0, count);
        return init + part;
    }
    std::vector<R> partials(threads, init);
    std::vector<std::thread> workers;
    long long per = count / threads, extra = count % threads;
    long long lo = 0;
    for (int t = 0; t < threads; ++t) {
        long long hi = lo + per + (t < extra ? 1 : 0);
        workers.emplace_back([&, t, lo, hi] { partials[t] = chunk(lo, hi); });
        lo = hi;
    }
    for (auto& w : workers) w.join();
    R acc = init;
    for (const R& p : partials) acc = acc + p;
    return acc;
}

// ---------------------------------------------------------------------------
// Exact failure weights |S|
// ---------------------------------------------------------------------------

inline Rational exact_failure_weight_indep(const Dnf& f, const IndepParams& params, int s,
                                           int threads = 1) {
    if (params.n != f.n) throw std::invalid_argument("exact_failure_weight_indep: universe mismatch");
    if (params.n > 38) throw std::overflow_error("exact_failure_weight_indep: 3^n too large");
    long long total = indep_outcome_count(params.n);
    return parallel_reduce<Rational>(total, threads, Rational(0), [&](long long lo, long long hi) {
        Rational sum(0);
        for (long long i = lo; i < hi; ++i) {
            Restriction rho = indep_outcome(params.n, i);
            if (depth_at_least_indep(f, rho, s)) sum += weight_indep(rho, params);
        }
        return sum;
    });
}

inline Rational exact_failure_weight_block(const Dnf& f, const BlockParams& params, int s,
                                           int threads = 1) {
    if (params.blocks.n != f.n)
        throw std::invalid_argument("exact_failure_weight_block: universe mismatch");
    long long total = block_outcome_count(params.blocks);
    return parallel_reduce<Rational>(total, threads, Rational(0), [&](long long lo, long long hi) {
        Rational sum(0);
        for (long long i = lo; i < hi; ++i) {
            BlockOutcome o = block_outcome(params.blocks, i);
            if (depth_at_least_block(f, o, params.blocks, s)) sum += weight_block(o, params);
        }
        return sum;
    });
}

struct PhpFailureWeight {
    Rational total;           // |S|
    Rational trimmed;         // members leaving fewer than l pigeons and holes unset
    Rational exception_mass;  // the rest of S, reported separately
};

inline PhpFailureWeight exact_failure_weight_php(const Dnf& fprime, const PhpInstance& inst,
                                                 const PhpParams& params, int s, int threads = 1) {
    std::vector<PartialInjection> all = enumerate_php(params.holes);
    Rational l = params.trim_limit();
    struct Sums {
        Rational trimmed, exception;
        Sums operator+(const Sums& o) const { return {trimmed + o.trimmed, exception + o.exception}; }
    };
    Sums sums = parallel_reduce<Sums>(
        static_cast<long long>(all.size()), threads, Sums{Rational(0), Rational(0)},
        [&](long long lo, long long hi) {
            Sums part{Rational(0), Rational(0)};
            for (long long i = lo; i < hi; ++i) {
                const PartialInjection& rho = all[static_cast<std::size_t>(i)];
                if (!depth_at_least_php(fprime, inst, rho, s)) continue;
                Rational w = weight_php(rho, params);
                bool within = Rational(rho.unset_pigeons()) < l && Rational(rho.unset_holes()) < l;
                (within ? part.trimmed : part.exception) += w;
            }
            return part;
        });
    return {sums.trimmed + sums.exception, sums.trimmed, sums.exception};
}

// ---------------------------------------------------------------------------
// Lemma bounds. half_exponent marks the pigeonhole bound base^{s/2}, compared
// exactly by squaring.
// ---------------------------------------------------------------------------

struct BoundPair {
    Rational loose;
    Rational tight;
    bool half_exponent = false;
};

inline BoundPair bound_value_l1(const Rational& p, int r, int s) {
    Rational loose = (Rational(9) * p * Rational(r)).pow(s);
    Rational tight = (Rational(8) * p * Rational(r) / (Rational(1) - p)).pow(s);
    return {loose, tight, false};
}

inline BoundPair bound_value_l2(const Rational& q, int r, int s) {
    Rational loose = (Rational(13) * q * Rational(r)).pow(s);
    Rational tight = (Rational(12) * q * Rational(r) / (Rational(1) - q)).pow(s);
    return {loose, tight, false};
}

inline BoundPair bound_value_l3(const Rational& q, int r, int n, int s) {
    Rational base = Rational(128) * Rational(r).pow(2) * Rational(n).pow(3) * q.pow(4);
    (void)s;
    return {base, base, true};
}

// weight <= bound, where a half-exponent bound means bound_base^{s/2}.
inline bool weight_le_bound(const Rational& weight, const Rational& bound, bool half_exponent,
                            int s) {
    if (!half_exponent) return weight <= bound;
    return weight.pow(2) <= bound.pow(s);
}

inline double bound_approx(const Rational& bound, bool half_exponent, int s) {
    if (!half_exponent) return bound.to_double();
    return std::pow(bound.to_double(), 0.5 * s);
}

inline bool precondition_l1(const Rational& p) {
    return Rational(0) < p && p < Rational(1) && p < Rational(1, 9);
}

inline bool precondition_l2(const Rational& p, const Rational& q, int r) {
    return Rational(0) < p && p < Rational(1) && Rational(0) < q && q < Rational(1) &&
           p < Rational(1, 2 * static_cast<long long>(r)) && q < Rational(1, 13);
}

inline bool precondition_l3(const Rational& q, int r, int n) {
    if (!(Rational(0) < q && q < Rational(1, 2))) return false;
    Rational regime = Rational(128) * Rational(r).pow(2) * Rational(n).pow(3) * q.pow(4);
    return regime < Rational(1);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation with a Wilson 99% interval
// ---------------------------------------------------------------------------

struct MonteCarlo {
    long long trials = 0;
    long long failures = 0;
    double estimate = 0;    // failure frequency
    double lower = 0;       // Wilson interval
    double upper = 0;
    double half_width = 0;  // upper - estimate, so estimate + half_width is the upper limit
};

inline MonteCarlo wilson_interval(long long trials, long long failures) {
    constexpr double z = 2.5758293035489004;  // two-sided 99% normal quantile
    MonteCarlo mc;
    mc.trials = trials;
    mc.failures = failures;
    double n = static_cast<double>(trials);
    double phat = failures / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
    mc.estimate = phat;
    mc.lower = std::max(0.0, center - half);
    mc.upper = std::min(1.0, center + half);
    mc.half_width = mc.upper - phat;
    return mc;
}

template <typename TrialFn>
MonteCarlo monte_carlo_failure(long long trials, std::uint64_t seed, int threads, TrialFn trial) {
    if (trials < 1) throw std::invalid_argument("monte_carlo_failure: trials must be >= 1");
    long long failures = parallel_reduce<long long>(
        trials, threads, 0, [&](long long lo, long long hi) {
            long long c = 0;
            for (long long i = lo; i < hi; ++i) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
                if (trial(rng)) ++c;
            }
            return c;
        });
    return wilson_interval(trials, failures);
}

inline MonteCarlo monte_carlo_failure_indep(const Dnf& f, const IndepParams& params, int s,
                                            long long trials, std::uint64_t seed, int threads = 1) {
    return monte_carlo_failure(trials, seed, threads, [&](Rng& rng) {
        return depth_at_least_indep(f, sample_indep(params, rng), s);
    });
}

inline MonteCarlo monte_carlo_failure_block(const Dnf& f, const BlockParams& params, int s,
                                            long long trials, std::uint64_t seed, int threads = 1) {
    return monte_carlo_failure(trials, seed, threads, [&](Rng& rng) {
        return depth_at_least_block(f, sample_block(params, rng), params.blocks, s);
    });
}

inline MonteCarlo monte_carlo_failure_php(const Dnf& fprime, const PhpInstance& inst,
                                          const PhpParams& params, int s, long long trials,
                                          std::uint64_t seed, int threads = 1) {
    return monte_carlo_failure(trials, seed, threads, [&](Rng& rng) {
        return depth_at_least_php(fprime, inst, sample_php(params, rng), s);
    });
}

// ---------------------------------------------------------------------------
// Lemma checks
// ---------------------------------------------------------------------------

enum class CheckMode { Exact, Sample };

struct LemmaReport {
    int lemma = 0;
    int n = 0;
    int r = 0;
    int s = 0;
    std::optional<Rational> p;
    std::optional<Rational> q;
    std::string blocks_desc;  // lemma 2: block sizes "2+2"
    CheckMode mode = CheckMode::Exact;
    bool precondition_ok = false;
    std::string precondition_note;
    std::optional<Rational> exact_weight;     // |S|; lemma 3: trimmed part
    std::optional<Rational> exception_mass;   // lemma 3 exact mode
    std::optional<MonteCarlo> mc;
    BoundPair bound;
    bool pass = false;
};

inline LemmaReport check_lemma1(const Dnf& f, const Rational& p, int s, CheckMode mode,
                                long long trials = 100000, std::uint64_t seed = 0,
                                int threads = 1) {
    LemmaReport rep;
    rep.lemma = 1;
    rep.n = f.n;
    rep.r = f.r;
    rep.s = s;
    rep.p = p;
    rep.mode = mode;
    rep.bound = bound_value_l1(p, f.r, s);
    rep.precondition_ok = precondition_l1(p);
    if (!rep.precondition_ok) rep.precondition_note = "requires 0 < p < 1/9";
    IndepParams params{f.n, p};
    if (mode == CheckMode::Exact) {
        rep.exact_weight = exact_failure_weight_indep(f, params, s, threads);
        rep.pass = rep.precondition_ok && *rep.exact_weight <= rep.bound.tight &&
                   *rep.exact_weight <= rep.bound.loose;
    } else {
        rep.mc = monte_carlo_failure_indep(f, params, s, trials, seed, threads);
        rep.pass = rep.precondition_ok && rep.mc->upper <= rep.bound.loose.to_double();
    }
    return rep;
}

inline LemmaReport check_lemma2(const Dnf& f, const BlockStructure& bs, const Rational& p,
                                const Rational& q, int s, CheckMode mode,
                                long long trials = 100000, std::uint64_t seed = 0,
                                int threads = 1) {
    LemmaReport rep;
    rep.lemma = 2;
    rep.n = f.n;
    rep.r = f.r;
    rep.s = s;
    rep.p = p;
    rep.q = q;
    for (std::size_t b = 0; b < bs.blocks.size(); ++b) {
        if (b) rep.blocks_desc += "+";
        rep.blocks_desc += std::to_string(bs.blocks[b].size());
    }
    rep.mode = mode;
    rep.bound = bound_value_l2(q, f.r, s);
    rep.precondition_ok = precondition_l2(p, q, f.r);
    if (!rep.precondition_ok) rep.precondition_note = "requires p < 1/2r and q < 1/13";
    BlockParams params{bs, p, q};
    if (mode == CheckMode::Exact) {
        rep.exact_weight = exact_failure_weight_block(f, params, s, threads);
        rep.pass = rep.precondition_ok && *rep.exact_weight <= rep.bound.tight &&
                   *rep.exact_weight <= rep.bound.loose;
    } else {
        rep.mc = monte_carlo_failure_block(f, params, s, trials, seed, threads);
        rep.pass = rep.precondition_ok && rep.mc->upper <= rep.bound.loose.to_double();
    }
    return rep;
}

// Takes the raw formula F; preprocessing to F' happens here. Exact mode
// reports the trimmed weight against (128 r^2 n^3 q^4)^{s/2} and the
// exception mass (restrictions leaving >= l pigeons or holes unset)
// separately.
inline LemmaReport check_lemma3(const Dnf& f, const PhpInstance& inst, const Rational& q, int s,
                                CheckMode mode, long long trials = 100000, std::uint64_t seed = 0,
                                int threads = 1) {
    LemmaReport rep;
    rep.lemma = 3;
    rep.n = inst.holes;
    rep.r = f.r;
    rep.s = s;
    rep.q = q;
    rep.mode = mode;
    rep.bound = bound_value_l3(q, f.r, inst.holes, s);
    rep.precondition_ok = precondition_l3(q, f.r, inst.holes);
    if (!rep.precondition_ok) rep.precondition_note = "requires 0 < q < 1/2 and 128 r^2 n^3 q^4 < 1";
    Dnf fprime = php_preprocess(f, inst);
    PhpParams params{inst.holes, q};
    if (mode == CheckMode::Exact) {
        PhpFailureWeight w = exact_failure_weight_php(fprime, inst, params, s, threads);
        rep.exact_weight = w.trimmed;
        rep.exception_mass = w.exception_mass;
        rep.pass = rep.precondition_ok &&
                   weight_le_bound(w.trimmed, rep.bound.loose, rep.bound.half_exponent, s);
    } else {
        rep.mc = monte_carlo_failure_php(fprime, inst, params, s, trials, seed, threads);
        rep.pass = rep.precondition_ok &&
                   rep.mc->upper <= bound_approx(rep.bound.loose, rep.bound.half_exponent, s);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Injectivity sweeps: decode(encode(rho)) = rho for every rho in S, distinct
// witnesses for distinct rho, and the per-class weight sums from the proofs.
// ---------------------------------------------------------------------------

struct InjectivityReport {
    long long s_size = 0;
    long long violations = 0;
    long long duplicate_witnesses = 0;
    std::string first_violation;
    bool class_bounds_ok = true;
    Rational max_class_weight;
    std::string class_note;

    bool ok() const { return violations == 0 && duplicate_witnesses == 0 && class_bounds_ok; }
};

namespace detail {

inline std::string class_key(const WitnessIndep& w) {
    std::string k;
    for (const BetaEntry& e : w.beta) k += std::to_string(e.location) + (e.last ? "!" : ".");
    k += "|";
    for (bool b : w.pi) k += b ? '1' : '0';
    return k;
}

inline std::string class_key(const WitnessBlock& w) {
    std::string k;
    for (const BetaEntry& e : w.beta) k += std::to_string(e.location) + (e.last ? "!" : ".");
    k += "|";
    for (bool b : w.pi) k += b ? '1' : '0';
    k += "|";
    for (const auto& round : w.gamma) {
        for (bool b : round) k += b ? '1' : '0';
        k += ";";
    }
    return k;
}

inline std::string class_key(const WitnessPhp& w) {
    std::string k;
    for (const BetaEntry& e : w.beta) k += std::to_string(e.location) + (e.last ? "!" : ".");
    k += "|";
    for (const PhpReplyCode& c : w.pi)
        k += c.matches ? "1," : "0:" + std::to_string(c.index) + ",";
    return k;
}

inline int gamma_ones(const WitnessBlock& w) {
    int m = 0;
    for (const auto& round : w.gamma)
        for (bool b : round) m += b ? 1 : 0;
    return m;
}

}  // namespace detail

inline InjectivityReport sweep_injectivity_l1(const Dnf& f, const IndepParams& params, int s) {
    InjectivityReport rep;
    std::map<std::string, long long> seen;      // full witness -> count
    std::map<std::string, Rational> class_sum;  // (beta', pi') -> weight of the class
    enumerate_indep(params.n, [&](const Restriction& rho) {
        if (!depth_at_least_indep(f, rho, s)) return;
        ++rep.s_size;
        WitnessIndep w = encode_indep(f, rho, s);
        std::string full = witness_text(w);
        if (++seen[full] > 1 && rep.first_violation.empty()) {
            ++rep.duplicate_witnesses;
            rep.first_violation = "duplicate witness for rho=" + rho.to_string() + "\n" + full;
        }
        std::string why;
        auto back = decode_indep(f, w, s, &why);
        if (!back || !(*back == rho)) {
            ++rep.violations;
            if (rep.first_violation.empty())
                rep.first_violation = "decode(encode(rho)) != rho for rho=" + rho.to_string() +
                                      (back ? " (got " + back->to_string() + ")" : " (" + why + ")") +
                                      "\n" + full;
        }
        class_sum[detail::class_key(w)] += weight_indep(rho, params);
    });
    Rational cap = (Rational(2) * params.p / (Rational(1) - params.p)).pow(s);
    for (const auto& [key, sum] : class_sum) {
        if (sum > rep.max_class_weight) rep.max_class_weight = sum;
        if (sum > cap) {
            rep.class_bounds_ok = false;
            if (rep.class_note.empty())
                rep.class_note = "class " + key + " weighs " + sum.to_string() + " > (2p/(1-p))^s = " +
                                 cap.to_string();
        }
    }
    return rep;
}

inline InjectivityReport sweep_injectivity_l2(const Dnf& f, const BlockParams& params, int s) {
    InjectivityReport rep;
    std::map<std::string, long long> seen;
    std::map<std::string, std::pair<Rational, int>> class_sum;  // key -> (weight, gamma ones)
    enumerate_block(params.blocks, [&](const BlockOutcome& o) {
        if (!depth_at_least_block(f, o, params.blocks, s)) return;
        ++rep.s_size;
        WitnessBlock w = encode_block(f, o, params.blocks, s);
        std::string full = witness_text(w);
        if (++seen[full] > 1 && rep.first_violation.empty()) {
            ++rep.duplicate_witnesses;
            rep.first_violation = "duplicate witness for rho=" + o.to_string() + "\n" + full;
        }
        std::string why;
        auto back = decode_block(f, params.blocks, w, s, &why);
        if (!back || !(*back == o)) {
            ++rep.violations;
            if (rep.first_violation.empty())
                rep.first_violation = "decode(encode(rho)) != rho for rho=" + o.to_string() +
                                      (back ? " (got " + back->to_string() + ")" : " (" + why + ")") +
                                      "\n" + full;
        }
        auto& slot = class_sum[detail::class_key(w)];
        slot.first += weight_block(o, params);
        slot.second = detail::gamma_ones(w);
    });
    // Per-class cap (p/(1-p))^m (q/(1-q))^s with m the class's gamma ones.
    for (const auto& [key, slot] : class_sum) {
        const auto& [sum, m] = slot;
        Rational cap = (params.p / (Rational(1) - params.p)).pow(m) *
                       (params.q / (Rational(1) - params.q)).pow(s);
        if (sum > rep.max_class_weight) rep.max_class_weight = sum;
        if (sum > cap) {
            rep.class_bounds_ok = false;
            if (rep.class_note.empty())
                rep.class_note = "class " + key + " weighs " + sum.to_string() +
                                 " > (p/(1-p))^m (q/(1-q))^s = " + cap.to_string();
        }
    }
    return rep;
}

// fprime must already be preprocessed. The per-class cap uses the largest
// per-step unset-pigeon count u observed across encodings, valid whenever
// (1-q)/(qu) >= 1; outside that regime the class check is skipped and noted.
inline InjectivityReport sweep_injectivity_l3(const Dnf& fprime, const PhpInstance& inst,
                                              const PhpParams& params, int s) {
    InjectivityReport rep;
    std::map<std::string, long long> seen;
    std::map<std::string, Rational> class_sum;
    int max_unset_before_add = 0;
    int min_adds = -1;
    for (const PartialInjection& rho : enumerate_php(params.holes)) {
        if (!depth_at_least_php(fprime, inst, rho, s)) continue;
        ++rep.s_size;
        WitnessPhp w = encode_php(fprime, inst, rho, s);
        std::string full = witness_text(w);
        if (++seen[full] > 1 && rep.first_violation.empty()) {
            ++rep.duplicate_witnesses;
            rep.first_violation = "duplicate witness for rho=" + rho.to_string() + "\n" + full;
        }
        std::string why;
        auto back = decode_php(fprime, inst, w, s, &why);
        if (!back || !(*back == rho)) {
            ++rep.violations;
            if (rep.first_violation.empty())
                rep.first_violation = "decode(encode(rho)) != rho for rho=" + rho.to_string() +
                                      (back ? " (got " + back->to_string() + ")" : " (" + why + ")") +
                                      "\n" + full;
        }
        int adds = w.rho_sigma.size() - rho.size();
        if (min_adds < 0 || adds < min_adds) min_adds = adds;
        for (int step = 0; step < adds; ++step)
            max_unset_before_add =
                std::max(max_unset_before_add, params.holes + 1 - (rho.size() + step));
        class_sum[detail::class_key(w)] += weight_php(rho, params);
    }
    int need = (s + 1) / 2;
    Rational base = max_unset_before_add > 0
                        ? (Rational(1) - params.q) / (params.q * Rational(max_unset_before_add))
                        : Rational(1);
    if (rep.s_size > 0 && base >= Rational(1)) {
        Rational cap = (Rational(1) / base).pow(need);
        for (const auto& [key, sum] : class_sum) {
            if (sum > rep.max_class_weight) rep.max_class_weight = sum;
            if (sum > cap) {
                rep.class_bounds_ok = false;
                if (rep.class_note.empty())
                    rep.class_note = "class " + key + " weighs " + sum.to_string() +
                                     " > (qu/(1-q))^ceil(s/2) = " + cap.to_string();
            }
        }
    } else if (rep.s_size > 0) {
        rep.class_note = "per-class cap skipped: (1-q)/(qu) < 1 at this scale";
    }
    (void)min_adds;
    return rep;
}

}  // namespace switchlab
