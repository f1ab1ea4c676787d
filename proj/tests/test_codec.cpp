#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "switchlab/corpus.hpp"
#include "switchlab/dist_independent.hpp"
#include "switchlab/witness_codec.hpp"

using namespace switchlab;

namespace {

Restriction rho_of(const std::string& s) {
    Restriction rho(static_cast<int>(s.size()));
    for (int i = 0; i < rho.n(); ++i)
        rho[i] = s[i] == '0' ? Value::Zero : s[i] == '1' ? Value::One : Value::Star;
    return rho;
}

BlockOutcome block_outcome_of(const BlockStructure& bs, const std::string& vals) {
    BlockOutcome o{rho_of(vals), {}};
    for (const auto& block : bs.blocks) {
        bool zero = false, star = false;
        for (VarId v : block) {
            zero |= o.values[v] == Value::Zero;
            star |= o.values[v] == Value::Star;
        }
        o.classes.push_back(zero ? BlockClass::ZeroBlock
                                 : star ? BlockClass::StarBlock : BlockClass::AllOnes);
    }
    return o;
}

}  // namespace

TEST_CASE("lemma 1: worked encode example") {
    Dnf f{2, 1, {Term{{{0, true}}}, Term{{{1, true}}}}};
    Restriction rho = rho_of("**");
    WitnessIndep w = encode_indep(f, rho, 1);
    CHECK(w.rho_sigma == rho_of("1*"));
    REQUIRE(w.beta.size() == 1);
    CHECK(w.beta[0].location == 0);
    CHECK(w.beta[0].last);
    CHECK(w.pi == std::vector<bool>{false});
    CHECK(w.round_terms == std::vector<int>{0});

    auto back = decode_indep(f, w, 1);
    REQUIRE(back.has_value());
    CHECK(*back == rho);

    // weight identity at p = 1/3: the factor (1-p)/(2p) is exactly 1
    IndepParams params{2, Rational(1, 3)};
    CHECK(weight_indep(w.rho_sigma, params) == weight_indep(rho, params));

    CHECK_THROWS_AS(encode_indep(f, rho, 3), std::invalid_argument);
}

TEST_CASE("lemma 1: weight identity weight(rho sigma) = ((1-p)/2p)^s weight(rho)") {
    for (const Rational& p : {Rational(1, 16), Rational(1, 10), Rational(2, 5)}) {
        for (const Dnf& f : canonical_dnfs(3, 2, 2)) {
            IndepParams params{3, p};
            Rational factor = (Rational(1) - p) / (Rational(2) * p);
            for (int s = 1; s <= 2; ++s) {
                enumerate_indep(3, [&](const Restriction& rho) {
                    if (!depth_at_least_indep(f, rho, s)) return;
                    WitnessIndep w = encode_indep(f, rho, s);
                    CHECK(weight_indep(w.rho_sigma, params) ==
                          factor.pow(s) * weight_indep(rho, params));
                });
            }
        }
    }
}

TEST_CASE("lemma 1: decode is a left inverse on exhaustive corpora") {
    for (int n = 1; n <= 3; ++n) {
        for (const Dnf& f : canonical_dnfs(n, 2, 2)) {
            for (int s = 1; s <= 2; ++s) {
                enumerate_indep(n, [&](const Restriction& rho) {
                    if (!depth_at_least_indep(f, rho, s)) return;
                    WitnessIndep w = encode_indep(f, rho, s);
                    std::string why;
                    auto back = decode_indep(f, w, s, &why);
                    REQUIRE_MESSAGE(back.has_value(), why);
                    CHECK(*back == rho);
                });
            }
        }
    }
}

TEST_CASE("lemma 1: corrupted witnesses decode to failures, not restrictions") {
    Dnf f{3, 2, {Term{{{0, true}, {1, true}}}, Term{{{2, true}}}}};
    Restriction rho = rho_of("***");
    WitnessIndep w = encode_indep(f, rho, 2);

    WitnessIndep bad = w;
    bad.beta[0].location = 5;  // out of the term
    CHECK_FALSE(decode_indep(f, bad, 2).has_value());

    bad = w;
    bad.rho_sigma[0] = Value::Zero;  // beta ends up pointing at a 0-set variable
    std::string why;
    CHECK_FALSE(decode_indep(f, bad, 2, &why).has_value());
    CHECK_FALSE(why.empty());

    bad = w;
    bad.rho_sigma[0] = Value::Star;
    CHECK_FALSE(decode_indep(f, bad, 2).has_value());

    bad = w;
    bad.beta.pop_back();
    bad.pi.pop_back();
    CHECK_FALSE(decode_indep(f, bad, 2).has_value());

    // flipping a pi bit may still decode structurally, but then it must
    // round-trip to a different witness or fail; it must never return rho
    bad = w;
    bad.pi[0] = !bad.pi[0];
    auto back = decode_indep(f, bad, 2);
    if (back) CHECK_FALSE(*back == rho);
}

TEST_CASE("lemma 2: worked encode example with gamma") {
    Dnf f{2, 2, {Term{{{0, true}, {1, true}}}}};
    BlockStructure bs(2, {{0, 1}});
    BlockOutcome rho = block_outcome_of(bs, "**");
    WitnessBlock w = encode_block(f, rho, bs, 1);
    CHECK(w.rho_sigma.values == rho_of("11"));
    CHECK(w.rho_sigma.classes == std::vector<BlockClass>{BlockClass::AllOnes});
    REQUIRE(w.beta.size() == 1);
    CHECK(w.beta[0].location == 0);
    CHECK(w.pi == std::vector<bool>{false});
    REQUIRE(w.gamma.size() == 1);
    CHECK(w.gamma[0] == std::vector<bool>{true, true});

    auto back = decode_block(f, bs, w, 1);
    REQUIRE(back.has_value());
    CHECK(*back == rho);

    // weight ratio at p=q=1/4: 36 against the bound 27
    BlockParams params{bs, Rational(1, 4), Rational(1, 4)};
    Rational ratio = weight_block(w.rho_sigma, params) / weight_block(rho, params);
    CHECK(ratio == Rational(36));
    CHECK(ratio >= Rational(27));
}

TEST_CASE("lemma 2: weight inequality with exact per-block factors") {
    std::vector<BlockStructure> structures;
    structures.push_back(BlockStructure(3, {{0, 1}, {2}}));
    structures.push_back(BlockStructure(4, {{1, 0}, {3, 2}}));
    Rational p(1, 16), q(1, 16);
    for (const auto& bs : structures) {
        BlockParams params{bs, p, q};
        for (const Dnf& f : canonical_dnfs(bs.n, 2, 2)) {
            for (int s = 1; s <= 2; ++s) {
                enumerate_block(bs, [&](const BlockOutcome& rho) {
                    if (!depth_at_least_block(f, rho, bs, s)) return;
                    WitnessBlock w = encode_block(f, rho, bs, s);
                    // per-block factor product: (1-p)/p per recorded 1, then
                    // (1-q)/q or 1/q depending on the landing class
                    Rational expect(1);
                    int m = 0;
                    for (const auto& round : w.gamma)
                        for (bool bit : round) m += bit ? 1 : 0;
                    expect *= ((Rational(1) - p) / p).pow(m);
                    for (std::size_t b = 0; b < w.rho_sigma.classes.size(); ++b) {
                        if (rho.classes[b] == w.rho_sigma.classes[b]) continue;
                        expect *= w.rho_sigma.classes[b] == BlockClass::AllOnes
                                      ? Rational(1) / q
                                      : (Rational(1) - q) / q;
                    }
                    Rational ratio =
                        weight_block(w.rho_sigma, params) / weight_block(rho, params);
                    CHECK(ratio == expect);
                    CHECK(ratio >= ((Rational(1) - p) / p).pow(m) *
                                       ((Rational(1) - q) / q).pow(s));
                });
            }
        }
    }
}

TEST_CASE("lemma 2: decode is a left inverse on exhaustive corpora") {
    std::vector<BlockStructure> structures;
    structures.push_back(BlockStructure(2, {{0, 1}}));
    structures.push_back(BlockStructure(3, {{0, 1}, {2}}));
    structures.push_back(BlockStructure(4, {{1, 0}, {3, 2}}));
    for (const auto& bs : structures) {
        for (const Dnf& f : canonical_dnfs(bs.n, 2, 2)) {
            for (int s = 1; s <= 2; ++s) {
                enumerate_block(bs, [&](const BlockOutcome& rho) {
                    if (!depth_at_least_block(f, rho, bs, s)) return;
                    WitnessBlock w = encode_block(f, rho, bs, s);
                    std::string why;
                    auto back = decode_block(f, bs, w, s, &why);
                    REQUIRE_MESSAGE(back.has_value(), why);
                    CHECK(*back == rho);
                });
            }
        }
    }
}

TEST_CASE("lemma 2: corrupted witnesses fail to decode") {
    Dnf f{2, 2, {Term{{{0, true}, {1, true}}}}};
    BlockStructure bs(2, {{0, 1}});
    WitnessBlock w = encode_block(f, block_outcome_of(bs, "**"), bs, 1);

    WitnessBlock bad = w;
    bad.gamma[0] = {false, false};
    CHECK_FALSE(decode_block(f, bs, bad, 1).has_value());

    bad = w;
    bad.beta[0].location = 9;
    CHECK_FALSE(decode_block(f, bs, bad, 1).has_value());

    bad = w;
    bad.gamma.push_back({true});
    CHECK_FALSE(decode_block(f, bs, bad, 1).has_value());
}

TEST_CASE("lemma 3: worked encode example") {
    PhpInstance inst(2);
    Dnf fp{inst.n_vars(), 1, {Term{{{inst.var(0, 0), true}}}}};
    PartialInjection empty(2);
    WitnessPhp w = encode_php(fp, inst, empty, 1);
    CHECK(w.rho_sigma.size() == 1);
    CHECK(w.rho_sigma.hole_of(0) == 0);
    REQUIRE(w.beta.size() == 1);
    CHECK(w.beta[0].location == 0);
    REQUIRE(w.pi.size() == 1);
    CHECK(w.pi[0].matches);  // the first branch answers the literal's own hole

    auto back = decode_php(fp, inst, w, 1);
    REQUIRE(back.has_value());
    CHECK(*back == empty);
}

TEST_CASE("lemma 3: decode is a left inverse on exhaustive corpora") {
    for (int holes = 1; holes <= 2; ++holes) {
        PhpInstance inst(holes);
        for (const Dnf& f : canonical_php_dnfs(inst, 2, 2, true)) {
            for (int s = 1; s <= 3; ++s) {
                for (const PartialInjection& rho : enumerate_php(holes)) {
                    if (!depth_at_least_php(f, inst, rho, s)) continue;
                    WitnessPhp w = encode_php(f, inst, rho, s);
                    std::string why;
                    auto back = decode_php(f, inst, w, s, &why);
                    REQUIRE_MESSAGE(back.has_value(), why);
                    CHECK(*back == rho);
                }
            }
        }
    }
}

TEST_CASE("lemma 3: rho sigma adds at least ceil(s/2) pigeons") {
    PhpInstance inst(2);
    for (const Dnf& f : canonical_php_dnfs(inst, 2, 2, true)) {
        for (int s = 1; s <= 3; ++s) {
            for (const PartialInjection& rho : enumerate_php(2)) {
                if (!depth_at_least_php(f, inst, rho, s)) continue;
                WitnessPhp w = encode_php(f, inst, rho, s);
                CHECK(w.rho_sigma.size() - rho.size() >= (s + 1) / 2);
            }
        }
    }
}

TEST_CASE("lemma 3: trim precondition is enforced when given") {
    PhpInstance inst(2);
    Dnf fp{inst.n_vars(), 1, {Term{{{inst.var(0, 0), true}}}}};
    PartialInjection empty(2);  // 3 pigeons and 2 holes unset
    CHECK_THROWS_AS(encode_php(fp, inst, empty, 1, Rational(2)), std::invalid_argument);
    CHECK_NOTHROW(encode_php(fp, inst, empty, 1, Rational(4)));
}

TEST_CASE("lemma 3: malformed witnesses fail to decode") {
    PhpInstance inst(2);
    Dnf fp{inst.n_vars(), 1, {Term{{{inst.var(0, 0), true}}}}};
    WitnessPhp w = encode_php(fp, inst, PartialInjection(2), 1);

    WitnessPhp bad = w;
    bad.pi[0] = {false, 57};  // index far outside the pool
    CHECK_FALSE(decode_php(fp, inst, bad, 1).has_value());

    bad = w;
    bad.beta[0].location = 3;
    CHECK_FALSE(decode_php(fp, inst, bad, 1).has_value());

    bad = w;
    bad.pi.push_back({true, -1});
    CHECK_FALSE(decode_php(fp, inst, bad, 2).has_value());
}

TEST_CASE("witnesses of distinct restrictions are distinct") {
    Dnf f{3, 2, {Term{{{0, true}, {1, true}}}, Term{{{2, true}, {0, false}}}}};
    for (int s = 1; s <= 2; ++s) {
        std::set<std::string> seen;
        long long members = 0;
        enumerate_indep(3, [&](const Restriction& rho) {
            if (!depth_at_least_indep(f, rho, s)) return;
            ++members;
            CHECK(seen.insert(witness_text(encode_indep(f, rho, s))).second);
        });
        CHECK(static_cast<long long>(seen.size()) == members);
    }
}

TEST_CASE("random deep formulas round-trip at all three codecs") {
    Rng gen(20260808);
    // lemma 1: wider and deeper than the canonical corpora
    for (int rep = 0; rep < 60; ++rep) {
        Dnf f = random_dnf(5, 3, 4, gen);
        IndepParams params{5, Rational(1, 2)};
        Restriction rho = sample_indep(params, gen);
        for (int s = 1; s <= 4; ++s) {
            if (!depth_at_least_indep(f, rho, s)) continue;
            WitnessIndep w = encode_indep(f, rho, s);
            std::string why;
            auto back = decode_indep(f, w, s, &why);
            REQUIRE_MESSAGE(back.has_value(), why);
            CHECK(*back == rho);
            // the exact weight identity holds at any p
            IndepParams weigh{5, Rational(1, 3)};
            Rational factor = ((Rational(1) - weigh.p) / (Rational(2) * weigh.p)).pow(s);
            CHECK(weight_indep(w.rho_sigma, weigh) == factor * weight_indep(rho, weigh));
        }
    }
    // lemma 2: three blocks of two, sampled outcomes
    BlockStructure bs(6, {{1, 0}, {2, 3}, {5, 4}});
    BlockParams bp{bs, Rational(1, 2), Rational(1, 2)};
    for (int rep = 0; rep < 60; ++rep) {
        Dnf f = random_dnf(6, 2, 3, gen);
        BlockOutcome rho = sample_block(bp, gen);
        for (int s = 1; s <= 3; ++s) {
            if (!depth_at_least_block(f, rho, bs, s)) continue;
            WitnessBlock w = encode_block(f, rho, bs, s);
            std::string why;
            auto back = decode_block(f, bs, w, s, &why);
            REQUIRE_MESSAGE(back.has_value(), why);
            CHECK(*back == rho);
        }
    }
    // lemma 3: three holes, sampled injections, random positive formulas
    PhpInstance inst(3);
    std::vector<Term> terms = canonical_php_terms(inst, 2, true);
    PhpParams pp{3, Rational(1, 2)};
    for (int rep = 0; rep < 60; ++rep) {
        Dnf f{inst.n_vars(), 2, {}};
        for (int t = 0; t < 3; ++t)
            f.terms.push_back(terms[static_cast<std::size_t>(gen.uniform(terms.size()))]);
        PartialInjection rho = sample_php(pp, gen);
        for (int s = 1; s <= 3; ++s) {
            if (!depth_at_least_php(f, inst, rho, s)) continue;
            WitnessPhp w = encode_php(f, inst, rho, s);
            std::string why;
            auto back = decode_php(f, inst, w, s, &why);
            REQUIRE_MESSAGE(back.has_value(), why);
            CHECK(*back == rho);
        }
    }
}

TEST_CASE("corrupted witnesses never decode back to the original restriction") {
    // Decoders verify membership in the code's image, so any mutation either
    // fails outright or decodes to a different restriction.
    Rng gen(99991);
    Dnf f{4, 2, {Term{{{0, true}, {1, true}}}, Term{{{2, true}, {3, false}}}, Term{{{1, false}}}}};
    IndepParams params{4, Rational(1, 2)};
    int mutations_tried = 0;
    for (int rep = 0; rep < 40; ++rep) {
        Restriction rho = sample_indep(params, gen);
        if (!depth_at_least_indep(f, rho, 2)) continue;
        WitnessIndep w = encode_indep(f, rho, 2);
        for (int mut = 0; mut < 8; ++mut) {
            WitnessIndep bad = w;
            switch (gen.uniform(4)) {
                case 0: {
                    std::size_t at = gen.uniform(bad.pi.size());
                    bad.pi[at] = !bad.pi[at];
                    break;
                }
                case 1:
                    bad.beta[gen.uniform(bad.beta.size())].location =
                        static_cast<int>(gen.uniform(3));
                    break;
                case 2:
                    bad.beta[gen.uniform(bad.beta.size())].last ^= true;
                    break;
                default: {
                    VarId v = static_cast<VarId>(gen.uniform(4));
                    bad.rho_sigma[v] = static_cast<Value>(gen.uniform(3));
                    break;
                }
            }
            if (bad == w) continue;
            ++mutations_tried;
            auto back = decode_indep(f, bad, 2);
            if (back) CHECK_FALSE(*back == rho);
        }
    }
    CHECK(mutations_tried > 100);
}

TEST_CASE("code space counts match the stated formulas") {
    CodeSpace c1 = code_space_indep(2, 3);
    CHECK(c1.beta_strings == Rational(64));
    CHECK(c1.pi_strings == Rational(8));
    CHECK_FALSE(c1.gamma_strings.has_value());

    CodeSpace c2 = code_space_block(2, 3);
    CHECK(c2.beta_strings == Rational(64));
    CHECK(c2.pi_strings == Rational(8));
    REQUIRE(c2.gamma_strings.has_value());
    CHECK(*c2.gamma_strings == Rational(64));  // 2^{rs} = 2^6

    CodeSpace c3 = code_space_php(2, 2, Rational(3, 2));  // l = 2qn = 3/2
    CHECK(c3.beta_strings == Rational(16));
    CHECK(c3.pi_strings == Rational(9));  // (2l)^s = 3^2
}

TEST_CASE("witness text is one round per line") {
    Dnf f{2, 1, {Term{{{0, true}}}, Term{{{1, true}}}}};
    WitnessIndep w = encode_indep(f, rho_of("**"), 2);
    CHECK(witness_text(w) ==
          "witness lemma=1\nrho_sigma 11\nround term=0 beta=0 pi=0\nround term=1 beta=0 pi=0\n");
}
