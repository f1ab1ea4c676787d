#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "switchlab/dist_block.hpp"

using namespace switchlab;

namespace {

BlockStructure two_blocks_of_two() { return BlockStructure(4, {{0, 1}, {2, 3}}); }

BlockOutcome outcome(const BlockStructure& bs, const std::string& vals,
                     const std::string& classes) {
    BlockOutcome o{Restriction(bs.n), {}};
    for (int v = 0; v < bs.n; ++v)
        o.values[v] = vals[v] == '0' ? Value::Zero : vals[v] == '1' ? Value::One : Value::Star;
    for (char c : classes)
        o.classes.push_back(c == 'Z' ? BlockClass::ZeroBlock
                                     : c == 'S' ? BlockClass::StarBlock : BlockClass::AllOnes);
    return o;
}

}  // namespace

TEST_CASE("per-block weights follow the two-stage formula") {
    // block of size 3 with one 1 and two non-1s at p=q=1/4
    BlockStructure bs(3, {{0, 1, 2}});
    BlockParams params{bs, Rational(1, 4), Rational(1, 4)};
    CHECK(weight_block(outcome(bs, "100", "Z"), params) == Rational(9, 256));

    BlockStructure bs2(2, {{0, 1}});
    BlockParams params2{bs2, Rational(1, 4), Rational(1, 4)};
    CHECK(weight_block(outcome(bs2, "11", "A"), params2) == Rational(9, 16));
    // star-block variant picks up q instead of 1-q
    CHECK(weight_block(outcome(bs2, "1*", "S"), params2) == Rational(3, 64));
}

TEST_CASE("weight_block rejects inconsistent value/class pairs") {
    BlockStructure bs(2, {{0, 1}});
    BlockParams params{bs, Rational(1, 4), Rational(1, 4)};
    CHECK_THROWS_AS(weight_block(outcome(bs, "11", "Z"), params), std::invalid_argument);
    CHECK_THROWS_AS(weight_block(outcome(bs, "0*", "Z"), params), std::invalid_argument);
    CHECK_THROWS_AS(weight_block(outcome(bs, "00", "S"), params), std::invalid_argument);
}

TEST_CASE("single block of size 1 enumerates to the three stated outcomes") {
    BlockStructure bs(1, {{0}});
    BlockParams params{bs, Rational(1, 5), Rational(1, 7)};
    std::vector<std::pair<std::string, Rational>> got;
    enumerate_block(bs, [&](const BlockOutcome& o) {
        got.emplace_back(o.to_string(), weight_block(o, params));
    });
    REQUIRE(got.size() == 3);
    CHECK(got[0] == std::pair<std::string, Rational>{"1 [A]", Rational(4, 5)});
    CHECK(got[1] == std::pair<std::string, Rational>{"0 [Z]", Rational(1, 5) * Rational(6, 7)});
    CHECK(got[2] == std::pair<std::string, Rational>{"* [S]", Rational(1, 5) * Rational(1, 7)});
}

TEST_CASE("two singleton blocks give nine outcomes") {
    BlockStructure bs(2, {{0}, {1}});
    int count = 0;
    enumerate_block(bs, [&](const BlockOutcome&) { ++count; });
    CHECK(count == 9);
    CHECK(block_outcome_count(bs) == 9);
}

TEST_CASE("block outcome weights sum to exactly 1") {
    std::vector<BlockStructure> structures;
    structures.push_back(BlockStructure(1, {{0}}));
    structures.push_back(BlockStructure(4, {{0, 1}, {2, 3}}));
    structures.push_back(BlockStructure(5, {{1, 0}, {2}, {4, 3}}));
    structures.push_back(BlockStructure(6, {{0, 1, 2}, {3, 4, 5}}));
    for (const auto& bs : structures) {
        for (auto [p, q] : {std::pair{Rational(1, 4), Rational(1, 4)},
                            std::pair{Rational(1, 16), Rational(1, 16)},
                            std::pair{Rational(2, 5), Rational(1, 3)}}) {
            BlockParams params{bs, p, q};
            Rational sum(0);
            enumerate_block(bs, [&](const BlockOutcome& o) { sum += weight_block(o, params); });
            CHECK(sum == Rational(1));
        }
    }
}

TEST_CASE("full-outcome weight is the product of per-block weights") {
    BlockStructure bs = two_blocks_of_two();
    BlockParams params{bs, Rational(1, 4), Rational(1, 3)};
    BlockStructure left(2, {{0, 1}});
    BlockParams left_params{left, params.p, params.q};
    enumerate_block(bs, [&](const BlockOutcome& o) {
        BlockOutcome first{Restriction(2), {o.classes[0]}};
        BlockOutcome second{Restriction(2), {o.classes[1]}};
        for (int v = 0; v < 2; ++v) {
            first.values[v] = o.values[v];
            second.values[v] = o.values[v + 2];
        }
        CHECK(weight_block(o, params) ==
              weight_block(first, left_params) * weight_block(second, left_params));
    });
}

TEST_CASE("g_extension keeps the first star per star-block and touches nothing else") {
    BlockStructure bs(3, {{0, 1, 2}});
    BlockOutcome o = outcome(bs, "***", "S");
    Restriction g = g_extension(o, bs);
    CHECK(g.to_string() == "*11");

    // the block's internal order decides "first", not the variable index
    BlockStructure reversed(3, {{2, 1, 0}});
    Restriction g2 = g_extension(outcome(reversed, "***", "S"), reversed);
    CHECK(g2.to_string() == "11*");

    BlockStructure bs2(2, {{0, 1}});
    CHECK(g_extension(outcome(bs2, "1*", "S"), bs2).to_string() == "1*");
    CHECK(g_extension(outcome(bs2, "00", "Z"), bs2).to_string() == "00");
}

TEST_CASE("sampler matches class probabilities within 3 sigma") {
    const int trials = 100000;
    BlockStructure bs = two_blocks_of_two();
    BlockParams params{bs, Rational(1, 2), Rational(1, 3)};
    Rng rng(5150);
    int all_ones = 0, zero_blocks = 0, star_blocks = 0;
    for (int i = 0; i < trials; ++i) {
        BlockOutcome o = sample_block(params, rng);
        switch (o.classes[0]) {
            case BlockClass::AllOnes: ++all_ones; break;
            case BlockClass::ZeroBlock: ++zero_blocks; break;
            case BlockClass::StarBlock: ++star_blocks; break;
        }
        for (int b = 0; b < 2; ++b) {
            // homogeneity: non-1 values within one block all agree
            bool has_zero = false, has_star = false;
            for (VarId v : bs.blocks[b]) {
                has_zero |= o.values[v] == Value::Zero;
                has_star |= o.values[v] == Value::Star;
            }
            CHECK_FALSE((has_zero && has_star));
        }
    }
    // block 0: P(AllOnes) = (1-p)^2 = 1/4; conditional Z:S split is 2/3 : 1/3
    double p_all = 0.25;
    double sigma_all = std::sqrt(p_all * (1 - p_all) * trials);
    CHECK(std::abs(all_ones - p_all * trials) <= 3 * sigma_all);
    double p_zero = 0.75 * (2.0 / 3.0), p_star = 0.75 * (1.0 / 3.0);
    CHECK(std::abs(zero_blocks - p_zero * trials) <=
          3 * std::sqrt(p_zero * (1 - p_zero) * trials));
    CHECK(std::abs(star_blocks - p_star * trials) <=
          3 * std::sqrt(p_star * (1 - p_star) * trials));
}

TEST_CASE("degenerate parameters") {
    BlockStructure bs(2, {{0, 1}});
    Rng rng(1);
    // q = 1: stage 2 never zeroes, so no 0-blocks
    BlockParams no_zero{bs, Rational(1, 2), Rational(1)};
    for (int i = 0; i < 200; ++i)
        CHECK(sample_block(no_zero, rng).classes[0] != BlockClass::ZeroBlock);
    // p = 0: everything is 1
    BlockParams all_one{bs, Rational(0), Rational(1, 2)};
    BlockOutcome o = sample_block(all_one, rng);
    CHECK(o.values.to_string() == "11");
    CHECK(o.classes[0] == BlockClass::AllOnes);
}
