#pragma once

#include "switchlab/formula.hpp"
#include "switchlab/rational.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

enum class BlockClass : unsigned char { ZeroBlock, StarBlock, AllOnes };

inline char block_class_char(BlockClass c) {
    return c == BlockClass::ZeroBlock ? 'Z' : c == BlockClass::StarBlock ? 'S' : 'A';
}

struct BlockParams {
    BlockStructure blocks;
    Rational p;
    Rational q;

    void validate() const {
        if (p < Rational(0) || p > Rational(1) || q < Rational(0) || q > Rational(1))
            throw std::invalid_argument("BlockParams: p, q outside [0, 1]");
    }
};

// An outcome of the two-stage draw. The class tags are redundant given the
// values (a block's non-1s are homogeneous) but keep weights and codecs
// uniform, and make the all-1s corner explicit.
struct BlockOutcome {
    Restriction values;
    std::vector<BlockClass> classes;

    friend bool operator==(const BlockOutcome& a, const BlockOutcome& b) {
        return a.values == b.values && a.classes == b.classes;
    }

    std::string to_string() const {
        std::string s = values.to_string();
        s += " [";
        for (BlockClass c : classes) s += block_class_char(c);
        s += "]";
        return s;
    }
};

namespace detail {

// Throws unless the block's values are consistent with its class tag.
inline void check_block_consistency(const BlockOutcome& o, const BlockStructure& bs, int b) {
    int non_ones = 0;
    for (VarId v : bs.blocks[b]) {
        Value w = o.values[v];
        if (w == Value::One) continue;
        ++non_ones;
        BlockClass expect = (w == Value::Zero) ? BlockClass::ZeroBlock : BlockClass::StarBlock;
        if (o.classes[b] != expect)
            throw std::invalid_argument("block outcome: values inconsistent with class tag");
    }
    if (non_ones == 0 && o.classes[b] != BlockClass::AllOnes)
        throw std::invalid_argument("block outcome: all-1 block must be tagged AllOnes");
}

}  // namespace detail

// Weight is the product over blocks: a block with a ones and b > 0 non-ones
// weighs (1-p)^a p^b (1-q) as a 0-block and (1-p)^a p^b q as a *-block; an
// all-1 block weighs (1-p)^{|B|}.
inline Rational weight_block(const BlockOutcome& o, const BlockParams& params) {
    const BlockStructure& bs = params.blocks;
    if (o.values.n() != bs.n || static_cast<int>(o.classes.size()) != bs.block_count())
        throw std::invalid_argument("weight_block: outcome does not match block structure");
    Rational w(1);
    Rational not_p = Rational(1) - params.p;
    Rational not_q = Rational(1) - params.q;
    for (int b = 0; b < bs.block_count(); ++b) {
        detail::check_block_consistency(o, bs, b);
        int ones = 0, rest = 0;
        for (VarId v : bs.blocks[b])
            (o.values[v] == Value::One ? ones : rest)++;
        w *= not_p.pow(ones) * params.p.pow(rest);
        if (o.classes[b] == BlockClass::ZeroBlock)
            w *= not_q;
        else if (o.classes[b] == BlockClass::StarBlock)
            w *= params.q;
    }
    return w;
}

// Stage 1 sets each variable to 1 with probability 1-p; stage 2 zeroes each
// surviving block's stars with probability 1-q.
inline BlockOutcome sample_block(const BlockParams& params, Rng& rng) {
    params.validate();
    const BlockStructure& bs = params.blocks;
    BlockOutcome o{Restriction(bs.n), {}};
    Rational not_p = Rational(1) - params.p;
    Rational not_q = Rational(1) - params.q;
    for (VarId v = 0; v < bs.n; ++v)
        o.values[v] = rng.bernoulli(not_p) ? Value::One : Value::Star;
    o.classes.reserve(bs.blocks.size());
    for (const auto& block : bs.blocks) {
        bool any_star = false;
        for (VarId v : block) any_star |= (o.values[v] == Value::Star);
        if (!any_star) {
            o.classes.push_back(BlockClass::AllOnes);
            continue;
        }
        if (rng.bernoulli(not_q)) {
            for (VarId v : block)
                if (o.values[v] == Value::Star) o.values[v] = Value::Zero;
            o.classes.push_back(BlockClass::ZeroBlock);
        } else {
            o.classes.push_back(BlockClass::StarBlock);
        }
    }
    return o;
}

// g(rho): in every *-block, all starred variables except the first (in the
// block's internal order) become 1.
inline Restriction g_extension(const BlockOutcome& o, const BlockStructure& bs) {
    Restriction out = o.values;
    for (int b = 0; b < bs.block_count(); ++b) {
        if (o.classes[b] != BlockClass::StarBlock) continue;
        bool first_seen = false;
        for (VarId v : bs.blocks[b]) {
            if (out[v] != Value::Star) continue;
            if (!first_seen)
                first_seen = true;
            else
                out[v] = Value::One;
        }
    }
    return out;
}

// Enumeration: per block of size k there are 2^{k+1} - 1 outcomes, indexed
// as 0 -> all ones, then (non-1 position mask, class) pairs; blocks combine
// in mixed radix with block 0 least significant.
inline long long block_block_outcomes(int block_size) {
    return (2LL << block_size) - 1;
}

inline long long block_outcome_count(const BlockStructure& bs) {
    long long total = 1;
    for (const auto& block : bs.blocks) {
        long long per = block_block_outcomes(static_cast<int>(block.size()));
        if (total > (1LL << 62) / per)
            throw std::overflow_error("block_outcome_count: outcome space too large");
        total *= per;
    }
    return total;
}

inline BlockOutcome block_outcome(const BlockStructure& bs, long long index) {
    BlockOutcome o{Restriction(bs.n, Value::One), {}};
    o.classes.reserve(bs.blocks.size());
    for (const auto& block : bs.blocks) {
        int k = static_cast<int>(block.size());
        long long per = block_block_outcomes(k);
        long long code = index % per;
        index /= per;
        if (code == 0) {
            o.classes.push_back(BlockClass::AllOnes);
            continue;
        }
        long long mask = (code - 1) / 2 + 1;  // nonzero subset of non-1 positions
        bool zero_block = ((code - 1) % 2) == 0;
        for (int j = 0; j < k; ++j)
            if ((mask >> j) & 1)
                o.values[block[j]] = zero_block ? Value::Zero : Value::Star;
        o.classes.push_back(zero_block ? BlockClass::ZeroBlock : BlockClass::StarBlock);
    }
    return o;
}

template <typename Fn>
void enumerate_block(const BlockStructure& bs, Fn&& fn) {
    long long total = block_outcome_count(bs);
    for (long long i = 0; i < total; ++i) fn(block_outcome(bs, i));
}

}  // namespace switchlab
