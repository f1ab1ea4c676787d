#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "switchlab/dist_independent.hpp"

using namespace switchlab;

TEST_CASE("weight_indep matches the (1-p)/2, (1-p)/2, p split") {
    IndepParams params{3, Rational(1, 3)};
    Restriction rho(3);
    rho[0] = Value::One;
    rho[1] = Value::Zero;
    rho[2] = Value::Star;
    CHECK(weight_indep(rho, params) == Rational(1, 27));

    Restriction all_star(3);
    CHECK(weight_indep(all_star, params) == Rational(1, 27));
    CHECK(weight_indep(Restriction(5), IndepParams{5, Rational(1, 3)}) == Rational(1, 243));
}

TEST_CASE("weight_indep depends only on the value counts") {
    IndepParams params{4, Rational(2, 7)};
    Restriction a(4), b(4);
    a[0] = Value::One;
    a[1] = Value::Zero;
    a[2] = Value::Star;
    a[3] = Value::Star;
    b[0] = Value::Star;
    b[1] = Value::One;
    b[2] = Value::Star;
    b[3] = Value::Zero;
    CHECK(weight_indep(a, params) == weight_indep(b, params));
}

TEST_CASE("enumeration is ternary counting, variable 0 least significant") {
    CHECK(indep_outcome_count(0) == 1);
    CHECK(indep_outcome_count(1) == 3);
    CHECK(indep_outcome_count(2) == 9);

    std::vector<std::string> seen;
    enumerate_indep(1, [&](const Restriction& rho) { seen.push_back(rho.to_string()); });
    CHECK(seen == std::vector<std::string>{"0", "1", "*"});

    std::vector<std::string> two;
    enumerate_indep(2, [&](const Restriction& rho) { two.push_back(rho.to_string()); });
    CHECK(two.size() == 9);
    std::sort(two.begin(), two.end());
    CHECK(std::unique(two.begin(), two.end()) == two.end());
}

TEST_CASE("weights sum to exactly 1 over the full enumeration") {
    for (int n = 0; n <= 6; ++n) {
        for (const Rational& p : {Rational(1, 3), Rational(1, 16), Rational(3, 10)}) {
            IndepParams params{n, p};
            Rational sum(0);
            enumerate_indep(n, [&](const Restriction& rho) { sum += weight_indep(rho, params); });
            CHECK(sum == Rational(1));
        }
    }
}

TEST_CASE("degenerate p values behave as stated") {
    Rng rng(7);
    IndepParams all_star{4, Rational(1)};
    CHECK(sample_indep(all_star, rng).count(Value::Star) == 4);
    IndepParams total{4, Rational(0)};
    CHECK(sample_indep(total, rng).count(Value::Star) == 0);
}

TEST_CASE("sampler frequencies match p within 3 sigma") {
    const int trials = 100000;
    IndepParams params{4, Rational(1, 5)};
    double p = 0.2;
    std::vector<int> stars(4, 0);
    int ones = 0;
    Rng rng(2024);
    for (int i = 0; i < trials; ++i) {
        Restriction rho = sample_indep(params, rng);
        for (int v = 0; v < 4; ++v) {
            if (rho[v] == Value::Star) ++stars[v];
            if (rho[v] == Value::One) ++ones;
        }
    }
    double sigma = std::sqrt(p * (1 - p) * trials);
    for (int v = 0; v < 4; ++v) CHECK(std::abs(stars[v] - p * trials) <= 3 * sigma);
    // conditional 0/1 split is symmetric: P(one) = (1-p)/2 per variable
    double p1 = (1 - p) / 2;
    double sigma1 = std::sqrt(p1 * (1 - p1) * trials * 4);
    CHECK(std::abs(ones - p1 * trials * 4) <= 3 * sigma1);
}

TEST_CASE("sampler agrees with weight_indep on a fixed tiny restriction") {
    // P(rho = (1, *)) at n=2, p=1/4 should be (3/8)*(1/4) = 3/32.
    IndepParams params{2, Rational(1, 4)};
    Restriction target(2);
    target[0] = Value::One;
    target[1] = Value::Star;
    const int trials = 200000;
    int hits = 0;
    Rng rng(99);
    for (int i = 0; i < trials; ++i)
        if (sample_indep(params, rng) == target) ++hits;
    double expect = weight_indep(target, params).to_double();
    double sigma = std::sqrt(expect * (1 - expect) * trials);
    CHECK(std::abs(hits - expect * trials) <= 3 * sigma);
}

TEST_CASE("sampling is deterministic in the seed") {
    IndepParams params{6, Rational(1, 3)};
    Rng a(42), b(42), c(43);
    Restriction ra = sample_indep(params, a);
    CHECK(ra == sample_indep(params, b));
    bool differs = false;
    Rng a2(42);
    for (int i = 0; i < 50 && !differs; ++i)
        differs = !(sample_indep(params, a2) == sample_indep(params, c));
    CHECK(differs);
}
