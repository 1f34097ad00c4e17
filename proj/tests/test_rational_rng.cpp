#include <doctest.h>

#include <cstdlib>
#include <set>

#include "fairflip/rational.hpp"
#include "fairflip/rng.hpp"

using namespace fairflip;

TEST_SUITE("rational-rng") {

TEST_CASE("rationals normalize and compare exactly") {
    CHECK(Rat(2, 4) == Rat::half());
    CHECK(Rat(-2, -4) == Rat::half());
    CHECK(Rat(1, -2) == -Rat::half());
    CHECK(Rat(3, 4) + Rat(1, 4) == Rat(1));
    CHECK(Rat(1, 3) * Rat(3, 7) == Rat(1, 7));
    CHECK(Rat(5, 16) / Rat(5, 8) == Rat::half());
    CHECK(Rat(1, 3) < Rat(2, 5));
    CHECK(Rat(-1, 3).abs() == Rat(1, 3));
    CHECK(Rat(7, 2).to_string() == "7/2");
    CHECK(Rat(-3).to_string() == "-3");
    CHECK(Rat(1, 2).to_double() == 0.5);
}

TEST_CASE("rational arithmetic agrees with doubles on random small fractions") {
    Rng rng(2024);
    for (int t = 0; t < 500; ++t) {
        long long a = (long long)rng.below(2000) - 1000;
        long long b = 1 + (long long)rng.below(999);
        long long c = (long long)rng.below(2000) - 1000;
        long long d = 1 + (long long)rng.below(999);
        Rat x = Rat::from_ratio(a, b), y = Rat::from_ratio(c, d);
        CHECK((x + y).to_double() == doctest::Approx(x.to_double() + y.to_double()).epsilon(1e-12));
        CHECK((x * y).to_double() == doctest::Approx(x.to_double() * y.to_double()).epsilon(1e-12));
        CHECK(((x < y) || (x == y) || (x > y)));
    }
}

TEST_CASE("overflow raises a capacity error instead of wrapping") {
    Rat big(Rat::Int(1) << 60, 1);
    Rat huge = big * big; // 2^120 still fits
    CHECK_THROWS_AS(huge * big, CapacityError);
    CHECK_THROWS_AS(Rat(1, 0), DomainError);
    CHECK_THROWS_AS(Rat(1) / Rat(0), DomainError);
}

TEST_CASE("generator is deterministic and label-splittable") {
    Rng a(99), b(99);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng base(7);
    Rng s1 = base.derive("tapes");
    Rng s2 = base.derive("strategy");
    Rng s1_again = Rng(7).derive("tapes");
    bool all_equal = true;
    for (int i = 0; i < 16; ++i) {
        uint64_t x = s1.next_u64();
        if (x != s1_again.next_u64()) all_equal = false;
        if (x == s2.next_u64()) {}
    }
    CHECK(all_equal);
}

TEST_CASE("bounded draws stay in range and look uniform") {
    Rng rng(5);
    int counts[7] = {0};
    for (int i = 0; i < 70000; ++i) {
        uint64_t v = rng.below(7);
        REQUIRE(v < 7);
        counts[v]++;
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500); // ~5 sigma
}

TEST_CASE("bernoulli with exact integer odds") {
    Rng rng(11);
    int ones = 0;
    for (int i = 0; i < 40000; ++i) ones += rng.bernoulli(3, 4);
    CHECK(std::abs(ones - 30000) < 500);
}

} // TEST_SUITE
