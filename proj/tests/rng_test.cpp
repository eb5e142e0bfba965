#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "relval/rng.hpp"

using namespace relval;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DifferentSeedsDiverge) {
    Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a() == b() ? 1 : 0;
    EXPECT_LT(equal, 5);
}

TEST(Rng, BelowStaysInRange) {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.below(13), 13u);
}

TEST(Rng, BelowCoversAllResidues) {
    Rng rng(9);
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(rng.below(7));
    EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, UniformInUnitInterval) {
    Rng rng(3);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

TEST(StreamKey, OrderAndTokensMatter) {
    const uint64_t master = 99;
    EXPECT_NE(StreamKey(master).mix("a").mix("b").seed(),
              StreamKey(master).mix("b").mix("a").seed());
    // concatenation must not collide across token boundaries
    EXPECT_NE(StreamKey(master).mix("ab").mix("c").seed(),
              StreamKey(master).mix("a").mix("bc").seed());
    EXPECT_NE(StreamKey(1).mix("x").seed(), StreamKey(2).mix("x").seed());
    EXPECT_EQ(StreamKey(master).mix("ds").mix(uint64_t{4}).seed(),
              StreamKey(master).mix("ds").mix(uint64_t{4}).seed());
}

TEST(StreamKey, SubstreamsLookIndependent) {
    std::set<uint64_t> seeds;
    for (uint64_t i = 0; i < 1000; ++i)
        seeds.insert(StreamKey(5).mix("run").mix(i).seed());
    EXPECT_EQ(seeds.size(), 1000u);
}

TEST(Shuffle, ProducesAPermutation) {
    Rng rng(11);
    auto idx = shuffled_indices(50, rng);
    std::sort(idx.begin(), idx.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(idx[static_cast<size_t>(i)], i);
}

TEST(Shuffle, SeedDetermined) {
    Rng a(13), b(13), c(14);
    EXPECT_EQ(shuffled_indices(20, a), shuffled_indices(20, b));
    Rng a2(13);
    EXPECT_NE(shuffled_indices(20, a2), shuffled_indices(20, c));
}
