#include <gtest/gtest.h>

#include <random>

#include "kummer/cover.hpp"
#include "oracles.hpp"

using namespace kummer;

namespace {

ValidationKind kind_of(std::int64_t n, std::vector<std::int64_t> d) {
    try {
        validate(n, d);
    } catch (const ValidationError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a validation error";
    return ValidationKind::Malformed;
}

} // namespace

TEST(Validate, Accepts) {
    const auto p = validate(12, {10, 15, 20, 3});
    EXPECT_EQ(p.n(), 12);
    EXPECT_EQ(p.s(), 4);
    EXPECT_EQ(p.free_rank(), 3);
    EXPECT_EQ(p.d(2), 15);
    EXPECT_EQ(p.open_exponents(), (std::vector<Integer>{10, 15, 20}));
}

TEST(Validate, Rejections) {
    EXPECT_EQ(kind_of(1, {1, 1, 1}), ValidationKind::Malformed);
    EXPECT_EQ(kind_of(3, {1, 2}), ValidationKind::Malformed);
    EXPECT_EQ(kind_of(3, {1, -1, 3}), ValidationKind::Malformed);
    EXPECT_EQ(kind_of(3, {1, 2, 3}), ValidationKind::RamificationViolation);
    EXPECT_EQ(kind_of(12, {10, 15, 20, 20}), ValidationKind::DegreeViolation);
    EXPECT_EQ(kind_of(4, {2, 2, 2, 2}), ValidationKind::ReducibleCurve);
}

TEST(Validate, MatchesOracleOnRandomInput) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 15);
        std::vector<std::int64_t> d(3 + rng() % 3);
        for (auto& x : d)
            x = 1 + static_cast<std::int64_t>(rng() % 30);
        bool ok = true;
        try {
            validate(n, d);
        } catch (const ValidationError&) {
            ok = false;
        }
        EXPECT_EQ(ok, oracle::curve_ok(n, d));
    }
}

TEST(Ramification, WorkedCurve) {
    const auto ram = ramification(validate(12, {10, 15, 20, 3}));
    ASSERT_EQ(ram.size(), 4u);
    const std::int64_t e[] = {6, 4, 3, 4}, g[] = {2, 3, 4, 3}, ell[] = {5, 1, 2, 1};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(ram[i].e, e[i]);
        EXPECT_EQ(ram[i].g, g[i]);
        EXPECT_EQ(ram[i].ell, ell[i]);
    }
}

TEST(Ramification, InverseProperty) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 6, 2, 30);
        const auto ram = ramification(p);
        for (int i = 1; i <= p.s(); ++i) {
            const auto& b = ram[static_cast<std::size_t>(i - 1)];
            EXPECT_EQ(b.g, oracle::orbits_of_shift(p.n(), p.d(i)));
            EXPECT_EQ(b.e * b.g, p.n());
            EXPECT_GE(b.e, 2);
            EXPECT_GE(b.ell, 1);
            EXPECT_LT(b.ell, b.e);
            EXPECT_EQ(((p.d(i) / b.g) * b.ell) % b.e, 1 % b.e);
        }
    }
}

TEST(Genus, WorkedCurve) {
    const auto p = validate(12, {10, 15, 20, 3});
    EXPECT_EQ(genus(p), 7);
    EXPECT_EQ(branch_count(p), 12);
    EXPECT_EQ(open_rank(p), 25);
}

TEST(Genus, EulerOracle) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 500; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 7, 2, 40);
        EXPECT_EQ(genus(p), oracle::genus_by_euler(p.n(), p.d()));
        EXPECT_GE(genus(p), 0);
    }
    // y^2 over four points: an elliptic curve
    EXPECT_EQ(genus(validate(2, {1, 1, 1, 1})), 1);
    EXPECT_EQ(genus(validate(3, {1, 1, 1})), 1);
    EXPECT_EQ(genus(validate(2, {1, 1, 1, 1, 1, 1})), 2);
}

TEST(Alpha, MatchesLetterCount) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 6, 2, 20);
        const auto w = oracle::random_word(rng, p.free_rank(), 15);
        const auto a = oracle::alpha_by_letters(w, p.d());
        EXPECT_EQ(alpha(p, w), a);
        EXPECT_EQ(alpha_mod_n(p, w), mod(a, Integer(static_cast<long>(p.n()))));
    }
    const auto p = validate(12, {10, 15, 20, 3});
    EXPECT_THROW(alpha(p, Word(2)), DomainError);
}

TEST(Alpha, PreimageOfOne) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 6, 2, 30);
        EXPECT_EQ(alpha_mod_n(p, alpha_preimage_of_one(p)), 1 % p.n());
    }
}

TEST(Monodromy, Image) {
    const auto p = validate(12, {10, 15, 20, 3});
    EXPECT_EQ(monodromy_image(p, 2), 3);
    EXPECT_EQ(monodromy_image(p, 4), 3);
    EXPECT_THROW(monodromy_image(p, 5), DomainError);
}

TEST(ParamsJson, RoundTrip) {
    const auto p = validate(5, {1, 2, 3, 4});
    EXPECT_EQ(params_from_json(to_json(p)), p);
    EXPECT_THROW(params_from_json(nlohmann::json{{"n", 5}, {"d", {1, 1}}}), ValidationError);
}
