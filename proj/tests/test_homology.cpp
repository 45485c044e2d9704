#include <gtest/gtest.h>

#include <random>

#include "kummer/homology.hpp"
#include "oracles.hpp"

using namespace kummer;

namespace {

GroupRingElem random_elem(std::mt19937_64& rng, std::int64_t n) {
    GroupRingElem e(n);
    for (std::int64_t k = 0; k < n; ++k) {
        e[k] = Rational(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 3));
        e[k].canonicalize();
    }
    return e;
}

} // namespace

TEST(GroupRing, RingLaws) {
    std::mt19937_64 rng(30);
    for (int trial = 0; trial < 100; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 9);
        const auto a = random_elem(rng, n), b = random_elem(rng, n), c = random_elem(rng, n);
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_EQ(a * GroupRingElem::one(n), a);
        EXPECT_TRUE((a - a).zero());
        for (std::int64_t nu = 0; nu < n; ++nu)
            EXPECT_LT(std::abs((a * b).evaluate(nu) - a.evaluate(nu) * b.evaluate(nu)), 1e-9);
    }
    EXPECT_EQ(GroupRingElem::sigma_pow(5, 7), GroupRingElem::sigma_pow(5, 2));
    EXPECT_EQ(GroupRingElem::sigma_pow(5, -1), GroupRingElem::sigma_pow(5, 4));
    EXPECT_THROW(GroupRingElem(3) + GroupRingElem(4), DomainError);
    EXPECT_THROW(GroupRingElem(0), DomainError);
}

TEST(NormElement, IdentitiesAndCharacter) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 6, 2, 24);
        const auto ram = ramification(p);
        for (int i = 1; i <= p.s(); ++i) {
            const auto sig = norm_element(p, i);
            const auto& b = ram[static_cast<std::size_t>(i - 1)];
            EXPECT_EQ(GroupRingElem::sigma_pow(p.n(), p.d(i)) * sig, sig);
            GroupRingElem scaled = sig;
            for (std::int64_t k = 0; k < p.n(); ++k)
                scaled[k] *= b.e;
            EXPECT_EQ(sig * sig, scaled);

            // the characters where Sigma_i survives, found numerically
            std::set<std::int64_t> support;
            for (std::int64_t mu = 0; mu < p.n(); ++mu)
                if (std::abs(sig.evaluate(mu)) > 1e-9)
                    support.insert(mu);
            EXPECT_EQ(sigma_module_character(p, i), support);
            EXPECT_EQ(static_cast<std::int64_t>(support.size()), b.g);
            EXPECT_EQ(static_cast<std::int64_t>(rational_rank(multiplication_matrix(sig))), b.g);
        }
    }
}

TEST(Alexander, FoxMatchesClosedForm) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 6, 2, 16);
        EXPECT_EQ(alexander_matrix_fox(p), alexander_matrix(p));
    }
}

TEST(Alexander, WorkedCurveEntries) {
    const auto q = alexander_matrix(validate(12, {10, 15, 20, 3}));
    EXPECT_EQ(q(0, 4), GroupRingElem::one(12));
    EXPECT_EQ(q(1, 4), GroupRingElem::sigma_pow(12, 10));
    EXPECT_EQ(q(2, 4), GroupRingElem::sigma_pow(12, 1));
    EXPECT_EQ(q(3, 4), GroupRingElem::sigma_pow(12, 9));
    EXPECT_TRUE(q(0, 1).zero());
    EXPECT_EQ(q(2, 2).str(), "1 + s^4 + s^8");
}

TEST(Multiplicity, WorkedCurve) {
    const auto p = validate(12, {10, 15, 20, 3});
    std::int64_t sum = 0;
    for (std::int64_t nu = 0; nu < 12; ++nu) {
        const auto m = multiplicity_closed_form(p, nu);
        EXPECT_EQ(m, oracle::multiplicity_by_rank(12, p.d(), nu)) << nu;
        sum += m;
    }
    EXPECT_EQ(multiplicity_closed_form(p, 1), 2);
    EXPECT_EQ(multiplicity_closed_form(p, 6), 0);
    EXPECT_EQ(multiplicity_closed_form(p, 0), 0);
    EXPECT_EQ(sum, 14);
}

TEST(Multiplicity, ThreeRoutesAgree) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 150; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 6, 2, 24);
        const auto q = alexander_matrix(p);
        std::int64_t total = 0, cw_total = 0;
        for (std::int64_t nu = 0; nu < p.n(); ++nu) {
            const auto m = multiplicity_closed_form(p, nu);
            EXPECT_EQ(m, multiplicity_rank_oracle(q, nu));
            EXPECT_EQ(m, oracle::multiplicity_by_rank(p.n(), p.d(), nu));
            EXPECT_EQ(m, chevalley_weil(p, nu) + chevalley_weil(p, p.n() - nu));
            total += m;
            cw_total += chevalley_weil(p, nu);
        }
        EXPECT_EQ(total, 2 * genus(p));
        EXPECT_EQ(cw_total, genus(p));
        EXPECT_EQ(chevalley_weil(p, 0), 0);
    }
}

TEST(ChevalleyWeil, HyperellipticCase) {
    // y^2 = sextic: both differentials are anti-invariant
    const auto p = validate(2, {1, 1, 1, 1, 1, 1});
    EXPECT_EQ(chevalley_weil(p, 1), 2);
    EXPECT_EQ(chevalley_weil_exact(p, 1), Rational(2));
}

TEST(ChevalleyWeil, RamifiedReadingBreaksTheSum) {
    const auto p = validate(12, {10, 15, 20, 3});
    Rational total = 0;
    for (std::int64_t nu = 0; nu < 12; ++nu)
        total += chevalley_weil_exact(p, nu, CwForm::Ramified);
    EXPECT_NE(total, Rational(genus(p)));
}

TEST(RankOracle, GuardBandAndTolerance) {
    AlexanderMatrix q{1, 2, std::vector<GroupRingElem>(6, GroupRingElem(1))};
    q.entries[0] = GroupRingElem::one(1);
    q.entries[4][0] = Rational(1, 100000000);
    EXPECT_THROW(numeric_rank_at(q, 0, 1e-8), NumericalInstability);
    EXPECT_EQ(numeric_rank_at(q, 0, 1e-12).rank, 2);
    EXPECT_EQ(numeric_rank_at(q, 0, 1e-5).rank, 1);
    const auto p = validate(5, {1, 2, 3, 4});
    EXPECT_THROW(multiplicity_rank_oracle(p, 1, 0.0), DomainError);
    EXPECT_THROW(multiplicity_rank_oracle(p, 1, 0.5), DomainError);
}

TEST(Decomposition, ChecksAndJson) {
    const auto h = homology_decomposition(validate(12, {10, 15, 20, 3}));
    EXPECT_EQ(h.genus, 7);
    EXPECT_TRUE(h.checks.all());
    EXPECT_TRUE(h.checks.disagreeing_nu.empty());
    const auto j = to_json(h);
    EXPECT_EQ(j["genus"], 7);
    EXPECT_EQ(j["M"].size(), 12u);
    EXPECT_EQ(j["cw"].size(), 12u);
    EXPECT_TRUE(j["checks"]["sum_M_eq_2g"].get<bool>());
    EXPECT_TRUE(j["checks"]["hodge"].get<bool>());
    EXPECT_TRUE(j["checks"]["rank_agrees"].get<bool>());
}
