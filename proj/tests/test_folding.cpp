#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "kummer/folding.hpp"
#include "kummer/schreier.hpp"
#include "oracles.hpp"

using namespace kummer;

namespace {

std::vector<Word> random_words(std::mt19937_64& rng, int rank, int count, int len) {
    std::vector<Word> out;
    for (int i = 0; i < count; ++i)
        out.push_back(oracle::random_word(rng, rank, len));
    return out;
}

// same graph with its vertices renamed by a random permutation
StallingsGraph relabel(const StallingsGraph& g, std::mt19937_64& rng) {
    std::vector<int> perm(static_cast<std::size_t>(g.vertex_count()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> e;
    for (const auto& x : g.edges())
        e.push_back({perm[static_cast<std::size_t>(x.src)], x.label, perm[static_cast<std::size_t>(x.dst)]});
    std::shuffle(e.begin(), e.end(), rng);
    return StallingsGraph(g.rank(), g.vertex_count(), perm[static_cast<std::size_t>(g.basepoint())], e);
}

} // namespace

TEST(Fold, ConfluentUnderMergeOrder) {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 100; ++trial) {
        const auto words = random_words(rng, 3, 4, 8);
        const auto g = graph_from_words(3, words);
        EXPECT_TRUE(g.is_folded());
        for (std::uint64_t seed = 1; seed <= 4; ++seed)
            EXPECT_EQ(graph_from_words(3, words, seed), g);
    }
}

TEST(Fold, CanonicalIgnoresNames) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = graph_from_words(3, random_words(rng, 3, 3, 7));
        EXPECT_EQ(canonical(relabel(g, rng)), g);
    }
}

TEST(Fold, MembershipOfGenerators) {
    std::mt19937_64 rng(20);
    for (int trial = 0; trial < 100; ++trial) {
        const auto words = random_words(rng, 3, 4, 8);
        const auto g = graph_from_words(3, words);
        for (const auto& w : words) {
            EXPECT_TRUE(membership_graph(g, w));
            EXPECT_TRUE(membership_graph(g, w.inverse()));
        }
        EXPECT_TRUE(membership_graph(g, words[0] * words[1].inverse() * words[2]));
    }
}

TEST(Fold, MembershipMatchesWalkOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = graph_from_words(2, random_words(rng, 2, 3, 6));
        for (int k = 0; k < 40; ++k) {
            const auto w = oracle::random_word(rng, 2, 8);
            EXPECT_EQ(membership_graph(g, w), oracle::accepts(g, w));
        }
    }
}

TEST(Fold, FreeBasisRegeneratesGraph) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = graph_from_words(3, random_words(rng, 3, 4, 8));
        const auto basis = free_basis(g);
        EXPECT_EQ(static_cast<std::int64_t>(basis.size()), rank(g));
        EXPECT_EQ(graph_from_words(3, basis), g);
        EXPECT_EQ(rank(graph_from_words(3, basis)), static_cast<std::int64_t>(basis.size()));
    }
}

TEST(Fold, TrivialAndSmallCases) {
    EXPECT_EQ(graph_from_words(2, {}), StallingsGraph::trivial(2));
    EXPECT_EQ(graph_from_words(2, {Word(2)}), StallingsGraph::trivial(2));
    const auto g = graph_from_words(2, {Word::parse("x1^2", 2)});
    EXPECT_EQ(g.vertex_count(), 2);
    EXPECT_EQ(rank(g), 1);
    EXPECT_EQ(free_basis(g), std::vector<Word>{Word::parse("x1^2", 2)});
    // x1 and x1 x2 x1^-1 x2 fold to a rank-2 graph
    const auto h = graph_from_words(2, {Word::parse("x1", 2), Word::parse("x1 x2 x1^-1 x2", 2)});
    EXPECT_EQ(rank(h), 2);
    // a conjugate by a hanging path is pruned away
    EXPECT_EQ(graph_from_words(2, {Word::parse("x2 x1 x2^-1", 2)}).vertex_count(), 2);
}

TEST(NamedGraphs, RnMatchesDirectCycle) {
    for (std::int64_t n = 1; n <= 8; ++n)
        for (int rank = 1; rank <= 5; ++rank) {
            const auto direct = oracle::direct_n_cycle(n, rank);
            EXPECT_EQ(graph_from_words(rank, rn_generators(n, rank)), direct) << n << " " << rank;
            EXPECT_EQ(rn_graph(n, rank), direct);
            EXPECT_EQ(kummer::rank(direct), (rank - 1) * n + 1);
        }
}

TEST(NamedGraphs, RnGeneratorsAreInKernel) {
    for (std::int64_t n = 2; n <= 6; ++n)
        for (const auto& w : rn_generators(n, 3)) {
            Integer a = 0;
            for (const auto& e : w.exponent_vector())
                a += e;
            EXPECT_EQ(mod(a, Integer(static_cast<long>(n))), 0);
        }
}

TEST(NamedGraphs, PowerGraphCounts) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::int64_t> d(1 + rng() % 5);
        for (auto& x : d)
            x = 1 + static_cast<std::int64_t>(rng() % 9);
        const auto g = power_graph(d);
        std::int64_t v = 1, e = 0;
        for (auto x : d) {
            v += x - 1;
            e += x;
        }
        EXPECT_EQ(g.vertex_count(), v);
        EXPECT_EQ(static_cast<std::int64_t>(g.edges().size()), e);
        EXPECT_EQ(graph_from_words(static_cast<int>(d.size()), power_generators(d)), g);
        EXPECT_EQ(rank(g), static_cast<std::int64_t>(d.size()));
    }
}

TEST(NamedGraphs, R0Window) {
    const auto g = r0_window_graph(2, 3);
    EXPECT_EQ(g.vertex_count(), 7);
    EXPECT_TRUE(membership_graph(g, Word::parse("x1 x2^-1", 2)));
    EXPECT_TRUE(membership_graph(g, Word::parse("x1^3 x2^-3", 2)));
    EXPECT_FALSE(membership_graph(g, Word::parse("x1^4 x2^-4", 2)));
    EXPECT_FALSE(membership_graph(g, Word::parse("x1 x2", 2)));
}

TEST(Product, MembershipIsConjunction) {
    std::mt19937_64 rng(24);
    int both = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto a = graph_from_words(2, random_words(rng, 2, 3, 5));
        const auto b = graph_from_words(2, random_words(rng, 2, 3, 5));
        const auto p = product_graph(a, b);
        EXPECT_TRUE(p.is_folded());
        for (int k = 0; k < 50; ++k) {
            const auto w = oracle::random_word(rng, 2, 10);
            const bool ma = membership_graph(a, w), mb = membership_graph(b, w);
            EXPECT_EQ(membership_graph(p, w), ma && mb);
            both += ma && mb;
        }
        // words in both generating sets survive
        for (const auto& w : free_basis(p)) {
            EXPECT_TRUE(membership_graph(a, w));
            EXPECT_TRUE(membership_graph(b, w));
        }
    }
    EXPECT_GT(both, 0);
}

TEST(Product, KernelIntersection) {
    // R_n cap <x_i^{d_i}> against the coset structure
    const std::vector<std::int64_t> d{2, 3};
    const auto p = product_graph(rn_graph(6, 2), power_graph(d));
    EXPECT_TRUE(membership_graph(p, Word::parse("x1^6", 2)));
    EXPECT_TRUE(membership_graph(p, Word::parse("x1^2 x2^3 x1^-2 x2^3", 2)));
    EXPECT_FALSE(membership_graph(p, Word::parse("x1^2", 2)));
    EXPECT_FALSE(membership_graph(p, Word::parse("x1^3 x2^3", 2)));
}

TEST(Pullback, AgreesWithAlpha) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = oracle::random_curve(rng, 3, 5, 2, 8);
        const PullbackChecker modn(p, KernelMode::ModN);
        const PullbackChecker integral(p, KernelMode::Integral);
        for (int k = 0; k < 100; ++k) {
            const auto w = oracle::random_word(rng, p.free_rank(), 10);
            EXPECT_TRUE(modn.check(w).agrees()) << w.str();
            EXPECT_TRUE(integral.check(w).agrees()) << w.str();
        }
        for (const auto& w : kernel_generators_mod_n(p).generators) {
            const auto v = modn.check(w);
            EXPECT_TRUE(v.graph);
            EXPECT_TRUE(v.oracle);
        }
        const auto x1 = Word::generator(p.free_rank(), 1);
        EXPECT_FALSE(modn.check(x1).graph);
        EXPECT_TRUE(pullback_check(p, Word(p.free_rank())));
        EXPECT_TRUE(modn.check(Word(p.free_rank())).graph);
    }
}

TEST(Dot, TrivialGraphText) {
    EXPECT_EQ(export_dot(StallingsGraph::trivial(2)), "digraph stallings {\n  0 [shape=doublecircle];\n}\n");
}

TEST(Dot, Deterministic) {
    std::mt19937_64 rng(26);
    const auto words = random_words(rng, 3, 3, 6);
    const auto g = graph_from_words(3, words);
    EXPECT_EQ(export_dot(g), export_dot(graph_from_words(3, words, 99)));
    EXPECT_NE(export_dot(rn_graph(2, 1)).find("0 -> 1 [label=\"x1\"];"), std::string::npos);
}
