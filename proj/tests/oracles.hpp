#pragma once

// Independent reference computations for the test suites. Nothing in here
// calls into the routines it is used to check.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "kummer/cover.hpp"
#include "kummer/exactlin.hpp"
#include "kummer/folding.hpp"
#include "kummer/freegroup.hpp"

namespace oracle {

using kummer::Integer;

// permutation expansion; fine up to 7x7
inline Integer det_by_permutations(const kummer::IntMatrix& m) {
    const std::size_t n = m.rows();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Integer total = 0;
    do {
        int inversions = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (perm[i] > perm[j])
                    ++inversions;
        Integer term = inversions % 2 ? -1 : 1;
        for (std::size_t i = 0; i < n; ++i)
            term *= m(i, perm[i]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

// largest divisor of every entry, by trial
inline std::int64_t gcd_by_trial(const std::vector<std::int64_t>& v) {
    std::int64_t top = 0;
    for (auto x : v)
        top = std::max(top, x < 0 ? -x : x);
    for (std::int64_t g = top; g >= 1; --g)
        if (std::all_of(v.begin(), v.end(), [g](std::int64_t x) { return x % g == 0; }))
            return g;
    return 0;
}

// number of orbits of k -> k + d on Z/n, counted directly
inline std::int64_t orbits_of_shift(std::int64_t n, std::int64_t d) {
    std::vector<bool> seen(static_cast<std::size_t>(n));
    std::int64_t orbits = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        if (seen[static_cast<std::size_t>(k)])
            continue;
        ++orbits;
        for (std::int64_t j = k; !seen[static_cast<std::size_t>(j)]; j = (j + d) % n)
            seen[static_cast<std::size_t>(j)] = true;
    }
    return orbits;
}

// Euler characteristic of the cover: n (2 - s) + points above the branch locus
inline std::int64_t genus_by_euler(std::int64_t n, const std::vector<std::int64_t>& d) {
    std::int64_t chi = n * (2 - static_cast<std::int64_t>(d.size()));
    for (auto di : d)
        chi += orbits_of_shift(n, di);
    return (2 - chi) / 2;
}

inline bool curve_ok(std::int64_t n, const std::vector<std::int64_t>& d) {
    std::int64_t sum = 0, g = 0;
    for (auto x : d) {
        if (x <= 0 || x % n == 0)
            return false;
        sum += x;
        g = std::gcd(g, x);
    }
    return d.size() >= 3 && sum % n == 0 && std::gcd(g, n) == 1;
}

// rejection sampling of valid (n, d)
inline kummer::CurveParams random_curve(std::mt19937_64& rng, int s_lo, int s_hi, std::int64_t n_lo,
                                        std::int64_t n_hi, std::int64_t d_max = 0) {
    std::uniform_int_distribution<int> sd(s_lo, s_hi);
    std::uniform_int_distribution<std::int64_t> nd(n_lo, n_hi);
    for (;;) {
        const int s = sd(rng);
        const auto n = nd(rng);
        std::uniform_int_distribution<std::int64_t> dd(1, d_max > 0 ? d_max : 2 * n);
        std::vector<std::int64_t> d(static_cast<std::size_t>(s));
        for (auto& x : d)
            x = dd(rng);
        // fix the degree with the last exponent
        std::int64_t sum = 0;
        for (int i = 0; i + 1 < s; ++i)
            sum += d[static_cast<std::size_t>(i)];
        const auto r = ((-sum) % n + n) % n;
        d.back() = r == 0 ? n : r;
        if (curve_ok(n, d))
            return kummer::validate(n, d);
    }
}

inline kummer::Word random_word(std::mt19937_64& rng, int rank, int max_len) {
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<int> gen(1, rank);
    std::bernoulli_distribution sign;
    std::vector<kummer::Syllable> syl;
    const int l = len(rng);
    for (int k = 0; k < l; ++k)
        syl.push_back({gen(rng), sign(rng) ? 1 : -1});
    return kummer::Word(rank, syl);
}

// letters as a flat sequence of +-gen
inline std::vector<int> letters(const kummer::Word& w) {
    std::vector<int> out;
    for (const auto& s : w.syllables())
        for (std::int64_t k = 0; k < (s.exp < 0 ? -s.exp : s.exp); ++k)
            out.push_back(s.exp > 0 ? s.gen : -s.gen);
    return out;
}

// Free reduction by a stack over letters.
inline std::vector<int> reduce_letters(const std::vector<int>& in) {
    std::vector<int> st;
    for (int l : in) {
        if (!st.empty() && st.back() == -l)
            st.pop_back();
        else
            st.push_back(l);
    }
    return st;
}

// sum_k l_k d_k on exponent sums
inline Integer alpha_by_letters(const kummer::Word& w, const std::vector<std::int64_t>& d) {
    Integer a = 0;
    for (int l : letters(w))
        a += (l > 0 ? 1 : -1) * static_cast<long>(d[static_cast<std::size_t>((l > 0 ? l : -l) - 1)]);
    return a;
}

// The n-cycle 0 -> 1 -> ... -> n-1 -> 0 with every label on every edge.
inline kummer::StallingsGraph direct_n_cycle(std::int64_t n, int rank) {
    std::vector<kummer::Edge> e;
    for (int v = 0; v < n; ++v)
        for (int lab = 1; lab <= rank; ++lab)
            e.push_back({v, lab, static_cast<int>((v + 1) % n)});
    return kummer::canonical(kummer::StallingsGraph(rank, static_cast<int>(n), 0, e));
}

// Membership by walking the letters through a folded graph.
inline bool accepts(const kummer::StallingsGraph& g, const kummer::Word& w) {
    int v = g.basepoint();
    for (int l : letters(w)) {
        const int lab = l > 0 ? l : -l;
        int next = -1;
        for (const auto& e : g.edges()) {
            if (l > 0 && e.src == v && e.label == lab)
                next = e.dst;
            if (l < 0 && e.dst == v && e.label == lab)
                next = e.src;
            if (next != -1)
                break;
        }
        if (next == -1)
            return false;
        v = next;
    }
    return v == g.basepoint();
}

// Rank of a complex matrix by Gaussian elimination with partial pivoting.
inline int complex_rank(std::vector<std::vector<std::complex<double>>> m, double tol) {
    const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    double scale = 0;
    for (const auto& r : m)
        for (auto x : r)
            scale = std::max(scale, std::abs(x));
    if (scale == 0)
        return 0;
    int rank = 0;
    std::size_t r0 = 0;
    for (std::size_t c = 0; c < cols && r0 < rows; ++c) {
        std::size_t best = r0;
        for (std::size_t r = r0; r < rows; ++r)
            if (std::abs(m[r][c]) > std::abs(m[best][c]))
                best = r;
        if (std::abs(m[best][c]) <= tol * scale)
            continue;
        std::swap(m[best], m[r0]);
        for (std::size_t r = r0 + 1; r < rows; ++r) {
            const auto f = m[r][c] / m[r0][c];
            for (std::size_t k = c; k < cols; ++k)
                m[r][k] -= f * m[r0][k];
        }
        ++r0;
        ++rank;
    }
    return rank;
}

inline std::complex<double> zeta_pow(std::int64_t n, std::int64_t k) {
    const double a = 2.0 * 3.14159265358979323846 * static_cast<double>(((k % n) + n) % n) / static_cast<double>(n);
    return {std::cos(a), std::sin(a)};
}

// Q(zeta^nu) written down from the Fox derivatives by hand: diagonal
// sum_{k < e_i} zeta^{nu k d_i}, last column zeta^{nu (d_1 + ... + d_{i-1})}.
inline int alexander_rank_at(std::int64_t n, const std::vector<std::int64_t>& d, std::int64_t nu) {
    const std::size_t s = d.size();
    std::vector<std::vector<std::complex<double>>> m(s, std::vector<std::complex<double>>(s + 1));
    std::int64_t prefix = 0;
    for (std::size_t i = 0; i < s; ++i) {
        const auto e = n / std::gcd(n, d[i]);
        for (std::int64_t k = 0; k < e; ++k)
            m[i][i] += zeta_pow(n, nu * k * d[i]);
        m[i][s] = zeta_pow(n, nu * prefix);
        prefix += d[i];
    }
    return complex_rank(m, 1e-9);
}

// Crowell: multiplicity of chi_nu in H_1 of the closed curve
inline std::int64_t multiplicity_by_rank(std::int64_t n, const std::vector<std::int64_t>& d, std::int64_t nu) {
    return static_cast<std::int64_t>(d.size()) - alexander_rank_at(n, d, nu) - 1 + (nu % n == 0 ? 1 : 0);
}

} // namespace oracle
