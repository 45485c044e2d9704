#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kummer/errors.hpp"
#include "kummer/exactlin.hpp"
#include "kummer/freegroup.hpp"

namespace kummer {

/// Data of the cyclic cover y^n = prod (x - b_i)^{d_i}, i = 1..s.
///
/// Only constructible through validate(): n >= 2, s >= 3, every d_i > 0,
/// n does not divide any d_i, sum d_i = 0 mod n, and gcd(d) is prime to n.
class CurveParams {
public:
    std::int64_t n() const noexcept { return n_; }
    const std::vector<std::int64_t>& d() const noexcept { return d_; }
    int s() const noexcept { return static_cast<int>(d_.size()); }
    // rank of F_{s-1}, the free group on the loops x_1..x_{s-1}
    int free_rank() const noexcept { return s() - 1; }

    // exponent attached to branch point i (1-based)
    std::int64_t d(int i) const { return d_.at(static_cast<std::size_t>(i - 1)); }

    // (d_1, ..., d_{s-1}): the data alpha is built from
    std::vector<Integer> open_exponents() const {
        std::vector<Integer> v;
        for (int i = 0; i + 1 < s(); ++i)
            v.emplace_back(static_cast<long>(d_[static_cast<std::size_t>(i)]));
        return v;
    }

    friend bool operator==(const CurveParams&, const CurveParams&) = default;

    friend CurveParams validate(std::int64_t n, const std::vector<std::int64_t>& d);

private:
    CurveParams(std::int64_t n, std::vector<std::int64_t> d) : n_(n), d_(std::move(d)) {}

    std::int64_t n_;
    std::vector<std::int64_t> d_;
};

inline CurveParams validate(std::int64_t n, const std::vector<std::int64_t>& d) {
    if (n < 2)
        throw ValidationError(ValidationKind::Malformed, "cover order n = " + std::to_string(n) + " must be >= 2");
    if (d.size() < 3)
        throw ValidationError(ValidationKind::Malformed,
                              "need s >= 3 branch points, got " + std::to_string(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] <= 0)
            throw ValidationError(ValidationKind::Malformed,
                                  "d_" + std::to_string(i + 1) + " = " + std::to_string(d[i]) + " must be positive");
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] % n == 0)
            throw ValidationError(ValidationKind::RamificationViolation,
                                  "n = " + std::to_string(n) + " divides d_" + std::to_string(i + 1) + " = " +
                                      std::to_string(d[i]));
    Integer sum = 0;
    for (auto x : d)
        sum += Integer(static_cast<long>(x));
    if (mod(sum, Integer(static_cast<long>(n))) != 0)
        throw ValidationError(ValidationKind::DegreeViolation, "sum of d_i = " + sum.get_str() +
                                                                   " is not divisible by n = " + std::to_string(n));
    std::int64_t g = 0;
    for (auto x : d)
        g = std::gcd(g, x);
    if (std::gcd(g, n) != 1)
        throw ValidationError(ValidationKind::ReducibleCurve, "gcd(d) = " + std::to_string(g) +
                                                                  " shares a factor with n = " + std::to_string(n));
    return CurveParams(n, d);
}

inline nlohmann::json to_json(const CurveParams& p) {
    return {{"n", p.n()}, {"d", p.d()}};
}

inline CurveParams params_from_json(const nlohmann::json& j) {
    return validate(j.at("n").get<std::int64_t>(), j.at("d").get<std::vector<std::int64_t>>());
}

struct BranchPoint {
    std::int64_t e;          // ramification index n / (n, d_i)
    std::int64_t g;          // (n, d_i), number of points above b_i
    std::int64_t ell;        // (d_i / (n, d_i))^{-1} mod e_i, in [1, e_i)
};

using RamificationData = std::vector<BranchPoint>;

namespace detail {

// inverse of a modulo m, m >= 1, gcd(a, m) = 1
inline std::int64_t inverse_mod(std::int64_t a, std::int64_t m) {
    const auto r = egcd(Integer(static_cast<long>(a)), Integer(static_cast<long>(m)));
    if (r.g != 1)
        throw ConsistencyError("inverse_mod: not invertible");
    return mod(r.u, Integer(static_cast<long>(m))).get_si();
}

} // namespace detail

inline RamificationData ramification(const CurveParams& p) {
    RamificationData out;
    const auto n = p.n();
    for (auto di : p.d()) {
        const auto g = std::gcd(n, di);
        const auto e = n / g;
        const auto ell = detail::inverse_mod((di / g) % e, e);
        out.push_back({e, g, ell});
    }
    return out;
}

inline void check_rank(const CurveParams& p, const Word& w) {
    if (w.rank() != p.free_rank())
        throw DomainError("word rank " + std::to_string(w.rank()) + " differs from s-1 = " +
                          std::to_string(p.free_rank()));
}

// alpha(x_i) = d_i on F_{s-1}
inline Integer alpha(const CurveParams& p, const Word& w) {
    check_rank(p, w);
    Integer a = 0;
    for (const auto& s : w.syllables())
        a += Integer(static_cast<long>(s.exp)) * Integer(static_cast<long>(p.d(s.gen)));
    return a;
}

inline std::int64_t alpha_mod_n(const CurveParams& p, const Word& w) {
    return mod(alpha(p, w), Integer(static_cast<long>(p.n()))).get_si();
}

inline std::int64_t branch_count(const CurveParams& p) {
    std::int64_t r = 0;
    for (auto di : p.d())
        r += std::gcd(p.n(), di);
    return r;
}

// rank of pi_1 of the open cover
inline std::int64_t open_rank(const CurveParams& p) {
    return static_cast<std::int64_t>(p.s() - 2) * p.n() + 1;
}

// Riemann-Hurwitz: 2g = 2 + (s-2) n - sum (n, d_i)
inline std::int64_t genus(const CurveParams& p) {
    const std::int64_t two_g = 2 + static_cast<std::int64_t>(p.s() - 2) * p.n() - branch_count(p);
    if (two_g < 0 || two_g % 2 != 0)
        throw ConsistencyError("genus: Riemann-Hurwitz gives 2g = " + std::to_string(two_g));
    return two_g / 2;
}

// power of sigma acting near b_i
inline std::int64_t monodromy_image(const CurveParams& p, int i) {
    if (i < 1 || i > p.s())
        throw DomainError("monodromy_image: branch index out of range");
    return p.d(i) % p.n();
}

/// A word w with alpha(w) = 1 mod n, built from Bezout coefficients of
/// d_1..d_{s-1} and n. Witnesses surjectivity of alpha mod n.
inline Word alpha_preimage_of_one(const CurveParams& p) {
    const auto d = p.open_exponents();
    Integer g = Integer(static_cast<long>(p.n()));
    std::vector<Integer> coef(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto [g2, u, v] = egcd(g, d[i]);
        for (std::size_t j = 0; j < i; ++j)
            coef[j] *= u;
        coef[i] = v;
        g = g2;
    }
    if (g != 1)
        throw ValidationError(ValidationKind::TransversalUnavailable,
                              "gcd(d_1..d_{s-1}) is not prime to n");
    Word w(p.free_rank());
    const Integer n = static_cast<long>(p.n());
    for (std::size_t i = 0; i < d.size(); ++i)
        w = w * Word::generator(p.free_rank(), static_cast<int>(i) + 1, mod(coef[i], n));
    return w;
}

} // namespace kummer
