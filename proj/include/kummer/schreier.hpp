#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kummer/cover.hpp"
#include "kummer/errors.hpp"
#include "kummer/exactlin.hpp"
#include "kummer/freegroup.hpp"

namespace kummer {

enum class KernelMode { ModN, Integral };

inline const char* to_string(KernelMode m) { return m == KernelMode::ModN ? "modn" : "integral"; }

/// The free basis y_1..y_{s-1} = tau_R(x_1)..tau_R(x_{s-1}) with R the SNF
/// transform of (d_1..d_{s-1}); alpha(y_1) = gcd, alpha(y_j) = 0 otherwise.
struct YBasis {
    SnfResult snf;
    FreeAutomorphism lift;

    const std::vector<Word>& words() const noexcept { return lift.images(); }
    const Word& y(int i) const { return lift.images().at(static_cast<std::size_t>(i - 1)); }
};

inline YBasis make_y_basis(const CurveParams& p) {
    const auto d = p.open_exponents();
    SnfResult snf = smith_row(d);
    if (gcd(snf.gcd, Integer(static_cast<long>(p.n()))) != 1)
        throw ValidationError(ValidationKind::TransversalUnavailable,
                              "gcd(d_1..d_{s-1}) = " + snf.gcd.get_str() + " is not prime to n");
    FreeAutomorphism lift = lift_column_ops(p.free_rank(), snf.ops);
    return {std::move(snf), std::move(lift)};
}

inline std::vector<Word> y_basis(const CurveParams& p) {
    return make_y_basis(p).words();
}

struct KernelGenerators {
    KernelMode mode;
    std::vector<Word> y_basis;
    std::vector<Word> generators; // reduced words in x_1..x_{s-1}
    std::int64_t window = 0;      // |nu| <= window, integral mode only
};

/// Schreier generators of ker(alpha mod n) for the transversal {y_1^nu}:
/// y_1^nu y_j y_1^-nu (0 <= nu < n, 2 <= j <= s-1) followed by y_1^n.
inline KernelGenerators kernel_generators_mod_n(const CurveParams& p) {
    const YBasis yb = make_y_basis(p);
    const auto& y = yb.words();
    KernelGenerators out{KernelMode::ModN, y, {}, 0};
    Word conj(p.free_rank());
    const Word y1_inv = y[0].inverse();
    Word conj_inv(p.free_rank());
    for (std::int64_t nu = 0; nu < p.n(); ++nu) {
        for (std::size_t j = 1; j < y.size(); ++j)
            out.generators.push_back(conj * y[j] * conj_inv);
        conj = conj * y[0];
        conj_inv = y1_inv * conj_inv;
    }
    out.generators.push_back(conj); // y_1^n
    return out;
}

/// Truncation |nu| <= window of the infinite generating set of ker(alpha).
inline KernelGenerators kernel_generators_integral(const CurveParams& p, std::int64_t window) {
    if (window < 0)
        throw DomainError("kernel_generators_integral: window must be >= 0");
    const YBasis yb = make_y_basis(p);
    const auto& y = yb.words();
    KernelGenerators out{KernelMode::Integral, y, {}, window};
    for (std::int64_t nu = -window; nu <= window; ++nu) {
        const Word c = y[0].pow(nu);
        const Word c_inv = c.inverse();
        for (std::size_t j = 1; j < y.size(); ++j)
            out.generators.push_back(c * y[j] * c_inv);
    }
    return out;
}

struct TransversalReduction {
    std::int64_t coset;  // nu with H w = H y_1^nu
    Word schreier_word;  // w y_1^-nu, lies in ker(alpha mod n)
};

inline TransversalReduction transversal_reduce(const YBasis& yb, const CurveParams& p, const Word& w) {
    const Integer n = static_cast<long>(p.n());
    // alpha(w) = nu * gcd (mod n)
    const auto r = egcd(mod(yb.snf.gcd, n), n);
    if (r.g != 1)
        throw ValidationError(ValidationKind::TransversalUnavailable, "gcd(d_1..d_{s-1}) is not prime to n");
    const std::int64_t nu = mod(alpha(p, w) * r.u, n).get_si();
    return {nu, w * yb.y(1).pow(-nu)};
}

inline TransversalReduction transversal_reduce(const CurveParams& p, const Word& w) {
    return transversal_reduce(make_y_basis(p), p, w);
}

// The transversal {y_1^nu : 0 <= nu < n}.
inline std::vector<Word> schreier_transversal(const YBasis& yb, std::int64_t n) {
    std::vector<Word> t;
    Word c(yb.y(1).rank());
    for (std::int64_t nu = 0; nu < n; ++nu) {
        t.push_back(c);
        c = c * yb.y(1);
    }
    return t;
}

inline nlohmann::json to_json(const KernelGenerators& k) {
    nlohmann::json j;
    j["mode"] = to_string(k.mode);
    j["count"] = k.generators.size();
    if (k.mode == KernelMode::Integral)
        j["window"] = k.window;
    auto& yb = j["y_basis"] = nlohmann::json::array();
    for (const auto& w : k.y_basis)
        yb.push_back(w.str());
    auto& g = j["generators"] = nlohmann::json::array();
    for (const auto& w : k.generators)
        g.push_back(w.str());
    return j;
}

} // namespace kummer
