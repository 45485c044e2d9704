#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kummer/cover.hpp"
#include "kummer/errors.hpp"
#include "kummer/exactlin.hpp"
#include "kummer/freegroup.hpp"

namespace kummer {

/// Element of Q[C_n]; coefficient of sigma^k at index k.
class GroupRingElem {
public:
    explicit GroupRingElem(std::int64_t n) : coeffs_(checked(n)) {}

    static GroupRingElem one(std::int64_t n) { return sigma_pow(n, 0); }

    static GroupRingElem sigma_pow(std::int64_t n, std::int64_t k) {
        GroupRingElem e(n);
        e.coeffs_[static_cast<std::size_t>(((k % n) + n) % n)] = 1;
        return e;
    }

    std::int64_t n() const noexcept { return static_cast<std::int64_t>(coeffs_.size()); }
    const std::vector<Rational>& coeffs() const noexcept { return coeffs_; }
    Rational& operator[](std::int64_t k) { return coeffs_[index(k)]; }
    const Rational& operator[](std::int64_t k) const { return coeffs_[index(k)]; }
    bool zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Rational& c) { return c == 0; });
    }

    GroupRingElem& operator+=(const GroupRingElem& o) {
        same_n(o);
        for (std::size_t k = 0; k < coeffs_.size(); ++k)
            coeffs_[k] += o.coeffs_[k];
        return *this;
    }
    GroupRingElem& operator-=(const GroupRingElem& o) {
        same_n(o);
        for (std::size_t k = 0; k < coeffs_.size(); ++k)
            coeffs_[k] -= o.coeffs_[k];
        return *this;
    }
    friend GroupRingElem operator+(GroupRingElem a, const GroupRingElem& b) { return a += b; }
    friend GroupRingElem operator-(GroupRingElem a, const GroupRingElem& b) { return a -= b; }

    // cyclic convolution
    friend GroupRingElem operator*(const GroupRingElem& a, const GroupRingElem& b) {
        a.same_n(b);
        const auto n = a.coeffs_.size();
        GroupRingElem out(a.n());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.coeffs_[i] == 0)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                if (b.coeffs_[j] != 0)
                    out.coeffs_[(i + j) % n] += a.coeffs_[i] * b.coeffs_[j];
        }
        return out;
    }

    friend bool operator==(const GroupRingElem&, const GroupRingElem&) = default;

    /// Image under sigma -> exp(2 pi i nu / n), i.e. the character chi_nu.
    std::complex<double> evaluate(std::int64_t nu) const {
        const auto n = this->n();
        std::complex<double> acc = 0;
        for (std::int64_t k = 0; k < n; ++k) {
            const auto& c = coeffs_[static_cast<std::size_t>(k)];
            if (c == 0)
                continue;
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((nu * k) % n) / static_cast<double>(n);
            acc += c.get_d() * std::polar(1.0, angle);
        }
        return acc;
    }

    friend std::ostream& operator<<(std::ostream& os, const GroupRingElem& e) { return os << e.str(); }

    std::string str() const {
        std::string out;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            const auto& c = coeffs_[k];
            if (c == 0)
                continue;
            if (!out.empty())
                out += c < 0 ? " - " : " + ";
            else if (c < 0)
                out += "-";
            const Rational a = abs(c);
            if (k == 0)
                out += a.get_str();
            else
                out += (a == 1 ? "" : a.get_str() + "*") + "s^" + std::to_string(k);
        }
        return out.empty() ? "0" : out;
    }

private:
    static std::vector<Rational> checked(std::int64_t n) {
        if (n < 1)
            throw DomainError("GroupRingElem: group order must be positive");
        return std::vector<Rational>(static_cast<std::size_t>(n));
    }
    std::size_t index(std::int64_t k) const {
        const auto n = this->n();
        return static_cast<std::size_t>(((k % n) + n) % n);
    }
    void same_n(const GroupRingElem& o) const {
        if (o.coeffs_.size() != coeffs_.size())
            throw DomainError("GroupRingElem: group order mismatch");
    }

    std::vector<Rational> coeffs_;
};

/// Sigma_i = 1 + sigma^{d_i} + ... + sigma^{(e_i - 1) d_i}.
inline GroupRingElem norm_element(const CurveParams& p, int i) {
    if (i < 1 || i > p.s())
        throw DomainError("norm_element: branch index out of range");
    const auto n = p.n();
    const auto di = p.d(i);
    const auto e = n / std::gcd(n, di);
    GroupRingElem out(n);
    for (std::int64_t k = 0; k < e; ++k)
        out[(k * di) % n] += 1;
    return out;
}

/// Characters chi_nu occurring in Sigma_i C[C]: nu with n | nu (n, d_i).
inline std::set<std::int64_t> sigma_module_character(const CurveParams& p, int i) {
    if (i < 1 || i > p.s())
        throw DomainError("sigma_module_character: branch index out of range");
    const auto n = p.n();
    const auto g = std::gcd(n, p.d(i));
    std::set<std::int64_t> out;
    for (std::int64_t nu = 0; nu < n; ++nu)
        if ((nu * g) % n == 0)
            out.insert(nu);
    return out;
}

/// s x (s+1) matrix over Z[C]: row j is d/dx_j, column i < s is the relator
/// x_i^{e_i}, the last column the relator x_1 ... x_s.
struct AlexanderMatrix {
    std::int64_t n;
    int s;
    std::vector<GroupRingElem> entries; // row-major

    const GroupRingElem& operator()(int row, int col) const {
        return entries.at(static_cast<std::size_t>(row) * static_cast<std::size_t>(s + 1) +
                          static_cast<std::size_t>(col));
    }
    friend bool operator==(const AlexanderMatrix&, const AlexanderMatrix&) = default;
};

/// Closed form: diagonal Sigma_i, last column sigma^{d_1 + ... + d_{i-1}}.
inline AlexanderMatrix alexander_matrix(const CurveParams& p) {
    const int s = p.s();
    const auto n = p.n();
    AlexanderMatrix q{n, s, std::vector<GroupRingElem>(static_cast<std::size_t>(s * (s + 1)), GroupRingElem(n))};
    std::int64_t prefix = 0;
    for (int i = 0; i < s; ++i) {
        q.entries[static_cast<std::size_t>(i * (s + 1) + i)] = norm_element(p, i + 1);
        q.entries[static_cast<std::size_t>(i * (s + 1) + s)] = GroupRingElem::sigma_pow(n, prefix);
        prefix = (prefix + p.d(i + 1)) % n;
    }
    return q;
}

/// Image of a Fox derivative under x_i -> sigma^{d_i} (words of rank s).
inline GroupRingElem specialize(const CurveParams& p, const FormalSum& f) {
    if (f.rank() != p.s())
        throw DomainError("specialize: expected words in x_1..x_s");
    const auto n = p.n();
    GroupRingElem out(n);
    for (const auto& [w, c] : f.terms()) {
        std::int64_t k = 0;
        for (const auto& syl : w.syllables())
            k = (k + (syl.exp % n) * (p.d(syl.gen) % n)) % n;
        out[k] += Rational(c);
    }
    return out;
}

/// The same matrix rebuilt from Fox derivatives of the relators.
inline AlexanderMatrix alexander_matrix_fox(const CurveParams& p) {
    const int s = p.s();
    const auto n = p.n();
    const auto ram = ramification(p);
    std::vector<Word> relators;
    for (int i = 1; i <= s; ++i)
        relators.push_back(Word::generator(s, i, ram[static_cast<std::size_t>(i - 1)].e));
    Word full(s);
    for (int i = 1; i <= s; ++i)
        full = full * Word::generator(s, i);
    relators.push_back(full);

    AlexanderMatrix q{n, s, {}};
    q.entries.reserve(static_cast<std::size_t>(s * (s + 1)));
    for (int row = 1; row <= s; ++row)
        for (const auto& r : relators)
            q.entries.push_back(specialize(p, fox_derivative(r, row)));
    return q;
}

inline std::int64_t multiplicity_closed_form(const CurveParams& p, std::int64_t nu) {
    const auto n = p.n();
    nu = ((nu % n) + n) % n;
    if (nu == 0)
        return 0;
    std::int64_t count = 0;
    for (auto di : p.d())
        if ((nu * std::gcd(n, di)) % n != 0)
            ++count;
    if (count < 2)
        throw ConsistencyError("multiplicity_closed_form: fewer than two branch points move chi_" +
                               std::to_string(nu));
    return count - 2;
}

struct RankEstimate {
    int rank;
    std::vector<double> singular_values;
};

/// Numeric rank of Q at sigma -> zeta_n^nu: singular values above
/// tol * (largest). Throws when any value falls in the guard band
/// [0.1, 10] * threshold.
inline RankEstimate numeric_rank_at(const AlexanderMatrix& q, std::int64_t nu, double tol) {
    Eigen::MatrixXcd m(q.s, q.s + 1);
    for (int r = 0; r < q.s; ++r)
        for (int c = 0; c <= q.s; ++c)
            m(r, c) = q(r, c).evaluate(nu);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    RankEstimate out{0, {sv.data(), sv.data() + sv.size()}};
    const double top = sv.size() ? sv(0) : 0.0;
    if (top == 0.0)
        return out;
    const double threshold = tol * top;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) >= 0.1 * threshold && sv(k) <= 10.0 * threshold)
            throw NumericalInstability("numeric_rank_at: singular value " + std::to_string(sv(k)) +
                                       " within guard band of threshold " + std::to_string(threshold) +
                                       " at nu = " + std::to_string(nu));
        if (sv(k) > threshold)
            ++out.rank;
    }
    return out;
}

/// Multiplicity of chi_nu read off the Crowell sequence:
/// (s - rank Q(zeta^nu)) - 1 + [nu = 0].
inline std::int64_t multiplicity_rank_oracle(const AlexanderMatrix& q, std::int64_t nu, double tol = 1e-8) {
    if (!(tol > 0.0 && tol <= 1e-4))
        throw DomainError("multiplicity_rank_oracle: tol must lie in (0, 1e-4]");
    nu = ((nu % q.n) + q.n) % q.n;
    const auto est = numeric_rank_at(q, nu, tol);
    const std::int64_t m = (q.s - est.rank) - 1 + (nu == 0 ? 1 : 0);
    if (m < 0)
        throw ConsistencyError("multiplicity_rank_oracle: negative multiplicity at nu = " + std::to_string(nu));
    return m;
}

inline std::int64_t multiplicity_rank_oracle(const CurveParams& p, std::int64_t nu, double tol = 1e-8) {
    return multiplicity_rank_oracle(alexander_matrix(p), nu, tol);
}

enum class CwForm {
    Reduced,   // <-nu d_i / n>, consistent with sum M = 2g
    Ramified,  // <-nu d_i (n, d_i) / n>, kept for comparison only
};

/// -1 + [nu = 0] + sum_i <x_i> as an exact rational, <.> the fractional part.
inline Rational chevalley_weil_exact(const CurveParams& p, std::int64_t nu, CwForm form = CwForm::Reduced) {
    const auto n = p.n();
    nu = ((nu % n) + n) % n;
    Rational m = nu == 0 ? 0 : -1;
    for (auto di : p.d()) {
        std::int64_t a = (-(nu * (di % n))) % n;
        if (form == CwForm::Ramified)
            a = (a * std::gcd(n, di)) % n;
        a = (a + n) % n;
        Rational term(a, n);
        term.canonicalize();
        m += term;
    }
    return m;
}

/// Multiplicity of chi_nu in the holomorphic differentials.
inline std::int64_t chevalley_weil(const CurveParams& p, std::int64_t nu) {
    const Rational m = chevalley_weil_exact(p, nu);
    if (m.get_den() != 1 || m < 0)
        throw ConsistencyError("chevalley_weil: non-integral or negative value " + m.get_str() +
                               " at nu = " + std::to_string(nu));
    return m.get_num().get_si();
}

struct HomologyChecks {
    bool m0_zero = false;
    bool sum_M_eq_2g = false;
    bool hodge = false;       // M_nu = m_nu + m_{-nu}
    bool rank_agrees = false; // closed form = Crowell rank route
    bool cw_sum_eq_g = false;
    std::vector<std::int64_t> disagreeing_nu;

    bool all() const { return m0_zero && sum_M_eq_2g && hodge && rank_agrees && cw_sum_eq_g; }
};

struct HomologyDecomposition {
    std::int64_t n;
    std::int64_t genus;
    std::vector<std::int64_t> multiplicities; // M_0..M_{n-1}, closed form
    std::vector<std::int64_t> rank_route;     // same, from the Alexander matrix
    std::vector<std::int64_t> cw_table;       // m_0..m_{n-1}
    HomologyChecks checks;
};

/// Run all three routes and record agreement without throwing.
inline HomologyDecomposition compute_homology(const CurveParams& p, double tol = 1e-8) {
    const auto n = p.n();
    HomologyDecomposition h{n, genus(p), {}, {}, {}, {}};
    const auto q = alexander_matrix(p);
    for (std::int64_t nu = 0; nu < n; ++nu) {
        h.multiplicities.push_back(multiplicity_closed_form(p, nu));
        h.rank_route.push_back(multiplicity_rank_oracle(q, nu, tol));
        h.cw_table.push_back(chevalley_weil(p, nu));
    }
    auto& c = h.checks;
    c.m0_zero = h.multiplicities[0] == 0;
    c.rank_agrees = true;
    c.hodge = true;
    for (std::int64_t nu = 0; nu < n; ++nu) {
        const auto k = static_cast<std::size_t>(nu);
        const auto conj = static_cast<std::size_t>((n - nu) % n);
        const bool rank_ok = h.rank_route[k] == h.multiplicities[k];
        const bool hodge_ok = h.cw_table[k] + h.cw_table[conj] == h.multiplicities[k];
        c.rank_agrees = c.rank_agrees && rank_ok;
        c.hodge = c.hodge && hodge_ok;
        if (!rank_ok || !hodge_ok)
            c.disagreeing_nu.push_back(nu);
    }
    const auto sum_m = std::accumulate(h.multiplicities.begin(), h.multiplicities.end(), std::int64_t{0});
    const auto sum_cw = std::accumulate(h.cw_table.begin(), h.cw_table.end(), std::int64_t{0});
    c.sum_M_eq_2g = sum_m == 2 * h.genus;
    c.cw_sum_eq_g = sum_cw == h.genus;
    return h;
}

/// As compute_homology, but any disagreement between routes is an error.
inline HomologyDecomposition homology_decomposition(const CurveParams& p, double tol = 1e-8) {
    auto h = compute_homology(p, tol);
    if (!h.checks.all()) {
        std::string where;
        for (auto nu : h.checks.disagreeing_nu)
            where += (where.empty() ? "" : ", ") + std::to_string(nu);
        throw ConsistencyError("homology_decomposition: routes disagree" +
                               (where.empty() ? std::string(" on a global sum") : " at nu = " + where));
    }
    return h;
}

inline nlohmann::json to_json(const HomologyDecomposition& h) {
    return {{"genus", h.genus},
            {"M", h.multiplicities},
            {"cw", h.cw_table},
            {"checks",
             {{"sum_M_eq_2g", h.checks.sum_M_eq_2g},
              {"hodge", h.checks.hodge},
              {"rank_agrees", h.checks.rank_agrees}}}};
}

/// n x n matrix of x -> elem * x in the basis 1, sigma, ..., sigma^{n-1}.
inline std::vector<std::vector<Rational>> multiplication_matrix(const GroupRingElem& e) {
    const auto n = static_cast<std::size_t>(e.n());
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
    for (std::size_t col = 0; col < n; ++col)
        for (std::size_t k = 0; k < n; ++k)
            m[(k + col) % n][col] = e.coeffs()[k];
    return m;
}

inline std::size_t rational_rank(std::vector<std::vector<Rational>> m) {
    if (m.empty())
        return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && m[p][c] == 0)
            ++p;
        if (p == rows)
            continue;
        std::swap(m[p], m[rank]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (m[r][c] == 0)
                continue;
            const Rational f = m[r][c] / m[rank][c];
            for (std::size_t k = c; k < cols; ++k)
                m[r][k] -= f * m[rank][k];
        }
        ++rank;
    }
    return rank;
}

} // namespace kummer
