#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>
#include <nlohmann/json.hpp>

#include "kummer/errors.hpp"

namespace kummer {

using Integer = mpz_class;
using Rational = mpq_class;

// Dense integer matrix, row-major, arbitrary precision entries.
class IntMatrix {
public:
    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
        if (rows == 0 || cols == 0)
            throw DomainError("IntMatrix: dimensions must be positive");
    }

    IntMatrix(std::initializer_list<std::initializer_list<long>> rows)
        : IntMatrix(rows.size(), rows.size() ? rows.begin()->size() : 0) {
        std::size_t r = 0;
        for (const auto& row : rows) {
            if (row.size() != cols_)
                throw DomainError("IntMatrix: ragged initializer");
            std::size_t c = 0;
            for (long v : row)
                (*this)(r, c++) = v;
            ++r;
        }
    }

    static IntMatrix identity(std::size_t n) {
        IntMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    static IntMatrix row_vector(std::span<const Integer> v) {
        IntMatrix m(1, v.size());
        for (std::size_t j = 0; j < v.size(); ++j)
            m(0, j) = v[j];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    Integer& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Integer& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<Integer> column(std::size_t c) const {
        std::vector<Integer> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }

    std::vector<Integer> row(std::size_t r) const {
        return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t c = 0; c < cols_; ++c)
            std::swap((*this)(a, c), (*this)(b, c));
    }
    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t r = 0; r < rows_; ++r)
            std::swap((*this)(r, a), (*this)(r, b));
    }
    // row_dst += k * row_src
    void add_row(std::size_t dst, std::size_t src, const Integer& k) {
        for (std::size_t c = 0; c < cols_; ++c)
            (*this)(dst, c) += k * (*this)(src, c);
    }
    // col_dst += k * col_src
    void add_col(std::size_t dst, std::size_t src, const Integer& k) {
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, dst) += k * (*this)(r, src);
    }
    void negate_row(std::size_t r) {
        for (std::size_t c = 0; c < cols_; ++c)
            (*this)(r, c) = -(*this)(r, c);
    }
    void negate_col(std::size_t c) {
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, c) = -(*this)(r, c);
    }

    friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
        if (a.cols_ != b.rows_)
            throw DomainError("IntMatrix: shape mismatch in product");
        IntMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Integer& aik = a(i, k);
                if (aik == 0)
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    out(i, j) += aik * b(k, j);
            }
        return out;
    }

    std::vector<Integer> apply(std::span<const Integer> v) const {
        if (v.size() != cols_)
            throw DomainError("IntMatrix: vector length mismatch");
        std::vector<Integer> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                out[i] += (*this)(i, j) * v[j];
        return out;
    }

    friend std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
        os << '[';
        for (std::size_t r = 0; r < m.rows_; ++r) {
            os << (r ? ", [" : "[");
            for (std::size_t c = 0; c < m.cols_; ++c)
                os << (c ? ", " : "") << m(r, c).get_str();
            os << ']';
        }
        return os << ']';
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Integer> data_;
};

// Entries serialize as decimal strings so arbitrary precision survives.
inline nlohmann::json to_json(const IntMatrix& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c).get_str());
        entries.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

inline IntMatrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto& entries = j.at("entries");
    if (entries.size() != rows)
        throw DomainError("matrix json: row count mismatch");
    IntMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (entries[r].size() != cols)
            throw DomainError("matrix json: column count mismatch");
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& e = entries[r][c];
            if (e.is_string()) {
                if (m(r, c).set_str(e.get<std::string>(), 10) != 0)
                    throw DomainError("matrix json: bad integer '" + e.get<std::string>() + "'");
            } else {
                m(r, c) = Integer(e.get<long>());
            }
        }
    }
    return m;
}

struct EgcdResult {
    Integer g; // >= 0
    Integer u;
    Integer v;
};

// u*a + v*b = g = gcd(|a|, |b|).
inline EgcdResult egcd(const Integer& a, const Integer& b) {
    if (a == 0 && b == 0)
        throw DomainError("egcd: both inputs are zero");
    Integer old_r = a, r = b;
    Integer old_s = 1, s = 0;
    Integer old_t = 0, t = 1;
    while (r != 0) {
        Integer q;
        mpz_tdiv_q(q.get_mpz_t(), old_r.get_mpz_t(), r.get_mpz_t());
        Integer tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    if (old_r < 0) {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    return {old_r, old_s, old_t};
}

inline Integer gcd(const Integer& a, const Integer& b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Integer gcd(std::span<const Integer> v) {
    Integer g = 0;
    for (const auto& x : v)
        g = gcd(g, x);
    return g;
}

// Least non-negative residue.
inline Integer mod(const Integer& a, const Integer& n) {
    Integer r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t());
    return r;
}

// Fraction-free Gaussian elimination (Bareiss); exact.
inline Integer determinant(const IntMatrix& a) {
    if (!a.square())
        throw DomainError("determinant: matrix is not square");
    const std::size_t n = a.rows();
    IntMatrix m = a;
    Integer prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && m(p, k) == 0)
                ++p;
            if (p == n)
                return 0;
            m.swap_rows(k, p);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                Integer t = m(i, j) * m(k, k) - m(i, k) * m(k, j);
                mpz_divexact(m(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
        prev = m(k, k);
    }
    Integer det = m(n - 1, n - 1);
    return sign < 0 ? Integer(-det) : det;
}

inline bool is_unimodular(const IntMatrix& a) {
    if (!a.square())
        return false;
    const Integer det = determinant(a);
    return det == 1 || det == -1;
}

/// Elementary column operation: col_dst += c * col_src, a swap, or a sign flip.
struct ColumnOp {
    enum Kind { AddMultiple, Swap, Negate } kind;
    std::size_t dst;
    std::size_t src;
    Integer c{};
};

inline void apply(IntMatrix& m, const ColumnOp& op) {
    switch (op.kind) {
    case ColumnOp::AddMultiple:
        m.add_col(op.dst, op.src, op.c);
        break;
    case ColumnOp::Swap:
        m.swap_cols(op.dst, op.src);
        break;
    case ColumnOp::Negate:
        m.negate_col(op.dst);
        break;
    }
}

struct SnfResult {
    Integer gcd;                         // positive pivot
    IntMatrix r_matrix;                  // unimodular
    std::vector<ColumnOp> ops{};         // r_matrix is the identity after these, in order
    std::optional<IntMatrix> l_matrix{}; // only for the general case
};

/// Column reduction of a single row: returns gcd g > 0 and a unimodular R with
/// d * R = (g, 0, ..., 0). Pivots on the entry of least absolute value.
inline SnfResult smith_row(std::span<const Integer> d) {
    if (d.empty())
        throw DomainError("smith_row: empty input");
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] == 0)
            throw ValidationError(ValidationKind::ZeroEntry,
                                  "smith_row: entry " + std::to_string(i + 1) + " is zero");

    const std::size_t k = d.size();
    std::vector<Integer> row(d.begin(), d.end());
    IntMatrix r = IntMatrix::identity(k);
    std::vector<ColumnOp> ops;
    auto op = [&](ColumnOp o) {
        apply(r, o);
        ops.push_back(std::move(o));
    };

    for (;;) {
        std::size_t piv = k;
        for (std::size_t j = 0; j < k; ++j)
            if (row[j] != 0 && (piv == k || abs(row[j]) < abs(row[piv])))
                piv = j;
        bool clear = true;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == piv || row[j] == 0)
                continue;
            Integer q;
            mpz_tdiv_q(q.get_mpz_t(), row[j].get_mpz_t(), row[piv].get_mpz_t());
            row[j] -= q * row[piv];
            op({ColumnOp::AddMultiple, j, piv, Integer(-q)});
            if (row[j] != 0)
                clear = false;
        }
        if (clear) {
            if (piv != 0) {
                std::swap(row[0], row[piv]);
                op({ColumnOp::Swap, 0, piv});
            }
            break;
        }
    }
    if (row[0] < 0) {
        row[0] = -row[0];
        op({ColumnOp::Negate, 0, 0});
    }
    return {row[0], std::move(r), std::move(ops)};
}

inline SnfResult smith_row(std::initializer_list<long> d) {
    std::vector<Integer> v(d.begin(), d.end());
    return smith_row(std::span<const Integer>(v));
}

struct SmithForm {
    IntMatrix l;
    IntMatrix d;
    IntMatrix r;
};

/// L * A * R = D with D diagonal, d_1 | d_2 | ..., all d_i >= 0, and L, R
/// unimodular.
inline SmithForm smith_full(const IntMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t k = a.cols();
    IntMatrix d = a;
    IntMatrix l = IntMatrix::identity(m);
    IntMatrix r = IntMatrix::identity(k);

    const std::size_t steps = std::min(m, k);
    for (std::size_t t = 0; t < steps; ++t) {
        for (;;) {
            // pivot: least nonzero |entry| in the trailing block
            std::size_t pi = m, pj = k;
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < k; ++j)
                    if (d(i, j) != 0 && (pi == m || abs(d(i, j)) < abs(d(pi, pj)))) {
                        pi = i;
                        pj = j;
                    }
            if (pi == m)
                goto finished; // trailing block is zero
            d.swap_rows(t, pi);
            l.swap_rows(t, pi);
            d.swap_cols(t, pj);
            r.swap_cols(t, pj);

            bool dirty = false;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (d(i, t) == 0)
                    continue;
                Integer q;
                mpz_tdiv_q(q.get_mpz_t(), d(i, t).get_mpz_t(), d(t, t).get_mpz_t());
                d.add_row(i, t, Integer(-q));
                l.add_row(i, t, Integer(-q));
                dirty = dirty || d(i, t) != 0;
            }
            for (std::size_t j = t + 1; j < k; ++j) {
                if (d(t, j) == 0)
                    continue;
                Integer q;
                mpz_tdiv_q(q.get_mpz_t(), d(t, j).get_mpz_t(), d(t, t).get_mpz_t());
                d.add_col(j, t, Integer(-q));
                r.add_col(j, t, Integer(-q));
                dirty = dirty || d(t, j) != 0;
            }
            if (dirty)
                continue;

            // divisibility: fold an offending row into row t and retry
            std::size_t bad = m;
            for (std::size_t i = t + 1; i < m && bad == m; ++i)
                for (std::size_t j = t + 1; j < k; ++j)
                    if (!mpz_divisible_p(d(i, j).get_mpz_t(), d(t, t).get_mpz_t())) {
                        bad = i;
                        break;
                    }
            if (bad == m)
                break;
            d.add_row(t, bad, Integer(1));
            l.add_row(t, bad, Integer(1));
        }
        if (d(t, t) < 0) {
            d.negate_row(t);
            l.negate_row(t);
        }
    }
finished:
    return {std::move(l), std::move(d), std::move(r)};
}

/// Exact inverse of a matrix with determinant +-1.
inline IntMatrix unimodular_inverse(const IntMatrix& a) {
    if (!is_unimodular(a))
        throw DomainError("unimodular_inverse: determinant is not +-1");
    const std::size_t n = a.rows();
    std::vector<Rational> m(n * 2 * n);
    auto at = [&](std::size_t i, std::size_t j) -> Rational& { return m[i * 2 * n + j]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            at(i, j) = Rational(a(i, j));
        at(i, n + i) = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (at(p, c) == 0)
            ++p;
        if (p != c)
            for (std::size_t j = 0; j < 2 * n; ++j)
                std::swap(at(p, j), at(c, j));
        const Rational inv = 1 / at(c, c);
        for (std::size_t j = 0; j < 2 * n; ++j)
            at(c, j) *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || at(i, c) == 0)
                continue;
            const Rational f = at(i, c);
            for (std::size_t j = 0; j < 2 * n; ++j)
                at(i, j) -= f * at(c, j);
        }
    }
    IntMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Rational& q = at(i, n + j);
            if (q.get_den() != 1)
                throw ConsistencyError("unimodular_inverse: non-integral entry");
            out(i, j) = q.get_num();
        }
    return out;
}

struct StructuredSmith {
    IntMatrix candidate;
    Integer det;
    bool is_snf;
};

/// The explicit candidate built from Bezout coefficients h_i of d_1..d_k and
/// delta_i = d_i/(d_1,d_i), Delta_i = d_1/(d_1,d_i):
///
///   [ h_1  -delta_2 ... -delta_k ]
///   [ h_2   Delta_2          0   ]
///   [ ...          ...           ]
///   [ h_k   0    ...   Delta_k   ]
///
/// It always maps d to (gcd, 0, ..., 0); it is unimodular exactly when
/// gcd * d_1^(k-2) / prod (d_1, d_i) equals 1.
inline StructuredSmith structured_smith(std::span<const Integer> d, const Integer& /*n*/) {
    const std::size_t k = d.size();
    if (k < 2)
        throw DomainError("structured_smith: need at least two entries");
    for (const auto& x : d)
        if (x <= 0)
            throw DomainError("structured_smith: entries must be positive");

    std::vector<Integer> h(k);
    h[0] = 1;
    Integer g = d[0];
    for (std::size_t i = 1; i < k; ++i) {
        auto [g2, u, v] = egcd(g, d[i]);
        for (std::size_t j = 0; j < i; ++j)
            h[j] *= u;
        h[i] = v;
        g = g2;
    }

    IntMatrix c(k, k);
    for (std::size_t i = 0; i < k; ++i)
        c(i, 0) = h[i];
    for (std::size_t j = 1; j < k; ++j) {
        const Integer g1j = gcd(d[0], d[j]);
        Integer delta, Delta;
        mpz_divexact(delta.get_mpz_t(), d[j].get_mpz_t(), g1j.get_mpz_t());
        mpz_divexact(Delta.get_mpz_t(), d[0].get_mpz_t(), g1j.get_mpz_t());
        c(0, j) = -delta;
        c(j, j) = Delta;
    }
    Integer det = determinant(c);
    const bool snf = det == 1 || det == -1;
    return {std::move(c), std::move(det), snf};
}

/// l = R * (n t_1, t_2, ..., t_k). With integral = true the first slot is
/// zeroed, so sum l_i d_i = 0 exactly.
inline std::vector<Integer> solve_congruence_param(const IntMatrix& r, const Integer& n,
                                                   std::span<const Integer> t,
                                                   bool integral = false) {
    if (!r.square() || t.size() != r.cols())
        throw DomainError("solve_congruence_param: t must have length s-1");
    std::vector<Integer> x(t.begin(), t.end());
    x[0] = integral ? Integer(0) : Integer(n * x[0]);
    return r.apply(x);
}

inline std::vector<Integer> solve_congruence_param(std::span<const Integer> d, const Integer& n,
                                                   std::span<const Integer> t,
                                                   bool integral = false) {
    if (t.size() != d.size())
        throw DomainError("solve_congruence_param: t must have length s-1");
    const SnfResult snf = smith_row(d);
    if (gcd(snf.gcd, n) != 1)
        throw ValidationError(ValidationKind::ReducibleCurve,
                              "gcd(d) = " + snf.gcd.get_str() + " is not prime to n = " +
                                  n.get_str());
    return solve_congruence_param(snf.r_matrix, n, t, integral);
}

} // namespace kummer
