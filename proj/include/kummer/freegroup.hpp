#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kummer/errors.hpp"
#include "kummer/exactlin.hpp"

namespace kummer {

struct Syllable {
    int gen;           // 1-based generator index
    std::int64_t exp;  // nonzero
    auto operator<=>(const Syllable&) const = default;
};

/// Freely reduced word in the free group on x_1..x_rank, stored as
/// run-length syllables x_gen^exp with distinct neighbouring generators.
class Word {
public:
    explicit Word(int rank = 0) : rank_(rank) {
        if (rank < 0)
            throw DomainError("Word: negative rank");
    }

    Word(int rank, const std::vector<Syllable>& syllables) : Word(rank) {
        for (const auto& s : syllables)
            push(s.gen, s.exp);
    }

    static Word generator(int rank, int gen, std::int64_t exp = 1) {
        Word w(rank);
        w.push(gen, exp);
        return w;
    }

    // x_gen^exp from an arbitrary precision exponent
    static Word generator(int rank, int gen, const Integer& exp) {
        if (!exp.fits_slong_p())
            throw DomainError("Word: exponent exceeds machine range");
        return generator(rank, gen, static_cast<std::int64_t>(exp.get_si()));
    }

    int rank() const noexcept { return rank_; }
    const std::vector<Syllable>& syllables() const noexcept { return syl_; }
    bool empty() const noexcept { return syl_.empty(); }

    // number of letters
    std::int64_t length() const {
        std::int64_t n = 0;
        for (const auto& s : syl_)
            n += s.exp < 0 ? -s.exp : s.exp;
        return n;
    }

    Word inverse() const {
        Word w(rank_);
        w.syl_.reserve(syl_.size());
        for (auto it = syl_.rbegin(); it != syl_.rend(); ++it)
            w.syl_.push_back({it->gen, -it->exp});
        return w;
    }

    Word pow(std::int64_t k) const {
        Word base = k < 0 ? inverse() : *this;
        std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
        Word out(rank_);
        while (e) {
            if (e & 1)
                out = out * base;
            e >>= 1;
            if (e)
                base = base * base;
        }
        return out;
    }

    std::vector<Integer> exponent_vector() const {
        std::vector<Integer> v(static_cast<std::size_t>(rank_));
        for (const auto& s : syl_)
            v[static_cast<std::size_t>(s.gen - 1)] += Integer(static_cast<long>(s.exp));
        return v;
    }

    friend Word operator*(const Word& a, const Word& b) {
        if (a.rank_ != b.rank_)
            throw DomainError("Word: rank mismatch in product");
        Word w = a;
        for (const auto& s : b.syl_)
            w.push(s.gen, s.exp);
        return w;
    }

    friend bool operator==(const Word&, const Word&) = default;
    friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
        if (auto c = a.rank_ <=> b.rank_; c != 0)
            return c;
        return a.syl_ <=> b.syl_;
    }

    /// `x1^2 x2^-1 x3`; the empty word prints as `1`.
    std::string str() const {
        if (syl_.empty())
            return "1";
        std::string out;
        for (const auto& s : syl_) {
            if (!out.empty())
                out += ' ';
            out += 'x';
            out += std::to_string(s.gen);
            if (s.exp != 1) {
                out += '^';
                out += std::to_string(s.exp);
            }
        }
        return out;
    }

    /// Accepts juxtaposition with optional whitespace or `*` between factors,
    /// `xI`, `xI^E` (E may be negative), and `1` for the identity.
    static Word parse(std::string_view text, int rank) {
        Word w(rank);
        std::size_t i = 0;
        auto skip = [&] {
            while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '*'))
                ++i;
        };
        auto number = [&](bool allow_sign) -> std::int64_t {
            bool neg = false;
            if (allow_sign && i < text.size() && (text[i] == '-' || text[i] == '+'))
                neg = text[i++] == '-';
            if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
                throw DomainError("Word::parse: expected digits in '" + std::string(text) + "'");
            std::int64_t v = 0;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10)
                    throw DomainError("Word::parse: number too large");
                v = v * 10 + (text[i++] - '0');
            }
            return neg ? -v : v;
        };
        skip();
        if (i < text.size() && text[i] == '1') {
            ++i;
            skip();
            if (i != text.size())
                throw DomainError("Word::parse: trailing input after identity");
            return w;
        }
        while (skip(), i < text.size()) {
            if (text[i] != 'x')
                throw DomainError("Word::parse: unexpected character '" + std::string(1, text[i]) + "'");
            ++i;
            const auto gen = number(false);
            if (gen < 1 || gen > rank)
                throw DomainError("Word::parse: generator x" + std::to_string(gen) + " outside rank " +
                                  std::to_string(rank));
            std::int64_t exp = 1;
            if (i < text.size() && text[i] == '^') {
                ++i;
                exp = number(true);
            }
            w.push(static_cast<int>(gen), exp);
        }
        return w;
    }

private:
    void push(int gen, std::int64_t exp) {
        if (gen < 1 || gen > rank_)
            throw DomainError("Word: generator index " + std::to_string(gen) + " outside [1, " +
                              std::to_string(rank_) + "]");
        if (exp == 0)
            return;
        if (!syl_.empty() && syl_.back().gen == gen) {
            syl_.back().exp += exp;
            if (syl_.back().exp == 0)
                syl_.pop_back();
        } else {
            syl_.push_back({gen, exp});
        }
    }

    int rank_;
    std::vector<Syllable> syl_;
};

inline Word commutator(const Word& a, const Word& b) {
    return a * b * a.inverse() * b.inverse();
}

// Substitute images for generators.
inline Word substitute(const Word& w, const std::vector<Word>& images) {
    if (static_cast<int>(images.size()) != w.rank())
        throw DomainError("substitute: image count differs from rank");
    const int target_rank = images.empty() ? 0 : images.front().rank();
    Word out(target_rank);
    for (const auto& s : w.syllables())
        out = out * images[static_cast<std::size_t>(s.gen - 1)].pow(s.exp);
    return out;
}

/// Automorphism of F_rank given by generator images, with a certified inverse.
class FreeAutomorphism {
public:
    FreeAutomorphism(std::vector<Word> images, std::vector<Word> inverse_images)
        : rank_(static_cast<int>(images.size())), images_(std::move(images)),
          inverse_(std::move(inverse_images)) {
        if (inverse_.size() != images_.size())
            throw DomainError("FreeAutomorphism: inverse has wrong size");
        for (const auto& w : images_)
            if (w.rank() != rank_)
                throw DomainError("FreeAutomorphism: image rank mismatch");
        for (const auto& w : inverse_)
            if (w.rank() != rank_)
                throw DomainError("FreeAutomorphism: inverse rank mismatch");
        for (int i = 1; i <= rank_; ++i) {
            const Word x = Word::generator(rank_, i);
            if (substitute(substitute(x, inverse_), images_) != x ||
                substitute(substitute(x, images_), inverse_) != x)
                throw DomainError("FreeAutomorphism: stored inverse does not invert");
        }
    }

    static FreeAutomorphism identity(int rank) {
        std::vector<Word> g;
        for (int i = 1; i <= rank; ++i)
            g.push_back(Word::generator(rank, i));
        return {g, g};
    }

    int rank() const noexcept { return rank_; }
    const std::vector<Word>& images() const noexcept { return images_; }
    const std::vector<Word>& inverse_images() const noexcept { return inverse_; }

    Word operator()(const Word& w) const { return substitute(w, images_); }

    FreeAutomorphism inverse() const { return {inverse_, images_}; }

    // (a * b)(w) = a(b(w))
    friend FreeAutomorphism operator*(const FreeAutomorphism& a, const FreeAutomorphism& b) {
        if (a.rank_ != b.rank_)
            throw DomainError("FreeAutomorphism: rank mismatch in composition");
        std::vector<Word> img, inv;
        img.reserve(a.images_.size());
        inv.reserve(a.images_.size());
        for (const auto& w : b.images_)
            img.push_back(a(w));
        for (const auto& w : a.inverse_)
            inv.push_back(substitute(w, b.inverse_));
        return {std::move(img), std::move(inv)};
    }

    friend bool operator==(const FreeAutomorphism& a, const FreeAutomorphism& b) {
        return a.images_ == b.images_;
    }

    // column i = exponent vector of the image of x_i
    IntMatrix abelianization() const {
        IntMatrix m(static_cast<std::size_t>(rank_), static_cast<std::size_t>(rank_));
        for (int i = 0; i < rank_; ++i) {
            const auto v = images_[static_cast<std::size_t>(i)].exponent_vector();
            for (int r = 0; r < rank_; ++r)
                m(static_cast<std::size_t>(r), static_cast<std::size_t>(i)) = v[static_cast<std::size_t>(r)];
        }
        return m;
    }

private:
    int rank_;
    std::vector<Word> images_;
    std::vector<Word> inverse_;
};

namespace detail {

inline std::vector<Word> generators(int rank) {
    std::vector<Word> g;
    for (int i = 1; i <= rank; ++i)
        g.push_back(Word::generator(rank, i));
    return g;
}

// Composition of image lists: (a o b)(x_i) = a(b(x_i)).
inline std::vector<Word> compose(const std::vector<Word>& a, const std::vector<Word>& b) {
    std::vector<Word> out;
    out.reserve(b.size());
    for (const auto& w : b)
        out.push_back(substitute(w, a));
    return out;
}

// nearest integer to a / b, b != 0
inline Integer round_div(const Integer& a, const Integer& b) {
    Integer q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    if (2 * abs(r) > abs(b))
        q += 1;
    return q;
}

inline std::int64_t to_exponent(const Integer& x) {
    if (!x.fits_slong_p())
        throw DomainError("lift_unimodular: coefficient exceeds machine range");
    return static_cast<std::int64_t>(x.get_si());
}

} // namespace detail

/// Lift of a product E_1 ... E_m of elementary column operations (as applied
/// to the identity) to tau(E_1) o ... o tau(E_m), where col_dst += c col_src
/// lifts to x_dst -> x_dst x_src^c. Composition happens on the right, which
/// rewrites a single image per step, so word lengths grow additively.
inline FreeAutomorphism lift_column_ops(int rank, std::span<const ColumnOp> ops) {
    std::vector<Word> lift = detail::generators(rank), lift_inv = lift;
    auto step = [](std::vector<Word>& f, const ColumnOp& op, bool inverse) {
        switch (op.kind) {
        case ColumnOp::AddMultiple: {
            const auto c = detail::to_exponent(op.c);
            f[op.dst] = f[op.dst] * f[op.src].pow(inverse ? -c : c);
            break;
        }
        case ColumnOp::Swap:
            std::swap(f[op.dst], f[op.src]);
            break;
        case ColumnOp::Negate:
            f[op.dst] = f[op.dst].inverse();
            break;
        }
    };
    for (const auto& op : ops) {
        if (op.dst >= static_cast<std::size_t>(rank) || op.src >= static_cast<std::size_t>(rank))
            throw DomainError("lift_column_ops: column index out of range");
        step(lift, op, false);
    }
    for (auto it = ops.rbegin(); it != ops.rend(); ++it)
        step(lift_inv, *it, true);
    return FreeAutomorphism(std::move(lift), std::move(lift_inv));
}

/// Lift a unimodular matrix to an automorphism of F_rank whose abelianization
/// is the matrix (columns are exponent vectors of the images).
///
/// The matrix is reduced to the identity by column operations E_1 ... E_m,
/// so it equals E_m^-1 ... E_1^-1, and each factor lifts to a Nielsen move.
/// Prefer lift_column_ops when a short factorization is already known: words
/// produced here can be long.
inline FreeAutomorphism lift_unimodular(const IntMatrix& r) {
    if (!is_unimodular(r))
        throw DomainError("lift_unimodular: matrix is not unimodular");
    const auto k = r.rows();
    IntMatrix a = r;
    std::vector<ColumnOp> ops;
    auto op = [&](ColumnOp o) {
        apply(a, o);
        ops.push_back(std::move(o));
    };

    // Row by row: Euclid across the trailing columns leaves a unit pivot,
    // which then clears the rest of the row. Columns left of the pivot are
    // unit vectors above this row, so the shape [I 0; * *] is kept.
    for (std::size_t row = 0; row < k; ++row) {
        for (;;) {
            std::size_t piv = k;
            for (std::size_t j = row; j < k; ++j)
                if (a(row, j) != 0 && (piv == k || abs(a(row, j)) < abs(a(row, piv))))
                    piv = j;
            if (piv == k)
                throw ConsistencyError("lift_unimodular: singular row during reduction");
            bool clear = true;
            for (std::size_t j = row; j < k; ++j) {
                if (j == piv || a(row, j) == 0)
                    continue;
                op({ColumnOp::AddMultiple, j, piv, Integer(-detail::round_div(a(row, j), a(row, piv)))});
                if (a(row, j) != 0)
                    clear = false;
            }
            if (clear) {
                if (piv != row)
                    op({ColumnOp::Swap, row, piv});
                break;
            }
        }
        if (a(row, row) < 0)
            op({ColumnOp::Negate, row, row});
        if (a(row, row) != 1)
            throw ConsistencyError("lift_unimodular: pivot is not a unit");
        for (std::size_t c = 0; c < row; ++c)
            if (a(row, c) != 0)
                op({ColumnOp::AddMultiple, c, row, Integer(-a(row, c))});
    }
    if (a != IntMatrix::identity(k))
        throw ConsistencyError("lift_unimodular: reduction did not reach the identity");

    // inverse factors in reverse order
    std::vector<ColumnOp> inv;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        ColumnOp o = *it;
        if (o.kind == ColumnOp::AddMultiple)
            o.c = -o.c;
        inv.push_back(std::move(o));
    }
    return lift_column_ops(static_cast<int>(k), inv);
}

/// Element of the integral group ring of a free group: finite sum of words.
class FormalSum {
public:
    explicit FormalSum(int rank) : rank_(rank) {}

    static FormalSum of(const Word& w, const Integer& c = 1) {
        FormalSum f(w.rank());
        f.add(w, c);
        return f;
    }

    int rank() const noexcept { return rank_; }
    const std::map<Word, Integer>& terms() const noexcept { return terms_; }
    bool zero() const noexcept { return terms_.empty(); }

    void add(const Word& w, const Integer& c) {
        if (w.rank() != rank_)
            throw DomainError("FormalSum: rank mismatch");
        if (c == 0)
            return;
        auto [it, inserted] = terms_.try_emplace(w, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0)
                terms_.erase(it);
        }
    }

    FormalSum& operator+=(const FormalSum& o) {
        for (const auto& [w, c] : o.terms_)
            add(w, c);
        return *this;
    }
    FormalSum& operator-=(const FormalSum& o) {
        for (const auto& [w, c] : o.terms_)
            add(w, Integer(-c));
        return *this;
    }
    friend FormalSum operator+(FormalSum a, const FormalSum& b) { return a += b; }
    friend FormalSum operator-(FormalSum a, const FormalSum& b) { return a -= b; }

    friend FormalSum operator*(const FormalSum& a, const FormalSum& b) {
        FormalSum out(a.rank_);
        for (const auto& [u, cu] : a.terms_)
            for (const auto& [v, cv] : b.terms_)
                out.add(u * v, cu * cv);
        return out;
    }
    friend FormalSum operator*(const Word& w, const FormalSum& f) { return of(w) * f; }
    friend FormalSum operator*(const FormalSum& f, const Word& w) { return f * of(w); }

    friend bool operator==(const FormalSum&, const FormalSum&) = default;

    std::string str() const {
        if (terms_.empty())
            return "0";
        std::string out;
        for (const auto& [w, c] : terms_) {
            if (!out.empty())
                out += c < 0 ? " - " : " + ";
            else if (c < 0)
                out += "-";
            const Integer a = abs(c);
            if (a != 1 || w.empty())
                out += a.get_str() + (w.empty() ? "" : "*");
            if (!w.empty())
                out += "(" + w.str() + ")";
        }
        return out;
    }

private:
    int rank_;
    std::map<Word, Integer> terms_;
};

/// Fox derivative d(w)/d(x_j) in Z[F].
inline FormalSum fox_derivative(const Word& w, int j) {
    if (j < 1 || j > w.rank())
        throw DomainError("fox_derivative: generator index out of range");
    const int rank = w.rank();
    FormalSum out(rank);
    Word prefix(rank);
    for (const auto& s : w.syllables()) {
        if (s.gen == j) {
            const Word x = Word::generator(rank, j);
            if (s.exp > 0) {
                // 1 + x + ... + x^(e-1)
                Word p = prefix;
                for (std::int64_t k = 0; k < s.exp; ++k) {
                    out.add(p, 1);
                    p = p * x;
                }
            } else {
                // -(x^-1 + ... + x^e)
                Word p = prefix;
                for (std::int64_t k = 0; k < -s.exp; ++k) {
                    p = p * x.inverse();
                    out.add(p, -1);
                }
            }
        }
        prefix = prefix * Word::generator(rank, s.gen, s.exp);
    }
    return out;
}

} // namespace kummer
