#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kummer/cover.hpp"
#include "kummer/errors.hpp"
#include "kummer/exactlin.hpp"
#include "kummer/freegroup.hpp"
#include "kummer/schreier.hpp"

namespace kummer {

struct BraidLetter {
    int index; // sigma_index, 1 <= index <= rank - 1
    int sign;  // +1 or -1
    friend bool operator==(const BraidLetter&, const BraidLetter&) = default;
};

/// Word in the Artin generators acting on F_rank (rank = s - 1 strands' loops).
class BraidWord {
public:
    explicit BraidWord(int rank, std::vector<BraidLetter> letters = {}) : rank_(rank), letters_(std::move(letters)) {
        if (rank < 2)
            throw DomainError("BraidWord: rank must be >= 2");
        for (const auto& l : letters_)
            check(l);
    }

    int rank() const noexcept { return rank_; }
    const std::vector<BraidLetter>& letters() const noexcept { return letters_; }

    BraidWord& push(int index, int sign = 1) {
        check({index, sign});
        letters_.push_back({index, sign});
        return *this;
    }

    friend BraidWord operator*(BraidWord a, const BraidWord& b) {
        if (a.rank_ != b.rank_)
            throw DomainError("BraidWord: rank mismatch");
        a.letters_.insert(a.letters_.end(), b.letters_.begin(), b.letters_.end());
        return a;
    }

private:
    void check(const BraidLetter& l) const {
        if (l.index < 1 || l.index >= rank_)
            throw DomainError("BraidWord: generator index " + std::to_string(l.index) + " out of range [1, " +
                              std::to_string(rank_ - 1) + "]");
        if (l.sign != 1 && l.sign != -1)
            throw DomainError("BraidWord: sign must be +1 or -1");
    }

    int rank_;
    std::vector<BraidLetter> letters_;
};

/// sigma_i: x_i -> x_i x_{i+1} x_i^-1, x_{i+1} -> x_i, other generators fixed.
inline FreeAutomorphism braid_automorphism(int i, int rank) {
    if (rank < 2 || i < 1 || i >= rank)
        throw DomainError("braid_automorphism: index " + std::to_string(i) + " out of range for rank " +
                          std::to_string(rank));
    auto img = detail::generators(rank);
    auto inv = img;
    const Word xi = Word::generator(rank, i);
    const Word xj = Word::generator(rank, i + 1);
    img[static_cast<std::size_t>(i - 1)] = xi * xj * xi.inverse();
    img[static_cast<std::size_t>(i)] = xi;
    inv[static_cast<std::size_t>(i - 1)] = xj;
    inv[static_cast<std::size_t>(i)] = xj.inverse() * xi * xj;
    return {std::move(img), std::move(inv)};
}

/// Letters act left to right as a composition: sigma_a sigma_b = sigma_a o sigma_b.
inline FreeAutomorphism braid_automorphism(const BraidWord& b) {
    auto out = FreeAutomorphism::identity(b.rank());
    for (const auto& l : b.letters()) {
        const auto s = braid_automorphism(l.index, b.rank());
        out = out * (l.sign > 0 ? s : s.inverse());
    }
    return out;
}

/// I_{i,i+1}: the identity with columns i and i+1 swapped.
inline IntMatrix abelianized_braid(int i, int rank) {
    if (rank < 2 || i < 1 || i >= rank)
        throw DomainError("abelianized_braid: index out of range");
    auto m = IntMatrix::identity(static_cast<std::size_t>(rank));
    m.swap_cols(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(i));
    return m;
}

inline IntMatrix abelianized_braid(const BraidWord& b) {
    auto m = IntMatrix::identity(static_cast<std::size_t>(b.rank()));
    for (const auto& l : b.letters())
        m = m * abelianized_braid(l.index, b.rank()); // a swap is its own inverse
    return m;
}

struct LiteralBraidTest {
    IntMatrix conjugated; // R^-1 I_{i,i+1} R
    bool holds;
};

/// First row of R^-1 I R must be (a, 0, ..., 0), or (a, n*, ..., n*) mod n.
inline LiteralBraidTest literal_braid_test(const IntMatrix& r, int i, KernelMode mode, std::int64_t n) {
    if (!r.square())
        throw DomainError("literal_braid_test: R must be square");
    const int rank = static_cast<int>(r.rows());
    IntMatrix c = unimodular_inverse(r) * abelianized_braid(i, rank) * r;
    const Integer nn = static_cast<long>(n);
    bool holds = true;
    for (std::size_t col = 1; col < c.cols(); ++col) {
        const Integer& x = c(0, col);
        holds = holds && (mode == KernelMode::Integral ? x == 0 : mod(x, nn) == 0);
    }
    return {std::move(c), holds};
}

/// Basis of the abelianized kernel: columns 2..s-1 of R, plus n * column 1
/// in mod-n mode.
inline std::vector<std::vector<Integer>> kernel_lattice_basis(const IntMatrix& r, KernelMode mode, std::int64_t n) {
    std::vector<std::vector<Integer>> basis;
    if (mode == KernelMode::ModN) {
        auto c = r.column(0);
        for (auto& x : c)
            x *= static_cast<long>(n);
        basis.push_back(std::move(c));
    }
    for (std::size_t col = 1; col < r.cols(); ++col)
        basis.push_back(r.column(col));
    return basis;
}

inline bool in_kernel_lattice(const CurveParams& p, std::span<const Integer> l, KernelMode mode) {
    Integer a = 0;
    for (std::size_t k = 0; k < l.size(); ++k)
        a += l[k] * static_cast<long>(p.d(static_cast<int>(k) + 1));
    return mode == KernelMode::Integral ? a == 0 : mod(a, Integer(static_cast<long>(p.n()))) == 0;
}

/// A lattice basis vector moved out of the kernel by I_{i,i+1}, if any.
inline std::optional<std::vector<Integer>> lattice_counterexample(const CurveParams& p, int i, KernelMode mode) {
    const auto snf = smith_row(p.open_exponents());
    const auto swap = abelianized_braid(i, p.free_rank());
    for (const auto& b : kernel_lattice_basis(snf.r_matrix, mode, p.n())) {
        if (!in_kernel_lattice(p, b, mode))
            throw ConsistencyError("lattice_counterexample: basis vector outside the kernel");
        if (!in_kernel_lattice(p, swap.apply(b), mode))
            return b;
    }
    return std::nullopt;
}

inline bool lattice_preserved(const CurveParams& p, int i, KernelMode mode) {
    return !lattice_counterexample(p, i, mode).has_value();
}

/// Whether sigma_i descends to the abelianized kernel H^d (integral) or H_n^d.
inline bool lifts_to_kernel(const CurveParams& p, int i, KernelMode mode) {
    if (i < 1 || i >= p.free_rank())
        throw DomainError("lifts_to_kernel: index out of range");
    return lattice_preserved(p, i, mode);
}

struct BraidVerdict {
    int index;
    KernelMode mode;
    bool lifts;
    bool literal;
    IntMatrix conjugated;
};

/// Both tests for one generator; they must agree.
inline BraidVerdict braid_verdict(const CurveParams& p, int i, KernelMode mode) {
    const bool lifts = lifts_to_kernel(p, i, mode);
    auto lit = literal_braid_test(smith_row(p.open_exponents()).r_matrix, i, mode, p.n());
    if (lit.holds != lifts)
        throw ConsistencyError("braid: literal and lattice tests disagree for sigma_" + std::to_string(i));
    return {i, mode, lifts, lit.holds, std::move(lit.conjugated)};
}

inline nlohmann::json to_json(const BraidVerdict& v) {
    return {{"generator", v.index},
            {"mode", to_string(v.mode)},
            {"lifts", v.lifts},
            {"literal", v.literal},
            {"conjugated", to_json(v.conjugated)}};
}

} // namespace kummer
