#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stochexp {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

[[nodiscard]] inline std::string rational_to_string(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    return den == 1 ? num.str() : num.str() + "/" + den.str();
}

[[nodiscard]] inline bool denominator_is_power_of_two(const Rational& r) {
    BigInt den = boost::multiprecision::denominator(r);
    return den > 0 && (den & (den - 1)) == 0;
}

/// Monomial t^m x^n.
struct Monomial {
    int m = 0;
    int n = 0;
    [[nodiscard]] bool operator==(const Monomial&) const = default;
};

/// Monomials with 1 <= m + n <= degree in graded order (ascending total
/// degree; within a degree, descending t-power). The constant is excluded:
/// log-surfaces vanish at the origin. Graded order makes the degree-d basis a
/// prefix of the degree-(d+1) basis.
class MonomialBasis {
public:
    explicit MonomialBasis(int degree) : degree_(degree) {
        if (degree < 1 || degree > 12)
            throw std::invalid_argument("MonomialBasis: degree must be in [1, 12]");
        for (int g = 1; g <= degree; ++g)
            for (int m = g; m >= 0; --m) items_.push_back(Monomial{m, g - m});
    }

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] const Monomial& at(std::size_t i) const { return items_[i]; }

    [[nodiscard]] std::size_t index_of(const Monomial& mono) const {
        const int g = mono.m + mono.n;
        if (g < 1 || g > degree_ || mono.m < 0 || mono.n < 0)
            throw std::invalid_argument("MonomialBasis: monomial out of range");
        // degree-g block starts after blocks 1..g-1, i.e. at offset
        // 2 + 3 + ... + g = g(g+1)/2 - 1
        return std::size_t(g * (g + 1) / 2 - 1 + (g - mono.m));
    }

private:
    int degree_;
    std::vector<Monomial> items_;
};

/// Polynomial exponent h(t, x) with zero constant term, coefficients on a
/// MonomialBasis.
class BivariatePoly {
public:
    explicit BivariatePoly(int degree) : basis_(degree), coeffs_(basis_.size()) {}

    [[nodiscard]] const MonomialBasis& basis() const { return basis_; }
    [[nodiscard]] const Rational& coeff(int m, int n) const {
        return coeffs_[basis_.index_of(Monomial{m, n})];
    }
    void set_coeff(int m, int n, Rational value) {
        coeffs_[basis_.index_of(Monomial{m, n})] = std::move(value);
    }
    [[nodiscard]] const std::vector<Rational>& coefficients() const { return coeffs_; }
    [[nodiscard]] std::vector<Rational>& coefficients() { return coeffs_; }

private:
    MonomialBasis basis_;
    std::vector<Rational> coeffs_;
};

/// Exact matrix of L h = h(t, x) - h(4t, 2x + t) / 2 on a MonomialBasis.
/// Column (m, n) expands t^m x^n - (4t)^m (2x + t)^n / 2 by the binomial
/// theorem, so every entry is an integer over a power of two, and L maps each
/// homogeneous degree layer to itself.
class SubstitutionMatrix {
public:
    [[nodiscard]] static SubstitutionMatrix build(int degree) {
        SubstitutionMatrix sm(degree);
        const MonomialBasis& basis = sm.basis_;
        const std::size_t k = basis.size();
        // Pascal triangle for binomial coefficients
        std::vector<std::vector<BigInt>> binom(std::size_t(degree) + 1);
        for (std::size_t r = 0; r <= std::size_t(degree); ++r) {
            binom[r].resize(r + 1, 1);
            for (std::size_t c = 1; c < r; ++c)
                binom[r][c] = binom[r - 1][c - 1] + binom[r - 1][c];
        }
        for (std::size_t col = 0; col < k; ++col) {
            const Monomial mono = basis.at(col);
            sm.entry(col, col) += 1;
            // -(1/2) 4^m sum_i C(n,i) 2^i t^{m+n-i} x^i
            for (int i = 0; i <= mono.n; ++i) {
                const int e = 2 * mono.m + i - 1;
                Rational term(binom[std::size_t(mono.n)][std::size_t(i)]);
                if (e >= 0)
                    term *= Rational(BigInt(1) << e);
                else
                    term /= 2;
                const std::size_t row = basis.index_of(Monomial{mono.m + mono.n - i, i});
                sm.entry(row, col) -= term;
            }
        }
        return sm;
    }

    [[nodiscard]] const MonomialBasis& basis() const { return basis_; }
    [[nodiscard]] std::size_t size() const { return basis_.size(); }
    [[nodiscard]] const Rational& at(std::size_t row, std::size_t col) const {
        return entries_[row * size() + col];
    }

    /// Applies L to a coefficient vector (same basis).
    [[nodiscard]] std::vector<Rational> apply(const std::vector<Rational>& v) const {
        const std::size_t k = size();
        if (v.size() != k) throw std::invalid_argument("SubstitutionMatrix: size mismatch");
        std::vector<Rational> out(k);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c)
                if (v[c] != 0) out[r] += entries_[r * k + c] * v[c];
        return out;
    }

    void write_csv(std::ostream& out) const {
        const std::size_t k = size();
        out << "row_monomial";
        for (std::size_t c = 0; c < k; ++c) {
            const Monomial mono = basis_.at(c);
            out << ",t^" << mono.m << "*x^" << mono.n;
        }
        out << "\n";
        for (std::size_t r = 0; r < k; ++r) {
            const Monomial mono = basis_.at(r);
            out << "t^" << mono.m << "*x^" << mono.n;
            for (std::size_t c = 0; c < k; ++c) out << "," << rational_to_string(at(r, c));
            out << "\n";
        }
    }

private:
    explicit SubstitutionMatrix(int degree) : basis_(degree) {
        entries_.resize(basis_.size() * basis_.size());
    }

    Rational& entry(std::size_t row, std::size_t col) { return entries_[row * size() + col]; }

    MonomialBasis basis_;
    std::vector<Rational> entries_;
};

namespace detail {

/// In-place reduced row echelon form; returns pivot column per pivot row.
inline std::vector<std::size_t> rref(std::vector<Rational>& a, std::size_t rows,
                                     std::size_t cols) {
    std::vector<std::size_t> pivot_cols;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pivot = rows;
        for (std::size_t i = r; i < rows; ++i)
            if (a[i * cols + c] != 0) {
                pivot = i;
                break;
            }
        if (pivot == rows) continue;
        if (pivot != r)
            for (std::size_t j = 0; j < cols; ++j) std::swap(a[pivot * cols + j], a[r * cols + j]);
        const Rational inv = a[r * cols + c];
        for (std::size_t j = c; j < cols; ++j) a[r * cols + j] /= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const Rational factor = a[i * cols + c];
            if (factor == 0) continue;
            for (std::size_t j = c; j < cols; ++j) a[i * cols + j] -= factor * a[r * cols + j];
        }
        pivot_cols.push_back(c);
        ++r;
    }
    return pivot_cols;
}

}  // namespace detail

/// Exact nullspace of L, one polynomial per basis vector, normalized so the
/// x-coefficient equals 1 when present.
[[nodiscard]] inline std::vector<BivariatePoly> nullspace_basis(const SubstitutionMatrix& sm) {
    const std::size_t k = sm.size();
    std::vector<Rational> a(k * k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) a[r * k + c] = sm.at(r, c);
    const std::vector<std::size_t> pivots = detail::rref(a, k, k);

    std::vector<bool> is_pivot(k, false);
    for (std::size_t c : pivots) is_pivot[c] = true;

    std::vector<BivariatePoly> out;
    for (std::size_t free_col = 0; free_col < k; ++free_col) {
        if (is_pivot[free_col]) continue;
        BivariatePoly poly(sm.basis().degree());
        poly.coefficients()[free_col] = 1;
        for (std::size_t pr = 0; pr < pivots.size(); ++pr)
            poly.coefficients()[pivots[pr]] = -a[pr * k + free_col];
        // normalize on the x-coefficient when it participates
        const std::size_t x_idx = sm.basis().index_of(Monomial{0, 1});
        const Rational x_coeff = poly.coefficients()[x_idx];
        if (x_coeff != 0)
            for (Rational& coeff : poly.coefficients()) coeff /= x_coeff;
        out.push_back(std::move(poly));
    }
    return out;
}

/// Rank of L restricted to the homogeneous layer of total degree g.
[[nodiscard]] inline std::size_t layer_rank(const SubstitutionMatrix& sm, int g) {
    const MonomialBasis& basis = sm.basis();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis.at(i).m + basis.at(i).n == g) idx.push_back(i);
    const std::size_t k = idx.size();
    if (k == 0) throw std::invalid_argument("layer_rank: degree out of range");
    std::vector<Rational> a(k * k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) a[r * k + c] = sm.at(idx[r], idx[c]);
    return detail::rref(a, k, k).size();
}

struct CascadeReport {
    bool first_order_relation = false;        ///< h_t(0,0) = -h_x(0,0)/2 exactly
    std::optional<Monomial> first_violation;  ///< first m+n >= 2 coefficient != 0
    bool pass = false;
};

/// Checks the derivative cascade on a polynomial exponent: the only surviving
/// coefficients are (0,1) and (1,0) locked by h_t(0,0) = -h_x(0,0)/2; every
/// mixed or higher coefficient must vanish identically.
[[nodiscard]] inline CascadeReport derivative_cascade_check(const BivariatePoly& h) {
    CascadeReport rep;
    rep.first_order_relation = h.coeff(1, 0) == -h.coeff(0, 1) / 2;
    const MonomialBasis& basis = h.basis();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Monomial mono = basis.at(i);
        if (mono.m + mono.n >= 2 && h.coefficients()[i] != 0) {
            rep.first_violation = mono;
            break;
        }
    }
    rep.pass = rep.first_order_relation && !rep.first_violation;
    return rep;
}

inline void write_basis_csv(const std::vector<BivariatePoly>& basis, std::ostream& out) {
    out << "vector,monomial,coefficient\n";
    for (std::size_t v = 0; v < basis.size(); ++v) {
        const MonomialBasis& mb = basis[v].basis();
        for (std::size_t i = 0; i < mb.size(); ++i) {
            const Rational& coeff = basis[v].coefficients()[i];
            if (coeff == 0) continue;
            const Monomial mono = mb.at(i);
            out << v << ",t^" << mono.m << "*x^" << mono.n << ","
                << rational_to_string(coeff) << "\n";
        }
    }
}

}  // namespace stochexp
