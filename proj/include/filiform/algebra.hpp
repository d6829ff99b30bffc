#ifndef FILIFORM_ALGEBRA_HPP
#define FILIFORM_ALGEBRA_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "filiform/linalg.hpp"
#include "filiform/rational.hpp"

namespace filiform {

// Sparse coordinate vector over the basis e_1..e_n: (index, coefficient)
// pairs with 1-based indices, sorted, no zero coefficients.
using SparseVec = std::vector<std::pair<std::size_t, Rational>>;

// A finite-dimensional algebra given by structure constants on a fixed
// basis: [e_i, e_j] = sum_k c_{ij}^k e_k. Indices are 1-based everywhere.
// Absent table entries mean the product is zero.
class Algebra {
public:
    explicit Algebra(std::size_t dim) : dim_(dim), table_(dim * dim) {
        if (dim == 0) throw std::invalid_argument("algebra: dimension must be >= 1");
    }

    std::size_t dim() const { return dim_; }

    void set_product(std::size_t i, std::size_t j, SparseVec value) {
        check_index(i);
        check_index(j);
        for (auto& [k, v] : value) check_index(k);
        std::sort(value.begin(), value.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        value.erase(std::remove_if(value.begin(), value.end(),
                                   [](const auto& e) { return e.second.is_zero(); }),
                    value.end());
        table_[slot(i, j)] = std::move(value);
    }

    void add_to_product(std::size_t i, std::size_t j, std::size_t k, const Rational& coef) {
        check_index(i);
        check_index(j);
        check_index(k);
        if (coef.is_zero()) return;
        SparseVec v = table_[slot(i, j)];
        bool found = false;
        for (auto& [idx, val] : v)
            if (idx == k) {
                val += coef;
                found = true;
                break;
            }
        if (!found) v.emplace_back(k, coef);
        set_product(i, j, std::move(v));
    }

    // [e_i, e_j] as a sparse vector.
    const SparseVec& basis_product(std::size_t i, std::size_t j) const {
        check_index(i);
        check_index(j);
        return table_[slot(i, j)];
    }

    // Deterministic text form, used for hashing and diagnostics.
    std::string canonical_string() const {
        std::string out = "dim=" + std::to_string(dim_);
        for (std::size_t i = 1; i <= dim_; ++i)
            for (std::size_t j = 1; j <= dim_; ++j) {
                const SparseVec& v = basis_product(i, j);
                if (v.empty()) continue;
                out += ";" + std::to_string(i) + "," + std::to_string(j) + ":";
                for (std::size_t t = 0; t < v.size(); ++t) {
                    if (t) out += "+";
                    out += std::to_string(v[t].first) + "=" + format_rational(v[t].second);
                }
            }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<SparseVec> table_;

    std::size_t slot(std::size_t i, std::size_t j) const { return (i - 1) * dim_ + (j - 1); }

    void check_index(std::size_t i) const {
        if (i < 1 || i > dim_)
            throw std::invalid_argument("algebra: basis index " + std::to_string(i) +
                                        " out of range 1.." + std::to_string(dim_));
    }
};

// Bilinear product of coordinate vectors (0-based position t holds the
// coefficient of e_{t+1}).
inline VecQ product(const Algebra& a, const VecQ& x, const VecQ& y) {
    const std::size_t n = a.dim();
    if (x.size() != n || y.size() != n) throw std::invalid_argument("product: length mismatch");
    VecQ out(n, Rational(0));
    for (std::size_t i = 1; i <= n; ++i) {
        if (x[i - 1].is_zero()) continue;
        for (std::size_t j = 1; j <= n; ++j) {
            if (y[j - 1].is_zero()) continue;
            const Rational xy = x[i - 1] * y[j - 1];
            for (const auto& [k, c] : a.basis_product(i, j)) out[k - 1] += xy * c;
        }
    }
    return out;
}

// [v, e_j] for a sparse v.
inline SparseVec sparse_mult_basis(const Algebra& a, const SparseVec& v, std::size_t j) {
    std::vector<std::pair<std::size_t, Rational>> acc;
    for (const auto& [i, c] : v)
        for (const auto& [k, w] : a.basis_product(i, j)) acc.emplace_back(k, c * w);
    std::sort(acc.begin(), acc.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    SparseVec out;
    for (auto& [k, c] : acc) {
        if (!out.empty() && out.back().first == k)
            out.back().second += c;
        else
            out.emplace_back(k, std::move(c));
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const auto& e) { return e.second.is_zero(); }),
              out.end());
    return out;
}

struct LeibnizViolation {
    std::size_t i, j, k;
    VecQ residual;  // [[e_i,e_j],e_k] - [[e_i,e_k],e_j] - [e_i,[e_j,e_k]]
};

// Scans all n^3 basis triples; empty result iff the table satisfies the
// (right) Leibniz identity.
inline std::vector<LeibnizViolation> leibniz_violations(const Algebra& a) {
    const std::size_t n = a.dim();
    std::vector<LeibnizViolation> out;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j)
            for (std::size_t k = 1; k <= n; ++k) {
                VecQ residual(n, Rational(0));
                for (const auto& [t, c] : sparse_mult_basis(a, a.basis_product(i, j), k))
                    residual[t - 1] += c;
                for (const auto& [t, c] : sparse_mult_basis(a, a.basis_product(i, k), j))
                    residual[t - 1] -= c;
                for (const auto& [t, c] : a.basis_product(j, k)) {
                    // [e_i, c e_t]
                    for (const auto& [m, w] : a.basis_product(i, t)) residual[m - 1] -= c * w;
                }
                if (std::any_of(residual.begin(), residual.end(),
                                [](const Rational& r) { return !r.is_zero(); }))
                    out.push_back({i, j, k, std::move(residual)});
            }
    return out;
}

// L^1 = L, L^{k+1} = [L^k, L^1]; the list runs until the terms stabilize or
// reach zero.
inline std::vector<SubspaceQ> lower_central_series(const Algebra& a) {
    const std::size_t n = a.dim();
    std::vector<SubspaceQ> series;
    series.push_back(SubspaceQ::full(n));
    while (true) {
        const SubspaceQ& cur = series.back();
        std::vector<VecQ> products;
        for (const VecQ& u : cur.basis())
            for (std::size_t j = 1; j <= n; ++j) {
                VecQ ej(n, Rational(0));
                ej[j - 1] = 1;
                VecQ p = product(a, u, ej);
                if (std::any_of(p.begin(), p.end(), [](const Rational& r) { return !r.is_zero(); }))
                    products.push_back(std::move(p));
            }
        SubspaceQ next = SubspaceQ::span(n, products);
        const bool stabilized = next.dim() == cur.dim();
        series.push_back(std::move(next));
        if (series.back().dim() == 0 || stabilized) break;
    }
    return series;
}

inline std::vector<std::size_t> lcs_dims(const Algebra& a) {
    std::vector<std::size_t> dims;
    for (const SubspaceQ& s : lower_central_series(a)) dims.push_back(s.dim());
    return dims;
}

inline bool is_nilpotent_algebra(const Algebra& a) {
    return lower_central_series(a).back().dim() == 0;
}

// dim L^i = n - i for 2 <= i <= n.
inline bool is_filiform(const Algebra& a) {
    const std::size_t n = a.dim();
    const std::vector<std::size_t> dims = lcs_dims(a);
    // Past the computed tail the series has stabilized (at zero or not).
    const auto dim_at = [&](std::size_t i) { return i <= dims.size() ? dims[i - 1] : dims.back(); };
    for (std::size_t i = 2; i <= n; ++i)
        if (dim_at(i) != n - i) return false;
    return true;
}

}  // namespace filiform

#endif  // FILIFORM_ALGEBRA_HPP
