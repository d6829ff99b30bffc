#ifndef FILIFORM_DERIVOPS_HPP
#define FILIFORM_DERIVOPS_HPP

#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "filiform/algebra.hpp"
#include "filiform/families.hpp"
#include "filiform/linalg.hpp"
#include "filiform/mpoly.hpp"
#include "filiform/rational.hpp"

namespace filiform {

// Operators on the algebra's coordinate space are flattened row-major:
// entry (r, c) of the matrix (coefficient of e_{r+1} in the image of
// e_{c+1}) sits at flat index r*n + c.
inline VecQ operator_to_flat(const MatrixQ& m) {
    VecQ out;
    out.reserve(m.rows() * m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

inline MatrixQ operator_from_flat(const VecQ& flat, std::size_t n) {
    if (flat.size() != n * n) throw std::invalid_argument("operator_from_flat: length mismatch");
    MatrixQ m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = flat[r * n + c];
    return m;
}

enum class OperatorOrigin { derivations, prederivations, adhoc };

inline std::string origin_name(OperatorOrigin o) {
    switch (o) {
        case OperatorOrigin::derivations: return "derivations";
        case OperatorOrigin::prederivations: return "prederivations";
        case OperatorOrigin::adhoc: return "adhoc";
    }
    return "adhoc";
}

// A subspace of n x n operators in canonical echelon form (with respect to
// the row-major flattening), tagged with its provenance.
struct OperatorSubspace {
    std::size_t ambient = 0;  // n
    OperatorOrigin origin = OperatorOrigin::adhoc;
    SubspaceQ space;  // subspace of Q^{n^2}

    OperatorSubspace() = default;
    OperatorSubspace(std::size_t n, OperatorOrigin o, SubspaceQ s)
        : ambient(n), origin(o), space(std::move(s)) {
        if (space.ambient_dim() != ambient * ambient)
            throw std::invalid_argument("operator subspace: flat dimension mismatch");
    }

    static OperatorSubspace adhoc_span(std::size_t n, const std::vector<MatrixQ>& mats) {
        std::vector<VecQ> flats;
        flats.reserve(mats.size());
        for (const MatrixQ& m : mats) {
            if (m.rows() != n || m.cols() != n)
                throw std::invalid_argument("adhoc_span: operator shape mismatch");
            flats.push_back(operator_to_flat(m));
        }
        return OperatorSubspace(n, OperatorOrigin::adhoc, SubspaceQ::span(n * n, flats));
    }

    std::size_t dim() const { return space.dim(); }

    MatrixQ basis_matrix(std::size_t i) const { return operator_from_flat(space.basis()[i], ambient); }

    std::vector<MatrixQ> basis_matrices() const {
        std::vector<MatrixQ> out;
        out.reserve(dim());
        for (std::size_t i = 0; i < dim(); ++i) out.push_back(basis_matrix(i));
        return out;
    }

    bool contains(const MatrixQ& m) const { return space.contains(operator_to_flat(m)); }
};

namespace detail {

// Structure constants of the ternary bracket [[e_a, e_b], e_c].
struct TripleTable {
    std::size_t n = 0;
    std::vector<SparseVec> t;  // (a-1)*n^2 + (b-1)*n + (c-1)

    explicit TripleTable(const Algebra& alg) : n(alg.dim()), t(n * n * n) {
        for (std::size_t a = 1; a <= n; ++a)
            for (std::size_t b = 1; b <= n; ++b) {
                const SparseVec& ab = alg.basis_product(a, b);
                if (ab.empty()) continue;
                for (std::size_t c = 1; c <= n; ++c) t[slot(a, b, c)] = sparse_mult_basis(alg, ab, c);
            }
    }

    std::size_t slot(std::size_t a, std::size_t b, std::size_t c) const {
        return ((a - 1) * n + (b - 1)) * n + (c - 1);
    }

    const SparseVec& at(std::size_t a, std::size_t b, std::size_t c) const {
        return t[slot(a, b, c)];
    }
};

}  // namespace detail

// Exact solution space of d([e_i,e_j]) = [d(e_i),e_j] + [e_i,d(e_j)] over
// all basis pairs, as a subspace of the n^2-dimensional operator space.
inline OperatorSubspace derivation_space(const Algebra& a) {
    const std::size_t n = a.dim();
    RowReducer red(n * n);
    const auto flat = [n](std::size_t target, std::size_t source) {
        return (target - 1) * n + (source - 1);
    };
    std::vector<SparseRow> rows(n);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            for (auto& r : rows) r.clear();
            for (const auto& [k, c] : a.basis_product(i, j))
                for (std::size_t m = 1; m <= n; ++m) rows[m - 1].emplace_back(flat(m, k), c);
            for (std::size_t r = 1; r <= n; ++r) {
                for (const auto& [m, w] : a.basis_product(r, j))
                    rows[m - 1].emplace_back(flat(r, i), -w);
                for (const auto& [m, w] : a.basis_product(i, r))
                    rows[m - 1].emplace_back(flat(r, j), -w);
            }
            for (auto& r : rows)
                if (!r.empty()) red.add_row(std::move(r));
        }
    return OperatorSubspace(n, OperatorOrigin::derivations,
                            SubspaceQ::span(n * n, red.nullspace_basis()));
}

// Exact solution space of the pre-derivation identity over all basis
// triples. Row order is fixed by (i, j, k, coordinate), so the result is
// independent of everything but the algebra itself.
inline OperatorSubspace prederivation_space(const Algebra& a) {
    const std::size_t n = a.dim();
    const detail::TripleTable trip(a);
    // Which middle/outer slots can produce a nonzero equation at all.
    std::vector<bool> any_bc(n * n, false), any_ac(n * n, false), any_ab(n * n, false);
    for (std::size_t x = 1; x <= n; ++x)
        for (std::size_t y = 1; y <= n; ++y)
            for (std::size_t z = 1; z <= n; ++z)
                if (!trip.at(x, y, z).empty()) {
                    any_bc[(y - 1) * n + (z - 1)] = true;
                    any_ac[(x - 1) * n + (z - 1)] = true;
                    any_ab[(x - 1) * n + (y - 1)] = true;
                }
    RowReducer red(n * n);
    const auto flat = [n](std::size_t target, std::size_t source) {
        return (target - 1) * n + (source - 1);
    };
    std::vector<SparseRow> rows(n);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j)
            for (std::size_t k = 1; k <= n; ++k) {
                if (!any_bc[(j - 1) * n + (k - 1)] && !any_ac[(i - 1) * n + (k - 1)] &&
                    !any_ab[(i - 1) * n + (j - 1)])
                    continue;
                for (auto& r : rows) r.clear();
                // P applied to [[e_i,e_j],e_k]
                for (const auto& [l, c] : trip.at(i, j, k))
                    for (std::size_t m = 1; m <= n; ++m) rows[m - 1].emplace_back(flat(m, l), c);
                for (std::size_t r = 1; r <= n; ++r) {
                    for (const auto& [m, w] : trip.at(r, j, k))
                        rows[m - 1].emplace_back(flat(r, i), -w);  // [[P(e_i),e_j],e_k]
                    for (const auto& [m, w] : trip.at(i, r, k))
                        rows[m - 1].emplace_back(flat(r, j), -w);  // [[e_i,P(e_j)],e_k]
                    for (const auto& [m, w] : trip.at(i, j, r))
                        rows[m - 1].emplace_back(flat(r, k), -w);  // [[e_i,e_j],P(e_k)]
                }
                for (auto& r : rows)
                    if (!r.empty()) red.add_row(std::move(r));
            }
    return OperatorSubspace(n, OperatorOrigin::prederivations,
                            SubspaceQ::span(n * n, red.nullspace_basis()));
}

// Direct identity checks, independent of the system assembly above.
inline bool verify_derivation(const Algebra& a, const MatrixQ& d) {
    const std::size_t n = a.dim();
    if (d.rows() != n || d.cols() != n) throw std::invalid_argument("verify_derivation: shape");
    const auto column = [&](std::size_t j) {
        VecQ v(n, Rational(0));
        for (std::size_t r = 0; r < n; ++r) v[r] = d(r, j - 1);
        return v;
    };
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            VecQ ei(n, Rational(0)), ej(n, Rational(0));
            ei[i - 1] = 1;
            ej[j - 1] = 1;
            const VecQ lhs = d.apply(product(a, ei, ej));
            const VecQ r1 = product(a, column(i), ej);
            const VecQ r2 = product(a, ei, column(j));
            for (std::size_t m = 0; m < n; ++m)
                if (lhs[m] != r1[m] + r2[m]) return false;
        }
    return true;
}

inline bool verify_prederivation(const Algebra& a, const MatrixQ& p) {
    const std::size_t n = a.dim();
    if (p.rows() != n || p.cols() != n) throw std::invalid_argument("verify_prederivation: shape");
    const auto column = [&](std::size_t j) {
        VecQ v(n, Rational(0));
        for (std::size_t r = 0; r < n; ++r) v[r] = p(r, j - 1);
        return v;
    };
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            VecQ ei(n, Rational(0)), ej(n, Rational(0));
            ei[i - 1] = 1;
            ej[j - 1] = 1;
            const VecQ ij = product(a, ei, ej);
            for (std::size_t k = 1; k <= n; ++k) {
                VecQ ek(n, Rational(0));
                ek[k - 1] = 1;
                const VecQ lhs = p.apply(product(a, ij, ek));
                const VecQ r1 = product(a, product(a, column(i), ej), ek);
                const VecQ r2 = product(a, product(a, ei, column(j)), ek);
                const VecQ r3 = product(a, ij, column(k));
                for (std::size_t m = 0; m < n; ++m)
                    if (lhs[m] != r1[m] + r2[m] + r3[m]) return false;
            }
        }
    return true;
}

// Free coefficients of the F1 closed form: P(e_1) = sum a_t e_t,
// P(e_2) = (a_1+a_2)e_2 + sum_{t=3}^{n-2} a_t e_t + b_{n-1}e_{n-1} + b_n e_n,
// P(e_3) = sum_{t=2}^n c_t e_t, even/odd columns as displayed.
struct PreDerivCoeffsF1 {
    std::size_t n = 0;
    std::vector<Rational> a;  // 1-based, a[1..n]
    Rational b_n1, b_n;
    std::vector<Rational> c;  // 1-based, c[2..n]

    explicit PreDerivCoeffsF1(std::size_t n_)
        : n(n_), a(n_ + 1, Rational(0)), c(n_ + 1, Rational(0)) {}

    static constexpr std::size_t count(std::size_t n) { return 2 * n + 1; }

    // Layout a_1..a_n, b_{n-1}, b_n, c_2..c_n, used by the span builder.
    static PreDerivCoeffsF1 from_vector(std::size_t n, const VecQ& v) {
        if (v.size() != count(n)) throw std::invalid_argument("coeffs: length mismatch");
        PreDerivCoeffsF1 out(n);
        for (std::size_t t = 1; t <= n; ++t) out.a[t] = v[t - 1];
        out.b_n1 = v[n];
        out.b_n = v[n + 1];
        for (std::size_t t = 2; t <= n; ++t) out.c[t] = v[n + t];
        return out;
    }
};

struct PreDerivCoeffsF2 {
    std::size_t n = 0;
    std::vector<Rational> a;  // 1-based, a[1..n]
    Rational b_2, b_n1, b_n;
    std::vector<Rational> c;  // 1-based, c[2..n]

    explicit PreDerivCoeffsF2(std::size_t n_)
        : n(n_), a(n_ + 1, Rational(0)), c(n_ + 1, Rational(0)) {}

    static constexpr std::size_t count(std::size_t n) { return 2 * n + 2; }

    // Layout a_1..a_n, b_2, b_{n-1}, b_n, c_2..c_n.
    static PreDerivCoeffsF2 from_vector(std::size_t n, const VecQ& v) {
        if (v.size() != count(n)) throw std::invalid_argument("coeffs: length mismatch");
        PreDerivCoeffsF2 out(n);
        for (std::size_t t = 1; t <= n; ++t) out.a[t] = v[t - 1];
        out.b_2 = v[n];
        out.b_n1 = v[n + 1];
        out.b_n = v[n + 2];
        for (std::size_t t = 2; t <= n; ++t) out.c[t] = v[n + 1 + t];
        return out;
    }
};

struct ClosedFormResult {
    MatrixQ op;
    VecQ residuals;  // one entry per displayed constraint line, in print order
};

// The displayed formulas overlap for n in {4, 5}; the closed-form route is
// defined for n >= 6 only (the nullspace route covers small n).
inline ClosedFormResult closed_form_prederivation_f1(const F1Params& p, const PreDerivCoeffsF1& cf) {
    const std::size_t n = p.n;
    if (n < 6) throw std::invalid_argument("closed_form_prederivation_f1: requires n >= 6");
    if (cf.n != n) throw std::invalid_argument("closed_form_prederivation_f1: coefficient size");
    const auto alpha = [&](std::size_t t) -> Rational {
        return (t >= 4 && t <= n) ? p.alpha_at(t) : Rational(0);
    };
    const auto av = [&](std::size_t t) -> Rational { return (t >= 1 && t <= n) ? cf.a[t] : Rational(0); };
    const auto cv = [&](std::size_t t) -> Rational { return (t >= 2 && t <= n) ? cf.c[t] : Rational(0); };

    MatrixQ op(n, n);
    const auto set = [&](std::size_t target, std::size_t source, const Rational& v) {
        op(target - 1, source - 1) += v;
    };
    for (std::size_t t = 1; t <= n; ++t) set(t, 1, av(t));
    set(2, 2, av(1) + av(2));
    for (std::size_t t = 3; t <= n - 2; ++t) set(t, 2, av(t));
    set(n - 1, 2, cf.b_n1);
    set(n, 2, cf.b_n);
    for (std::size_t t = 2; t <= n; ++t) set(t, 3, cv(t));
    for (std::size_t i = 2; 2 * i <= n; ++i) {
        const Rational diag = Rational(2 * i - 1) * av(1) + av(2);
        set(2 * i, 2 * i, diag);
        for (std::size_t t = 2 * i + 1; t <= n; ++t)
            set(t, 2 * i, av(t - 2 * i + 2) + Rational(2 * i - 2) * av(2) * alpha(t - 2 * i + 3));
    }
    for (std::size_t i = 2; 2 * i + 1 <= n; ++i) {
        set(2 * i, 2 * i + 1, cv(2));
        set(2 * i + 1, 2 * i + 1, Rational(2 * i - 2) * av(1) + cv(3));
        for (std::size_t t = 2 * i + 2; t <= n; ++t)
            set(t, 2 * i + 1, cv(t - 2 * i + 2) + Rational(2 * i - 2) * av(2) * alpha(t - 2 * i + 2));
    }

    VecQ res;
    res.push_back(Rational(1 + (n % 2 == 0 ? 1 : -1)) * cv(2));
    for (std::size_t t = 4; t <= n - 1; ++t) res.push_back(cv(2) * alpha(t));
    res.push_back((av(1) - av(2)) * alpha(4));
    res.push_back((Rational(3) * av(1) - cv(3)) * alpha(4));
    for (std::size_t k = 3; k <= (n - 1) / 2; ++k) {
        Rational acc(0);
        for (std::size_t t = 3; t <= k; ++t)
            acc += (av(2 * k - 2 * t + 3) - cv(2 * k - 2 * t + 4) + av(2) * alpha(2 * k - 2 * t + 4)) *
                   alpha(2 * t - 2);
        res.push_back(std::move(acc));
    }
    for (std::size_t k = 3; k + 1 <= n / 2; ++k) {
        Rational acc = (Rational(2) * av(1) + av(2) - cv(3)) * alpha(2 * k);
        for (std::size_t t = 3; t <= k; ++t)
            acc += (av(2 * k - 2 * t + 4) - cv(2 * k - 2 * t + 5) + av(2) * alpha(2 * k - 2 * t + 5)) *
                   alpha(2 * t - 2);
        res.push_back(std::move(acc));
    }
    for (std::size_t k = 5; k <= n - 2; ++k) {
        Rational rhs(0);
        for (std::size_t t = 5; t <= k; ++t) rhs += alpha(t - 1) * alpha(k - t + 4);
        rhs *= (Rational(k - 1) / 2) * av(2);
        res.push_back((av(2) - Rational(k - 3) * av(1)) * alpha(k) - rhs);
    }
    if (n % 2 == 0) {
        Rational rhs(0);
        for (std::size_t t = 3; t <= (n - 2) / 2; ++t)
            rhs += Rational(2 * t - 3) * alpha(n - 2 * t + 3) * alpha(2 * t - 1);
        rhs *= av(2);
        for (std::size_t t = 2; t <= (n - 2) / 2; ++t)
            rhs += (cv(n - 2 * t + 2) - av(n - 2 * t + 1) + Rational(2 * t - 3) * av(2) * alpha(n - 2 * t + 2)) *
                   alpha(2 * t);
        res.push_back((av(2) - Rational(n - 4) * av(1)) * alpha(n - 1) - rhs);
    } else {
        Rational rhs(0);
        for (std::size_t t = 3; t <= (n - 1) / 2; ++t)
            rhs += Rational(2 * t - 3) * alpha(n - 2 * t + 3) * alpha(2 * t - 1);
        rhs *= av(2);
        for (std::size_t t = 2; t <= (n - 3) / 2; ++t)
            rhs += (cv(n - 2 * t + 2) - av(n - 2 * t + 1) + Rational(2 * t - 3) * av(2) * alpha(n - 2 * t + 2)) *
                   alpha(2 * t);
        res.push_back((Rational(2) * av(2) - cv(3) - Rational(n - 6) * av(1)) * alpha(n - 1) - rhs);
    }
    return {std::move(op), std::move(res)};
}

inline ClosedFormResult closed_form_prederivation_f2(const F2Params& p, const PreDerivCoeffsF2& cf) {
    const std::size_t n = p.n;
    if (n < 6) throw std::invalid_argument("closed_form_prederivation_f2: requires n >= 6");
    if (cf.n != n) throw std::invalid_argument("closed_form_prederivation_f2: coefficient size");
    const auto beta = [&](std::size_t t) -> Rational {
        return (t >= 4 && t <= n) ? p.beta_at(t) : Rational(0);
    };
    const auto av = [&](std::size_t t) -> Rational { return (t >= 1 && t <= n) ? cf.a[t] : Rational(0); };
    const auto cv = [&](std::size_t t) -> Rational { return (t >= 2 && t <= n) ? cf.c[t] : Rational(0); };

    MatrixQ op(n, n);
    const auto set = [&](std::size_t target, std::size_t source, const Rational& v) {
        op(target - 1, source - 1) += v;
    };
    for (std::size_t t = 1; t <= n; ++t) set(t, 1, av(t));
    set(2, 2, cf.b_2);
    set(n - 1, 2, cf.b_n1);
    set(n, 2, cf.b_n);
    for (std::size_t t = 2; t <= n; ++t) set(t, 3, cv(t));
    for (std::size_t i = 2; 2 * i <= n; ++i) {
        set(2 * i, 2 * i, Rational(2 * i - 1) * av(1));
        for (std::size_t t = 2 * i + 1; t <= n; ++t)
            set(t, 2 * i, av(t - 2 * i + 2) + Rational(2 * i - 2) * av(2) * beta(t - 2 * i + 3));
    }
    for (std::size_t i = 2; 2 * i + 1 <= n; ++i) {
        set(2 * i + 1, 2 * i + 1, Rational(2 * i - 2) * av(1) + cv(3));
        for (std::size_t t = 2 * i + 2; t <= n; ++t)
            set(t, 2 * i + 1, cv(t - 2 * i + 2) + Rational(2 * i - 2) * av(2) * beta(t - 2 * i + 2));
    }

    VecQ res;
    res.push_back((cv(3) - Rational(2) * av(1)) * beta(4));
    res.push_back((cf.b_2 - Rational(2) * av(1)) * beta(4));
    for (std::size_t t = 4; t <= n - 1; ++t) res.push_back(cv(2) * beta(t));
    for (std::size_t k = 3; k <= (n - 1) / 2; ++k) {
        Rational acc(0);
        for (std::size_t t = 3; t <= k; ++t)
            acc += (av(2 * k - 2 * t + 3) - cv(2 * k - 2 * t + 4) + av(2) * beta(2 * k - 2 * t + 4)) *
                   beta(2 * t - 2);
        res.push_back(std::move(acc));
    }
    for (std::size_t k = 3; k + 1 <= n / 2; ++k) {
        Rational acc = (cv(3) - Rational(2) * av(1)) * beta(2 * k);
        for (std::size_t t = 3; t <= k; ++t)
            acc -= (av(2 * k - 2 * t + 4) - cv(2 * k - 2 * t + 5) + av(2) * beta(2 * k - 2 * t + 5)) *
                   beta(2 * t - 2);
        res.push_back(std::move(acc));
    }
    for (std::size_t k = 5; k <= n - 2; ++k) {
        Rational rhs(0);
        for (std::size_t t = 5; t <= k; ++t) rhs += beta(t - 1) * beta(k - t + 4);
        rhs *= (Rational(k - 1) / 2) * av(2);
        res.push_back((cf.b_2 - Rational(k - 2) * av(1)) * beta(k) - rhs);
    }
    if (n % 2 == 1) {
        Rational rhs(0);
        for (std::size_t t = 3; t <= (n - 1) / 2; ++t)
            rhs += Rational(2 * t - 3) * beta(n - 2 * t + 3) * beta(2 * t - 1);
        rhs *= av(2);
        for (std::size_t t = 2; t <= (n - 3) / 2; ++t)
            rhs += (cv(n - 2 * t + 2) - av(n - 2 * t + 1) + Rational(2 * t - 3) * av(2) * beta(n - 2 * t + 2)) *
                   beta(2 * t);
        res.push_back((cf.b_2 - cv(3) - Rational(n - 5) * av(1)) * beta(n - 1) - rhs);
    } else {
        Rational rhs(0);
        for (std::size_t t = 3; t <= (n - 2) / 2; ++t)
            rhs += Rational(2 * t - 3) * beta(n - 2 * t + 3) * beta(2 * t - 1);
        rhs *= av(2);
        for (std::size_t t = 2; t <= (n - 2) / 2; ++t)
            rhs += (cv(n - 2 * t + 2) - av(n - 2 * t + 1) + Rational(2 * t - 3) * av(2) * beta(n - 2 * t + 2)) *
                   beta(2 * t);
        res.push_back((cf.b_2 - Rational(n - 3) * av(1)) * beta(n - 1) - rhs);
    }
    return {std::move(op), std::move(res)};
}

namespace detail {

// The constraint systems are linear in the free coefficients, so the matrix
// is recovered by evaluating the residuals at unit coefficient vectors; this
// keeps the span builders tied to the single transcription above.
template <typename Params, typename Coeffs, typename Eval>
SubspaceQ closed_form_span(const Params& p, std::size_t coeff_count, Eval&& eval) {
    const std::size_t n = p.n;
    std::vector<SparseRow> columns(coeff_count);
    std::size_t line_count = 0;
    for (std::size_t u = 0; u < coeff_count; ++u) {
        VecQ unit(coeff_count, Rational(0));
        unit[u] = 1;
        const ClosedFormResult r = eval(p, Coeffs::from_vector(n, unit));
        line_count = r.residuals.size();
        for (std::size_t row = 0; row < r.residuals.size(); ++row)
            if (!r.residuals[row].is_zero()) columns[u].emplace_back(row, r.residuals[row]);
    }
    MatrixQ sys(line_count, coeff_count);
    for (std::size_t u = 0; u < coeff_count; ++u)
        for (const auto& [row, v] : columns[u]) sys(row, u) = v;
    const SubspaceQ solutions = nullspace(sys);
    std::vector<VecQ> flats;
    for (const VecQ& coeffs : solutions.basis()) {
        const ClosedFormResult r = eval(p, Coeffs::from_vector(n, coeffs));
        flats.push_back(operator_to_flat(r.op));
    }
    return SubspaceQ::span(n * n, flats);
}

}  // namespace detail

// Span of the closed-form operators over a basis of the constraint-system
// solution set.
inline SubspaceQ closed_form_prederivation_span_f1(const F1Params& p) {
    return detail::closed_form_span<F1Params, PreDerivCoeffsF1>(
        p, PreDerivCoeffsF1::count(p.n),
        [](const F1Params& q, const PreDerivCoeffsF1& c) { return closed_form_prederivation_f1(q, c); });
}

inline SubspaceQ closed_form_prederivation_span_f2(const F2Params& p) {
    return detail::closed_form_span<F2Params, PreDerivCoeffsF2>(
        p, PreDerivCoeffsF2::count(p.n),
        [](const F2Params& q, const PreDerivCoeffsF2& c) { return closed_form_prederivation_f2(q, c); });
}

// True iff the commutator of every basis pair stays in the span.
inline bool bracket_closed(const OperatorSubspace& s) {
    const std::vector<MatrixQ> basis = s.basis_matrices();
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i + 1; j < basis.size(); ++j)
            if (!s.contains(basis[i] * basis[j] - basis[j] * basis[i])) return false;
    return true;
}

inline bool is_nilpotent_operator(const MatrixQ& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("is_nilpotent_operator: not square");
    const std::size_t n = m.rows();
    MatrixQ power = m;
    for (std::size_t k = 1; k <= n; ++k) {
        if (power.is_zero()) return true;
        if (k < n) power = power * m;
    }
    return power.is_zero();
}

class NotBracketClosedError : public std::runtime_error {
public:
    NotBracketClosedError() : std::runtime_error("operator subspace is not closed under commutators") {}
};

class BasisTooLargeError : public std::runtime_error {
public:
    explicit BasisTooLargeError(std::size_t d)
        : std::runtime_error("symbolic trace oracle limited to basis size 8, got " + std::to_string(d)) {}
};

struct NilpotencyVerdict {
    bool all_nilpotent = false;
    std::vector<std::size_t> flag;     // descending Engel flag dimensions when true
    std::optional<MatrixQ> witness;    // a non-nilpotent element of the span when false
};

// True iff trace((t_1 B_1 + ... + t_d B_d)^k) is the zero polynomial for
// every k = 1..n; over characteristic zero this decides nilpotency of the
// whole span. Independent of the Engel-flag route.
inline bool trace_poly_all_nilpotent(const OperatorSubspace& s) {
    const std::size_t d = s.dim();
    if (d > MPoly::kMaxVars) throw BasisTooLargeError(d);
    const std::size_t n = s.ambient;
    if (d == 0) return true;
    const std::vector<MatrixQ> basis = s.basis_matrices();
    std::vector<MPoly> generic(n * n);
    for (std::size_t v = 0; v < d; ++v) {
        const MPoly tv = MPoly::variable(v);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                if (!basis[v](r, c).is_zero()) generic[r * n + c] += tv.scaled(basis[v](r, c));
    }
    std::vector<MPoly> power = generic;
    for (std::size_t k = 1; k <= n; ++k) {
        MPoly trace;
        for (std::size_t r = 0; r < n; ++r) trace += power[r * n + r];
        if (!trace.is_zero()) return false;
        if (k == n) break;
        std::vector<MPoly> next(n * n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t m = 0; m < n; ++m) {
                if (power[r * n + m].is_zero()) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    if (generic[m * n + c].is_zero()) continue;
                    next[r * n + c] += power[r * n + m] * generic[m * n + c];
                }
            }
        power = std::move(next);
    }
    return true;
}

namespace detail {

// Non-nilpotent element extraction once the Engel flag has stalled: basis
// operators first, then seeded small-integer combinations, then the trace
// polynomial of a generic element with a deterministic non-vanishing point.
inline MatrixQ find_non_nilpotent_witness(const OperatorSubspace& s) {
    const std::vector<MatrixQ> basis = s.basis_matrices();
    for (const MatrixQ& b : basis)
        if (!is_nilpotent_operator(b)) return b;

    const std::size_t n = s.ambient;
    const std::size_t d = basis.size();
    std::mt19937_64 rng(0x66696c69666f726dULL);
    std::uniform_int_distribution<int> coef(-3, 3);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        MatrixQ m(n, n);
        bool nonzero = false;
        for (std::size_t v = 0; v < d; ++v) {
            const int c = coef(rng);
            if (c == 0) continue;
            nonzero = true;
            m = m + basis[v].scaled(Rational(c));
        }
        if (nonzero && !is_nilpotent_operator(m)) return m;
    }

    if (d > MPoly::kMaxVars) throw BasisTooLargeError(d);
    std::vector<MPoly> generic(n * n);
    for (std::size_t v = 0; v < d; ++v) {
        const MPoly tv = MPoly::variable(v);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                if (!basis[v](r, c).is_zero()) generic[r * n + c] += tv.scaled(basis[v](r, c));
    }
    std::vector<MPoly> power = generic;
    for (std::size_t k = 1; k <= n; ++k) {
        MPoly trace;
        for (std::size_t r = 0; r < n; ++r) trace += power[r * n + r];
        if (!trace.is_zero()) {
            const std::vector<Rational> point = find_nonvanishing_point(trace);
            MatrixQ m(n, n);
            for (std::size_t v = 0; v < d; ++v)
                if (!point[v].is_zero()) m = m + basis[v].scaled(point[v]);
            if (is_nilpotent_operator(m))
                throw std::logic_error("witness extraction: trace point is nilpotent");
            return m;
        }
        if (k == n) break;
        std::vector<MPoly> next(n * n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t m2 = 0; m2 < n; ++m2) {
                if (power[r * n + m2].is_zero()) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    if (generic[m2 * n + c].is_zero()) continue;
                    next[r * n + c] += power[r * n + m2] * generic[m2 * n + c];
                }
            }
        power = std::move(next);
    }
    throw std::logic_error("witness extraction: no non-nilpotent element found");
}

}  // namespace detail

// Engel-flag decision for a commutator-closed operator space: grow the chain
// K_0 = 0, K_{t+1} = {v : B v in K_t for all basis B}. Reaching the full
// space proves every element of the span nilpotent; a stalled chain yields a
// non-nilpotent witness.
inline NilpotencyVerdict all_nilpotent(const OperatorSubspace& s) {
    if (!bracket_closed(s)) throw NotBracketClosedError();
    const std::size_t n = s.ambient;
    const std::vector<MatrixQ> ops = s.basis_matrices();

    std::vector<std::size_t> ascending{0};
    SubspaceQ k(n);  // zero subspace
    while (true) {
        if (k.dim() == n) break;
        SubspaceQ next(n);
        if (ops.empty()) {
            next = SubspaceQ::full(n);
        } else {
            const SubspaceQ ann = annihilator(k);
            RowReducer red(n);
            for (const MatrixQ& b : ops)
                for (const VecQ& arow : ann.basis()) {
                    VecQ row(n, Rational(0));
                    bool nonzero = false;
                    for (std::size_t c = 0; c < n; ++c) {
                        Rational acc(0);
                        for (std::size_t r = 0; r < n; ++r)
                            if (!b(r, c).is_zero() && !arow[r].is_zero()) acc += arow[r] * b(r, c);
                        if (!acc.is_zero()) nonzero = true;
                        row[c] = std::move(acc);
                    }
                    if (nonzero) red.add_dense_row(row);
                }
            next = SubspaceQ::span(n, red.nullspace_basis());
        }
        if (next.dim() == k.dim()) {
            NilpotencyVerdict v;
            v.all_nilpotent = false;
            v.witness = detail::find_non_nilpotent_witness(s);
            return v;
        }
        ascending.push_back(next.dim());
        k = std::move(next);
    }
    NilpotencyVerdict v;
    v.all_nilpotent = true;
    v.flag.assign(ascending.rbegin(), ascending.rend());
    return v;
}

}  // namespace filiform

#endif  // FILIFORM_DERIVOPS_HPP
