#ifndef FILIFORM_MPOLY_HPP
#define FILIFORM_MPOLY_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "filiform/rational.hpp"

namespace filiform {

// Sparse multivariate polynomial over Q in at most 8 variables, exponents
// < 16 per variable (a monomial packs into one 64-bit key, one nibble per
// variable). Enough for trace polynomials of matrix powers at desk scale.
class MPoly {
public:
    static constexpr std::size_t kMaxVars = 8;
    static constexpr std::uint64_t kMaxExp = 15;

    MPoly() = default;

    static MPoly constant(Rational value) {
        MPoly p;
        if (!value.is_zero()) p.terms_[0] = std::move(value);
        return p;
    }

    static MPoly variable(std::size_t v) {
        if (v >= kMaxVars) throw std::invalid_argument("mpoly: variable index out of range");
        MPoly p;
        p.terms_[key_with(0, v, 1)] = 1;
        return p;
    }

    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 0);
    }

    MPoly& operator+=(const MPoly& rhs) {
        for (const auto& [k, v] : rhs.terms_) add_term(k, v);
        return *this;
    }

    MPoly operator*(const MPoly& rhs) const {
        MPoly out;
        for (const auto& [ka, va] : terms_)
            for (const auto& [kb, vb] : rhs.terms_) out.add_term(mul_keys(ka, kb), va * vb);
        return out;
    }

    MPoly scaled(const Rational& s) const {
        MPoly out;
        if (s.is_zero()) return out;
        for (const auto& [k, v] : terms_) out.terms_[k] = v * s;
        return out;
    }

    // Largest variable index that actually occurs; -1 for constants.
    int top_variable() const {
        int top = -1;
        for (const auto& [k, v] : terms_) {
            (void)v;
            for (int var = static_cast<int>(kMaxVars) - 1; var > top; --var)
                if (exp_of(k, static_cast<std::size_t>(var)) > 0) top = var;
        }
        return top;
    }

    std::uint64_t degree_in(std::size_t v) const {
        std::uint64_t deg = 0;
        for (const auto& [k, val] : terms_) {
            (void)val;
            deg = std::max(deg, exp_of(k, v));
        }
        return deg;
    }

    // The coefficient of v^e, a polynomial in the remaining variables.
    MPoly coefficient_of(std::size_t v, std::uint64_t e) const {
        MPoly out;
        for (const auto& [k, val] : terms_)
            if (exp_of(k, v) == e) out.terms_[key_with(k, v, 0)] = val;
        return out;
    }

    Rational eval(const std::vector<Rational>& point) const {
        Rational acc(0);
        for (const auto& [k, val] : terms_) {
            Rational term = val;
            for (std::size_t v = 0; v < kMaxVars; ++v) {
                const std::uint64_t e = exp_of(k, v);
                for (std::uint64_t i = 0; i < e; ++i)
                    term *= v < point.size() ? point[v] : Rational(0);
            }
            acc += term;
        }
        return acc;
    }

    // Substitutes every variable except `keep` from `point`; returns the
    // univariate coefficients indexed by the exponent of `keep`.
    std::map<std::uint64_t, Rational> collapse_to(std::size_t keep,
                                                  const std::vector<Rational>& point) const {
        std::map<std::uint64_t, Rational> out;
        for (const auto& [k, val] : terms_) {
            Rational term = val;
            for (std::size_t v = 0; v < kMaxVars; ++v) {
                if (v == keep) continue;
                const std::uint64_t e = exp_of(k, v);
                for (std::uint64_t i = 0; i < e; ++i)
                    term *= v < point.size() ? point[v] : Rational(0);
            }
            if (term.is_zero()) continue;
            auto [it, inserted] = out.emplace(exp_of(k, keep), term);
            if (!inserted) {
                it->second += term;
                if (it->second.is_zero()) out.erase(it);
            }
        }
        return out;
    }

private:
    std::map<std::uint64_t, Rational> terms_;

    static std::uint64_t exp_of(std::uint64_t key, std::size_t v) { return (key >> (4 * v)) & 0xF; }

    static std::uint64_t key_with(std::uint64_t key, std::size_t v, std::uint64_t e) {
        return (key & ~(std::uint64_t(0xF) << (4 * v))) | (e << (4 * v));
    }

    static std::uint64_t mul_keys(std::uint64_t a, std::uint64_t b) {
        std::uint64_t out = 0;
        for (std::size_t v = 0; v < kMaxVars; ++v) {
            const std::uint64_t e = exp_of(a, v) + exp_of(b, v);
            if (e > kMaxExp) throw std::overflow_error("mpoly: exponent overflow");
            out |= e << (4 * v);
        }
        return out;
    }

    void add_term(std::uint64_t key, const Rational& value) {
        if (value.is_zero()) return;
        auto [it, inserted] = terms_.emplace(key, value);
        if (!inserted) {
            it->second += value;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
};

// A point with small non-negative integer coordinates where the polynomial
// does not vanish. Walks down the leading coefficients, then scans one
// variable at a time; a nonzero polynomial of per-variable degree <= 15
// always yields within degree+1 candidate values.
inline std::vector<Rational> find_nonvanishing_point(const MPoly& p) {
    if (p.is_zero()) throw std::logic_error("find_nonvanishing_point: zero polynomial");
    std::vector<Rational> point(MPoly::kMaxVars, Rational(0));
    // levels[0] = p, levels[i+1] = leading coefficient of levels[i] in its
    // top variable; the last level is a nonzero constant.
    std::vector<MPoly> levels{p};
    std::vector<std::size_t> top_var;
    while (!levels.back().is_constant()) {
        const auto v = static_cast<std::size_t>(levels.back().top_variable());
        top_var.push_back(v);
        levels.push_back(levels.back().coefficient_of(v, levels.back().degree_in(v)));
    }
    // Fix variables from the innermost level outwards; at each step the
    // leading coefficient of the collapsed univariate is nonzero, so a value
    // within degree+1 candidates exists.
    for (std::size_t idx = top_var.size(); idx-- > 0;) {
        const std::size_t v = top_var[idx];
        const MPoly& poly = levels[idx];
        const auto uni = poly.collapse_to(v, point);
        bool found = false;
        const std::uint64_t deg = poly.degree_in(v);
        for (std::uint64_t cand = 0; cand <= deg && !found; ++cand) {
            Rational value(0);
            Rational x(cand);
            for (const auto& [e, coef] : uni) {
                Rational term = coef;
                for (std::uint64_t i = 0; i < e; ++i) term *= x;
                value += term;
            }
            if (!value.is_zero()) {
                point[v] = x;
                found = true;
            }
        }
        if (!found) throw std::logic_error("find_nonvanishing_point: scan failed");
    }
    if (p.eval(point).is_zero()) throw std::logic_error("find_nonvanishing_point: inconsistent result");
    return point;
}

}  // namespace filiform

#endif  // FILIFORM_MPOLY_HPP
