#ifndef FILIFORM_FAMILIES_HPP
#define FILIFORM_FAMILIES_HPP

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "filiform/algebra.hpp"
#include "filiform/catalan.hpp"
#include "filiform/rational.hpp"

namespace filiform {

inline Rational rational_pow(const Rational& base, std::size_t e) {
    Rational out(1);
    for (std::size_t i = 0; i < e; ++i) out *= base;
    return out;
}

// Parameters (alpha_4, ..., alpha_n, theta) of the first family.
struct F1Params {
    std::size_t n = 0;
    std::vector<Rational> alpha;  // alpha[0] = alpha_4, ..., alpha[n-4] = alpha_n
    Rational theta;

    F1Params(std::size_t n_, std::vector<Rational> alpha_, Rational theta_)
        : n(n_), alpha(std::move(alpha_)), theta(std::move(theta_)) {
        if (n < 4) throw std::invalid_argument("F1: n must be >= 4");
        if (alpha.size() != n - 3) throw std::invalid_argument("F1: alpha count must be n-3");
    }

    static F1Params zeros(std::size_t n_) {
        return F1Params(n_, std::vector<Rational>(n_ - 3, Rational(0)), Rational(0));
    }

    const Rational& alpha_at(std::size_t k) const {  // k in 4..n
        if (k < 4 || k > n) throw std::out_of_range("F1: alpha index out of range");
        return alpha[k - 4];
    }
    Rational& alpha_at(std::size_t k) {
        if (k < 4 || k > n) throw std::out_of_range("F1: alpha index out of range");
        return alpha[k - 4];
    }
};

// Parameters (beta_4, ..., beta_n, gamma) of the second family.
struct F2Params {
    std::size_t n = 0;
    std::vector<Rational> beta;  // beta[0] = beta_4, ..., beta[n-4] = beta_n
    Rational gamma;

    F2Params(std::size_t n_, std::vector<Rational> beta_, Rational gamma_)
        : n(n_), beta(std::move(beta_)), gamma(std::move(gamma_)) {
        if (n < 4) throw std::invalid_argument("F2: n must be >= 4");
        if (beta.size() != n - 3) throw std::invalid_argument("F2: beta count must be n-3");
    }

    static F2Params zeros(std::size_t n_) {
        return F2Params(n_, std::vector<Rational>(n_ - 3, Rational(0)), Rational(0));
    }

    const Rational& beta_at(std::size_t k) const {  // k in 4..n
        if (k < 4 || k > n) throw std::out_of_range("F2: beta index out of range");
        return beta[k - 4];
    }
    Rational& beta_at(std::size_t k) {
        if (k < 4 || k > n) throw std::out_of_range("F2: beta index out of range");
        return beta[k - 4];
    }
};

// Parameters of the third family: theta_1..theta_3, the alpha in {0, 1}
// (zero when n is odd), and the skew block of products [e_i, e_j] for
// 2 <= i < j <= n-1 supported on e_{i+j+1}..e_n.
struct F3Params {
    std::size_t n = 0;
    Rational theta1, theta2, theta3;
    int alpha_flag = 0;
    std::map<std::pair<std::size_t, std::size_t>, SparseVec> skew;

    F3Params(std::size_t n_, Rational t1, Rational t2, Rational t3, int alpha_flag_ = 0,
             std::map<std::pair<std::size_t, std::size_t>, SparseVec> skew_ = {})
        : n(n_),
          theta1(std::move(t1)),
          theta2(std::move(t2)),
          theta3(std::move(t3)),
          alpha_flag(alpha_flag_),
          skew(std::move(skew_)) {
        if (n < 4) throw std::invalid_argument("F3: n must be >= 4");
        if (alpha_flag != 0 && alpha_flag != 1)
            throw std::invalid_argument("F3: alpha flag must be 0 or 1");
        if (n % 2 == 1 && alpha_flag != 0) throw std::invalid_argument("F3: alpha=0 for odd n");
        for (const auto& [ij, value] : skew) {
            const auto [i, j] = ij;
            if (i < 2 || j <= i || j > n - 1)
                throw std::invalid_argument("F3: skew pair must satisfy 2 <= i < j <= n-1");
            for (const auto& [k, coef] : value) {
                (void)coef;
                if (k < i + j + 1 || k > n)
                    throw std::invalid_argument("F3: skew coefficient for (" + std::to_string(i) +
                                                "," + std::to_string(j) +
                                                ") must sit on e_{i+j+1}..e_n");
            }
        }
    }
};

inline Algebra build_f1(const F1Params& p) {
    const std::size_t n = p.n;
    Algebra a(n);
    a.set_product(1, 1, {{3, Rational(1)}});
    for (std::size_t i = 2; i <= n - 1; ++i) a.set_product(i, 1, {{i + 1, Rational(1)}});
    {
        SparseVec v;
        for (std::size_t t = 4; t + 1 <= n; ++t)  // t = 4..n-1
            if (!p.alpha_at(t).is_zero()) v.emplace_back(t, p.alpha_at(t));
        if (!p.theta.is_zero()) v.emplace_back(n, p.theta);
        a.set_product(1, 2, std::move(v));
    }
    for (std::size_t j = 2; j <= n - 2; ++j) {
        SparseVec v;
        for (std::size_t t = j + 2; t <= n; ++t)
            if (!p.alpha_at(t - j + 2).is_zero()) v.emplace_back(t, p.alpha_at(t - j + 2));
        a.set_product(j, 2, std::move(v));
    }
    return a;
}

inline Algebra build_f2(const F2Params& p) {
    const std::size_t n = p.n;
    Algebra a(n);
    a.set_product(1, 1, {{3, Rational(1)}});
    for (std::size_t i = 3; i <= n - 1; ++i) a.set_product(i, 1, {{i + 1, Rational(1)}});
    {
        SparseVec v;
        for (std::size_t t = 4; t <= n; ++t)
            if (!p.beta_at(t).is_zero()) v.emplace_back(t, p.beta_at(t));
        a.set_product(1, 2, std::move(v));
    }
    if (!p.gamma.is_zero()) a.set_product(2, 2, {{n, p.gamma}});
    for (std::size_t j = 3; j <= n - 2; ++j) {
        SparseVec v;
        for (std::size_t t = j + 2; t <= n; ++t)
            if (!p.beta_at(t - j + 2).is_zero()) v.emplace_back(t, p.beta_at(t - j + 2));
        a.set_product(j, 2, std::move(v));
    }
    return a;
}

// Thrown by build_f3 when the supplied skew coefficients break the Leibniz
// identity; carries the failing triples.
class LeibnizViolationError : public std::runtime_error {
public:
    explicit LeibnizViolationError(std::vector<LeibnizViolation> violations)
        : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}

    const std::vector<LeibnizViolation>& violations() const { return violations_; }

private:
    std::vector<LeibnizViolation> violations_;

    static std::string describe(const std::vector<LeibnizViolation>& v) {
        std::string msg = "Leibniz identity fails on " + std::to_string(v.size()) + " triple(s)";
        if (!v.empty())
            msg += ", first at (" + std::to_string(v.front().i) + "," + std::to_string(v.front().j) +
                   "," + std::to_string(v.front().k) + ")";
        return msg;
    }
};

// Assembles the F3 table and validates it; the builder never searches for
// admissible skew coefficients, it only checks the given ones.
inline Algebra build_f3(const F3Params& p) {
    const std::size_t n = p.n;
    Algebra a(n);
    for (std::size_t i = 2; i <= n - 1; ++i) a.set_product(i, 1, {{i + 1, Rational(1)}});
    for (std::size_t i = 3; i <= n - 1; ++i) a.set_product(1, i, {{i + 1, Rational(-1)}});
    if (!p.theta1.is_zero()) a.set_product(1, 1, {{n, p.theta1}});
    {
        SparseVec v{{3, Rational(-1)}};
        if (!p.theta2.is_zero()) v.emplace_back(n, p.theta2);
        a.set_product(1, 2, std::move(v));
    }
    if (!p.theta3.is_zero()) a.set_product(2, 2, {{n, p.theta3}});
    for (const auto& [ij, value] : p.skew) {
        const auto [i, j] = ij;
        for (const auto& [k, coef] : value) {
            a.add_to_product(i, j, k, coef);
            a.add_to_product(j, i, k, -coef);
        }
    }
    if (p.alpha_flag == 1) {
        // [e_i, e_{n+1-i}] = alpha (-1)^{i+1} e_n for 2 <= i <= n-1; each
        // ordered pair is visited exactly once (n even, so i != n+1-i).
        for (std::size_t i = 2; i <= n - 1; ++i) {
            const std::size_t j = n + 1 - i;
            a.add_to_product(i, j, n, Rational(i % 2 == 1 ? 1 : -1));
        }
    }
    std::vector<LeibnizViolation> bad = leibniz_violations(a);
    if (!bad.empty()) throw LeibnizViolationError(std::move(bad));
    return a;
}

// Generators for the canonical non-strongly-nilpotent parameter vectors.
enum class F1Case { i, ii, iii, iv };

struct F1CaseSeed {
    Rational alpha4;                 // case i: the leading value
    std::size_t s = 0;               // cases ii and iv
    Rational lead;                   // case ii: alpha_{2s}; case iv: alpha_{2s+1}
    std::vector<Rational> odd_free;  // case iii: free odd entries, in slot order
    Rational alpha_n1, alpha_n, theta;
};

inline F1Params gen_f1_nsn(std::size_t n, F1Case kase, const F1CaseSeed& seed) {
    if (n < 7) throw std::invalid_argument("gen_f1_nsn: n must be >= 7");
    F1Params p = F1Params::zeros(n);
    p.alpha_at(n) = seed.alpha_n;
    p.theta = seed.theta;
    const bool even = n % 2 == 0;
    switch (kase) {
        case F1Case::i: {
            p.alpha_at(4) = seed.alpha4;
            for (std::size_t k = 5; k <= n - 2; ++k) {
                Rational v = Rational(catalan(2, k - 4)) * rational_pow(seed.alpha4, k - 3);
                if (k % 2 == 1) v = -v;
                p.alpha_at(k) = std::move(v);
            }
            p.alpha_at(n - 1) = seed.alpha_n1;
            break;
        }
        case F1Case::ii: {
            const std::size_t s_max = even ? (n - 2) / 2 : (n - 3) / 2;
            if (seed.s < 3 || seed.s > s_max)
                throw std::invalid_argument("gen_f1_nsn: case ii requires 3 <= s <= " +
                                            std::to_string(s_max));
            const std::size_t step = 2 * seed.s - 3;
            for (std::size_t t = 1; step * t + 3 <= n - 2; ++t) {
                Rational v = Rational(catalan(2 * seed.s - 2, t)) * rational_pow(seed.lead, t);
                if (t % 2 == 0) v = -v;
                p.alpha_at(step * t + 3) = std::move(v);
            }
            p.alpha_at(n - 1) = seed.alpha_n1;
            break;
        }
        case F1Case::iii: {
            // Even-indexed alphas vanish; for odd n this includes alpha_{n-1}.
            const std::size_t last_odd_slot = even ? n - 3 : n - 2;
            std::size_t used = 0;
            for (std::size_t k = 5; k <= last_odd_slot; k += 2) {
                p.alpha_at(k) =
                    used < seed.odd_free.size() ? seed.odd_free[used] : Rational(0);
                ++used;
            }
            if (even) p.alpha_at(n - 1) = seed.alpha_n1;
            break;
        }
        case F1Case::iv: {
            if (even) throw std::invalid_argument("gen_f1_nsn: case iv requires odd n");
            const std::size_t s_max = (n - 3) / 2;
            if (seed.s < 2 || seed.s > s_max)
                throw std::invalid_argument("gen_f1_nsn: case iv requires 2 <= s <= " +
                                            std::to_string(s_max));
            const std::size_t step = 2 * seed.s - 2;
            for (std::size_t t = 1; step * t + 3 <= n - 2; ++t) {
                Rational v = Rational(catalan(2 * seed.s - 1, t)) * rational_pow(seed.lead, t);
                if (t % 2 == 0) v = -v;
                p.alpha_at(step * t + 3) = std::move(v);
            }
            p.alpha_at(n - 1) = seed.alpha_n1;
            break;
        }
    }
    return p;
}

enum class F2Case { single, odd_only };

struct F2CaseSeed {
    std::size_t j = 0;               // single: the unit index
    std::vector<Rational> odd_free;  // odd_only: free odd entries, in slot order
    Rational beta_n1, beta_n, gamma;
};

inline F2Params gen_f2_nsn(std::size_t n, F2Case kase, const F2CaseSeed& seed) {
    if (n < 7) throw std::invalid_argument("gen_f2_nsn: n must be >= 7");
    F2Params p = F2Params::zeros(n);
    p.beta_at(n) = seed.beta_n;
    p.gamma = seed.gamma;
    const bool even = n % 2 == 0;
    switch (kase) {
        case F2Case::single: {
            if (seed.j < 4 || seed.j > n - 2)
                throw std::invalid_argument("gen_f2_nsn: unit index must satisfy 4 <= j <= n-2");
            if (even && seed.j % 2 != 0)
                throw std::invalid_argument("gen_f2_nsn: unit index must be even when n is even");
            p.beta_at(seed.j) = 1;
            p.beta_at(n - 1) = seed.beta_n1;
            break;
        }
        case F2Case::odd_only: {
            const std::size_t last_odd_slot = even ? n - 3 : n - 2;
            std::size_t used = 0;
            for (std::size_t k = 5; k <= last_odd_slot; k += 2) {
                p.beta_at(k) = used < seed.odd_free.size() ? seed.odd_free[used] : Rational(0);
                ++used;
            }
            // The printed normal form keeps beta_{n-1} only for even n.
            if (even) p.beta_at(n - 1) = seed.beta_n1;
            break;
        }
    }
    return p;
}

}  // namespace filiform

#endif  // FILIFORM_FAMILIES_HPP
