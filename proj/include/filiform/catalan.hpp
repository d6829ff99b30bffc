#ifndef FILIFORM_CATALAN_HPP
#define FILIFORM_CATALAN_HPP

#include <cstddef>
#include <stdexcept>

#include "filiform/rational.hpp"

namespace filiform {

// p-th Catalan (Fuss-Catalan) number C^p_n = binom(pn, n) / ((p-1)n + 1).
// p = 2 gives the classical Catalan numbers 1, 1, 2, 5, 14, ...
inline Integer catalan(std::size_t p, std::size_t n) {
    if (p < 2) throw std::invalid_argument("catalan: p must be >= 2");
    Integer binom;
    mpz_bin_uiui(binom.backend().data(), static_cast<unsigned long>(p * n),
                 static_cast<unsigned long>(n));
    const Integer den = Integer((p - 1) * n + 1);
    Integer q, r;
    divide_qr(binom, den, q, r);
    if (!r.is_zero()) throw std::logic_error("catalan: non-integral value");
    return q;
}

enum class ConvolutionForm {
    corrected,  // sum_{k=1}^{n} C^p_k C^p_{n+1-k}
    printed,    // sum_{k=1}^{n} C^p_k C^p_{n-k}, with C^p_0 = 1
};

struct ConvolutionCheck {
    Rational lhs;
    Rational rhs;  // 2n / ((p-1)n + p + 1) * C^p_{n+1}
    bool equal = false;
};

inline ConvolutionCheck catalan_convolution_check(std::size_t p, std::size_t n,
                                                  ConvolutionForm form = ConvolutionForm::corrected) {
    if (p < 2) throw std::invalid_argument("catalan_convolution_check: p must be >= 2");
    if (n < 1) throw std::invalid_argument("catalan_convolution_check: n must be >= 1");
    ConvolutionCheck out;
    Integer lhs(0);
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t other = form == ConvolutionForm::corrected ? n + 1 - k : n - k;
        lhs += catalan(p, k) * catalan(p, other);
    }
    out.lhs = Rational(lhs);
    out.rhs = Rational(Integer(2 * n) * catalan(p, n + 1), Integer((p - 1) * n + p + 1));
    mpq_canonicalize(out.rhs.backend().data());
    out.equal = out.lhs == out.rhs;
    return out;
}

}  // namespace filiform

#endif  // FILIFORM_CATALAN_HPP
