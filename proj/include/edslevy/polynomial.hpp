#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace edslevy {

/// Dense polynomial with complex coefficients in ascending order of degree.
class Polynomial {
public:
    using value_type = std::complex<double>;

    Polynomial() = default;
    explicit Polynomial(std::vector<value_type> ascending);
    Polynomial(std::initializer_list<value_type> ascending);

    /// c0 + c1 s
    static Polynomial linear(value_type c0, value_type c1) { return Polynomial{c0, c1}; }

    const std::vector<value_type>& coefficients() const { return coeffs_; }
    /// Degree after dropping exactly-zero leading coefficients; -1 for zero.
    int degree() const;
    value_type operator()(value_type s) const;

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(value_type scalar);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, value_type k) { return a *= k; }
    friend Polynomial operator*(value_type k, Polynomial a) { return a *= k; }

private:
    std::vector<value_type> coeffs_;
};

/// All roots of p as eigenvalues of its companion matrix (balanced, via
/// Eigen's complex Schur decomposition). Throws NumericalError for the zero
/// polynomial.
std::vector<std::complex<double>> polynomial_roots(const Polynomial& p);

} // namespace edslevy
