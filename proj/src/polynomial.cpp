#include "edslevy/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "edslevy/errors.hpp"

namespace edslevy {

Polynomial::Polynomial(std::vector<value_type> ascending) : coeffs_(std::move(ascending)) {}
Polynomial::Polynomial(std::initializer_list<value_type> ascending) : coeffs_(ascending) {}

int Polynomial::degree() const
{
    for (int d = static_cast<int>(coeffs_.size()) - 1; d >= 0; --d)
        if (coeffs_[static_cast<std::size_t>(d)] != value_type(0.0))
            return d;
    return -1;
}

Polynomial::value_type Polynomial::operator()(value_type s) const
{
    value_type acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
        acc = acc * s + *it;
    return acc;
}

Polynomial& Polynomial::operator+=(const Polynomial& other)
{
    if (other.coeffs_.size() > coeffs_.size())
        coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t i = 0; i < other.coeffs_.size(); ++i)
        coeffs_[i] += other.coeffs_[i];
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other)
{
    if (other.coeffs_.size() > coeffs_.size())
        coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t i = 0; i < other.coeffs_.size(); ++i)
        coeffs_[i] -= other.coeffs_[i];
    return *this;
}

Polynomial& Polynomial::operator*=(value_type scalar)
{
    for (auto& c : coeffs_)
        c *= scalar;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    if (a.coeffs_.empty() || b.coeffs_.empty())
        return Polynomial{};
    std::vector<Polynomial::value_type> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
            out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(out));
}

std::vector<std::complex<double>> polynomial_roots(const Polynomial& p)
{
    const int n = p.degree();
    if (n < 0)
        throw NumericalError("roots requested for the zero polynomial");
    if (n == 0)
        return {};
    const auto& c = p.coefficients();
    const auto lead = c[static_cast<std::size_t>(n)];

    // Frobenius companion matrix of the monic polynomial: subdiagonal ones,
    // last column -c_k / c_n.
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i)
        companion(i, i - 1) = 1.0;
    for (int k = 0; k < n; ++k)
        companion(k, n - 1) = -c[static_cast<std::size_t>(k)] / lead;

    // Diagonal balancing (Parlett-Reinsch, powers of two) before the QR sweep.
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
    for (bool converged = false; !converged;) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double col = 0.0, row = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i)
                    continue;
                col += std::abs(companion(j, i));
                row += std::abs(companion(i, j));
            }
            if (col == 0.0 || row == 0.0)
                continue;
            double f = 1.0;
            const double s = col + row;
            while (col < row / 2.0) {
                col *= 2.0;
                row /= 2.0;
                f *= 2.0;
            }
            while (col > row * 2.0) {
                col /= 2.0;
                row *= 2.0;
                f /= 2.0;
            }
            if ((col + row) < 0.95 * s) {
                converged = false;
                scale(i) *= f;
                companion.row(i) /= f;
                companion.col(i) *= f;
            }
        }
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("companion-matrix eigenvalue iteration failed");
    const auto& ev = solver.eigenvalues();
    return std::vector<std::complex<double>>(ev.data(), ev.data() + ev.size());
}

} // namespace edslevy
