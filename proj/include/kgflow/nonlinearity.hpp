#pragma once

#include "kgflow/halfalg.hpp"

#include <array>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgflow {

/// Exponents of (u, ut_x, u_xx; u_t, u_x); the same layout indexes (X1, X2, X3; Y1, Y2).
struct MonomialKey {
    std::array<unsigned, 5> e{};

    unsigned total() const { return e[0] + e[1] + e[2] + e[3] + e[4]; }
    unsigned second_order() const { return e[1] + e[2]; }
    unsigned y_degree() const { return e[3] + e[4]; }
    auto operator<=>(const MonomialKey&) const = default;
    std::string str() const;
};

struct DegreeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct QuasiLinearityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using TermMap = std::map<MonomialKey, Rational>;

/// Cubic P(u, ut_x, u_xx; u_t, u_x) with real (exactly promoted) coefficients.
class CubicNonlinearity {
public:
    CubicNonlinearity() = default;
    explicit CubicNonlinearity(TermMap terms);

    /// Adds coeff to the term (accumulates on repeated keys).
    CubicNonlinearity& add(const MonomialKey& key, const Rational& coeff);
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::string str() const;

    static CubicNonlinearity u_cubed();
    static CubicNonlinearity ut_cubed();
    static CubicNonlinearity u2_uxx();

private:
    TermMap terms_;
};

void validate(const CubicNonlinearity& p);

struct DecompositionTable {
    std::array<TermMap, 4> pprime;        ///< P'_k over (X1; Y1, Y2)
    std::array<TermMap, 3> pdoubleprime;  ///< P''_k over (X1, X2, X3; Y1, Y2)
};

DecompositionTable decompose(const CubicNonlinearity& p);

/// Exact value of a monomial table at the given slot values.
HalfExpr eval_terms(const TermMap& terms, const std::array<HalfExpr, 5>& slots);

HalfExpr null_functional(const CubicNonlinearity& p);
HalfExpr phi_one(const CubicNonlinearity& p);

struct NullReport {
    HalfExpr phi;
    std::vector<Rational> q_coeffs;  ///< ascending powers of x
    bool verdict = false;
    HalfExpr phi1;
};

NullReport check_null(const CubicNonlinearity& p);

/// Q(x) = (1-x^2)^{3/2} Phi(x) as a polynomial; throws if it is not one.
std::vector<Rational> q_polynomial(const HalfExpr& phi);

using SignTriple = std::array<int, 3>;

struct ComplexHalf {
    HalfExpr re;
    HalfExpr im;
};

/// Coefficient of v_{i1} v_{i2} v_{i3} in the w-equation right-hand side, with
/// multipliers frozen at i_k dphi(x) and weighted by a_I for Sigma = <xi>^sigma_power.
/// Throws std::domain_error when a_I leaves the algebra (|i1+i2+i3| = 3 and
/// sigma_power odd or negative).
ComplexHalf extract_coefficients(const CubicNonlinearity& p, const SignTriple& I, int sigma_power);

/// Floating counterpart of extract_coefficients, valid for every sigma_power.
std::complex<double> coefficient_value(const CubicNonlinearity& p, const SignTriple& I,
                                       int sigma_power, double x);

/// The weight a_{(1,1,-1)} = <dphi>^{-1} quoted for Sigma = <xi>^{-1} in the asymptotic
/// analysis; maps the unweighted characteristic real part onto phi_one.
HalfExpr characteristic_reweight();

/// Grid evaluation of P with slots (u, d_x u_t, d_x^2 u, u_t, d_x u).
std::vector<double> evaluate_nonlinearity(const CubicNonlinearity& p,
                                          const std::array<const std::vector<double>*, 5>& slots);

}  // namespace kgflow
