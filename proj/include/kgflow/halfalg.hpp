#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace kgflow {

using Rational = mpq_class;

/// Exact decimal literal ("-0.125", "3e-2", "1/3") to rational.
Rational rational_from_string(const std::string& text);
/// Shortest round-trip decimal of a double, promoted exactly.
Rational rational_from_double(double value);

/// Dense polynomial in x with rational coefficients, c[i] multiplies x^i.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<Rational> coeffs);
    static Poly constant(const Rational& c);
    static Poly monomial(unsigned degree, const Rational& c = 1);
    static Poly one_minus_x2();

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(unsigned i) const;

    Poly operator-() const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(const Rational& s, const Poly& a);
    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    /// True when (1 - x^2) divides the polynomial (zero counts as divisible).
    bool divisible_by_one_minus_x2() const;
    /// Exact quotient by (1 - x^2); requires divisibility.
    Poly div_one_minus_x2() const;

    double eval(double x) const;
    Rational eval(const Rational& x) const;
    std::string str(const char* var = "x") const;

private:
    void trim();
    std::vector<Rational> c_;
};

/// Element (A + s B) / (1 - x^2)^k of Q[x, (1-x^2)^{+-1/2}] with s = (1-x^2)^{1/2}.
class HalfExpr {
public:
    HalfExpr() = default;
    HalfExpr(Poly a, Poly b, unsigned k);
    HalfExpr(const Rational& c);  // NOLINT: constants convert implicitly

    static HalfExpr x();
    /// (1 - x^2)^{m/2} for any integer m.
    static HalfExpr sqrt_pow(int m);
    static HalfExpr omega0();  ///< 1/sqrt(1-x^2), equals <dphi>
    static HalfExpr omega1();  ///< -x/sqrt(1-x^2), equals dphi
    static HalfExpr phi();     ///< sqrt(1-x^2)

    const Poly& even() const { return a_; }
    const Poly& odd() const { return b_; }
    unsigned denom_pow() const { return k_; }

    bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

    HalfExpr operator-() const;
    friend HalfExpr operator+(const HalfExpr& a, const HalfExpr& b);
    friend HalfExpr operator-(const HalfExpr& a, const HalfExpr& b);
    friend HalfExpr operator*(const HalfExpr& a, const HalfExpr& b);
    friend bool operator==(const HalfExpr& a, const HalfExpr& b);
    HalfExpr& operator+=(const HalfExpr& o) { return *this = *this + o; }
    HalfExpr& operator*=(const HalfExpr& o) { return *this = *this * o; }
    HalfExpr pow(unsigned n) const;

    /// Throws std::domain_error unless |x| < 1.
    double eval(double x) const;
    std::string str() const;

    /// Re-runs canonicalization; canonical inputs come back unchanged.
    HalfExpr canonical() const;

private:
    void canonicalize();
    Poly a_, b_;
    unsigned k_ = 0;
};

HalfExpr he_add(const HalfExpr& a, const HalfExpr& b);
HalfExpr he_mul(const HalfExpr& a, const HalfExpr& b);
double he_eval(const HalfExpr& e, double x);
bool he_is_zero(const HalfExpr& e);

}  // namespace kgflow
