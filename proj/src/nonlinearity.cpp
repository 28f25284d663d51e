#include "kgflow/nonlinearity.hpp"

#include <cmath>
#include <sstream>

namespace kgflow {

namespace {

const char* kSlotNames[5] = {"u", "utx", "uxx", "ut", "ux"};

/// A HalfExpr-valued complex number, enough for the i^k bookkeeping.
struct CH {
    HalfExpr re, im;
    CH operator+(const CH& o) const { return {re + o.re, im + o.im}; }
    CH operator*(const HalfExpr& s) const { return {re * s, im * s}; }
};

CH times_i_pow(const HalfExpr& v, unsigned k) {
    switch (k % 4) {
        case 0: return {v, HalfExpr()};
        case 1: return {HalfExpr(), v};
        case 2: return {-v, HalfExpr()};
        default: return {HalfExpr(), -v};
    }
}

/// Slot forms (coefficient on v, coefficient on conj v) with multipliers frozen at +-dphi.
std::array<std::array<HalfExpr, 2>, 5> slot_forms() {
    const HalfExpr half(Rational(1, 2));
    const HalfExpr g = HalfExpr::phi();  // <dphi>^{-1}
    const HalfExpr d = HalfExpr::omega1();
    HalfExpr x1 = half * g;
    HalfExpr x2 = half * d;
    HalfExpr x3 = half * d * d * g;
    HalfExpr y1 = half;
    HalfExpr y2 = half * d * g;
    return {{{x1, x1}, {x2, x2}, {x3, x3}, {y1, -y1}, {y2, -y2}}};
}

std::array<HalfExpr, 5> phi_slots() {
    HalfExpr w0 = HalfExpr::omega0(), w1 = HalfExpr::omega1();
    return {HalfExpr(Rational(1)), w0 * w1, w1 * w1, w0, w1};
}

/// Coefficient of v^{n_plus} conj(v)^{3-n_plus} in the product of the slot forms of `key`.
HalfExpr product_coefficient(const MonomialKey& key, unsigned n_plus,
                             const std::array<std::array<HalfExpr, 2>, 5>& forms) {
    std::vector<const std::array<HalfExpr, 2>*> factors;
    for (int s = 0; s < 5; ++s)
        for (unsigned r = 0; r < key.e[static_cast<std::size_t>(s)]; ++r) factors.push_back(&forms[static_cast<std::size_t>(s)]);
    HalfExpr total;
    const unsigned n = static_cast<unsigned>(factors.size());
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        // bit set = factor contributes conj(v)
        if (static_cast<unsigned>(__builtin_popcount(mask)) != n - n_plus) continue;
        HalfExpr term(Rational(1));
        for (unsigned j = 0; j < n; ++j) term *= (*factors[j])[(mask >> j) & 1u];
        total += term;
    }
    return total;
}

HalfExpr bracket_pow_dphi(int m) { return HalfExpr::sqrt_pow(-m); }

}  // namespace

std::string MonomialKey::str() const {
    std::ostringstream os;
    bool first = true;
    for (int s = 0; s < 5; ++s) {
        unsigned p = e[static_cast<std::size_t>(s)];
        if (!p) continue;
        if (!first) os << "*";
        os << kSlotNames[s];
        if (p > 1) os << "^" << p;
        first = false;
    }
    return first ? "1" : os.str();
}

CubicNonlinearity::CubicNonlinearity(TermMap terms) {
    for (auto& [k, c] : terms) add(k, c);
}

CubicNonlinearity& CubicNonlinearity::add(const MonomialKey& key, const Rational& coeff) {
    Rational c = coeff;
    c.canonicalize();
    Rational& slot = terms_[key];
    slot += c;
    if (slot == 0) terms_.erase(key);
    return *this;
}

std::string CubicNonlinearity::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [k, c] : terms_) {
        if (!first) os << " + ";
        os << "(" << c.get_str() << ")*" << k.str();
        first = false;
    }
    return os.str();
}

CubicNonlinearity CubicNonlinearity::u_cubed() {
    return CubicNonlinearity().add(MonomialKey{{3, 0, 0, 0, 0}}, 1);
}
CubicNonlinearity CubicNonlinearity::ut_cubed() {
    return CubicNonlinearity().add(MonomialKey{{0, 0, 0, 3, 0}}, 1);
}
CubicNonlinearity CubicNonlinearity::u2_uxx() {
    return CubicNonlinearity().add(MonomialKey{{2, 0, 1, 0, 0}}, 1);
}

void validate(const CubicNonlinearity& p) {
    for (auto& [k, c] : p.terms()) {
        if (k.total() != 3)
            throw DegreeError("monomial " + k.str() + " has degree " + std::to_string(k.total()));
        if (k.second_order() > 1)
            throw QuasiLinearityError("monomial " + k.str() + " is not affine in second derivatives");
    }
}

DecompositionTable decompose(const CubicNonlinearity& p) {
    validate(p);
    DecompositionTable t;
    for (auto& [k, c] : p.terms()) {
        unsigned deg = k.y_degree();
        if (k.second_order() == 0)
            t.pprime[deg][k] = c;
        else
            t.pdoubleprime[deg][k] = -c;  // odd in (X2, X3) under the (-X2, -X3) convention
    }
    return t;
}

HalfExpr eval_terms(const TermMap& terms, const std::array<HalfExpr, 5>& slots) {
    HalfExpr total;
    for (auto& [k, c] : terms) {
        HalfExpr m(c);
        for (std::size_t s = 0; s < 5; ++s) m *= slots[s].pow(k.e[s]);
        total += m;
    }
    return total;
}

HalfExpr null_functional(const CubicNonlinearity& p) {
    auto t = decompose(p);
    auto sl = phi_slots();
    return eval_terms(t.pprime[1], sl) + eval_terms(t.pdoubleprime[1], sl) +
           HalfExpr(Rational(3)) * eval_terms(t.pprime[3], sl);
}

HalfExpr phi_one(const CubicNonlinearity& p) {
    auto t = decompose(p);
    auto sl = phi_slots();
    HalfExpr p0 = eval_terms(t.pprime[0], sl) + eval_terms(t.pdoubleprime[0], sl);
    HalfExpr p2 = eval_terms(t.pprime[2], sl) + eval_terms(t.pdoubleprime[2], sl);
    return HalfExpr(Rational(1, 8)) * HalfExpr::sqrt_pow(4) * (HalfExpr(Rational(3)) * p0 + p2);
}

std::vector<Rational> q_polynomial(const HalfExpr& phi) {
    HalfExpr q = HalfExpr::sqrt_pow(3) * phi;
    if (q.denom_pow() != 0 || !q.odd().is_zero())
        throw std::logic_error("(1-x^2)^{3/2} Phi is not a polynomial: " + q.str());
    return q.even().coeffs();
}

NullReport check_null(const CubicNonlinearity& p) {
    NullReport r;
    r.phi = null_functional(p);
    r.q_coeffs = q_polynomial(r.phi);
    r.verdict = r.phi.is_zero();
    r.phi1 = phi_one(p);
    return r;
}

namespace {

ComplexHalf base_coefficient(const CubicNonlinearity& p, const SignTriple& I) {
    validate(p);
    unsigned n_plus = 0;
    for (int s : I) {
        if (s != 1 && s != -1) throw std::invalid_argument("sign triple entries must be +-1");
        n_plus += s == 1;
    }
    auto forms = slot_forms();
    CH acc;
    for (auto& [k, c] : p.terms()) {
        HalfExpr coef = product_coefficient(k, n_plus, forms) * HalfExpr(c);
        if (k.second_order() == 1) coef = -coef;
        acc = acc + times_i_pow(coef, k.y_degree());
    }
    return {acc.re, acc.im};
}

}  // namespace

ComplexHalf extract_coefficients(const CubicNonlinearity& p, const SignTriple& I, int sigma_power) {
    ComplexHalf base = base_coefficient(p, I);
    int sum = I[0] + I[1] + I[2];
    HalfExpr weight;
    if (sum == 1 || sum == -1) {
        weight = bracket_pow_dphi(-2 * sigma_power);
    } else {
        if (sigma_power < 0 || sigma_power % 2 != 0)
            throw std::domain_error("a_I for |i1+i2+i3| = 3 needs an even, non-negative sigma_power");
        // <3 dphi>^2 = (1 + 8x^2)/(1 - x^2)
        HalfExpr b3(Poly({Rational(1), Rational(0), Rational(8)}), Poly(), 1);
        weight = b3.pow(static_cast<unsigned>(sigma_power / 2)) * bracket_pow_dphi(-3 * sigma_power);
    }
    return {base.re * weight, base.im * weight};
}

std::complex<double> coefficient_value(const CubicNonlinearity& p, const SignTriple& I,
                                       int sigma_power, double x) {
    ComplexHalf base = base_coefficient(p, I);
    double dphi = -x / std::sqrt(1.0 - x * x);
    int sum = I[0] + I[1] + I[2];
    double w = std::pow(std::sqrt(1.0 + sum * sum * dphi * dphi), sigma_power) *
               std::pow(std::sqrt(1.0 + dphi * dphi), -3 * sigma_power);
    return {base.re.eval(x) * w, base.im.eval(x) * w};
}

HalfExpr characteristic_reweight() { return HalfExpr::phi(); }

std::vector<double> evaluate_nonlinearity(const CubicNonlinearity& p,
                                          const std::array<const std::vector<double>*, 5>& slots) {
    const std::size_t n = slots[0]->size();
    for (auto* s : slots)
        if (s->size() != n) throw std::invalid_argument("slot fields differ in length");
    std::vector<double> out(n, 0.0);
    for (auto& [k, c] : p.terms()) {
        double cd = c.get_d();
        for (std::size_t i = 0; i < n; ++i) {
            double m = cd;
            for (std::size_t s = 0; s < 5; ++s)
                for (unsigned r = 0; r < k.e[s]; ++r) m *= (*slots[s])[i];
            out[i] += m;
        }
    }
    return out;
}

}  // namespace kgflow
