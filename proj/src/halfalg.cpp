#include "kgflow/halfalg.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgflow {

namespace {

mpz_class pow10(long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
    return r;
}

}  // namespace

Rational rational_from_string(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational q(mpz_class(text.substr(0, slash)), mpz_class(text.substr(slash + 1)));
        if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
        q.canonicalize();
        return q;
    }
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
    std::string digits;
    long scale = 0;
    bool seen_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char ch = text[i];
        if (ch >= '0' && ch <= '9') {
            digits += ch;
            seen_digit = true;
            if (seen_dot) --scale;
        } else if (ch == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw std::invalid_argument("not a decimal literal: " + text);
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        long e = 0;
        const char* first = text.data() + i + 1;
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), e);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw std::invalid_argument("bad exponent: " + text);
        scale += e;
        i = text.size();
    }
    if (i != text.size()) throw std::invalid_argument("trailing characters: " + text);
    Rational q{mpz_class(digits)};
    if (scale > 0) q *= Rational(pow10(scale));
    if (scale < 0) q /= Rational(pow10(-scale));
    q.canonicalize();
    return neg ? Rational(-q) : q;
}

Rational rational_from_double(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite coefficient");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw std::invalid_argument("to_chars failed");
    return rational_from_string(std::string(buf, ptr));
}

// ---------------------------------------------------------------- Poly

Poly::Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) {
    for (auto& q : c_) q.canonicalize();
    trim();
}

Poly Poly::constant(const Rational& c) { return Poly({c}); }

Poly Poly::monomial(unsigned degree, const Rational& c) {
    std::vector<Rational> v(degree + 1, Rational(0));
    v[degree] = c;
    return Poly(std::move(v));
}

Poly Poly::one_minus_x2() { return Poly({Rational(1), Rational(0), Rational(-1)}); }

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational Poly::coeff(unsigned i) const { return i < c_.size() ? c_[i] : Rational(0); }

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& q : r.c_) q = -q;
    return r;
}

Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) v[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) v[i] += b.c_[i];
    return Poly(std::move(v));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> v(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(v));
}

Poly operator*(const Rational& s, const Poly& a) {
    if (s == 0) return {};
    Poly r = a;
    for (auto& q : r.c_) q *= s;
    return r;
}

bool Poly::divisible_by_one_minus_x2() const {
    return eval(Rational(1)) == 0 && eval(Rational(-1)) == 0;
}

Poly Poly::div_one_minus_x2() const {
    if (!divisible_by_one_minus_x2()) throw std::logic_error("not divisible by 1-x^2");
    if (is_zero()) return {};
    // p = (1 - x^2) q  =>  q_{i} = -p_{i+2} + q_{i+2}, from the top down.
    int n = degree();
    std::vector<Rational> q(static_cast<std::size_t>(n - 1), Rational(0));
    for (int i = n - 2; i >= 0; --i) {
        Rational above = (i + 2 <= n - 2) ? q[static_cast<std::size_t>(i + 2)] : Rational(0);
        q[static_cast<std::size_t>(i)] = above - c_[static_cast<std::size_t>(i + 2)];
    }
    return Poly(std::move(q));
}

double Poly::eval(double x) const {
    double r = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + it->get_d();
    return r;
}

Rational Poly::eval(const Rational& x) const {
    Rational r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
}

std::string Poly::str(const char* var) const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = c_.size(); i-- > 0;) {
        const Rational& q = c_[i];
        if (q == 0) continue;
        Rational mag = abs(q);
        os << (q < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        if (i == 0 || mag != 1) os << mag.get_str() << (i ? "*" : "");
        if (i >= 1) os << var;
        if (i >= 2) os << "^" << i;
        first = false;
    }
    return os.str();
}

// ------------------------------------------------------------ HalfExpr

HalfExpr::HalfExpr(Poly a, Poly b, unsigned k) : a_(std::move(a)), b_(std::move(b)), k_(k) {
    canonicalize();
}

HalfExpr::HalfExpr(const Rational& c) : a_(Poly::constant(c)) {}

void HalfExpr::canonicalize() {
    if (a_.is_zero() && b_.is_zero()) {
        k_ = 0;
        return;
    }
    while (k_ > 0 && a_.divisible_by_one_minus_x2() && b_.divisible_by_one_minus_x2()) {
        a_ = a_.div_one_minus_x2();
        b_ = b_.div_one_minus_x2();
        --k_;
    }
}

HalfExpr HalfExpr::canonical() const { return HalfExpr(a_, b_, k_); }

HalfExpr HalfExpr::x() { return HalfExpr(Poly::monomial(1), Poly(), 0); }

HalfExpr HalfExpr::sqrt_pow(int m) {
    // (1-x^2)^{m/2}: even m -> power of (1-x^2); odd m -> s times such a power.
    int half = (m >= 0) ? m / 2 : -((-m + 1) / 2);
    bool odd = (m % 2) != 0;
    Poly unit = Poly::constant(1);
    Poly num = unit;
    unsigned k = 0;
    if (half >= 0) {
        for (int i = 0; i < half; ++i) num = num * Poly::one_minus_x2();
    } else {
        k = static_cast<unsigned>(-half);
    }
    return odd ? HalfExpr(Poly(), num, k) : HalfExpr(num, Poly(), k);
}

HalfExpr HalfExpr::omega0() { return sqrt_pow(-1); }
HalfExpr HalfExpr::omega1() { return -(x() * sqrt_pow(-1)); }
HalfExpr HalfExpr::phi() { return sqrt_pow(1); }

HalfExpr HalfExpr::operator-() const { return HalfExpr(-a_, -b_, k_); }

HalfExpr operator+(const HalfExpr& a, const HalfExpr& b) {
    unsigned k = std::max(a.k_, b.k_);
    auto lift = [k](const HalfExpr& e, Poly& pa, Poly& pb) {
        pa = e.a_;
        pb = e.b_;
        for (unsigned i = e.k_; i < k; ++i) {
            pa = pa * Poly::one_minus_x2();
            pb = pb * Poly::one_minus_x2();
        }
    };
    Poly aa, ab, ba, bb;
    lift(a, aa, ab);
    lift(b, ba, bb);
    return HalfExpr(aa + ba, ab + bb, k);
}

HalfExpr operator-(const HalfExpr& a, const HalfExpr& b) { return a + (-b); }

HalfExpr operator*(const HalfExpr& a, const HalfExpr& b) {
    // (A1 + s B1)(A2 + s B2) = A1 A2 + (1-x^2) B1 B2 + s (A1 B2 + A2 B1)
    Poly even = a.a_ * b.a_ + Poly::one_minus_x2() * (a.b_ * b.b_);
    Poly odd = a.a_ * b.b_ + a.b_ * b.a_;
    return HalfExpr(std::move(even), std::move(odd), a.k_ + b.k_);
}

bool operator==(const HalfExpr& a, const HalfExpr& b) {
    return a.k_ == b.k_ && a.a_ == b.a_ && a.b_ == b.b_;
}

HalfExpr HalfExpr::pow(unsigned n) const {
    HalfExpr r(Rational(1));
    for (unsigned i = 0; i < n; ++i) r = r * *this;
    return r;
}

double HalfExpr::eval(double x) const {
    if (!(std::abs(x) < 1.0)) throw std::domain_error("HalfExpr evaluated outside |x| < 1");
    double w = 1.0 - x * x;
    double val = a_.eval(x) + std::sqrt(w) * b_.eval(x);
    return val / std::pow(w, static_cast<double>(k_));
}

std::string HalfExpr::str() const {
    if (is_zero()) return "0";
    std::string num;
    if (!a_.is_zero()) num = "(" + a_.str() + ")";
    if (!b_.is_zero()) {
        if (!num.empty()) num += " + ";
        num += "(" + b_.str() + ")*(1-x^2)^(1/2)";
    }
    if (k_ == 0) return num;
    return "[" + num + "]/(1-x^2)^" + std::to_string(k_);
}

HalfExpr he_add(const HalfExpr& a, const HalfExpr& b) { return a + b; }
HalfExpr he_mul(const HalfExpr& a, const HalfExpr& b) { return a * b; }
double he_eval(const HalfExpr& e, double x) { return e.eval(x); }
bool he_is_zero(const HalfExpr& e) { return e.is_zero(); }

}  // namespace kgflow
