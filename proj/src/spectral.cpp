#include "kgflow/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kgflow {

namespace {

// FFTW's planner is not re-entrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* fc(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

double smooth_step(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

Grid1D::Grid1D(std::size_t n_points, double L) : n(n_points), half_length(L) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("grid size must be a power of two");
    if (!(L > 0.0)) throw std::invalid_argument("grid half-length must be positive");
}

double Grid1D::k(std::size_t m) const {
    auto mm = static_cast<long>(m);
    auto nn = static_cast<long>(n);
    long idx = mm < nn / 2 ? mm : mm - nn;
    return std::numbers::pi * static_cast<double>(idx) / half_length;
}

RVec Grid1D::xs() const {
    RVec v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = x(j);
    return v;
}

RVec Grid1D::ks() const {
    RVec v(n);
    for (std::size_t m = 0; m < n; ++m) v[m] = k(m);
    return v;
}

struct Fft::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Fft::Fft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
    std::lock_guard lock(planner_mutex());
    CVec a(n), b(n);
    int ni = static_cast<int>(n);
    impl_->fwd = fftw_plan_dft_1d(ni, fc(a.data()), fc(b.data()), FFTW_FORWARD, kPlanFlags);
    impl_->bwd = fftw_plan_dft_1d(ni, fc(a.data()), fc(b.data()), FFTW_BACKWARD, kPlanFlags);
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(impl_->fwd);
    fftw_destroy_plan(impl_->bwd);
}

void Fft::forward(const cplx* in, cplx* out) const { fftw_execute_dft(impl_->fwd, fc(in), fc(out)); }

void Fft::inverse(const cplx* in, cplx* out) const {
    fftw_execute_dft(impl_->bwd, fc(in), fc(out));
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] *= s;
}

CVec Fft::forward(const CVec& in) const {
    CVec out(n_);
    forward(in.data(), out.data());
    return out;
}

CVec Fft::inverse(const CVec& in) const {
    CVec out(n_);
    inverse(in.data(), out.data());
    return out;
}

struct RealFft::Impl {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    mutable CVec scratch;
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
    std::lock_guard lock(planner_mutex());
    RVec a(n);
    CVec b(n / 2 + 1);
    int ni = static_cast<int>(n);
    impl_->r2c = fftw_plan_dft_r2c_1d(ni, a.data(), fc(b.data()), kPlanFlags);
    impl_->c2r = fftw_plan_dft_c2r_1d(ni, fc(b.data()), a.data(), kPlanFlags);
    impl_->scratch.resize(n / 2 + 1);
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(impl_->r2c);
    fftw_destroy_plan(impl_->c2r);
}

void RealFft::forward(const double* in, cplx* out) const {
    fftw_execute_dft_r2c(impl_->r2c, const_cast<double*>(in), fc(out));
}

void RealFft::inverse(const cplx* in, double* out) const {
    // c2r destroys its input, so work on a copy.
    std::copy(in, in + spectrum_size(), impl_->scratch.begin());
    fftw_execute_dft_c2r(impl_->c2r, fc(impl_->scratch.data()), out);
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] *= s;
}

CVec to_complex(const RVec& f) { return CVec(f.begin(), f.end()); }

RVec real_part(const CVec& f) {
    RVec r(f.size());
    std::transform(f.begin(), f.end(), r.begin(), [](cplx z) { return z.real(); });
    return r;
}

CVec apply_multiplier(const Multiplier& m, const CVec& f, const Grid1D& g) {
    if (f.size() != g.n) throw std::invalid_argument("field does not match grid");
    Fft fft(g.n);
    CVec F = fft.forward(f);
    for (std::size_t i = 0; i < g.n; ++i) F[i] *= m(g.k(i));
    return fft.inverse(F);
}

RVec apply_multiplier(const Multiplier& m, const RVec& f, const Grid1D& g) {
    return real_part(apply_multiplier(m, to_complex(f), g));
}

CVec interp_eval(const CVec& f, const Grid1D& g, const RVec& points) {
    if (f.size() != g.n) throw std::invalid_argument("field does not match grid");
    Fft fft(g.n);
    CVec F = fft.forward(f);
    const double inv_n = 1.0 / static_cast<double>(g.n);
    const long half = static_cast<long>(g.n / 2);
    CVec out(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        const double y = points[p] - g.x(0);
        const double theta = std::numbers::pi * y / g.half_length;
        // modes m' in [-n/2, n/2): start at exp(-i n/2 theta) and rotate by exp(i theta)
        cplx acc = 0.0;
        for (long mm = -half; mm < half; ++mm) {
            std::size_t slot = static_cast<std::size_t>(mm < 0 ? mm + static_cast<long>(g.n) : mm);
            acc += F[slot] * std::polar(1.0, theta * static_cast<double>(mm));
        }
        out[p] = acc * inv_n;
    }
    return out;
}

double norm_l2(const CVec& f, const Grid1D& g) {
    double s = 0.0;
    for (auto z : f) s += std::norm(z);
    return std::sqrt(s * g.dx());
}

double norm_linf(const CVec& f) {
    double m = 0.0;
    for (auto z : f) m = std::max(m, std::abs(z));
    return m;
}

double norm_hs(const CVec& f, const Grid1D& g, double s, double h) {
    Fft fft(g.n);
    CVec F = fft.forward(f);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        double hk = h * g.k(i);
        acc += std::pow(1.0 + hk * hk, s) * std::norm(F[i]);
    }
    return std::sqrt(acc * g.dx() / static_cast<double>(g.n));
}

double norm_w(const CVec& f, const Grid1D& g, double rho, double h) {
    auto m = [rho, h](double k) { return cplx(std::pow(1.0 + h * h * k * k, 0.5 * rho), 0.0); };
    return norm_linf(apply_multiplier(m, f, g));
}

double chi(double xi) {
    double a = std::abs(xi);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    double p = smooth_step(2.0 - a), q = smooth_step(a - 1.0);
    return p / (p + q);
}

double bump(double y, double width) { return chi(2.0 * y / width); }

HighCut high_cut(const CVec& f, const Grid1D& g, double h, double beta, double s, double s_target) {
    if (!(s > s_target)) throw std::invalid_argument("high_cut needs s > s_target");
    Fft fft(g.n);
    CVec F = fft.forward(f);
    CVec lowF(g.n), highF(g.n);
    const double scale = std::pow(h, beta) * h;
    for (std::size_t i = 0; i < g.n; ++i) {
        double c = chi(scale * g.k(i));
        lowF[i] = c * F[i];
        highF[i] = F[i] - lowF[i];
    }
    HighCut r;
    r.low = fft.inverse(lowF);
    r.high = fft.inverse(highF);
    double denom = norm_hs(f, g, s, h);
    r.ratio = denom > 0.0 ? norm_hs(r.high, g, s_target, h) / denom : 0.0;
    r.bound = std::pow(h, beta * (s - s_target));
    return r;
}

double loglog_slope(const RVec& x, const RVec& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs >= 2 pairs");
    double mx = 0, my = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace kgflow
