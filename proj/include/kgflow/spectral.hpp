#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace kgflow {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Periodic grid on [-L, L) with n (power of two) points.
struct Grid1D {
    std::size_t n = 0;
    double half_length = 0.0;

    Grid1D() = default;
    Grid1D(std::size_t n_points, double L);

    double dx() const { return 2.0 * half_length / static_cast<double>(n); }
    double x(std::size_t j) const { return -half_length + static_cast<double>(j) * dx(); }
    /// Wavenumber of FFT slot m, i.e. pi*m'/L with m' in [-n/2, n/2).
    double k(std::size_t m) const;
    RVec xs() const;
    RVec ks() const;
};

/// Unnormalized forward / normalized inverse complex DFT of fixed size (FFTW, estimate plans).
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }
    void forward(const cplx* in, cplx* out) const;
    void inverse(const cplx* in, cplx* out) const;  ///< includes the 1/n factor
    CVec forward(const CVec& in) const;
    CVec inverse(const CVec& in) const;

private:
    struct Impl;
    std::size_t n_;
    std::unique_ptr<Impl> impl_;
};

/// Real-to-half-complex transform pair of fixed size.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t spectrum_size() const { return n_ / 2 + 1; }
    void forward(const double* in, cplx* out) const;   ///< unnormalized
    void inverse(const cplx* in, double* out) const;   ///< includes 1/n, input preserved

private:
    struct Impl;
    std::size_t n_;
    std::unique_ptr<Impl> impl_;
};

using Multiplier = std::function<cplx(double)>;

CVec to_complex(const RVec& f);
RVec real_part(const CVec& f);

CVec apply_multiplier(const Multiplier& m, const CVec& f, const Grid1D& g);
/// Real part of the multiplier image; the Nyquist contribution of odd symbols drops out.
RVec apply_multiplier(const Multiplier& m, const RVec& f, const Grid1D& g);

/// Truncated Fourier series of f evaluated at arbitrary points.
CVec interp_eval(const CVec& f, const Grid1D& g, const RVec& points);

double norm_l2(const CVec& f, const Grid1D& g);
double norm_linf(const CVec& f);
double norm_hs(const CVec& f, const Grid1D& g, double s, double h);
/// sup-norm of <hD>^rho f.
double norm_w(const CVec& f, const Grid1D& g, double rho, double h);

/// Smooth plateau: 1 on |xi| <= 1, 0 on |xi| >= 2.
double chi(double xi);
/// Smooth bump: 1 on |y| <= width/2, 0 on |y| >= width.
double bump(double y, double width);

struct HighCut {
    CVec low;
    CVec high;
    double ratio = 0.0;  ///< |high|_{H^{s'}_h} / |f|_{H^s_h}
    double bound = 0.0;  ///< h^{beta (s - s')}
    bool holds() const { return ratio <= bound * (1.0 + 1e-12); }
};

HighCut high_cut(const CVec& f, const Grid1D& g, double h, double beta, double s, double s_target);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const RVec& x, const RVec& y);

}  // namespace kgflow
