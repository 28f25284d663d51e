#pragma once

#include "kgflow/nonlinearity.hpp"
#include "kgflow/semiclassical.hpp"
#include "kgflow/solver.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace kgflow {

struct UnwrapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// <hD>^{-1} v sampled at fixed frame stations y (|y| <= 0.9) over increasing times.
struct ProfileSeries {
    RVec stations;
    RVec times;
    std::vector<CVec> values;    ///< values[station][sample]
    std::vector<CVec> f_values;  ///< optional normal-form values, same layout

    void check() const;
};

double phi_of(double x);   ///< sqrt(1 - x^2)
double dphi_of(double x);  ///< -x / sqrt(1 - x^2)

/// u - i <D>^{-1} u_t on the solver grid, i.e. <D>^{-1} (D_t + <D>) u.
CVec profile_field(const KGState& s, const Grid1D& g);

/// sqrt(t) (u - i <D>^{-1} u_t)(t y) at each station y.
CVec station_values(const KGState& s, const Grid1D& g, const RVec& stations);

/// Observer that appends station samples to a series.
class StationRecorder {
public:
    StationRecorder(const Grid1D& g, RVec stations);
    void operator()(const KGState& s);
    const ProfileSeries& series() const { return series_; }

private:
    Grid1D g_;
    ProfileSeries series_;
};

/// theta window: 1 on |x| <= 1 - delta0, smooth, 0 on |x| >= 1 - delta0/2.
double theta_window(double x, double delta0);

/// f = v + Op^w(Gamma)[-(h/2)(theta/phi) Phi_3 v^3 + (h/2)(theta/phi) Phi_{-1}|v|^2 conj(v)
///                      + (h/4)(theta/phi) Phi_{-3} conj(v)^3].
/// Phi_I are the right-hand-side coefficients of the profile equation for Sigma = <xi>^{-1}.
/// A prebuilt Op^w(Gamma) matrix may be passed to avoid rebuilding it.
CVec normal_form(const CVec& v, const CubicNonlinearity& p, const FrameConfig& frame, double delta0,
                 double gamma_width = 1.0, const Eigen::MatrixXcd* gamma_op = nullptr);

/// Right-hand-side coefficient of v_I in the equation for v^Sigma with Sigma = <xi>^{-1}.
cplx profile_coefficient(const CubicNonlinearity& p, const SignTriple& I, double x);

struct NormalFormSample {
    double t;
    double sigma_minus_lambda;  ///< |v^Sigma - v^Sigma_Lambda|_inf
    double f_minus_lambda;      ///< |f - v^Sigma_Lambda|_inf
};

NormalFormSample normal_form_sample(const KGState& s, const Grid1D& g, const CubicNonlinearity& p,
                                    double half_width, std::size_t points, double delta0, double gamma_width);

struct PolarProfile {
    RVec modulus;
    RVec phase;
};

/// Closed form in polar variables: the modulus is |f1| and the phase advances by
/// phi (t-1) + Phi1 |f1|^2 log t.
PolarProfile ode_exact_polar(const CVec& f1, const RVec& phi, const RVec& phi1, double t);

/// Closed-form profile with theta = 1: f1 exp(i phi (t-1) + i Phi1 |f1|^2 log t).
CVec ode_exact(const CVec& f1, const RVec& phi, const RVec& phi1, double t);

/// Lawson RK4 for D_t f = phi f + (Phi1 / t) |f|^2 f from t = 1; the linear phase is exact.
CVec ode_rk4(const CVec& f1, const RVec& phi, const RVec& phi1, double t_end, double dt);

/// Re[(eps/sqrt t) a(x/t) exp(i t phi(x/t) + i eps^2 |a|^2 Phi1(x/t) log t)].
double asymptotic_u(cplx a, double phi1, double eps, double t, double x);

struct FitOptions {
    double t_min = 0.0;        ///< 0 selects last time / 8
    bool nuisance = true;      ///< add 1/t and 1/t^2 regressors
    std::size_t min_samples = 10;
};

struct StationFit {
    double x;
    double amplitude;        ///< mean |value| / eps over the last decade
    double phase_slope;      ///< coefficient of log t
    double linear_rate_error;  ///< fitted rate of the raw phase minus phi(x)
    double predicted_slope;  ///< eps^2 A^2 Phi1(x)
    double relative_error;
    double residual_rms;
};

struct FitResult {
    std::vector<StationFit> stations;
};

/// Per station: unwrap the phase, subtract t phi(x), regress on log t (plus nuisance terms).
/// phi1 may be empty, in which case predicted_slope and relative_error are 0.
FitResult fit_modified_scattering(const ProfileSeries& series, double eps, const RVec& phi1,
                                  const FitOptions& opt = {});

/// Unwrapped phase of one station track using the known linear rate phi.
RVec unwrap_phase(const RVec& times, const CVec& values, double phi);

}  // namespace kgflow
