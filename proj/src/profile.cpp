#include "kgflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kgflow {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double a) {
    a = std::remainder(a, 2.0 * kPi);
    return a;
}

/// Least squares via normal equations on a small basis (columns of X).
std::vector<double> least_squares(const std::vector<RVec>& cols, const RVec& y, double& rms) {
    const long m = static_cast<long>(y.size());
    const long k = static_cast<long>(cols.size());
    Eigen::MatrixXd X(m, k);
    Eigen::VectorXd Y(m);
    for (long i = 0; i < m; ++i) {
        Y(i) = y[static_cast<std::size_t>(i)];
        for (long j = 0; j < k; ++j) X(i, j) = cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd c = X.colPivHouseholderQr().solve(Y);
    Eigen::VectorXd r = X * c - Y;
    rms = std::sqrt(r.squaredNorm() / static_cast<double>(m));
    return std::vector<double>(c.data(), c.data() + c.size());
}

}  // namespace

void ProfileSeries::check() const {
    if (stations.empty()) throw InsufficientData("no stations");
    for (double y : stations)
        if (std::abs(y) > 0.9) throw std::invalid_argument("station outside |x| <= 0.9");
    if (values.size() != stations.size()) throw std::invalid_argument("values do not match stations");
    for (auto& v : values)
        if (v.size() != times.size()) throw std::invalid_argument("values do not match times");
    if (!times.empty() && times.front() < 1.0) throw std::invalid_argument("times must start at t >= 1");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must increase strictly");
}

double phi_of(double x) { return std::sqrt(1.0 - x * x); }
double dphi_of(double x) { return -x / std::sqrt(1.0 - x * x); }

CVec profile_field(const KGState& s, const Grid1D& g) {
    CVec ut = to_complex(s.ut);
    CVec inv = apply_multiplier([](double k) { return cplx(1.0 / std::sqrt(1.0 + k * k)); }, ut, g);
    CVec z(g.n);
    for (std::size_t i = 0; i < g.n; ++i) z[i] = s.u[i] - cplx(0.0, 1.0) * inv[i];
    return z;
}

CVec station_values(const KGState& s, const Grid1D& g, const RVec& stations) {
    RVec xs(stations.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = s.t * stations[i];
        if (std::abs(xs[i]) >= g.half_length) throw DomainError("station left the solver cell");
    }
    CVec v = interp_eval(profile_field(s, g), g, xs);
    const double st = std::sqrt(s.t);
    for (auto& z : v) z *= st;
    return v;
}

StationRecorder::StationRecorder(const Grid1D& g, RVec stations) : g_(g) {
    series_.stations = std::move(stations);
    series_.values.assign(series_.stations.size(), {});
}

void StationRecorder::operator()(const KGState& s) {
    CVec v = station_values(s, g_, series_.stations);
    series_.times.push_back(s.t);
    for (std::size_t i = 0; i < v.size(); ++i) series_.values[i].push_back(v[i]);
}

double theta_window(double x, double delta0) {
    if (!(delta0 > 0.0 && delta0 < 0.5)) throw std::invalid_argument("delta0 must lie in (0, 0.5)");
    double over = std::abs(x) - (1.0 - delta0);
    if (over <= 0.0) return 1.0;
    return chi(1.0 + over / (0.5 * delta0));
}

cplx profile_coefficient(const CubicNonlinearity& p, const SignTriple& I, double x) {
    // the w-equation reads (D_t - <D>) w = -P
    return -coefficient_value(p, I, -1, x);
}

CVec normal_form(const CVec& v, const CubicNonlinearity& p, const FrameConfig& frame, double delta0,
                 double gamma_width, const Eigen::MatrixXcd* gamma_op) {
    if (v.size() != frame.points) throw std::invalid_argument("field does not match frame");
    if (!(delta0 > 0.0 && delta0 < 0.5)) throw std::invalid_argument("delta0 must lie in (0, 0.5)");
    if (p.is_zero()) return v;
    const Grid1D fg = frame.grid();
    const double h = frame.h;
    CVec corr(v.size(), 0.0);
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double y = fg.x(j);
        const double th = std::abs(y) < 1.0 ? theta_window(y, delta0) : 0.0;
        if (th == 0.0) continue;
        const double w = th / phi_of(y);
        const cplx c3 = profile_coefficient(p, {1, 1, 1}, y);
        const cplx cm1 = profile_coefficient(p, {1, -1, -1}, y);
        const cplx cm3 = profile_coefficient(p, {-1, -1, -1}, y);
        const cplx z = v[j], zb = std::conj(z);
        corr[j] = -0.5 * h * w * c3 * z * z * z + 0.5 * h * w * cm1 * z * zb * zb + 0.25 * h * w * cm3 * zb * zb * zb;
    }
    CVec lifted = gamma_op ? apply_matrix(*gamma_op, corr) : weyl_apply(lambda_cutoff(gamma_width, h), corr, frame);
    CVec f = v;
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += lifted[j];
    return f;
}

NormalFormSample normal_form_sample(const KGState& s, const Grid1D& g, const CubicNonlinearity& p,
                                    double half_width, std::size_t points, double delta0, double gamma_width) {
    FrameConfig frame{1.0 / s.t, half_width, points};
    CVec vs = to_frame(profile_field(s, g), g, s.t, frame);
    Eigen::MatrixXcd gamma = weyl_matrix(lambda_cutoff(gamma_width, frame.h), frame);
    CVec vsl = apply_matrix(gamma, vs);
    CVec f = normal_form(vsl, p, frame, delta0, gamma_width, &gamma);
    NormalFormSample out{s.t, 0.0, 0.0};
    for (std::size_t j = 0; j < vs.size(); ++j) {
        out.sigma_minus_lambda = std::max(out.sigma_minus_lambda, std::abs(vs[j] - vsl[j]));
        out.f_minus_lambda = std::max(out.f_minus_lambda, std::abs(f[j] - vsl[j]));
    }
    return out;
}

PolarProfile ode_exact_polar(const CVec& f1, const RVec& phi, const RVec& phi1, double t) {
    if (t < 1.0) throw std::invalid_argument("ode_exact needs t >= 1");
    if (phi.size() != f1.size() || phi1.size() != f1.size()) throw std::invalid_argument("size mismatch");
    PolarProfile out;
    for (std::size_t i = 0; i < f1.size(); ++i) {
        const double r = std::abs(f1[i]);
        out.modulus.push_back(r);
        out.phase.push_back(std::arg(f1[i]) + phi[i] * (t - 1.0) + phi1[i] * r * r * std::log(t));
    }
    return out;
}

CVec ode_exact(const CVec& f1, const RVec& phi, const RVec& phi1, double t) {
    PolarProfile p = ode_exact_polar(f1, phi, phi1, t);
    CVec out(f1.size());
    for (std::size_t i = 0; i < f1.size(); ++i) out[i] = std::polar(p.modulus[i], p.phase[i]);
    return out;
}

CVec ode_rk4(const CVec& f1, const RVec& phi, const RVec& phi1, double t_end, double dt) {
    if (t_end < 1.0 || !(dt > 0.0)) throw std::invalid_argument("ode_rk4 needs t_end >= 1 and dt > 0");
    if (phi.size() != f1.size() || phi1.size() != f1.size()) throw std::invalid_argument("size mismatch");
    const auto steps = static_cast<std::size_t>(std::ceil((t_end - 1.0) / dt - 1e-9));
    const double h = steps ? (t_end - 1.0) / static_cast<double>(steps) : 0.0;
    CVec out(f1.size());
    for (std::size_t i = 0; i < f1.size(); ++i) {
        // g = exp(-i phi (t-1)) f obeys dg/dt = i (Phi1 / t) |g|^2 g
        const double c = phi1[i];
        auto rhs = [c](double t, cplx g) { return cplx(0.0, c / t) * std::norm(g) * g; };
        cplx g = f1[i];
        double t = 1.0;
        for (std::size_t n = 0; n < steps; ++n) {
            cplx k1 = rhs(t, g);
            cplx k2 = rhs(t + 0.5 * h, g + 0.5 * h * k1);
            cplx k3 = rhs(t + 0.5 * h, g + 0.5 * h * k2);
            cplx k4 = rhs(t + h, g + h * k3);
            g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = 1.0 + static_cast<double>(n + 1) * h;
        }
        out[i] = g * std::polar(1.0, phi[i] * (t_end - 1.0));
    }
    return out;
}

double asymptotic_u(cplx a, double phi1, double eps, double t, double x) {
    const double y = x / t;
    if (!(std::abs(y) < 1.0)) throw std::domain_error("asymptotic_u needs |x/t| < 1");
    const double ph = t * phi_of(y) + eps * eps * std::norm(a) * phi1 * std::log(t);
    return (eps / std::sqrt(t) * a * std::polar(1.0, ph)).real();
}

RVec unwrap_phase(const RVec& times, const CVec& values, double phi) {
    if (times.size() != values.size()) throw std::invalid_argument("size mismatch");
    RVec out(values.size());
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (values[n] == cplx(0.0)) throw UnwrapError("phase undefined at a zero sample");
        if (n == 0) {
            out[n] = std::arg(values[n]);
            continue;
        }
        const double lin = phi * (times[n] - times[n - 1]);
        if (std::abs(lin) >= kPi) throw UnwrapError("phase step of " + std::to_string(lin) + " rad is >= pi");
        const double raw = std::arg(values[n] * std::conj(values[n - 1]));
        out[n] = out[n - 1] + lin + wrap(raw - lin);
    }
    return out;
}

FitResult fit_modified_scattering(const ProfileSeries& series, double eps, const RVec& phi1,
                                  const FitOptions& opt) {
    series.check();
    if (!phi1.empty() && phi1.size() != series.stations.size())
        throw std::invalid_argument("phi1 does not match stations");
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (series.times.empty()) throw InsufficientData("empty series");
    const double t_last = series.times.back();
    const double t_min = opt.t_min > 0.0 ? opt.t_min : t_last / 8.0;
    std::vector<std::size_t> idx;
    for (std::size_t n = 0; n < series.times.size(); ++n)
        if (series.times[n] >= t_min) idx.push_back(n);
    if (idx.size() < opt.min_samples)
        throw InsufficientData("only " + std::to_string(idx.size()) + " samples in the fit window");

    FitResult res;
    for (std::size_t s = 0; s < series.stations.size(); ++s) {
        const double x = series.stations[s];
        const double ph = phi_of(x);
        RVec unwrapped = unwrap_phase(series.times, series.values[s], ph);
        RVec tt, psi, raw;
        double amp = 0.0;
        std::size_t amp_count = 0;
        for (std::size_t n : idx) {
            const double t = series.times[n];
            tt.push_back(t);
            psi.push_back(unwrapped[n] - t * ph);
            raw.push_back(unwrapped[n]);
            if (t >= t_last / 10.0) {
                amp += std::abs(series.values[s][n]);
                ++amp_count;
            }
        }
        std::vector<RVec> cols(2);
        for (double t : tt) {
            cols[0].push_back(1.0);
            cols[1].push_back(std::log(t));
        }
        if (opt.nuisance) {
            cols.emplace_back();
            cols.emplace_back();
            for (double t : tt) {
                cols[2].push_back(1.0 / t);
                cols[3].push_back(1.0 / (t * t));
            }
        }
        double rms = 0.0;
        std::vector<double> c = least_squares(cols, psi, rms);

        std::vector<RVec> lin_cols = cols;
        lin_cols.push_back(tt);
        double lin_rms = 0.0;
        std::vector<double> lc = least_squares(lin_cols, raw, lin_rms);

        StationFit fit{};
        fit.x = x;
        fit.amplitude = amp / static_cast<double>(std::max<std::size_t>(amp_count, 1)) / eps;
        fit.phase_slope = c[1];
        fit.linear_rate_error = lc.back() - ph;
        fit.residual_rms = rms;
        if (!phi1.empty()) {
            fit.predicted_slope = eps * eps * fit.amplitude * fit.amplitude * phi1[s];
            fit.relative_error = fit.predicted_slope != 0.0
                                     ? std::abs(fit.phase_slope - fit.predicted_slope) / std::abs(fit.predicted_slope)
                                     : std::abs(fit.phase_slope);
        }
        res.stations.push_back(fit);
    }
    return res;
}

}  // namespace kgflow
