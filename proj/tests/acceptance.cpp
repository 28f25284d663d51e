// Acceptance suite: one pass/fail line per primary criterion.
// Usage: acceptance [criterion numbers...] [--known-deviation N]...

#include "corpus.hpp"
#include "kgflow/nonlinearity.hpp"
#include "kgflow/profile.hpp"
#include "kgflow/semiclassical.hpp"
#include "kgflow/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>

using namespace kgflow;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome c1_null_classifier() {
    auto t0 = std::chrono::steady_clock::now();
    NullReport a = check_null(CubicNonlinearity::u_cubed());
    NullReport b = check_null(CubicNonlinearity::ut_cubed());
    NullReport c = check_null(CubicNonlinearity::u2_uxx());
    double dt = seconds_since(t0);
    bool ok_a = a.verdict && a.phi == HalfExpr(0) && a.q_coeffs.empty();
    bool ok_b = !b.verdict && b.q_coeffs == std::vector<Rational>{Rational(3)};
    bool ok_c = c.verdict;
    return {ok_a && ok_b && ok_c && dt < 1.0,
            fmt("u^3 null=%d, (ut)^3 null=%d Q=%s, u^2 uxx null=%d, %.3f s", a.verdict, b.verdict,
                b.q_coeffs.empty() ? "[]" : ("[" + b.q_coeffs[0].get_str() + (b.q_coeffs.size() > 1 ? ",..." : "") + "]").c_str(),
                c.verdict, dt)};
}

Outcome c2_weyl_identity() {
    auto t0 = std::chrono::steady_clock::now();
    const double h = 1.0 / 64.0;
    FrameConfig frame{h, 1.2, 1024};
    Grid1D g = frame.grid();
    Eigen::MatrixXcd K =
        weyl_matrix(SymbolDescriptor::pointwise([](double x, double xi, double) { return cplx(x * xi); }), frame);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> centre(-0.3, 0.3);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        CVec v(g.n, 0.0);
        for (int b = 0; b < 6; ++b) {
            double c = centre(rng), k = 10.0 * nd(rng);
            cplx a(nd(rng), nd(rng));
            for (std::size_t j = 0; j < g.n; ++j) {
                double y = g.x(j) - c;
                v[j] += a * std::exp(-y * y / (2.0 * 0.05 * 0.05)) * std::polar(1.0, k * g.x(j));
            }
        }
        CVec lhs = apply_matrix(K, v);
        CVec dv = apply_multiplier([h](double k) { return cplx(h * k); }, v, g);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            cplx rhs = h / cplx(0.0, 2.0) * v[j] + g.x(j) * dv[j];
            num += std::norm(lhs[j] - rhs);
            den += std::norm(rhs);
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    double dt = seconds_since(t0);
    return {worst <= 1e-10 && dt < 10.0, fmt("max relative error %.2e over 100 fields, M=1024, %.2f s", worst, dt)};
}

Outcome c3_moyal_orders() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> hs;
    for (int e = 4; e <= 9; ++e) hs.push_back(std::ldexp(1.0, -e));
    MoyalBench b = moyal_error(gaussian_symbol(0.1, 0.1, 0.3), gaussian_symbol(-0.1, -0.1, 0.3), {0, 1, 2}, hs, 3.0);
    bool ok = true;
    for (unsigned k = 0; k < 3; ++k) ok = ok && std::abs(b.slopes[k] - (k + 1.0)) <= 0.3;
    bool converged = std::all_of(b.rows.begin(), b.rows.end(), [](auto& r) { return r.converged; });
    return {ok, fmt("slopes k=0: %.3f, k=1: %.3f, k=2: %.3f (bands k+1 +- 0.3), power iteration converged=%d, %.0f s",
                    b.slopes[0], b.slopes[1], b.slopes[2], converged, seconds_since(t0))};
}

Outcome c4_continuity_exponent() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> hs;
    for (int e = 4; e <= 9; ++e) hs.push_back(std::ldexp(1.0, -e));
    OpnormProbe p = opnorm_probe(lambda_localized_family(1.0, 0.8), hs, NormTarget::l2_to_linf, 1.2, 2048);
    return {p.exponent >= -0.35 && p.exponent <= -0.15,
            fmt("L2->Linf exponent %.4f (band [-0.35, -0.15]), %.0f s", p.exponent, seconds_since(t0))};
}

Outcome c5_linear_solver() {
    auto t0 = std::chrono::steady_clock::now();
    Grid1D g(4096, 200.0);
    DataSpec spec;
    spec.velocity_weight = 0.5;
    InitialData init = make_initial(spec, 1.0, g, 2.0);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 100.0;
    RunResult r = run(cfg, g, CubicNonlinearity{}, init.state, {100.0});
    KGState exact = linear_propagate(init.state, g, 99.0);
    double err = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) err = std::max(err, std::abs(r.final_state.u[j] - exact.u[j]));
    return {err <= 1e-8, fmt("L-inf error %.2e at t=100 (N=4096, dt=0.05), %.1f s", err, seconds_since(t0))};
}

/// The long u^3 run shared by criteria 6, 7 and 9, plus its linear control.
struct LongRuns {
    static constexpr double eps = 0.05;
    Grid1D g{16384, 500.0};
    std::vector<NormRecord> norms;
    ProfileSeries nonlinear, linear;
    std::map<int, KGState> snapshots;
    double seconds = 0.0;

    LongRuns() {
        auto t0 = std::chrono::steady_clock::now();
        InitialData init = make_initial(DataSpec{}, eps, g, 2.0);
        SolverConfig cfg;
        cfg.t_end = 400.0;
        cfg.epsilon = eps;
        auto times = sample_schedule(cfg.t_end, 0.5);
        for (int nl = 1; nl >= 0; --nl) {
            CubicNonlinearity p = nl ? CubicNonlinearity::u_cubed() : CubicNonlinearity{};
            StationRecorder rec(g, {0.0, 0.5});
            RunResult r = run(cfg, g, p, init.state, times, [&](const KGState& s) {
                rec(s);
                for (int target : {64, 128, 256})
                    if (nl && std::abs(s.t - target) < 1e-9) snapshots[target] = s;
            });
            if (nl) {
                norms = r.norms;
                nonlinear = rec.series();
            } else {
                linear = rec.series();
            }
        }
        seconds = seconds_since(t0);
    }
};

LongRuns& long_runs() {
    static LongRuns r;
    return r;
}

Outcome c6_decay() {
    LongRuns& L = long_runs();
    RVec ts, linf;
    double mx = 0.0, mn = 1e300;
    for (auto& n : L.norms)
        if (n.t >= 50.0 && n.t <= 400.0) {
            ts.push_back(n.t);
            linf.push_back(n.linf_u);
            mx = std::max(mx, n.sqrt_t_linf);
            mn = std::min(mn, n.sqrt_t_linf);
        }
    double slope = loglog_slope(ts, linf);
    double ratio = mx / mn;
    return {slope >= -0.55 && slope <= -0.45 && ratio <= 2.0,
            fmt("decay slope %.4f (band [-0.55, -0.45]), sqrt(t)|u|_inf max/min %.4f (<= 2), runs %.0f s", slope,
                ratio, L.seconds)};
}

Outcome c7_modified_scattering() {
    LongRuns& L = long_runs();
    const double phi1_0 = phi_one(CubicNonlinearity::u_cubed()).eval(0.0);
    FitResult nl = fit_modified_scattering(L.nonlinear, LongRuns::eps, {phi1_0, phi_one(CubicNonlinearity::u_cubed()).eval(0.5)});
    FitResult lin = fit_modified_scattering(L.linear, LongRuns::eps, {});
    const StationFit& s = nl.stations[0];
    const double control = lin.stations[0].phase_slope;
    const double measured = s.phase_slope - control;
    bool ok_main = s.relative_error <= 0.25;
    bool ok_control = std::abs(control) <= 1e-4;
    const double magnitude = std::abs(std::abs(s.phase_slope) - std::abs(s.predicted_slope)) / std::abs(s.predicted_slope);
    return {ok_main && ok_control,
            fmt("x=0 slope %.4e vs predicted eps^2 A^2 Phi1(0) = %.4e (A=%.5f): rel err %.3f (<= 0.25); "
                "linear control slope %.2e (|.| <= 1e-4); magnitude mismatch %.3f, slope minus control %.4e",
                s.phase_slope, s.predicted_slope, s.amplitude, s.relative_error, control, magnitude, measured)};
}

Outcome c8_profile_ode() {
    CVec f1;
    RVec phi, phi1;
    HalfExpr p1 = phi_one(CubicNonlinearity::u_cubed());
    for (double y : {-0.8, -0.4, 0.0, 0.3, 0.7}) {
        f1.push_back(std::polar(0.3 + 0.2 * y * y, 1.0 + y));
        phi.push_back(phi_of(y));
        phi1.push_back(p1.eval(y));
    }
    CVec exact = ode_exact(f1, phi, phi1, 1000.0);
    CVec rk = ode_rk4(f1, phi, phi1, 1000.0, 0.1);
    PolarProfile polar = ode_exact_polar(f1, phi, phi1, 1000.0);
    double err = 0.0, drift_exact = 0.0, drift_rk = 0.0;
    for (std::size_t i = 0; i < f1.size(); ++i) {
        err = std::max(err, std::abs(exact[i] - rk[i]));
        drift_exact = std::max(drift_exact, std::abs(polar.modulus[i] - std::abs(f1[i])));
        drift_rk = std::max(drift_rk, std::abs(std::abs(rk[i]) - std::abs(f1[i])));
    }
    return {err <= 1e-6 && drift_exact == 0.0 && drift_rk <= 1e-6,
            fmt("RK4 vs closed form %.2e (<= 1e-6), modulus drift closed form %.1e (== 0), RK4 %.2e (<= 1e-6)", err,
                drift_exact, drift_rk)};
}

Outcome c9_normal_form() {
    LongRuns& L = long_runs();
    RVec ts, a, b;
    for (int t : {64, 128, 256}) {
        NormalFormSample s =
            normal_form_sample(L.snapshots.at(t), L.g, CubicNonlinearity::u_cubed(), 1.2, 4096, 0.05, 1.0);
        ts.push_back(t);
        a.push_back(s.f_minus_lambda);
        b.push_back(s.sigma_minus_lambda);
    }
    bool strict = a[1] < a[0] && a[2] < a[1];
    double ef = loglog_slope(ts, a), es = loglog_slope(ts, b);
    return {strict && ef <= es - 0.2,
            fmt("|f - vSL|: %.3e %.3e %.3e (exponent %.3f); |vS - vSL|: %.3e %.3e %.3e (exponent %.3f); gap %.3f "
                "(>= 0.2)",
                a[0], a[1], a[2], ef, b[0], b[1], b[2], es, es - ef)};
}

Outcome c10_coefficients() {
    int agree = 0, reweight_ok = 0, null_count = 0;
    auto entries = corpus::twenty();
    for (auto& e : entries) {
        NullReport r = check_null(e.p);
        ComplexHalf c = extract_coefficients(e.p, {1, 1, -1}, 0);
        if (c.im.is_zero() == r.verdict) ++agree;
        if (r.verdict) {
            ++null_count;
            if (c.re * characteristic_reweight() == phi_one(e.p)) ++reweight_ok;
        }
    }
    const int n = static_cast<int>(entries.size());
    return {agree == n && reweight_ok == null_count,
            fmt("Im == 0 <=> null on %d/%d, reweighted Re == phi_one on %d/%d null members", agree, n, reweight_ok,
                null_count)};
}

const std::map<int, std::pair<const char*, Outcome (*)()>> kCriteria = {
    {1, {"null classifier", c1_null_classifier}},
    {2, {"Weyl identity", c2_weyl_identity}},
    {3, {"Moyal remainder order", c3_moyal_orders}},
    {4, {"continuity exponent", c4_continuity_exponent}},
    {5, {"linear solver", c5_linear_solver}},
    {6, {"decay", c6_decay}},
    {7, {"modified scattering", c7_modified_scattering}},
    {8, {"profile ODE", c8_profile_ode}},
    {9, {"normal-form improvement", c9_normal_form}},
    {10, {"coefficient cross-validation", c10_coefficients}},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected, known;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--known-deviation") == 0 && i + 1 < argc) {
            known.insert(std::atoi(argv[++i]));
        } else {
            selected.insert(std::atoi(argv[i]));
        }
    }
    if (selected.empty())
        for (auto& [n, _] : kCriteria) selected.insert(n);

    int failures = 0;
    for (int n : selected) {
        auto it = kCriteria.find(n);
        if (it == kCriteria.end()) {
            std::fprintf(stderr, "unknown criterion %d\n", n);
            return 2;
        }
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool excused = !o.pass && known.count(n);
        std::printf("[%s] criterion %d (%s): %s%s\n", o.pass ? "PASS" : "FAIL", n, it->second.first, o.detail.c_str(),
                    excused ? " [known deviation, see README]" : "");
        std::fflush(stdout);
        if (!o.pass && !excused) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
