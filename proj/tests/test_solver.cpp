#include "kgflow/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kgflow;

namespace {

double max_diff(const RVec& a, const RVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const RVec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

KGState packet(const Grid1D& g, double amp) {
    KGState s;
    s.u.resize(g.n);
    s.ut.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        double x = g.x(j), env = amp * std::exp(-x * x / 4.0);
        s.u[j] = env * std::cos(2.0 * x);
        s.ut[j] = env * std::sin(2.0 * x);
    }
    return s;
}

KGState advance(KGState s, const Grid1D& g, const CubicNonlinearity& p, double dt, int steps) {
    Stepper st(g, p);
    for (int i = 0; i < steps; ++i) st.step(s, dt);
    return s;
}

}  // namespace

TEST_CASE("initial data") {
    Grid1D g(1024, 40.0);
    InitialData zero = make_initial({}, 0.0, g, 2.0);
    CHECK(max_abs(zero.state.u) == 0.0);
    CHECK(max_abs(zero.state.ut) == 0.0);
    CHECK(zero.state.t == 1.0);

    for (const char* kind : {"gaussian", "lorentzian", "compact-bump"}) {
        CAPTURE(kind);
        DataSpec spec;
        spec.kind = kind;
        spec.velocity_weight = 0.5;
        InitialData d = make_initial(spec, 1.0, g, 2.0);
        CHECK(d.budget <= 1.0 + 1e-12);
        CHECK(data_budget(d.state.u, d.state.ut, g, 2.0) <= 1.0 + 1e-12);
    }
    DataSpec loud;
    loud.amplitude = 100.0;
    CHECK_THROWS_AS(make_initial(loud, 0.1, g, 2.0), BudgetError);
}

TEST_CASE("effective step divides unit time") {
    Grid1D g(1024, 40.0);
    SolverConfig cfg;
    cfg.dt = 0.03;
    CHECK(effective_dt(cfg, g) == doctest::Approx(1.0 / 34.0));
    cfg.dt = 0.05;
    CHECK(effective_dt(cfg, g) == doctest::Approx(0.05));
}

TEST_CASE("zero data stays zero") {
    Grid1D g(256, 20.0);
    KGState s{1.0, RVec(g.n, 0.0), RVec(g.n, 0.0)};
    KGState r = advance(s, g, CubicNonlinearity::u_cubed(), 0.05, 40);
    CHECK(max_abs(r.u) == 0.0);
    CHECK(max_abs(r.ut) == 0.0);
}

TEST_CASE("linear run matches the exact propagator") {
    Grid1D g(2048, 60.0);
    KGState s0 = packet(g, 0.1);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 10.0;
    RunResult r = run(cfg, g, {}, s0, {1.0, 10.0});
    KGState ref = linear_propagate(s0, g, 9.0);
    CHECK(r.final_state.t == doctest::Approx(10.0));
    CHECK(max_diff(r.final_state.u, ref.u) <= 1e-9);
    CHECK(max_diff(r.final_state.ut, ref.ut) <= 1e-9);
}

TEST_CASE("fourth-order convergence in dt") {
    Grid1D g(256, 20.0);
    CubicNonlinearity p = CubicNonlinearity::u_cubed();
    KGState s0 = packet(g, 1.5);
    KGState ref = advance(s0, g, p, 1.0 / 160, 320);
    double e_coarse = max_diff(advance(s0, g, p, 0.2, 10).u, ref.u);
    double e_fine = max_diff(advance(s0, g, p, 0.1, 20).u, ref.u);
    double order = std::log2(e_coarse / e_fine);
    CHECK(order == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("time reversal of the linear flow") {
    Grid1D g(512, 30.0);
    KGState s0 = packet(g, 1.0);
    KGState fwd = advance(s0, g, {}, 0.05, 100);
    KGState back = advance(fwd, g, {}, -0.05, 100);
    CHECK(max_diff(back.u, s0.u) <= 1e-9);
    CHECK(max_diff(back.ut, s0.ut) <= 1e-9);
    CHECK(back.t == doctest::Approx(1.0));
}

TEST_CASE("Klainerman field") {
    Grid1D g(256, 10.0);
    const double k = 4.0 * std::numbers::pi / 10.0;
    KGState s{1.0, RVec(g.n), RVec(g.n, 0.0)};
    for (std::size_t j = 0; j < g.n; ++j) s.u[j] = std::sin(k * g.x(j));
    RVec z = z_apply(s, g);
    double err = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) err = std::max(err, std::abs(z[j] - k * std::cos(k * g.x(j))));
    CHECK(err < 1e-12);

    KGState zero{1.0, RVec(g.n, 0.0), RVec(g.n, 0.0)};
    CHECK(max_abs(z_apply(zero, g)) == 0.0);
}

TEST_CASE("Z commutes with the linear operator") {
    Grid1D g(1024, 40.0);
    KGState s0 = packet(g, 1.0);
    const double t = 4.0, d = 0.01;
    RVec zm = z_apply(linear_propagate(s0, g, t - 1.0 - d), g);
    RVec z0 = z_apply(linear_propagate(s0, g, t - 1.0), g);
    RVec zp = z_apply(linear_propagate(s0, g, t - 1.0 + d), g);
    RVec zxx = apply_multiplier([](double xi) { return cplx(-xi * xi, 0.0); }, z0, g);
    double res = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        double ztt = (zp[j] - 2.0 * z0[j] + zm[j]) / (d * d);
        res = std::max(res, std::abs(ztt - zxx[j] + z0[j]));
    }
    CHECK(res <= 1e-3 * max_abs(z0));
}

TEST_CASE("energies") {
    Grid1D g(256, 10.0);
    KGState zero{1.0, RVec(g.n, 0.0), RVec(g.n, 0.0)};
    CHECK(energy(zero, g, 0, EnergyField::dx) == 0.0);
    CHECK(energy(zero, g, 1, EnergyField::z) == 0.0);

    const double k = 3.0 * std::numbers::pi / 10.0;
    KGState s{1.0, RVec(g.n), RVec(g.n, 0.0)};
    for (std::size_t j = 0; j < g.n; ++j) s.u[j] = std::sin(k * g.x(j));
    CHECK(energy0(s.u, s.ut, g) == doctest::Approx(std::sqrt((k * k + 1.0) * 10.0)).epsilon(1e-12));
    // the x-derivative of sin is k cos, so E_1 adds k times the same quantity
    CHECK(energy(s, g, 1, EnergyField::dx) ==
          doctest::Approx((1.0 + k) * std::sqrt((k * k + 1.0) * 10.0)).epsilon(1e-12));
    CHECK_THROWS(energy(s, g, 2, EnergyField::z));

    Grid1D wide(1024, 40.0);
    KGState p = packet(wide, 1.0);
    const double e0 = energy0(p.u, p.ut, wide);
    KGState later = advance(p, wide, {}, 0.05, 200);
    CHECK(std::abs(energy0(later.u, later.ut, wide) - e0) <= 1e-10 * e0);
}

TEST_CASE("light cone") {
    Grid1D g(4096, 100.0);
    DataSpec spec;
    spec.kind = "compact-bump";
    spec.width = 2.0;
    InitialData d = make_initial(spec, 0.05, g, 2.0);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 31.0;
    RunResult r = run(cfg, g, CubicNonlinearity::u_cubed(), d.state, {31.0});
    const double support = 2.0, reach = 30.0 + support + 5.0;
    double outside = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
        if (std::abs(g.x(j)) > reach) outside = std::max(outside, std::abs(r.final_state.u[j]));
    CHECK(outside < 1e-8);
}

TEST_CASE("run bookkeeping") {
    Grid1D g(512, 30.0);
    InitialData d = make_initial({}, 0.1, g, 2.0);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    RunResult r = run(cfg, g, {}, d.state, sample_schedule(1.0, 0.5));
    REQUIRE(r.norms.size() == 1);
    CHECK(r.norms[0].t == 1.0);
    CHECK(r.norms[0].linf_u == doctest::Approx(max_abs(d.state.u)));

    auto times = sample_schedule(8.0, 3.0);
    CHECK(times == std::vector<double>{1.0, 2.0, 4.0, 7.0, 8.0});
}

TEST_CASE("linear dispersive decay stays bounded") {
    Grid1D g(2048, 120.0);
    InitialData d = make_initial({}, 0.1, g, 2.0);
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 100.0;
    RunResult r = run(cfg, g, {}, d.state, sample_schedule(100.0, 1.0));
    double at10 = 0.0, top = 0.0;
    for (auto& n : r.norms) {
        if (std::abs(n.t - 10.0) < 1e-9) at10 = n.sqrt_t_linf;
        if (n.t >= 10.0 - 1e-9) top = std::max(top, n.sqrt_t_linf);
    }
    REQUIRE(at10 > 0.0);
    CHECK(top <= 1.5 * at10);
}

TEST_CASE("first-order energy grows slowly for the cubic null form") {
    Grid1D g(2048, 220.0);
    InitialData d = make_initial({}, 0.05, g, 2.0);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 200.0;
    RVec ts, es;
    Observer obs = [&](const KGState& s) {
        ts.push_back(s.t);
        es.push_back(energy(s, g, 1, EnergyField::dx));
    };
    run(cfg, g, CubicNonlinearity::u_cubed(), d.state, sample_schedule(200.0, 10.0), obs);
    CHECK(loglog_slope(ts, es) <= 0.1);
}

TEST_CASE("blow-up guard") {
    Grid1D g(1024, 40.0);
    InitialData d = make_initial({}, 0.9, g, 2.0);
    CubicNonlinearity p;
    p.add(MonomialKey{{0, 0, 0, 3, 0}}, 200);
    SolverConfig cfg;
    cfg.t_end = 50.0;
    std::vector<NormRecord> partial;
    CHECK_THROWS_AS(run(cfg, g, p, d.state, sample_schedule(50.0, 1.0), {}, &partial), BlowupError);
    CHECK_FALSE(partial.empty());
}
