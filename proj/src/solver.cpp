#include "kgflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace kgflow {

namespace {

RVec profile(const DataSpec& d, const Grid1D& g) {
    RVec f(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        double y = (g.x(j) - d.center) / d.width;
        if (d.kind == "gaussian")
            f[j] = std::exp(-y * y);
        else if (d.kind == "lorentzian")
            f[j] = 1.0 / (1.0 + y * y);
        else if (d.kind == "compact-bump")
            f[j] = chi(std::abs(y));
        else
            throw BudgetError("unknown data kind: " + d.kind);
    }
    return f;
}

RVec times_x(const RVec& f, const Grid1D& g) {
    RVec r(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) r[j] = g.x(j) * f[j];
    return r;
}

double hs(const RVec& f, const Grid1D& g, double s) { return norm_hs(to_complex(f), g, s, 1.0); }

RVec dx(const RVec& f, const Grid1D& g, unsigned order = 1) {
    return apply_multiplier([order](double k) { return std::pow(cplx(0.0, k), static_cast<int>(order)); }, f, g);
}

double l2(const RVec& f, const Grid1D& g) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(s * g.dx());
}

}  // namespace

double data_budget(const RVec& u0, const RVec& u1, const Grid1D& g, double s) {
    return hs(u0, g, s + 1.0) + hs(u1, g, s) + hs(times_x(u0, g), g, 2.0) + hs(times_x(u1, g), g, 1.0);
}

InitialData make_initial(const DataSpec& spec, double epsilon, const Grid1D& g, double s) {
    if (!(spec.width > 0.0)) throw BudgetError("data width must be positive");
    RVec u0 = profile(spec, g);
    RVec u1 = spec.velocity_weight != 0.0 ? dx(u0, g) : RVec(g.n, 0.0);
    for (double& v : u1) v *= spec.velocity_weight;
    double unit = data_budget(u0, u1, g, s);
    if (!std::isfinite(unit) || unit <= 0.0) throw BudgetError("profile has no finite positive norm budget");
    InitialData out;
    if (spec.amplitude > 0.0) {
        out.scale = spec.amplitude;
        if (spec.amplitude * unit > 1.0)
            throw BudgetError("requested amplitude gives budget " + std::to_string(spec.amplitude * unit) + " > 1");
    } else {
        out.scale = 1.0 / unit;
    }
    out.budget = out.scale * unit;
    out.state.t = 1.0;
    out.state.u.resize(g.n);
    out.state.ut.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        out.state.u[j] = epsilon * out.scale * u0[j];
        out.state.ut[j] = epsilon * out.scale * u1[j];
    }
    return out;
}

double effective_dt(const SolverConfig& cfg, const Grid1D& g) {
    double dt = cfg.dt > 0.0 ? cfg.dt : std::min(0.1, g.dx() / 4.0);
    double m = std::ceil(1.0 / dt - 1e-9);
    return 1.0 / m;
}

KGState linear_propagate(const KGState& s, const Grid1D& g, double tau) {
    Fft fft(g.n);
    CVec U = fft.forward(to_complex(s.u)), V = fft.forward(to_complex(s.ut));
    for (std::size_t m = 0; m < g.n; ++m) {
        double k = g.k(m), w = std::sqrt(1.0 + k * k);
        double c = std::cos(w * tau), sn = std::sin(w * tau);
        cplx u = U[m], v = V[m];
        U[m] = c * u + sn / w * v;
        V[m] = -w * sn * u + c * v;
    }
    return {s.t + tau, real_part(fft.inverse(U)), real_part(fft.inverse(V))};
}

Stepper::Stepper(const Grid1D& g, CubicNonlinearity p) : g_(g), p_(std::move(p)), fft_(g.n) {
    validate(p_);
    for (auto& [key, c] : p_.terms())
        for (std::size_t s = 0; s < 5; ++s) needs_[s] = needs_[s] || key.e[s] > 0;
    const std::size_t h = g.n / 2 + 1;
    k_.resize(h);
    omega_.resize(h);
    for (std::size_t m = 0; m < h; ++m) {
        k_[m] = std::numbers::pi * static_cast<double>(m) / g.half_length;
        omega_[m] = std::sqrt(1.0 + k_[m] * k_[m]);
    }
}

void Stepper::rotate(Spec& y, double tau) const {
    for (std::size_t m = 0; m < k_.size(); ++m) {
        double w = omega_[m], c = std::cos(w * tau), sn = std::sin(w * tau);
        cplx u = y.u[m], v = y.v[m];
        y.u[m] = c * u + sn / w * v;
        y.v[m] = -w * sn * u + c * v;
    }
}

Stepper::Spec Stepper::to_spec(const KGState& s) const {
    Spec y{CVec(k_.size()), CVec(k_.size())};
    fft_.forward(s.u.data(), y.u.data());
    fft_.forward(s.ut.data(), y.v.data());
    return y;
}

Stepper::Spec Stepper::force(const Spec& y) const {
    const std::size_t n = g_.n, h = k_.size();
    Spec out{CVec(h, 0.0), CVec(h, 0.0)};
    if (p_.is_zero()) return out;
    std::array<RVec, 5> fields;
    CVec tmp(h);
    auto realize = [&](std::size_t slot, const CVec& src, cplx (*mult)(double)) {
        if (!needs_[slot]) return;
        for (std::size_t m = 0; m < h; ++m) tmp[m] = mult(k_[m]) * src[m];
        if (n % 2 == 0 && mult(1.0).imag() != 0.0) tmp[h - 1] = 0.0;  // odd symbol: drop Nyquist
        fields[slot].resize(n);
        fft_.inverse(tmp.data(), fields[slot].data());
    };
    realize(0, y.u, [](double) { return cplx(1.0); });
    realize(1, y.v, [](double k) { return cplx(0.0, k); });
    realize(2, y.u, [](double k) { return cplx(-k * k); });
    realize(3, y.v, [](double) { return cplx(1.0); });
    realize(4, y.u, [](double k) { return cplx(0.0, k); });
    RVec dummy(n, 0.0);
    std::array<const RVec*, 5> slots;
    for (std::size_t s = 0; s < 5; ++s) slots[s] = needs_[s] ? &fields[s] : &dummy;
    RVec pv = evaluate_nonlinearity(p_, slots);
    fft_.forward(pv.data(), out.v.data());
    return out;
}

double Stepper::step(KGState& s, double dt) {
    Spec y0 = to_spec(s);
    Spec y1 = y0;
    rotate(y1, dt);
    if (!p_.is_zero()) {
        const std::size_t h = k_.size();
        auto axpy = [h](const Spec& a, double c, const Spec& b) {
            Spec r = a;
            for (std::size_t m = 0; m < h; ++m) {
                r.u[m] += c * b.u[m];
                r.v[m] += c * b.v[m];
            }
            return r;
        };
        Spec k1 = force(y0);
        Spec a = axpy(y0, 0.5 * dt, k1);
        rotate(a, 0.5 * dt);
        Spec k2 = force(a);
        Spec half0 = y0;
        rotate(half0, 0.5 * dt);
        Spec k3 = force(axpy(half0, 0.5 * dt, k2));
        Spec k3r = k3;
        rotate(k3r, 0.5 * dt);
        Spec full0 = y0;
        rotate(full0, dt);
        Spec k4 = force(axpy(full0, dt, k3r));
        Spec k1r = k1;
        rotate(k1r, dt);
        Spec mid = axpy(k2, 1.0, k3);
        rotate(mid, 0.5 * dt);
        y1 = axpy(full0, dt / 6.0, k1r);
        y1 = axpy(y1, dt / 3.0, mid);
        y1 = axpy(y1, dt / 6.0, k4);
    }
    fft_.inverse(y1.u.data(), s.u.data());
    fft_.inverse(y1.v.data(), s.ut.data());
    s.t += dt;
    // Parseval on the half spectrum; the Nyquist slope term drops as in spectral d_x.
    const std::size_t h = k_.size();
    double acc = 0.0;
    for (std::size_t m = 0; m < h; ++m) {
        double w = (m == 0 || m == h - 1) ? 1.0 : 2.0;
        double kk = (m == h - 1) ? 0.0 : k_[m] * k_[m];
        acc += w * (std::norm(y1.v[m]) + (1.0 + kk) * std::norm(y1.u[m]));
    }
    return std::sqrt(acc * g_.dx() / static_cast<double>(g_.n));
}

RVec Stepper::nonlinear_term(const RVec& u, const RVec& ut) const {
    Spec y = to_spec(KGState{0.0, u, ut});
    Spec f = force(y);
    RVec out(g_.n);
    fft_.inverse(f.v.data(), out.data());
    return out;
}

RVec evaluate_nonlinearity(const CubicNonlinearity& p, const RVec& u, const RVec& ut, const Grid1D& g) {
    if (u.size() != g.n || ut.size() != g.n) throw std::invalid_argument("fields do not match grid");
    RVec utx = dx(ut, g), uxx = dx(u, g, 2), ux = dx(u, g);
    return evaluate_nonlinearity(p, {&u, &utx, &uxx, &ut, &ux});
}

RVec z_apply(const KGState& s, const Grid1D& g) {
    RVec ux = dx(s.u, g);
    RVec z(g.n);
    for (std::size_t j = 0; j < g.n; ++j) z[j] = s.t * ux[j] + g.x(j) * s.ut[j];
    return z;
}

double energy0(const RVec& u, const RVec& ut, const Grid1D& g) {
    double a = l2(ut, g), b = l2(dx(u, g), g), c = l2(u, g);
    return std::sqrt(a * a + b * b + c * c);
}

double energy(const KGState& s, const Grid1D& g, unsigned order, EnergyField which, const CubicNonlinearity& p) {
    double total = energy0(s.u, s.ut, g);
    if (which == EnergyField::dx) {
        for (unsigned k = 1; k <= order; ++k) total += energy0(dx(s.u, g, k), dx(s.ut, g, k), g);
        return total;
    }
    if (order > 1) throw std::invalid_argument("Z energies are implemented for N <= 1");
    if (order == 0) return total;
    RVec zu = z_apply(s, g);
    RVec ux = dx(s.u, g), utx = dx(s.ut, g), uxx = dx(s.u, g, 2);
    RVec pv = p.is_zero() ? RVec(g.n, 0.0) : evaluate_nonlinearity(p, s.u, s.ut, g);
    RVec zt(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        double utt = uxx[j] - s.u[j] + pv[j];
        zt[j] = ux[j] + s.t * utx[j] + g.x(j) * utt;
    }
    return total + energy0(zu, zt, g);
}

NormRecord measure_norms(const KGState& s, const Grid1D& g, const CubicNonlinearity& p, double sobolev_s) {
    double linf = 0.0;
    for (double v : s.u) linf = std::max(linf, std::abs(v));
    return {s.t, linf, std::sqrt(s.t) * linf, energy0(s.u, s.ut, g), energy(s, g, 1, EnergyField::z, p),
            hs(s.u, g, sobolev_s)};
}

std::vector<double> sample_schedule(double t_end, double every) {
    std::set<double> ts;
    if (every > 0.0)
        for (long i = 0;; ++i) {
            double t = 1.0 + static_cast<double>(i) * every;
            if (t > t_end + 1e-12) break;
            ts.insert(t);
        }
    for (double t = 1.0; t <= t_end + 1e-12; t *= 2.0) ts.insert(t);
    ts.insert(t_end);
    return {ts.begin(), ts.end()};
}

RunResult run(const SolverConfig& cfg, const Grid1D& g, const CubicNonlinearity& p, const KGState& initial,
              const std::vector<double>& sample_times, const Observer& observer, std::vector<NormRecord>* partial) {
    const double dt = effective_dt(cfg, g);
    const long n_end = std::lround((cfg.t_end - initial.t) / dt);
    std::vector<long> marks;
    for (double t : sample_times) {
        long m = std::lround((t - initial.t) / dt);
        if (m >= 0 && m <= n_end) marks.push_back(m);
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    Stepper stepper(g, p);
    RunResult res;
    KGState s = initial;
    const double e_start = energy0(s.u, s.ut, g);
    auto mark = marks.begin();
    for (long n = 0;; ++n) {
        s.t = initial.t + static_cast<double>(n) * dt;
        if (mark != marks.end() && *mark == n) {
            res.norms.push_back(measure_norms(s, g, p, cfg.sobolev_s));
            if (partial) partial->push_back(res.norms.back());
            if (observer) observer(s);
            ++mark;
        }
        if (n == n_end) break;
        double e = stepper.step(s, dt);
        if (!std::isfinite(e)) throw NaNError("non-finite field at t = " + std::to_string(s.t));
        if (e_start > 0.0 && e > cfg.blowup_factor * e_start)
            throw BlowupError("energy grew by more than " + std::to_string(cfg.blowup_factor) + "x at t = " +
                              std::to_string(s.t));
    }
    res.final_state = s;
    return res;
}

}  // namespace kgflow
