#include "kgflow/semiclassical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace kgflow {

namespace {

constexpr int kStencilHalf = 4;
constexpr int kMaxOrder = 4;

/// Fornberg weights on offsets -4..4 for derivative orders 0..4 at 0.
using Stencil = std::array<std::array<double, 2 * kStencilHalf + 1>, kMaxOrder + 1>;

Stencil fornberg_weights() {
    constexpr int n = 2 * kStencilHalf + 1;
    std::array<double, n> xs{};
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = i - kStencilHalf;
    // c[m][j]: weight of point j for derivative m
    std::vector<std::vector<double>> c(kMaxOrder + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = xs[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, kMaxOrder);
        double c2 = 1.0, c5 = c4;
        c4 = xs[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            double c3 = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    Stencil s{};
    for (int k = 0; k <= kMaxOrder; ++k)
        for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = c[k][j];
    return s;
}

const Stencil& stencil() {
    static const Stencil s = fornberg_weights();
    return s;
}

double factorial(unsigned n) {
    double r = 1.0;
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return r;
}

/// Derivative tables D[p][q][n] = d_x^p d_xi^q f at (x, xi0 + n dxi), p + q <= k.
using DerivTable = std::vector<std::vector<CVec>>;

DerivTable derivative_rows(const SymbolDescriptor& f, double x, double xi0, double dxi, std::size_t count, double h,
                           unsigned k, double step_x, std::size_t step_xi, double step_xi_len) {
    const auto& w = stencil();
    const std::size_t pad = kStencilHalf * step_xi;
    const std::size_t ext = count + 2 * pad;
    const int rows = k == 0 ? 0 : kStencilHalf;
    // g[i][q][n] = d_xi^q f(x + i step_x, .)
    std::vector<std::vector<CVec>> g(2 * kStencilHalf + 1);
    CVec buf(ext);
    for (int i = -rows; i <= rows; ++i) {
        f.row(x + i * step_x, xi0 - static_cast<double>(pad) * dxi, dxi, ext, h, buf.data());
        auto& gi = g[static_cast<std::size_t>(i + kStencilHalf)];
        gi.assign(k + 1, CVec(count));
        for (unsigned q = 0; q <= k; ++q) {
            const double scale = 1.0 / std::pow(step_xi_len, q);
            for (std::size_t n = 0; n < count; ++n) {
                if (q == 0) {
                    gi[q][n] = buf[n + pad];
                    continue;
                }
                cplx acc = 0.0;
                for (int j = -kStencilHalf; j <= kStencilHalf; ++j)
                    acc += w[q][static_cast<std::size_t>(j + kStencilHalf)] *
                           buf[static_cast<std::size_t>(static_cast<long>(n + pad) + j * static_cast<long>(step_xi))];
                gi[q][n] = acc * scale;
            }
        }
    }
    DerivTable d(k + 1, std::vector<CVec>(k + 1));
    for (unsigned p = 0; p <= k; ++p)
        for (unsigned q = 0; p + q <= k; ++q) {
            if (p == 0) {
                d[p][q] = g[kStencilHalf][q];
                continue;
            }
            CVec acc(count, 0.0);
            for (int i = -kStencilHalf; i <= kStencilHalf; ++i) {
                double wi = w[p][static_cast<std::size_t>(i + kStencilHalf)];
                if (wi == 0.0) continue;
                const CVec& src = g[static_cast<std::size_t>(i + kStencilHalf)][q];
                for (std::size_t n = 0; n < count; ++n) acc[n] += wi * src[n];
            }
            const double scale = 1.0 / std::pow(step_x, p);
            for (auto& z : acc) z *= scale;
            d[p][q] = std::move(acc);
        }
    return d;
}

}  // namespace

cplx SymbolDescriptor::operator()(double x, double xi, double h) const {
    cplx out;
    row(x, xi, 0.0, 1, h, &out);
    return out;
}

SymbolDescriptor SymbolDescriptor::pointwise(std::function<cplx(double, double, double)> f, double delta,
                                             double beta, double order) {
    SymbolDescriptor s;
    s.row = [f = std::move(f)](double x, double xi0, double dxi, std::size_t count, double h, cplx* out) {
        for (std::size_t m = 0; m < count; ++m) out[m] = f(x, xi0 + static_cast<double>(m) * dxi, h);
    };
    s.delta = delta;
    s.beta = beta;
    s.order = order;
    return s;
}

double FrameConfig::dxi() const { return h * std::numbers::pi / half_width; }
double FrameConfig::xi_min() const { return -static_cast<double>(points / 2) * dxi(); }

CVec to_frame(const CVec& w, const Grid1D& solver_grid, double t, const FrameConfig& frame) {
    if (t < 1.0) throw DomainError("to_frame needs t >= 1");
    if (t * frame.half_width > solver_grid.half_length)
        throw DomainError("frame exceeds the solver cell: t*X = " + std::to_string(t * frame.half_width));
    Grid1D fg = frame.grid();
    RVec xs(fg.n);
    for (std::size_t j = 0; j < fg.n; ++j) xs[j] = t * fg.x(j);
    CVec v = interp_eval(w, solver_grid, xs);
    const double st = std::sqrt(t);
    for (auto& z : v) z *= st;
    return v;
}

CVec from_frame(const CVec& v, const FrameConfig& frame, double t, const RVec& x_points) {
    RVec ys(x_points.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        ys[i] = x_points[i] / t;
        if (std::abs(ys[i]) >= frame.half_width) throw DomainError("point outside the frame");
    }
    CVec w = interp_eval(v, frame.grid(), ys);
    const double st = 1.0 / std::sqrt(t);
    for (auto& z : w) z *= st;
    return w;
}

Eigen::MatrixXcd weyl_matrix(const SymbolDescriptor& a, const FrameConfig& frame) {
    const std::size_t M = frame.points;
    const long Ml = static_cast<long>(M);
    const std::size_t M2 = 2 * M;
    const double dy = frame.grid().dx();
    // kernels on the doubled xi grid are 2M-periodic in j - l, so no pair aliases
    Fft fft(M2);
    Eigen::MatrixXcd K(Ml, Ml);
    CVec natural(M2), slots(M2), kern(M2);
    for (long s = 0; s <= 2 * Ml - 2; ++s) {
        const double z = -frame.half_width + static_cast<double>(s) * 0.5 * dy;
        a.row(z, frame.xi_min(), 0.5 * frame.dxi(), M2, frame.h, natural.data());
        for (std::size_t n = 0; n < M2; ++n) slots[(n + M) % M2] = natural[n];
        fft.inverse(slots.data(), kern.data());
        for (long l = std::max(0L, s - Ml + 1); l <= std::min(s, Ml - 1); ++l) {
            long j = s - l;
            K(j, l) = kern[static_cast<std::size_t>((j - l + 2 * Ml) % (2 * Ml))];
        }
    }
    return K;
}

CVec apply_matrix(const Eigen::MatrixXcd& op, const CVec& v) {
    Eigen::Map<const Eigen::VectorXcd> vin(v.data(), static_cast<long>(v.size()));
    Eigen::VectorXcd r = op * vin;
    return CVec(r.data(), r.data() + r.size());
}

CVec weyl_apply(const SymbolDescriptor& a, const CVec& v, const FrameConfig& frame) {
    if (v.size() != frame.points) throw std::invalid_argument("field does not match frame");
    return apply_matrix(weyl_matrix(a, frame), v);
}

SymbolDescriptor moyal_truncated(const SymbolDescriptor& a, const SymbolDescriptor& b, unsigned k, double h) {
    if (k > kMaxOrder) throw std::invalid_argument("Moyal expansion implemented through order 4");
    SymbolDescriptor c;
    c.delta = std::max(a.delta, b.delta);
    c.beta = std::max(a.beta, b.beta);
    c.order = a.order + b.order;
    c.row = [a, b, k, h](double x, double xi0, double dxi, std::size_t count, double hh, cplx* out) {
        const double step = std::sqrt(h) / 8.0;
        std::size_t mult = 1;
        double grid = dxi;
        if (count > 1 && dxi > 0.0) {
            mult = static_cast<std::size_t>(std::max(1L, std::lround(step / dxi)));
        } else {
            grid = step;
        }
        const double step_xi = static_cast<double>(mult) * grid;
        DerivTable da = derivative_rows(a, x, xi0, grid, count, hh, k, step, mult, step_xi);
        DerivTable db = derivative_rows(b, x, xi0, grid, count, hh, k, step, mult, step_xi);
        const cplx unit = h / cplx(0.0, 2.0);
        std::fill(out, out + count, cplx(0.0));
        cplx pref = 1.0;
        for (unsigned j = 0; j <= k; ++j) {
            for (unsigned a1 = 0; a1 <= j; ++a1) {
                unsigned a2 = j - a1;
                double coef = ((a1 % 2) ? -1.0 : 1.0) / (factorial(a1) * factorial(a2));
                const CVec& fa = da[a1][a2];
                const CVec& fb = db[a2][a1];
                for (std::size_t n = 0; n < count; ++n) out[n] += pref * coef * fa[n] * fb[n];
            }
            pref *= unit;
        }
    };
    return c;
}

PowerResult power_norm(const std::function<CVec(const CVec&)>& op, const std::function<CVec(const CVec&)>& adj,
                       std::size_t n, unsigned iterations, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVec v(n);
    for (auto& z : v) z = {nd(rng), nd(rng)};
    auto nrm = [](const CVec& x) {
        double s = 0.0;
        for (auto z : x) s += std::norm(z);
        return std::sqrt(s);
    };
    double n0 = nrm(v);
    for (auto& z : v) z /= n0;
    PowerResult r;
    double lambda = 0.0;
    for (unsigned it = 0; it < iterations; ++it) {
        CVec w = adj(op(v));
        lambda = nrm(w);
        if (lambda == 0.0) return {0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / lambda;
    }
    CVec w = adj(op(v));
    cplx rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += std::conj(v[i]) * w[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += std::norm(w[i] - rq * v[i]);
    r.norm = std::sqrt(std::max(0.0, rq.real()));
    r.residual = rq.real() > 0.0 ? std::sqrt(res) / rq.real() : 0.0;
    return r;
}

std::size_t frame_points_for(double h, double half_width, std::size_t min_points) {
    double need = 1.3 * 2.0 * half_width * half_width / (std::numbers::pi * h);
    std::size_t m = min_points;
    while (static_cast<double>(m) < need) m *= 2;
    return m;
}

SymbolDescriptor gaussian_symbol(double x0, double xi0, double width2) {
    return SymbolDescriptor::pointwise([=](double x, double xi, double) {
        return cplx(std::exp(-((x - x0) * (x - x0) + (xi - xi0) * (xi - xi0)) / width2));
    });
}

MoyalBench moyal_error(const SymbolDescriptor& a, const SymbolDescriptor& b, const std::vector<unsigned>& ks,
                       const std::vector<double>& h_list, double half_width) {
    MoyalBench out;
    for (double h : h_list) {
        FrameConfig frame{h, half_width, frame_points_for(h, half_width)};
        Eigen::MatrixXcd Ka = weyl_matrix(a, frame);
        Eigen::MatrixXcd Kb = weyl_matrix(b, frame);
        for (unsigned k : ks) {
            Eigen::MatrixXcd Kc = weyl_matrix(moyal_truncated(a, b, k, h), frame);
            auto op = [&](const CVec& v) {
                CVec bv = apply_matrix(Kb, v), abv = apply_matrix(Ka, bv), cv = apply_matrix(Kc, v);
                for (std::size_t i = 0; i < v.size(); ++i) abv[i] -= cv[i];
                return abv;
            };
            auto adj = [&](const CVec& v) {
                Eigen::Map<const Eigen::VectorXcd> vin(v.data(), static_cast<long>(v.size()));
                Eigen::VectorXcd r = Kb.adjoint() * (Ka.adjoint() * vin) - Kc.adjoint() * vin;
                return CVec(r.data(), r.data() + r.size());
            };
            PowerResult pr = power_norm(op, adj, frame.points);
            out.rows.push_back({h, k, frame.points, pr.norm, pr.converged()});
        }
    }
    for (unsigned k : ks) {
        RVec hs, es;
        for (auto& r : out.rows)
            if (r.k == k) {
                hs.push_back(r.h);
                es.push_back(r.error);
            }
        out.slopes.push_back(hs.size() >= 2 ? loglog_slope(hs, es) : 0.0);
    }
    return out;
}

double p_prime(double xi) { return xi / std::sqrt(1.0 + xi * xi); }

SymbolDescriptor lambda_cutoff(double width, double h) {
    if (!(width > 0.0)) throw std::invalid_argument("cutoff width must be positive");
    const double sh = std::sqrt(h);
    return SymbolDescriptor::pointwise(
        [=](double x, double xi, double) { return cplx(bump((x + p_prime(xi)) / sh, width)); }, 0.5, 0.0, 0.0);
}

CVec calL(const CVec& v, const FrameConfig& frame) {
    auto sym = SymbolDescriptor::pointwise([](double x, double xi, double) { return cplx(x + p_prime(xi)); });
    CVec r = weyl_apply(sym, v, frame);
    for (auto& z : r) z /= frame.h;
    return r;
}

CVec bracket_power(const CVec& v, int rho, const FrameConfig& frame) {
    const double h = frame.h;
    return apply_multiplier([h, rho](double k) { return cplx(std::pow(1.0 + h * h * k * k, 0.5 * rho)); }, v,
                            frame.grid());
}

CVec vsigma_lambda(const CVec& v, int rho, const FrameConfig& frame, double gamma_width) {
    return weyl_apply(lambda_cutoff(gamma_width, frame.h), bracket_power(v, rho, frame), frame);
}

OpnormProbe opnorm_probe(const SymbolFamily& family, const std::vector<double>& h_list, NormTarget target,
                         double half_width, std::size_t points) {
    OpnormProbe out;
    RVec hs, ns;
    for (double h : h_list) {
        FrameConfig frame{h, half_width, points};
        Eigen::MatrixXcd K = weyl_matrix(family(h), frame);
        OpnormRow row{h, 0.0, true};
        if (target == NormTarget::l2_to_l2) {
            PowerResult pr = power_norm([&](const CVec& v) { return apply_matrix(K, v); },
                                        [&](const CVec& v) {
                                            Eigen::Map<const Eigen::VectorXcd> vin(v.data(), static_cast<long>(v.size()));
                                            Eigen::VectorXcd r = K.adjoint() * vin;
                                            return CVec(r.data(), r.data() + r.size());
                                        },
                                        points);
            row.norm = pr.norm;
            row.converged = pr.converged();
        } else {
            const double dy = frame.grid().dx();
            row.norm = std::sqrt(K.rowwise().squaredNorm().maxCoeff() / dy);
        }
        out.rows.push_back(row);
        hs.push_back(h);
        ns.push_back(row.norm);
    }
    bool positive = std::all_of(ns.begin(), ns.end(), [](double v) { return v > 0.0; });
    out.exponent = (positive && hs.size() >= 2) ? loglog_slope(hs, ns) : 0.0;
    return out;
}

SymbolFamily lambda_localized_family(double gamma_width, double x_window) {
    return [=](double h) {
        const double sh = std::sqrt(h);
        return SymbolDescriptor::pointwise(
            [=](double x, double xi, double) {
                double y = (x + p_prime(xi)) / sh;
                return cplx(bump(x, x_window) * bump(y, gamma_width) / std::sqrt(1.0 + y * y));
            },
            0.5, 0.0, 0.0);
    };
}

}  // namespace kgflow
