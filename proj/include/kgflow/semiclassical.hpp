#pragma once

#include "kgflow/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace kgflow {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Symbol a(x, xi; h) with class metadata. `row` fills out[m] = a(x, xi0 + m*dxi; h) for
/// m < count; rows on uniform xi grids let composed symbols share stencil evaluations.
struct SymbolDescriptor {
    using RowFn = std::function<void(double x, double xi0, double dxi, std::size_t count, double h, cplx* out)>;
    RowFn row;
    double delta = 0.0;
    double beta = 0.0;
    double order = 0.0;

    cplx operator()(double x, double xi, double h) const;

    static SymbolDescriptor pointwise(std::function<cplx(double x, double xi, double h)> f, double delta = 0.0,
                                      double beta = 0.0, double order = 0.0);
};

/// Semiclassical frame: M points on [-X, X), wavenumbers kappa_m = pi m / X, xi_m = h kappa_m.
struct FrameConfig {
    double h = 1.0;
    double half_width = 1.2;
    std::size_t points = 1024;

    Grid1D grid() const { return Grid1D(points, half_width); }
    double dxi() const;
    double xi_min() const;  ///< xi of the most negative mode
};

/// v(y) = sqrt(t) w(t*y) on the frame grid; w lives on the solver grid.
CVec to_frame(const CVec& w, const Grid1D& solver_grid, double t, const FrameConfig& frame);

/// Inverse of to_frame at the solver points x with |x| < t X: w(x) = v(x/t)/sqrt(t).
CVec from_frame(const CVec& v, const FrameConfig& frame, double t, const RVec& x_points);

/// Dense discrete Weyl quantization on the frame: K(j,l) uses the symbol at (x_j + y_l)/2 and
/// a kernel sampled on the doubled box, so distant pairs never alias onto near ones.
Eigen::MatrixXcd weyl_matrix(const SymbolDescriptor& a, const FrameConfig& frame);
CVec weyl_apply(const SymbolDescriptor& a, const CVec& v, const FrameConfig& frame);
CVec apply_matrix(const Eigen::MatrixXcd& op, const CVec& v);

/// Expansion of a # b through order k (k <= 4); symbol derivatives from 9-point central
/// stencils with x-step sqrt(h)/8 and xi-step the nearest multiple of the row spacing.
SymbolDescriptor moyal_truncated(const SymbolDescriptor& a, const SymbolDescriptor& b, unsigned k, double h);

struct PowerResult {
    double norm = 0.0;
    double residual = 0.0;
    bool converged() const { return residual <= 1e-3; }
};

/// Largest singular value of A by power iteration on A^* A (fixed seed).
PowerResult power_norm(const std::function<CVec(const CVec&)>& op, const std::function<CVec(const CVec&)>& adj,
                       std::size_t n, unsigned iterations = 50, unsigned seed = 12345);

struct MoyalBenchRow {
    double h;
    unsigned k;
    std::size_t points;
    double error;
    bool converged;
};

struct MoyalBench {
    std::vector<MoyalBenchRow> rows;
    std::vector<double> slopes;  ///< per requested k
};

/// Smallest power-of-two frame resolving the phase-space box [-X, X]^2 with 30% margin.
std::size_t frame_points_for(double h, double half_width, std::size_t min_points = 64);

/// Operator-norm error of Op(a)Op(b) - Op(a #_k b) per h and fitted log-log slopes.
MoyalBench moyal_error(const SymbolDescriptor& a, const SymbolDescriptor& b, const std::vector<unsigned>& ks,
                       const std::vector<double>& h_list, double half_width);

/// Default Gaussian test pair used by the bench.
SymbolDescriptor gaussian_symbol(double x0, double xi0, double width2);

double p_prime(double xi);

/// Gamma(x, xi) = gamma((x + p'(xi))/sqrt(h)), gamma = 1 on [-w/2, w/2], 0 off [-w, w].
SymbolDescriptor lambda_cutoff(double width, double h);

/// (1/h) Op^w(x + p'(xi)) v.
CVec calL(const CVec& v, const FrameConfig& frame);

/// Op^w(Gamma) Op(<xi>^rho) v.
CVec vsigma_lambda(const CVec& v, int rho, const FrameConfig& frame, double gamma_width);
CVec bracket_power(const CVec& v, int rho, const FrameConfig& frame);

enum class NormTarget { l2_to_l2, l2_to_linf };

struct OpnormRow {
    double h;
    double norm;
    bool converged;
};

struct OpnormProbe {
    std::vector<OpnormRow> rows;
    double exponent = 0.0;
};

using SymbolFamily = std::function<SymbolDescriptor(double h)>;

OpnormProbe opnorm_probe(const SymbolFamily& family, const std::vector<double>& h_list, NormTarget target,
                         double half_width, std::size_t points);

/// Lambda-localized family chi0(x) Gamma(x, xi) <(x + p'(xi))/sqrt(h)>^{-1}.
SymbolFamily lambda_localized_family(double gamma_width = 1.0, double x_window = 0.8);

}  // namespace kgflow
