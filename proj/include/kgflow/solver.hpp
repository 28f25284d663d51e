#pragma once

#include "kgflow/nonlinearity.hpp"
#include "kgflow/spectral.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgflow {

struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NaNError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Real fields u, u_t on a periodic grid at time t.
struct KGState {
    double t = 1.0;
    RVec u;
    RVec ut;
};

struct DataSpec {
    std::string kind = "gaussian";  ///< gaussian | lorentzian | compact-bump
    double width = 1.0;             ///< length scale of u0
    double center = 0.0;
    double velocity_weight = 0.0;   ///< u1 = velocity_weight * d/dx of the u0 profile
    double amplitude = 0.0;         ///< 0 means: normalize the budget to 1
};

struct InitialData {
    KGState state;
    double scale = 0.0;   ///< constant multiplying the unit profile before epsilon
    double budget = 0.0;  ///< budget of (scale*u0, scale*u1)
};

/// Sum |u0|_{H^{s+1}} + |u1|_{H^s} + |x u0|_{H^2} + |x u1|_{H^1}, by quadrature on the grid.
double data_budget(const RVec& u0, const RVec& u1, const Grid1D& g, double s);

InitialData make_initial(const DataSpec& spec, double epsilon, const Grid1D& g, double s);

struct SolverConfig {
    double dt = 0.0;  ///< 0 selects min(0.1, dx/4)
    double t_end = 1.0;
    double epsilon = 0.05;
    double sobolev_s = 2.0;
    double blowup_factor = 4.0;
};

/// Step size actually used: the largest 1/m (m integer) not above the requested dt,
/// so integer times fall on the time grid.
double effective_dt(const SolverConfig& cfg, const Grid1D& g);

/// Exact linear propagator of d_t^2 - d_x^2 + 1 over time tau.
KGState linear_propagate(const KGState& s, const Grid1D& g, double tau);

/// Lawson-RK4 integrator with the Klein-Gordon rotation applied exactly in Fourier space.
class Stepper {
public:
    Stepper(const Grid1D& g, CubicNonlinearity p);

    const Grid1D& grid() const { return g_; }
    const CubicNonlinearity& nonlinearity() const { return p_; }

    /// Advances s by dt and returns E_0 of the new state.
    double step(KGState& s, double dt);
    /// Pointwise P from (u, u_t) with spectral derivatives.
    RVec nonlinear_term(const RVec& u, const RVec& ut) const;

private:
    struct Spec {
        CVec u, v;
    };
    void rotate(Spec& y, double tau) const;
    Spec force(const Spec& y) const;
    Spec to_spec(const KGState& s) const;

    Grid1D g_;
    CubicNonlinearity p_;
    std::array<bool, 5> needs_{};
    RealFft fft_;
    RVec k_, omega_;
};

RVec evaluate_nonlinearity(const CubicNonlinearity& p, const RVec& u, const RVec& ut, const Grid1D& g);

/// Z u = t d_x u + x d_t u with x the cell coordinate.
RVec z_apply(const KGState& s, const Grid1D& g);

double energy0(const RVec& u, const RVec& ut, const Grid1D& g);

enum class EnergyField { dx, z };

/// E_N = sum_{k <= N} E_0(Gamma^k u); the Z family needs P for d_t Z u and supports N <= 1.
double energy(const KGState& s, const Grid1D& g, unsigned order, EnergyField which,
              const CubicNonlinearity& p = {});

struct NormRecord {
    double t, linf_u, sqrt_t_linf, e0, ez1, hs;
};

NormRecord measure_norms(const KGState& s, const Grid1D& g, const CubicNonlinearity& p, double sobolev_s);

using Observer = std::function<void(const KGState&)>;

struct RunResult {
    std::vector<NormRecord> norms;
    KGState final_state;
};

/// Advances from t = 1 to t_end; at every sample time (on the step grid) norms are
/// recorded and the observer is called. Throws BlowupError / NaNError with the partial
/// series attached through `partial` when given.
RunResult run(const SolverConfig& cfg, const Grid1D& g, const CubicNonlinearity& p,
              const KGState& initial, const std::vector<double>& sample_times,
              const Observer& observer = {}, std::vector<NormRecord>* partial = nullptr);

/// Sample times 1, 1+every, ... up to t_end, merged with the dyadic times 2^j.
std::vector<double> sample_schedule(double t_end, double every);

}  // namespace kgflow
