#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/spectral.hpp"
#include "fbmavg/system.hpp"
#include "fbmavg/young.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fbmavg {

struct SolverConfig {
    double dt = 1.0 / 4096.0;
    double picard_tol = 1e-8;
    double rho = 10.0;
    FracParams frac = FracParams::with_default_alpha(0.7, 0.55);
    std::size_t picard_max_iter = 200;
    bool check_refinement = false;

    void validate() const;
};

struct Diagnostics {
    std::size_t steps = 0;
    double dt = 0.0;
    double eps = 1.0;
    double x_weighted_norm = 0.0;  // ||X||_{gamma, rho, ~}
    double y_sup = 0.0;
    double z_sup = 0.0;            // sup over [0,T] of |Z^eps(theta_t w2)|
    double ou_past_horizon = 0.0;
    double ou_tail = 0.0;
    double refinement_gap = std::numeric_limits<double>::quiet_NaN();
    std::size_t picard_iterations = 0;
    double contraction_factor = std::numeric_limits<double>::quiet_NaN();
    bool picard_converged = false;

    std::string to_text() const;
};

struct SolutionPath {
    GridFunction X;
    GridFunction Y;
    Diagnostics diag;
};

// Z^eps(theta_t w2) on the grid t = k dt, k = 0..T/dt. omega2 is the unscaled
// two-sided path; dt must be a multiple of eps * (step of omega2).
struct FastNoise {
    GridFunction Z;
    double past_horizon = 0.0;
    double tail = 0.0;
};
FastNoise fast_noise_on_grid(const SystemSpec& spec, const FbmPath& omega2, double T, double dt);

// Exponential Euler: X_{n+1} = S_A(dt) X_n + phi(dt) (dt f(X_n, Y_n) + h(X_n) dw1_n),
// Y = Ytilde + Z^eps with Ytilde driven by g through S_{B/eps}.
SolutionPath solve_coupled(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                           const SpectralVector& X0, const SpectralVector& Y0, double T, const SolverConfig& cfg);

GridFunction solve_averaged(const SystemSpec& spec, const DriftField& fbar, const FbmPath& omega1,
                            const SpectralVector& X0, double T, const SolverConfig& cfg);

// sup |X_dt - X_{dt/2}| on the common grid.
double coupled_refinement_gap(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                              const SpectralVector& X0, const SpectralVector& Y0, double T, const SolverConfig& cfg);

void write_solution_csv(std::ostream& os, const SolutionPath& sol);

// ---- Operator T and Picard iteration on a coarse grid -----------------------

// Pair (X, Y) stacked column-wise, 2N columns.
GridFunction stack_pair(const GridFunction& X, const GridFunction& Y);

struct OperatorTParts {
    GridFunction linear;    // S_A(t) X0 and S_B(t/eps)(Y0 - Z(0)) + Z(t)
    GridFunction integral;  // drift convolutions plus the Zahle term
    GridFunction total() const;
};

// Evaluated on the grid of u (uniform, t_0 = 0). omega1 must contain the
// grid of u.
OperatorTParts operator_T_parts(const SystemSpec& spec, const GridFunction& u, const FbmPath& omega1,
                                const GridFunction& Z, const SpectralVector& X0, const SpectralVector& Y0,
                                const FracParams& frac);

SolutionPath operator_T_apply(const SystemSpec& spec, const SolutionPath& u, const FbmPath& omega1,
                              const FbmPath& omega2, const SpectralVector& X0, const SpectralVector& Y0,
                              const SolverConfig& cfg);

// n coarse steps on [0,T]; iterates until the weighted increment is below
// picard_tol. A contraction factor >= 1 over five consecutive iterations
// stops the iteration with picard_converged = false.
SolutionPath picard_solve(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                          const SpectralVector& X0, const SpectralVector& Y0, double T, std::size_t n,
                          const SolverConfig& cfg);

struct RhoSweep {
    std::vector<double> rho;
    std::vector<double> value;
    bool decreasing = false;
};

// max |T(u) - T(v)| / |u - v| in the (gamma, rho, ~) norm over constant,
// ramp and exp(rho t) shaped perturbations of the coarse solution.
RhoSweep contraction_factor_sweep(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                                  const SpectralVector& X0, const SpectralVector& Y0, double T, std::size_t n,
                                  const SolverConfig& cfg, const std::vector<double>& rhos);

// Smallest C(rho) with |I(u)| <= C(rho) (1 + |u|) over a family of test paths,
// I the integral part of T.
RhoSweep integral_part_sweep(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                        const SpectralVector& X0, const SpectralVector& Y0, double T, std::size_t n,
                        const SolverConfig& cfg, const std::vector<double>& rhos);

// ---- A-priori bounds and appendix inequalities ------------------------------

struct AprioriReport {
    std::vector<double> eps;
    std::vector<double> x_ratio;   // ||X^eps||_{gamma,rho,~} / (|X0| + 1)
    std::vector<double> y_scaled;  // eps sup |Y^eps|
    double x_spread = 0.0;         // max / min of x_ratio
    bool x_eps_independent = false;
    bool y_decreasing = false;
};

AprioriReport apriori_bounds_check(const std::vector<SolutionPath>& sols, const SpectralVector& X0,
                                   const HolderParams& norm);

struct AppendixParams {
    double a = -0.425;  // exponents of K(rho): v^a (1-v)^b, t^d
    double b = -0.575;
    double d = 0.15;
    double T = 1.0;
    double rho_a = 0.4;  // exponents of the second inequality
    double rho_d = 0.4;
    std::vector<double> rhos{1.0, 10.0, 100.0, 1000.0};

    static AppendixParams from_frac(const FracParams& p);
    void validate() const;
};

struct AppendixReport {
    std::vector<double> rho;
    std::vector<double> K;
    std::vector<double> inq_ratio;  // sup_t of the second ratio at each rho
    double inq_bound = 0.0;         // sup over all t > 0 of the rescaled ratio
    bool K_decreasing = false;
    bool inq_bounded = false;
};

// K(rho) = sup_t t^d int_0^1 exp(-rho t (1-v)) v^a (1-v)^b dv and
// int_0^t exp(-rho (t-r)) (t-r)^-a r^-d dr / rho^{a+d-1}.
AppendixReport appendix_inequalities_check(const AppendixParams& p);
double K_integral(double a, double b, double s);

}  // namespace fbmavg
