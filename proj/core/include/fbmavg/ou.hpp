#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/spectral.hpp"

#include <optional>
#include <vector>

namespace fbmavg {

// dZ = (1/eps) B Z dt + dw, with -B = diag(lambda). The path passed to the
// operations below is the one actually driving the equation (for eps < 1 that
// is the time-scaled path).
struct OuSpec {
    DiagonalOperator B;
    CovarianceSpectrum Q;
    double eps = 1.0;
    double H2 = 0.75;

    void validate() const;
    double lambda_B() const { return B.lambda_min(); }
};

struct StationaryOuSample {
    SpectralVector value;
    double t = 0.0;
    double past_horizon = 0.0;
    double tail_estimate = 0.0;
};

inline constexpr double kOuTailTolerance = 1e-6;

// Exact exponential step for a piecewise-linear driver over one grid cell:
// z' = e^{-mu h} z + (1 - e^{-mu h}) / (mu h) * dw.
void ou_step(const Eigen::VectorXd& decay, const Eigen::VectorXd& gain, const double* z_in,
             const double* dw, double* z_out);

GridFunction ou_evolve(const OuSpec& spec, const SpectralVector& Z0, const FbmPath& omega, double t_start,
                       double t_end);

// Default past horizon 30 eps / lambda_B, doubled until the tail estimate
// exp(-(lambda_B/2) T_past / eps) * max |w(r) - w(t)| drops below 1e-6 or the
// support runs out. A fixed horizon can be forced.
StationaryOuSample ou_stationary(const OuSpec& spec, const FbmPath& omega, double t,
                                 std::optional<double> past_horizon = std::nullopt);

// t -> Z(theta_t w) on every path grid point of [t0, t1], with one shared
// horizon chosen at t0.
struct StationaryTrajectory {
    GridFunction Z;
    double past_horizon = 0.0;
    double tail_estimate = 0.0;
};
StationaryTrajectory ou_stationary_trajectory(const OuSpec& spec, const FbmPath& omega, double t0, double t1,
                                              std::optional<double> past_horizon = std::nullopt);

double ou_flow_check(const OuSpec& spec, const FbmPath& omega, double r, double t,
                     std::optional<double> past_horizon = std::nullopt);

// |Z(theta_{r/eps} w) - Z^eps(theta_r w_eps)| where omega is the unscaled
// path and spec.eps the scale.
double scaling_identity_check(const OuSpec& spec, const FbmPath& omega, double r);

struct SublinearityReport {
    std::vector<double> eps;
    std::vector<std::vector<double>> m;  // m[e][seed] = eps * sup_[0,T] |Z^eps(theta_s w)|
    std::vector<double> median;
    bool median_decreasing = false;
    double mean_sup_half = 0.0;  // mean of sup_[0,T] |Z| over the first half of the seeds
    double mean_sup_all = 0.0;
};

// The paths are unscaled (eps = 1) and must cover [-T_past, T / min(eps)].
SublinearityReport sublinearity_check(const OuSpec& spec, const std::vector<FbmPath>& ensemble, double T,
                                      const std::vector<double>& eps_list);

}  // namespace fbmavg
