#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/spectral.hpp"
#include "fbmavg/system.hpp"

#include <cstddef>
#include <vector>

namespace fbmavg {

// Fast equation with the slow state frozen at x; base.eps sets the time scale.
struct FrozenFastSpec {
    SystemSpec base;
    SpectralVector x;

    void validate() const;
    double rate_bound() const { return (base.lambda_B() - base.C1) / base.eps; }
};

struct FixedPointOptions {
    double tol = 1e-9;
    std::size_t max_doublings = 16;
    bool with_radius = true;
};

struct FixedPointResult {
    SpectralVector Y_F;
    SpectralVector Z;          // Z^eps(theta_r w2)
    double pullback_horizon = 0.0;
    double cauchy_gap = 0.0;
    double start_gap = 0.0;    // difference between the two pullback starts
    double rate_estimate = 0.0;
    double radius = 0.0;
    double radius_tail = 0.0;
    bool slow_attraction = false;  // lambda_B - C1 < 0.05 lambda_B
};

// One step of the frozen fast flow on a path cell of length h:
// y' = e^{-mu h} y + (1 - e^{-mu h}) / lambda * g(x, y) + phi(mu h) dw, mu = lambda / eps.
struct FastStepper {
    Eigen::VectorXd decay, drift_gain, noise_gain;
    FastStepper(const SystemSpec& spec, double h);
};

// Forward frozen flow on the (already scaled) path from grid index a to b.
// Rows of out, when given, receive every state from a to b.
SpectralVector fast_flow(const SystemSpec& spec, const SpectralVector& x, const FbmPath& scaled, std::size_t a,
                         std::size_t b, const SpectralVector& y0, PathMatrix* out = nullptr);

// Y_F^eps(theta_r w2, x) by pullback with horizons 2^k * 10 eps / (lambda_B - C1).
// omega2 is unscaled.
FixedPointResult pullback_fixed_point(const FrozenFastSpec& spec, const FbmPath& omega2, double r = 0.0,
                                      const FixedPointOptions& opt = {});

// t -> Y_F^eps(theta_t w2, x) on the scaled grid over [t0, t1].
GridFunction fixed_point_trajectory(const FrozenFastSpec& spec, const FbmPath& omega2, double t0, double t1,
                                    const FixedPointOptions& opt = {});

// Least-squares decay rate of |phi(t, w, y01) - phi(t, w, y02)| over
// [0.1 W, W], stopping early once the two trajectories merge.
struct RateFit {
    double rate = 0.0;
    std::size_t points = 0;
    bool merged_early = false;
};
RateFit attraction_rate(const FrozenFastSpec& spec, const FbmPath& omega2, const SpectralVector& y01,
                        const SpectralVector& y02, double window);

double lipschitz_in_x(const SystemSpec& base, const FbmPath& omega2, const SpectralVector& x1,
                      const SpectralVector& x2, double eps, double tol = 1e-10);

// R = 2 int_{-inf}^0 e^{(lambda_B - C1) q / eps} (1/eps) (C1 (|Z^eps(theta_{r+q} w2)| + |x|) + C2) dq
struct RadiusResult {
    double radius = 0.0;
    double tail = 0.0;
};
RadiusResult absorbing_radius(const FrozenFastSpec& spec, const FbmPath& omega2, double r = 0.0);

// |Y_F^eps(theta_r w2, x) - Y_F^1(theta_{r/eps} w2, x)|
double fixed_point_scaling_check(const FrozenFastSpec& spec, const FbmPath& omega2, double r);

struct FixedPointHolderReport {
    std::vector<std::size_t> strides;
    std::vector<double> seminorm;
    double spread = 0.0;   // max / min over strides
    double exponent = 0.0;  // structure-function estimate on the finest grid
};
FixedPointHolderReport fixed_point_holder_check(const FrozenFastSpec& spec, const FbmPath& omega2, double t0,
                                                double t1, double gamma);

// max over t of |phi(t, w, Y_F(w, x)) - Y_F(theta_t w, x)|
double fixed_point_invariance(const FrozenFastSpec& spec, const FbmPath& omega2, const std::vector<double>& times,
                              double tol = 1e-11);

// Ytilde_F + Z^eps at r, with Ytilde_F pulled back through the random equation
// driven by the stationary Z^eps trajectory.
SpectralVector conjugated_fixed_point(const FrozenFastSpec& spec, const FbmPath& omega2, double r = 0.0,
                                      double tol = 1e-11);

}  // namespace fbmavg
