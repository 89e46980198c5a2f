#include "fbmavg/ou.hpp"

#include "doctest.h"

#include <cmath>

using namespace fbmavg;

namespace {

// Stationary variance of int e^{-theta (t-s)} q dB^H_s with Var B^H(t) = t^{2H}.
double fou_variance(double q2, double H, double theta) { return q2 * H * std::tgamma(2 * H) * std::pow(theta, -2 * H); }

double sample_variance(const OuSpec& s, std::size_t M, std::uint64_t seed0)
{
    const UniformGrid g = UniformGrid::two_sided(40.0, 0.0, 1.0 / 64);
    double acc = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const FbmPath w = sample_trace_class_fbm(s.Q, s.H2, g, seed0 + m);
        const double z = ou_stationary(s, w, 0.0, 40.0).value(0);
        acc += z * z;
    }
    return acc / double(M);
}

}  // namespace

TEST_CASE("closed-form fOU stationary variance")
{
    const std::size_t M = 3000;
    for (double H : {0.5, 0.75}) {
        const OuSpec s{DiagonalOperator(std::vector<double>{1.5}), CovarianceSpectrum({2.0}), 1.0, H};
        const double target = fou_variance(2.0, H, 1.5);
        const double v = sample_variance(s, M, 500);
        // Var(Z^2) = 2 sigma^4 for a centred Gaussian
        CHECK(std::abs(v - target) < 4.0 * std::sqrt(2.0 / double(M)) * target);
    }
}

TEST_CASE("noise-free evolution is the semigroup")
{
    const OuSpec s{DiagonalOperator(std::vector<double>{1, 3}), CovarianceSpectrum({0.0, 0.0}), 0.2, 0.75};
    const FbmPath w = zero_path(2, UniformGrid::two_sided(0.0, 1.0, 1.0 / 128));
    SpectralVector z0(2);
    z0 << 1.0, -2.0;
    const GridFunction z = ou_evolve(s, z0, w, 0.0, 1.0);
    const SpectralVector end = z.at(z.size() - 1);
    CHECK(end(0) == doctest::Approx(std::exp(-1.0 / 0.2)).epsilon(1e-12));
    CHECK(end(1) == doctest::Approx(-2.0 * std::exp(-3.0 / 0.2)).epsilon(1e-12));
}

TEST_CASE("exponential step integrates a linear driver exactly")
{
    // z' = -mu z + c on one cell: z(h) = e^{-mu h} z + c (1 - e^{-mu h}) / mu
    const double mu = 2.0, h = 0.1, c = 3.0, z0 = 0.7;
    Eigen::VectorXd decay(1), gain(1);
    decay << std::exp(-mu * h);
    gain << -std::expm1(-mu * h) / (mu * h);
    const double dw = c * h;
    double out = 0.0;
    ou_step(decay, gain, &z0, &dw, &out);
    CHECK(out == doctest::Approx(std::exp(-mu * h) * z0 + c * -std::expm1(-mu * h) / mu).epsilon(1e-14));
}

TEST_CASE("flow property and time scaling")
{
    const OuSpec unit{DiagonalOperator(std::vector<double>{2, 3}), CovarianceSpectrum({1.0, 0.25}), 1.0, 0.55};
    const FbmPath w = sample_trace_class_fbm(unit.Q, unit.H2, UniformGrid::two_sided(64, 8, 1.0 / 64), 12);
    CHECK(ou_flow_check(unit, w, 0.5, 2.0) < 1e-10);
    OuSpec quarter = unit;
    quarter.eps = 0.25;
    CHECK(scaling_identity_check(quarter, w, 1.0) < 1e-12);
    const StationaryTrajectory tr = ou_stationary_trajectory(unit, w, 0.0, 1.0);
    CHECK(tr.Z.size() == 65);
    CHECK(tr.tail_estimate < kOuTailTolerance);
    CHECK((tr.Z.at(32) - ou_stationary(unit, w, 0.5, tr.past_horizon).value).norm() < 1e-12);
}

TEST_CASE("stationary value needs enough past")
{
    const OuSpec s{DiagonalOperator(std::vector<double>{1}), CovarianceSpectrum({1.0}), 1.0, 0.75};
    const FbmPath w = sample_trace_class_fbm(s.Q, 0.75, UniformGrid::two_sided(1.0, 1.0, 1.0 / 64), 1);
    CHECK_THROWS(ou_stationary(s, w, 0.0));
}

TEST_CASE("eps times the sup of Z shrinks with eps")
{
    const OuSpec s{DiagonalOperator(std::vector<double>{2, 3}), CovarianceSpectrum({1.0, 0.25}), 1.0, 0.55};
    std::vector<FbmPath> ens;
    for (std::uint64_t k = 0; k < 8; ++k)
        ens.push_back(sample_trace_class_fbm(s.Q, s.H2, UniformGrid::two_sided(40, 100, 1.0 / 16), 300 + k));
    const SublinearityReport r = sublinearity_check(s, ens, 1.0, {1.0, 0.1, 0.01});
    CHECK(r.median_decreasing);
    CHECK(r.median.size() == 3);
}
