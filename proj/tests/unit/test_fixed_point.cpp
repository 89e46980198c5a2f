#include "fbmavg/averaging.hpp"
#include "fbmavg/fixed_point.hpp"
#include "fbmavg/ou.hpp"

#include "doctest.h"

#include <cmath>

using namespace fbmavg;

namespace {

SystemSpec with_q2(const std::string& family, std::vector<double> q2, double eps)
{
    CoefficientParams p;
    p.family = family;
    return make_system(p, {1, 2, 3, 4}, {2, 3, 4, 5}, {1, 1, 1, 1}, std::move(q2), HurstPair{0.75, 0.55}, eps);
}

const std::vector<double> kQ{1.0, 0.25, 1.0 / 9, 1.0 / 16};

}  // namespace

TEST_CASE("noise-free linear fast equation has the algebraic fixed point")
{
    // 0 = -lambda y + 0.5 x - 0.25 y  =>  y = 0.5 x / (lambda + 0.25)
    const SystemSpec s = with_q2("benchmark", {0, 0, 0, 0}, 0.1);
    SpectralVector x(4);
    x << 1.0, -0.5, 2.0, 0.25;
    const FbmPath w = sample_fast_path(s, 1.0, 3);
    const FixedPointResult r = pullback_fixed_point(FrozenFastSpec{s, x}, w);
    for (int i = 0; i < 4; ++i) CHECK(r.Y_F(i) == doctest::Approx(0.5 * x(i) / (i + 2 + 0.25)).epsilon(1e-8));
    // Z = 0: R = 2 (C1 |x| + C2) / (lambda_B - C1)
    CHECK(r.radius == doctest::Approx(2.0 * 0.5 * x.norm() / 1.5).epsilon(1e-6));
    CHECK(r.Y_F.norm() <= r.radius);
}

TEST_CASE("without a fast drift the fixed point is the stationary OU value")
{
    const SystemSpec s = with_q2("zero", kQ, 0.1);
    const FbmPath w = sample_fast_path(s, 4.0, 8);
    const FrozenFastSpec fs{s, SpectralVector::Zero(4)};
    const OuSpec ou{s.B, s.Q2, 0.1, s.hurst.H2};
    for (double r : {0.0, 0.1, 0.25}) {
        const SpectralVector z = ou_stationary(ou, scale_time(w, 0.1), r).value;
        CHECK((pullback_fixed_point(fs, w, r).Y_F - z).norm() < 1e-8);
    }
}

TEST_CASE("Lipschitz ratio equals the linear response")
{
    // For linear g the noise cancels in the difference: dY_i = 0.5 dx_i / (lambda_i + 0.25).
    const SystemSpec s = with_q2("benchmark", kQ, 0.05);
    const FbmPath w = sample_fast_path(s, 1.0, 13);
    SpectralVector x1(4), x2(4);
    x1 << 0.3, -1.0, 0.7, 1.5;
    x2 << -0.2, 0.4, 1.1, -0.9;
    SpectralVector d(4);
    for (int i = 0; i < 4; ++i) d(i) = 0.5 * (x1(i) - x2(i)) / (i + 2 + 0.25);
    const double oracle = d.norm() / (x1 - x2).norm();
    CHECK(lipschitz_in_x(s, w, x1, x2, 0.05) == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(oracle <= 0.5 / 1.5);
}

TEST_CASE("attraction rate of a scalar linear flow")
{
    // difference of two solutions decays like exp(-(lambda + 0.25) t / eps)
    CoefficientParams p;
    const SystemSpec s = make_system(p, {1}, {2}, {1}, {1}, HurstPair{0.75, 0.55}, 0.1);
    const FbmPath w = sample_fast_path(s, 10.0, 21);
    const FrozenFastSpec fs{s, SpectralVector::Constant(1, 0.2)};
    const RateFit f = attraction_rate(fs, w, SpectralVector::Zero(1), SpectralVector::Ones(1), 10.0 / fs.rate_bound());
    CHECK(f.rate == doctest::Approx(2.25 / 0.1).epsilon(0.02));
    CHECK(f.points >= 3);
}

TEST_CASE("identities of the pullback construction")
{
    const SystemSpec s = with_q2("benchmark", kQ, 0.1);
    const FbmPath w = sample_fast_path(s, 8.0, 4, FastPathConfig{1.0 / 64, 128});
    const FrozenFastSpec fs{s, SpectralVector::Constant(4, 0.5)};
    const double h = 0.1 / 64;
    CHECK(fixed_point_invariance(fs, w, {8 * h, 64 * h, 320 * h}) < 1e-9);
    CHECK(fixed_point_scaling_check(FrozenFastSpec{s.with_eps(0.25), fs.x}, w, 1.0) < 1e-10);
    CHECK((conjugated_fixed_point(fs, w, 0.0) - pullback_fixed_point(fs, w).Y_F).norm() < 1e-9);
    const FixedPointResult r = pullback_fixed_point(fs, w, 0.5);
    CHECK(r.cauchy_gap < 1e-9 * (1 + r.Y_F.norm()));
    CHECK(r.Y_F.norm() <= r.radius);
    CHECK_FALSE(r.slow_attraction);
}

TEST_CASE("fixed point trajectory inherits the fast Holder regularity")
{
    const SystemSpec s = with_q2("benchmark", kQ, 1.0);
    const FbmPath w = sample_fast_path(s, 64.0, 2);
    const FixedPointHolderReport r = fixed_point_holder_check(FrozenFastSpec{s, SpectralVector::Zero(4)}, w, 0.0, 64.0, 0.45);
    CHECK(r.exponent == doctest::Approx(0.55).epsilon(0.2));
    CHECK(r.spread < 2.0);
}

TEST_CASE("fixed point trajectory matches pointwise pullbacks")
{
    const SystemSpec s = with_q2("benchmark", kQ, 0.1);
    const FbmPath w = sample_fast_path(s, 2.0, 9);
    const FrozenFastSpec fs{s, SpectralVector::Constant(4, -0.3)};
    const GridFunction tr = fixed_point_trajectory(fs, w, 0.0, 0.1);
    CHECK(tr.size() == 65);
    CHECK((tr.at(64) - pullback_fixed_point(fs, w, 0.1).Y_F).norm() < 1e-8);
}
