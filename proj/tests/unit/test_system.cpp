#include "fbmavg/system.hpp"

#include "doctest.h"

#include <cmath>

using namespace fbmavg;

TEST_CASE("benchmark system layout")
{
    const SystemSpec s = benchmark_system(0.1);
    CHECK(s.dim() == 4);
    CHECK(s.lambda_A() == 1.0);
    CHECK(s.lambda_B() == 2.0);
    CHECK(s.eps == 0.1);
    CHECK(s.C1 == 0.5);
    CHECK(s.Q2.q_sq[3] == doctest::Approx(1.0 / 16));
    CHECK_NOTHROW(s.validate());
    CHECK(s.with_eps(0.02).eps == 0.02);
}

TEST_CASE("coefficients evaluate to their formulas")
{
    const SystemSpec s = benchmark_system(1.0);
    SpectralVector x(4), y(4);
    x << 0.1, -0.2, 0.3, 0.4;
    y << 1.0, 0.5, -0.5, 0.0;
    const SpectralVector f = s.f(x, y), g = s.g(x, y);
    for (int i = 0; i < 4; ++i) {
        CHECK(f(i) == doctest::Approx(0.5 * std::tanh(x(i) + y(i))));
        CHECK(g(i) == doctest::Approx(0.5 * x(i) - 0.25 * y(i)));
    }
    const Matrix h = s.h(x);
    CHECK(h(0, 0) == doctest::Approx(0.5 + 0.25 * std::tanh(0.1)));
    CHECK(h(0, 1) == 0.0);
}

TEST_CASE("coefficient audit against declared constants")
{
    for (const char* fam : {"benchmark", "y_independent", "zero"}) {
        const CoefficientAudit a = audit_coefficients(benchmark_system(1.0, fam), 300, 5);
        CHECK_MESSAGE(a.pass, fam, ": ", a.message);
    }
}

TEST_CASE("fast contraction hypothesis is enforced")
{
    CoefficientParams p;
    p.g_x = 3.0;  // C1 = 3 exceeds lambda_B = 2
    CHECK_THROWS_AS(make_system(p, {1, 2}, {2, 3}, {1, 1}, {1, 1}, HurstPair{0.75, 0.75}).validate(), std::invalid_argument);
    CHECK_THROWS(benchmark_system(1.0, "no_such_family"));
}

TEST_CASE("y-independent family declares its structure")
{
    const SystemSpec s = benchmark_system(1.0, "y_independent");
    CHECK_FALSE(s.f_depends_on_y);
    SpectralVector x = SpectralVector::Constant(4, 0.3);
    CHECK((s.f(x, SpectralVector::Zero(4)) - s.f(x, SpectralVector::Ones(4))).norm() == 0.0);
}
