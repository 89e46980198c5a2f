#include "fbmavg/averaging.hpp"
#include "fbmavg/mild.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace fbmavg;

namespace {

SystemSpec quiet(const std::string& family, double eps)
{
    CoefficientParams p;
    p.family = family;
    return make_system(p, {1, 2}, {2, 3}, {0, 0}, {0, 0}, HurstPair{0.75, 0.55}, eps);
}

SolverConfig solver(double dt)
{
    SolverConfig c;
    c.dt = dt;
    return c;
}

}  // namespace

TEST_CASE("noise-free zero system follows both semigroups")
{
    const SystemSpec s = quiet("zero", 0.1);
    const NoisePair np = sample_noise_pair(s, 1.0, 1.0 / 64, 0.1, 1.0 / 64, 40.0, 1);
    SpectralVector X0(2), Y0(2);
    X0 << 1.0, -1.0;
    Y0 << 2.0, 0.5;
    const SolutionPath sol = solve_coupled(s, np.omega1, np.omega2, X0, Y0, 1.0, solver(1.0 / 64));
    const std::size_t k = sol.X.size() - 1;
    CHECK(sol.X.values(Eigen::Index(k), 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(sol.X.values(Eigen::Index(k), 1) == doctest::Approx(-std::exp(-2.0)).epsilon(1e-12));
    CHECK(sol.Y.values(32, 0) == doctest::Approx(2.0 * std::exp(-2.0 * 0.5 / 0.1)).epsilon(1e-10));
    CHECK(sol.diag.steps == 64);
}

TEST_CASE("averaged equation with a constant drift")
{
    // X' = -lambda X + c has X(t) = e^{-lambda t} X0 + c (1 - e^{-lambda t}) / lambda
    const SystemSpec s = quiet("zero", 1.0);
    const FbmPath w1 = zero_path(2, UniformGrid::one_sided(1.0, 100));
    SpectralVector c(2), X0(2);
    c << 0.3, -0.7;
    X0 << 1.0, 0.0;
    const GridFunction X = solve_averaged(s, [c](const SpectralVector&) { return c; }, w1, X0, 1.0, solver(0.01));
    for (int i = 0; i < 2; ++i) {
        const double l = i + 1;
        const double exact = std::exp(-l) * X0(i) + c(i) * -std::expm1(-l) / l;
        CHECK(X.values(100, i) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("fast noise grid must be a refinement of the solver grid")
{
    const SystemSpec s = benchmark_system(0.1);
    const NoisePair np = sample_noise_pair(s, 1.0, 1.0 / 64, 0.1, 1.0 / 7, 8.0, 1);
    CHECK_THROWS(fast_noise_on_grid(s, np.omega2, 1.0, 1.0 / 64));
    CHECK_THROWS(solver(-1.0).validate());
}

TEST_CASE("step halving changes the coupled solution little")
{
    const SystemSpec s = benchmark_system(0.1);
    const NoisePair np = sample_noise_pair(s, 1.0, 1.0 / 1600, 0.1, 1.0 / 160, 40.0, 3);
    const SpectralVector X0 = SpectralVector::Constant(4, 0.5), Y0 = SpectralVector::Ones(4);
    const double gap = coupled_refinement_gap(s, np.omega1, np.omega2, X0, Y0, 1.0, solver(1.0 / 800));
    CHECK(gap < 5e-3);
    const SolutionPath sol = solve_coupled(s, np.omega1, np.omega2, X0, Y0, 1.0, solver(1.0 / 800));
    std::ostringstream os;
    write_solution_csv(os, sol);
    CHECK(os.str().rfind("t,X_1,X_2,X_3,X_4,Y_1,Y_2,Y_3,Y_4\n", 0) == 0);
    CHECK(sol.diag.to_text().find("steps=800") != std::string::npos);
}

TEST_CASE("Picard iteration contracts and matches the time stepper")
{
    const SystemSpec s = benchmark_system(0.1);
    const NoisePair np = sample_noise_pair(s, 1.0, 1.0 / 64, 0.1, 1.0 / 64, 40.0, 5);
    const SpectralVector X0 = SpectralVector::Constant(4, 0.5), Y0 = SpectralVector::Ones(4);
    const SolutionPath p = picard_solve(s, np.omega1, np.omega2, X0, Y0, 1.0, 32, solver(1.0 / 32));
    CHECK(p.diag.picard_converged);
    CHECK(p.diag.contraction_factor < 1.0);
    const SolutionPath e = solve_coupled(s, np.omega1, np.omega2, X0, Y0, 1.0, solver(1.0 / 64));
    double gap = 0.0;
    for (std::size_t k = 0; k < p.X.size(); ++k) gap = std::max(gap, (p.X.at(k) - e.X.at(2 * k)).norm());
    CHECK(gap < 0.05);
}

TEST_CASE("contraction constants decay in rho")
{
    const SystemSpec s = benchmark_system(0.1);
    const NoisePair np = sample_noise_pair(s, 1.0, 1.0 / 64, 0.1, 1.0 / 64, 40.0, 6);
    const SpectralVector X0 = SpectralVector::Constant(4, 0.5), Y0 = SpectralVector::Ones(4);
    const RhoSweep tt = integral_part_sweep(s, np.omega1, np.omega2, X0, Y0, 1.0, 32, solver(1.0 / 32), {1, 10, 100});
    CHECK(tt.decreasing);
    const RhoSweep cf = contraction_factor_sweep(s, np.omega1, np.omega2, X0, Y0, 1.0, 32, solver(1.0 / 32), {1, 10, 100});
    CHECK(cf.value.back() < cf.value.front());
}

TEST_CASE("kernel integral special cases")
{
    // s = 0 gives the Beta function, a = b = 0 the exponential average
    for (auto [a, b] : {std::pair{-0.4, -0.5}, std::pair{0.2, -0.7}}) {
        const double beta = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 2);
        CHECK(K_integral(a, b, 0.0) == doctest::Approx(beta).epsilon(1e-10));
    }
    CHECK(K_integral(0.0, 0.0, 3.0) == doctest::Approx(-std::expm1(-3.0) / 3.0).epsilon(1e-12));
    AppendixParams p;
    p.rhos = {1, 10, 100};
    const AppendixReport r = appendix_inequalities_check(p);
    CHECK(r.K_decreasing);
    CHECK(r.inq_bounded);
}

TEST_CASE("a-priori report on identical solutions")
{
    const SystemSpec s = quiet("zero", 1.0);
    const NoisePair np = sample_noise_pair(s, 1.0, 1.0 / 64, 0.01, 1.0 / 64, 40.0, 1);
    const SpectralVector X0 = SpectralVector::Ones(2), Y0 = SpectralVector::Ones(2);
    std::vector<SolutionPath> sols;
    for (double e : {1.0, 0.1}) sols.push_back(solve_coupled(s.with_eps(e), np.omega1, np.omega2, X0, Y0, 1.0, solver(1.0 / 64)));
    const AprioriReport r = apriori_bounds_check(sols, X0, HolderParams{0.55, 1.0, true});
    CHECK(r.x_spread == doctest::Approx(1.0));
    CHECK(r.x_eps_independent);
    CHECK(r.y_decreasing);
}
