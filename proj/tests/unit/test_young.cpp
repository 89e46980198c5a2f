#include "fbmavg/young.hpp"

#include "doctest.h"

#include <cmath>

using namespace fbmavg;

namespace {

std::vector<double> uniform(std::size_t n, double T)
{
    std::vector<double> g(n + 1);
    for (std::size_t k = 0; k <= n; ++k) g[k] = T * double(k) / double(n);
    return g;
}

GridFunction scalar(const std::vector<double>& g, double (*f)(double))
{
    PathMatrix v(Eigen::Index(g.size()), 1);
    for (std::size_t k = 0; k < g.size(); ++k) v(Eigen::Index(k), 0) = f(g[k]);
    return GridFunction(g, v);
}

OperatorPath scalar_op(const std::vector<double>& g, double (*f)(double))
{
    std::vector<Matrix> m;
    for (double t : g) m.push_back(Matrix::Constant(1, 1, f(t)));
    return OperatorPath(g, m);
}

const FracParams kFrac = FracParams::with_default_alpha(0.7, 0.55);

}  // namespace

TEST_CASE("fractional parameters")
{
    const FracParams p = FracParams::with_default_alpha(0.7, 0.55);
    CHECK(p.alpha == doctest::Approx(0.425));
    CHECK_NOTHROW(p.validate());
    CHECK_THROWS(FracParams{0.2, 0.7, 0.55}.validate());  // alpha below 1 - beta
}

TEST_CASE("left Weyl derivative of constants and lines")
{
    const auto g = uniform(256, 1.0);
    const double a = 0.4;
    const double c = std::tgamma(1.0 - a);
    const OperatorPath one = OperatorPath::constant(g, Matrix::Constant(1, 1, 2.0));
    for (double r : {0.25, 0.5, 1.0})
        CHECK(weyl_left_derivative(one, a, 0.0, r)(0, 0) == doctest::Approx(2.0 / (c * std::pow(r, a))).epsilon(1e-9));
    // D^a_{0+} t = t^{1-a} / Gamma(2 - a)
    const OperatorPath lin = scalar_op(g, [](double t) { return t; });
    for (double r : {0.25, 0.5, 1.0})
        CHECK(weyl_left_derivative(lin, a, 0.0, r)(0, 0) ==
              doctest::Approx(std::pow(r, 1.0 - a) / std::tgamma(2.0 - a)).epsilon(1e-6));
}

TEST_CASE("integral against a smooth driver matches the Riemann-Stieltjes value")
{
    // int_0^1 cos(t) d(t^2) = 2 (sin 1 + cos 1 - 1)
    const double exact = 2.0 * (std::sin(1.0) + std::cos(1.0) - 1.0);
    double prev = 1.0;
    for (std::size_t n : {64, 128, 256}) {
        const auto g = uniform(n, 1.0);
        const GridFunction om = scalar(g, [](double t) { return t * t; });
        const OperatorPath psi = scalar_op(g, [](double t) { return std::cos(t); });
        const double err = std::abs(zahle_integral(psi, om, kFrac, 0.0, 1.0)(0) - exact);
        CHECK(err < 1e-3);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("identity integrand returns increments")
{
    const FbmPath w = sample_trace_class_fbm(CovarianceSpectrum({1.0, 0.3}), 0.75, UniformGrid::one_sided(1.0, 512), 17);
    std::vector<double> g(w.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = w.time(k);
    const GridFunction om(g, w.values);
    const OperatorPath id = OperatorPath::constant(g, Matrix::Identity(2, 2));
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.25, 0.5}}) {
        const SpectralVector inc = w.value(b) - w.value(a);
        CHECK((zahle_integral(id, om, kFrac, a, b) - inc).norm() < 1e-3 * inc.norm());
        CHECK((young_sum_integral(id, om, a, b) - inc).norm() < 1e-12);
    }
}

TEST_CASE("Zahle integral is additive over adjacent windows")
{
    const FbmPath w = sample_trace_class_fbm(CovarianceSpectrum({1.0}), 0.75, UniformGrid::one_sided(1.0, 512), 4);
    std::vector<double> g(w.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = w.time(k);
    const GridFunction om(g, w.values);
    const OperatorPath psi = scalar_op(g, [](double t) { return 1.0 + std::sin(4 * t); });
    const double whole = zahle_integral(psi, om, kFrac, 0.0, 1.0)(0);
    const double parts = zahle_integral(psi, om, kFrac, 0.0, 0.5)(0) + zahle_integral(psi, om, kFrac, 0.5, 1.0)(0);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-3));
}

TEST_CASE("ratio of the integral to its a-priori bound")
{
    const FbmPath w = sample_trace_class_fbm(CovarianceSpectrum({1.0}), 0.75, UniformGrid::one_sided(1.0, 512), 21);
    std::vector<double> g(w.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = w.time(k);
    const GridFunction om(g, w.values);
    const Lemma1Report r = lemma1_bound_check(scalar_op(g, [](double t) { return std::cos(3 * t); }), om, kFrac, 0, 1);
    CHECK(r.bounded);
    CHECK(r.window_lengths.size() == 4);
    CHECK(r.overall_max > 0.0);
    CHECK(r.overall_max < 10.0);
}
