#include "fbmavg/spectral.hpp"

#include "doctest.h"

#include <cmath>

using namespace fbmavg;

TEST_CASE("semigroup and fractional powers act mode by mode")
{
    const DiagonalOperator A(std::vector<double>{1, 2, 3, 4});
    SpectralVector v(4);
    v << 1.0, -2.0, 0.5, 3.0;
    const SpectralVector s = semigroup_apply(A, 0.3, v);
    for (int i = 0; i < 4; ++i) CHECK(s(i) == doctest::Approx(std::exp(-0.3 * (i + 1)) * v(i)).epsilon(1e-15));
    const SpectralVector p = fractional_power_apply(A, 0.5, v);
    for (int i = 0; i < 4; ++i) CHECK(p(i) == doctest::Approx(std::sqrt(double(i + 1)) * v(i)));
    const SpectralVector back = fractional_power_apply(A, -0.5, p);
    CHECK((back - v).norm() < 1e-14);
    CHECK(A.lambda_min() == 1.0);
    CHECK(A.scaled(2.0).eigenvalue(3) == 8.0);
}

TEST_CASE("operator rejects unsorted or nonpositive spectra")
{
    CHECK_THROWS(DiagonalOperator(std::vector<double>{}));
    CHECK_THROWS(DiagonalOperator(std::vector<double>{0.0, 1.0}));
}

namespace {

GridFunction line(double c, std::size_t n, double T)
{
    std::vector<double> g(n + 1);
    PathMatrix v(Eigen::Index(n + 1), 1);
    for (std::size_t k = 0; k <= n; ++k) {
        g[k] = T * double(k) / double(n);
        v(Eigen::Index(k), 0) = c * g[k];
    }
    return GridFunction(g, v);
}

}  // namespace

TEST_CASE("Holder seminorm of a line")
{
    // sup |c (t - s)| / |t - s|^gamma is attained at the widest pair
    const GridFunction f = line(3.0, 200, 2.0);
    CHECK(holder_seminorm(f, 0.4) == doctest::Approx(3.0 * std::pow(2.0, 0.6)));
    CHECK(sup_norm(f) == doctest::Approx(6.0));
    const double unweighted = weighted_holder_norm(f, HolderParams{0.4, 0.0, false});
    CHECK(unweighted == doctest::Approx(6.0 + 3.0 * std::pow(2.0, 0.6)));
}

TEST_CASE("weighted norm decreases in rho")
{
    const GridFunction f = line(1.0, 100, 1.0);
    double prev = 1e300;
    for (double rho : {0.0, 1.0, 10.0, 100.0}) {
        const double v = weighted_holder_norm(f, HolderParams{0.5, rho, true});
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("semigroup constants match direct maximisation")
{
    const DiagonalOperator A(std::vector<double>{1, 2, 3, 4});
    const double sigma = 0.5, T = 1.0;
    const std::size_t n = 256;
    const SemigroupBoundReport r = semigroup_bound_check(A, sigma, T, n);
    // Oracles on a dense grid of the admissible range t >= 10 T / (2n).
    double c1 = 0.0, c2 = 0.0;
    for (int k = 0; k <= 200000; ++k) {
        const double t = 10.0 * T / double(2 * n) + (T - 10.0 * T / double(2 * n)) * k / 200000.0;
        for (int i = 1; i <= 4; ++i) {
            const double l = i;
            c1 = std::max(c1, std::pow(l * t, sigma) * std::exp(-(l - 1.0) * t));
            c2 = std::max(c2, -std::expm1(-l * t) / std::pow(l * t, sigma));
        }
    }
    CHECK(r.semi1.c_refined == doctest::Approx(c1).epsilon(1e-3));
    CHECK(r.semi2.c_refined == doctest::Approx(c2).epsilon(1e-3));
    CHECK_FALSE(r.any_diverging());
}

TEST_CASE("grid function arithmetic")
{
    const GridFunction a = line(2.0, 10, 1.0), b = line(1.0, 10, 1.0);
    const GridFunction d = a - b;
    CHECK(sup_norm(d) == doctest::Approx(1.0));
    CHECK(a.stride(5).size() == 3);
    CHECK(a.slice(2, 5).size() == 3);
    CHECK(is_uniform(a.grid));
}
