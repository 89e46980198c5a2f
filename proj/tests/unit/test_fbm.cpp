#include "fbmavg/fbm.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace fbmavg;

namespace {

double fbm_cov(double H, double s, double t)
{
    return 0.5 * (std::pow(std::abs(s), 2 * H) + std::pow(std::abs(t), 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

struct Moments {
    double mean = 0.0, var = 0.0;
};

Moments moments(const std::vector<double>& x)
{
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= double(x.size());
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= double(x.size() - 1);
    return m;
}

}  // namespace

TEST_CASE("grid helpers")
{
    const UniformGrid g = UniformGrid::two_sided(2.0, 3.0, 0.25);
    CHECK(g.n_past == 8);
    CHECK(g.n_future == 12);
    CHECK(g.time(8) == 0.0);
    CHECK(g.t_min() == -2.0);
    CHECK(g.t_max() == 3.0);
    const UniformGrid o = UniformGrid::one_sided(1.0, 16);
    CHECK(o.size() == 17);
    CHECK(o.step == 1.0 / 16);
}

TEST_CASE("Hurst window")
{
    CHECK_NOTHROW(HurstPair{0.75, 0.55}.validate());
    CHECK_THROWS(HurstPair{0.4, 0.75}.validate());
    CHECK_THROWS(HurstPair{0.75, 0.2}.validate());  // H2 must exceed 1 - H1
}

TEST_CASE("sample covariance matches the fBm kernel")
{
    const double H = 0.75;
    const UniformGrid g = UniformGrid::two_sided(1.0, 1.0, 1.0 / 32);
    const std::size_t M = 4000;
    std::vector<double> a(M), b(M), ab(M), inc(M);
    for (std::size_t m = 0; m < M; ++m) {
        const std::vector<double> w = sample_fbm_1d(H, g, 1000 + m);
        CHECK(w[g.n_past] == 0.0);
        const double wm = w.front(), wp = w.back(), wh = w[g.n_past + 16];
        a[m] = wm;
        b[m] = wp;
        ab[m] = wm * wp;
        inc[m] = wp - wh;
    }
    // four standard errors of the sample variance of a Gaussian
    const double se = std::sqrt(2.0 / double(M));
    CHECK(std::abs(moments(a).var - 1.0) < 4 * se);
    CHECK(std::abs(moments(b).var - 1.0) < 4 * se);
    CHECK(std::abs(moments(inc).var / std::pow(0.5, 2 * H) - 1.0) < 4 * se);
    const double c = fbm_cov(H, -1.0, 1.0);
    CHECK(std::abs(moments(ab).mean - c) < 4 * std::sqrt((1.0 + c * c) / double(M)));
}

TEST_CASE("doubled normalisation doubles the variance")
{
    CHECK(covariance_kappa(Normalization::standard) == 0.5);
    CHECK(covariance_kappa(Normalization::doubled) == 1.0);
    const UniformGrid g = UniformGrid::one_sided(1.0, 8);
    const auto s = sample_fbm_1d(0.6, g, 9, Normalization::standard);
    const auto p = sample_fbm_1d(0.6, g, 9, Normalization::doubled);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(p[k] == doctest::Approx(std::sqrt(2.0) * s[k]));
}

TEST_CASE("trace-class path scales modes by q")
{
    const UniformGrid g = UniformGrid::one_sided(1.0, 64);
    const FbmPath p = sample_trace_class_fbm(CovarianceSpectrum({4.0, 0.0}), 0.75, g, 3);
    CHECK(p.modes() == 2);
    CHECK(p.values.col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.values.col(0).cwiseAbs().maxCoeff() > 0.0);
    const FbmPath z = sample_trace_class_fbm(CovarianceSpectrum({0.0, 0.0}), 0.75, g, 3);
    CHECK(z.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampling is deterministic per seed")
{
    const UniformGrid g = UniformGrid::two_sided(2.0, 2.0, 1.0 / 64);
    const CovarianceSpectrum Q({1.0, 0.25});
    const FbmPath a = sample_trace_class_fbm(Q, 0.6, g, 42), b = sample_trace_class_fbm(Q, 0.6, g, 42);
    const FbmPath c = sample_trace_class_fbm(Q, 0.6, g, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("shift, scale, subsample and restrict")
{
    const UniformGrid g = UniformGrid::two_sided(2.0, 2.0, 1.0 / 8);
    const FbmPath w = sample_trace_class_fbm(CovarianceSpectrum({1.0}), 0.7, g, 5);
    const FbmPath s = shift(w, 0.5);
    CHECK(s.value(0.0)(0) == 0.0);
    CHECK(s.value(1.0)(0) == doctest::Approx(w.value(1.5)(0) - w.value(0.5)(0)));
    const FbmPath e = scale_time(w, 0.25);
    CHECK(e.grid.step == doctest::Approx(1.0 / 32));
    CHECK(e.value(0.25)(0) == w.value(1.0)(0));
    const FbmPath sub = subsample(w, 2);
    CHECK(sub.grid.step == 0.25);
    CHECK(sub.value(1.0)(0) == w.value(1.0)(0));
    const FbmPath r = restrict_path(w, -1.0, 1.0);
    CHECK(r.size() == 17);
    CHECK(r.value(-1.0)(0) == w.value(-1.0)(0));
    CHECK_THROWS(w.index_of(0.01));
    CHECK_THROWS(w.index_of(5.0));
}

TEST_CASE("Holder exponent estimate recovers H")
{
    for (double H : {0.6, 0.75, 0.9}) {
        const FbmPath p = sample_trace_class_fbm(CovarianceSpectrum({1.0}), H, UniformGrid::one_sided(1.0, 8192), 77);
        CHECK(estimate_holder_exponent(p) == doctest::Approx(H).epsilon(0.1));
    }
}

TEST_CASE("CSV round trip is exact")
{
    const FbmPath p = sample_trace_class_fbm(CovarianceSpectrum({1.0, 0.5}), 0.75, UniformGrid::two_sided(1, 1, 0.125), 8);
    std::stringstream ss;
    write_csv(ss, p);
    const FbmPath q = read_csv(ss);
    CHECK(q.values == p.values);
    CHECK(q.grid.n_past == p.grid.n_past);
    CHECK(q.grid.step == p.grid.step);
}
