#include "fbmavg/averaging.hpp"
#include "fbmavg/parallel.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace fbmavg;

namespace {

// E[0.5 tanh(a + sigma xi)], xi ~ N(0,1), by the trapezoid rule on [-12, 12].
double gauss_tanh(double a, double sigma)
{
    const int n = 4000;
    const double L = 12.0, h = 2 * L / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double z = -L + k * h;
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        s += w * std::tanh(a + sigma * z) * std::exp(-0.5 * z * z);
    }
    return 0.5 * s * h / std::sqrt(2 * M_PI);
}

// For the benchmark the frozen fast state is Gaussian per mode: an fOU with
// theta = lambda + 0.25, mean 0.5 x / theta and variance q^2 H Gamma(2H) theta^{-2H}.
SpectralVector fbar_oracle(const SystemSpec& s, const SpectralVector& x)
{
    const double H = s.hurst.H2;
    SpectralVector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double th = s.B.eigenvalue(std::size_t(i)) + 0.25;
        const double var = s.Q2.q_sq[std::size_t(i)] * H * std::tgamma(2 * H) * std::pow(th, -2 * H);
        out(i) = gauss_tanh(x(i) + 0.5 * x(i) / th, std::sqrt(var));
    }
    return out;
}

}  // namespace

TEST_CASE("Monte Carlo and time averages agree with the Gaussian oracle")
{
    const SystemSpec s = benchmark_system(1.0);
    SpectralVector x(4);
    x << 0.5, -0.3, 0.1, 0.8;
    const SpectralVector oracle = fbar_oracle(s, x);
    const DriftEstimate mc = average_drift_mc(s, x, 400, 77);
    const FbmPath path = sample_fast_path(s, 2000.0, 78);
    const DriftEstimate er = average_drift_ergodic(s, x, path, 2000.0);
    // 5e-3 covers the O(h) bias of the fast discretisation
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(mc.mean(i) - oracle(i)) <= mc.ci(i) + 5e-3);
        CHECK(std::abs(er.mean(i) - oracle(i)) <= er.ci(i) + 5e-3);
    }
    CHECK(mc.samples == 400);
}

TEST_CASE("y-independent drift averages to itself")
{
    const SystemSpec s = benchmark_system(1.0, "y_independent");
    const SpectralVector x = SpectralVector::Constant(4, 0.4);
    const FbmPath path = sample_fast_path(s, 50.0, 1);
    const DriftEstimate e = average_drift_ergodic(s, x, path, 50.0);
    CHECK((e.mean - s.f(x, SpectralVector::Zero(4))).norm() < 1e-12);
    CHECK(e.ci.norm() == 0.0);
    const DriftField fb = make_fbar(s, 10.0, 1, 0.1);
    CHECK((fb(x) - s.f(x, SpectralVector::Zero(4))).norm() == 0.0);
}

TEST_CASE("averaged drift Lipschitz bound")
{
    const SystemSpec s = benchmark_system(1.0);
    CHECK(fbar_lipschitz_bound(s) == doctest::Approx(0.5 + 0.25 / 1.5));
    const FbmPath path = sample_fast_path(s, 200.0, 4);
    std::vector<std::pair<SpectralVector, SpectralVector>> pairs;
    for (int k = 0; k < 10; ++k)
        pairs.emplace_back(SpectralVector::Constant(4, 0.1 * k), SpectralVector::Constant(4, 0.1 * k + 0.3));
    const auto est = [&](const SpectralVector& x) { return average_drift_ergodic(s, x, path, 200.0); };
    const FbarLipschitzReport r = fbar_lipschitz_audit(est, pairs, fbar_lipschitz_bound(s));
    CHECK(r.pass);
    CHECK(r.pairs_used == 10);
    pairs.resize(5);
    CHECK_THROWS(fbar_lipschitz_audit(est, pairs, 1.0));
}

TEST_CASE("lattice cache interpolates affine maps exactly and is order independent")
{
    Matrix M(3, 3);
    M << 1, 2, 0, -1, 0.5, 3, 0, 0, 1;
    SpectralVector b(3);
    b << 0.1, -0.2, 0.3;
    const auto affine = [M, b](const SpectralVector& x) -> SpectralVector { return M * x + b; };
    FbarCache serial(affine, 3, 0.1), threaded(affine, 3, 0.1);
    std::vector<SpectralVector> xs;
    for (int k = 0; k < 40; ++k) xs.push_back(SpectralVector::Constant(3, 0.037 * k - 0.7) + SpectralVector::LinSpaced(3, 0, 0.013 * k));
    std::vector<SpectralVector> a(xs.size()), c(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) a[k] = serial(xs[k]);
    parallel_for(xs.size(), 4, [&](std::size_t k) { c[k] = threaded(xs[xs.size() - 1 - k]); });
    for (std::size_t k = 0; k < xs.size(); ++k) {
        CHECK((a[k] - affine(xs[k])).norm() < 1e-12);
        CHECK((a[k] - c[xs.size() - 1 - k]).norm() == 0.0);
    }
    CHECK(serial.nodes() == threaded.nodes());
}

TEST_CASE("median")
{
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK(std::isnan(median({})));
}

TEST_CASE("smoothed ergodic residual decreases in T")
{
    const SystemSpec s = benchmark_system(1.0);
    const ErgodicResidualReport r = ergodic_residual_check(s, SpectralVector::Constant(4, 0.5), {25, 50, 100}, 32, 9, 4000);
    CHECK(r.decreasing);
    CHECK(r.rms.size() == 3);
}

TEST_CASE("Khasminskii auxiliary errors scale as expected")
{
    const SystemSpec s = benchmark_system(0.1);
    AuxStudyConfig c;
    c.seeds = 2;
    c.past = 64;
    const ScalingReport a = y1_y2_scaling(s, {0.1, 0.05}, 0.25, c);
    CHECK(a.ratio.front() == doctest::Approx(2.0).epsilon(0.3));
    // the guard linking eps and delta refuses an eps that is too large
    CHECK_THROWS(y_yhat_scaling(s, 0.1, {0.2, 0.1, 0.05}, c));
}

TEST_CASE("convergence experiment is reproducible and consistent")
{
    ConvergenceConfig c;
    c.eps_list = {0.2, 0.1};
    c.seeds = 2;
    c.T_erg = 100;
    c.solver.dt = 1.0 / 1280;
    c.h2 = 1.0 / 256;
    c.record_runtime = false;
    const SystemSpec s = benchmark_system(0.1);
    const ConvergenceTable a = convergence_experiment(s, c);
    c.jobs = 3;
    const ConvergenceTable b = convergence_experiment(s, c);
    std::ostringstream sa, sb;
    write_convergence_csv(sa, a);
    write_convergence_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("seed,eps,delta,e_sup,e_gamma,e_hat,e_xx,runtime_s\n", 0) == 0);
    for (const auto& r : a.rows) {
        CHECK(r.error.empty());
        CHECK(r.e_sup <= r.e_hat + r.e_xx + 1e-12);
    }
    const ConvergenceTable y = convergence_experiment(benchmark_system(0.1, "y_independent"), c);
    for (const auto& r : y.rows) CHECK(r.e_sup <= 2 * c.solver.picard_tol);
}
