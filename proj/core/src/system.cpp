#include "fbmavg/system.hpp"

#include "fbmavg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

DriftMap affine_g(double gx, double gy, double gc)
{
    return [=](const SpectralVector& x, const SpectralVector& y) -> SpectralVector {
        return (gx * x.array() + gy * y.array() + gc).matrix();
    };
}

}  // namespace

SystemSpec SystemSpec::with_eps(double e) const
{
    SystemSpec s = *this;
    s.eps = e;
    return s;
}

void SystemSpec::validate() const
{
    const std::size_t n = A.dim();
    if (n == 0) throw std::invalid_argument("system: empty spectrum for A");
    if (B.dim() != n) throw std::invalid_argument("system: A and B must have the same dimension");
    if (Q1.dim() != n || Q2.dim() != n) throw std::invalid_argument("system: noise spectra must match the dimension");
    if (!f || !g || !h) throw std::invalid_argument("system: coefficient maps f, g, h must be set");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("system: eps must lie in (0, 1]");
    hurst.validate();
    if (!(C1 >= 0.0) || !(C2 >= 0.0)) throw std::invalid_argument("system: C1 and C2 must be nonnegative");
    if (!(lambda_B() > C1))
        throw std::invalid_argument("system: lambda_B = " + std::to_string(lambda_B()) +
                                    " must exceed C1 = " + std::to_string(C1));
    if (!(f_bound >= 0.0)) throw std::invalid_argument("system: f must be declared bounded (f_bound >= 0)");
}

SystemSpec make_system(const CoefficientParams& p, const std::vector<double>& lambda_A,
                       const std::vector<double>& lambda_B, const std::vector<double>& q1,
                       const std::vector<double>& q2, const HurstPair& hurst, double eps)
{
    SystemSpec s;
    s.name = p.family;
    s.A = DiagonalOperator(lambda_A);
    s.B = DiagonalOperator(lambda_B);
    s.Q1 = CovarianceSpectrum(q1);
    s.Q2 = CovarianceSpectrum(q2);
    s.hurst = hurst;
    s.eps = eps;
    const std::size_t n = lambda_A.size();
    const double rn = std::sqrt(double(n));
    const double tanh2 = 4.0 / (3.0 * std::sqrt(3.0));  // max |tanh''|
    s.g = affine_g(p.g_x, p.g_y, p.g_const);
    s.C2 = std::abs(p.g_const) * rn;
    s.g_depends_on_x = p.g_x != 0.0;
    const double g_lip = std::max(std::abs(p.g_x), std::abs(p.g_y));

    if (p.family == "benchmark" || p.family == "y_independent") {
        const double fs = p.f_scale;
        if (p.family == "benchmark") {
            s.f = [fs](const SpectralVector& x, const SpectralVector& y) -> SpectralVector {
                return (fs * (x + y).array().tanh()).matrix();
            };
        } else {
            s.f = [fs](const SpectralVector& x, const SpectralVector&) -> SpectralVector {
                return (fs * x.array().tanh()).matrix();
            };
            s.f_depends_on_y = false;
        }
        const double hb = p.h_base, ha = p.h_amp;
        s.h = [hb, ha, n](const SpectralVector& x) -> Matrix {
            return (hb + ha * std::tanh(x(0))) * Matrix::Identity(Eigen::Index(n), Eigen::Index(n));
        };
        s.C1 = std::max(std::abs(fs), g_lip);
        s.f_bound = std::abs(fs) * rn;
        s.c_h = rn * (std::abs(hb) + std::abs(ha));
        s.c_Dh = rn * std::abs(ha);
        s.c_D2h = rn * std::abs(ha) * tanh2;
    } else if (p.family == "linear") {
        const double fl = p.f_lin;
        s.f = [fl](const SpectralVector& x, const SpectralVector&) -> SpectralVector { return fl * x; };
        s.f_depends_on_y = false;
        const double hb = p.h_base;
        s.h = [hb, n](const SpectralVector&) -> Matrix {
            return hb * Matrix::Identity(Eigen::Index(n), Eigen::Index(n));
        };
        s.C1 = std::max(std::abs(fl), g_lip);
        s.f_bound = fl == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        s.c_h = rn * std::abs(hb);
    } else if (p.family == "zero") {
        s.f = [n](const SpectralVector&, const SpectralVector&) -> SpectralVector {
            return SpectralVector::Zero(Eigen::Index(n));
        };
        s.g = s.f;
        s.h = [n](const SpectralVector&) -> Matrix { return Matrix::Zero(Eigen::Index(n), Eigen::Index(n)); };
        s.f_depends_on_y = false;
        s.g_depends_on_x = false;
        s.C1 = 0.0;
        s.C2 = 0.0;
        s.f_bound = 0.0;
    } else {
        throw std::invalid_argument("unknown coefficient family '" + p.family +
                                    "' (expected benchmark, y_independent, linear or zero)");
    }
    return s;
}

SystemSpec benchmark_system(double eps, const std::string& family)
{
    CoefficientParams p;
    p.family = family;
    const std::vector<double> q{1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0};
    return make_system(p, {1, 2, 3, 4}, {2, 3, 4, 5}, q, q, HurstPair{0.75, 0.55}, eps);
}

CoefficientAudit audit_coefficients(const SystemSpec& spec, std::size_t samples, std::uint64_t seed, double radius)
{
    spec.validate();
    CoefficientAudit a;
    const Eigen::Index n = Eigen::Index(spec.dim());
    auto rng = substream(seed, 0, 0x617564);
    std::uniform_real_distribution<double> U(-radius, radius);
    std::bernoulli_distribution close(0.5);
    auto draw = [&]() {
        SpectralVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = U(rng);
        return v;
    };
    for (std::size_t k = 0; k < samples; ++k) {
        const SpectralVector x1 = draw(), y1 = draw();
        SpectralVector x2 = draw(), y2 = draw();
        if (close(rng)) {
            // Nearby pairs probe the local slope.
            x2 = x1 + 1e-3 * draw();
            y2 = y1 + 1e-3 * draw();
        }
        const double d = (x1 - x2).norm() + (y1 - y2).norm();
        if (d > 0.0) {
            a.f_lipschitz = std::max(a.f_lipschitz, (spec.f(x1, y1) - spec.f(x2, y2)).norm() / d);
            a.g_lipschitz = std::max(a.g_lipschitz, (spec.g(x1, y1) - spec.g(x2, y2)).norm() / d);
        }
        const double dx = (x1 - x2).norm();
        if (dx > 0.0) a.h_lipschitz = std::max(a.h_lipschitz, (spec.h(x1) - spec.h(x2)).norm() / dx);
        a.f_sup = std::max(a.f_sup, spec.f(x1, y1).norm());
        a.h_sup = std::max(a.h_sup, spec.h(x1).norm());
    }
    const double slack = 1.001;
    a.pass = true;
    auto fail = [&](const std::string& what) {
        a.pass = false;
        if (!a.message.empty()) a.message += "; ";
        a.message += what;
    };
    if (a.f_lipschitz > spec.C1 * slack) fail("f Lipschitz quotient " + std::to_string(a.f_lipschitz) + " exceeds C1");
    if (a.g_lipschitz > spec.C1 * slack) fail("g Lipschitz quotient " + std::to_string(a.g_lipschitz) + " exceeds C1");
    if (a.f_sup > spec.f_bound * slack) fail("sup |f| " + std::to_string(a.f_sup) + " exceeds the declared bound");
    if (a.h_sup > spec.c_h * slack) fail("sup |h| " + std::to_string(a.h_sup) + " exceeds c_h");
    if (a.h_lipschitz > spec.c_Dh * slack) fail("h Lipschitz quotient " + std::to_string(a.h_lipschitz) + " exceeds c_Dh");
    const SpectralVector z = SpectralVector::Zero(n);
    if (spec.g(z, z).norm() > spec.C2 * slack + 1e-15) fail("|g(0,0)| exceeds C2");
    return a;
}

}  // namespace fbmavg
