#include "fbmavg/mild.hpp"

#include "fbmavg/csv.hpp"
#include "fbmavg/ou.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

std::size_t integer_ratio(double a, double b, const std::string& what)
{
    const double r = a / b;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-6 * std::max(1.0, k))
        throw std::invalid_argument(what + " (ratio " + std::to_string(r) + " is not a positive integer)");
    return static_cast<std::size_t>(k);
}

Eigen::VectorXd phi1(const Eigen::VectorXd& lambda, double dt)
{
    const Eigen::ArrayXd z = lambda.array() * dt;
    Eigen::VectorXd out = ((-(-z).exp() + 1.0) / z).matrix();
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (z(i) < 1e-8) out(i) = 1.0 - 0.5 * z(i);
    return out;
}

std::vector<double> time_grid(std::size_t steps, double dt)
{
    std::vector<double> g(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) g[k] = double(k) * dt;
    return g;
}

void check_finite(const SpectralVector& v, std::size_t step, const char* what)
{
    if (!v.allFinite())
        throw std::runtime_error(std::string("solver blow-up: non-finite ") + what + " at step " + std::to_string(step));
}

// Thins a grid function to at most ~1025 points for diagnostics.
GridFunction thin(const GridFunction& f)
{
    const std::size_t stride = std::max<std::size_t>(1, (f.size() - 1) / 1024);
    return f.stride(stride);
}

std::size_t check_steps(double T, double dt)
{
    if (T < 0.0) throw std::invalid_argument("solver: negative horizon");
    if (T == 0.0) return 0;
    return integer_ratio(T, dt, "solver: T must be a multiple of dt");
}

}  // namespace

void SolverConfig::validate() const
{
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
    if (!(picard_tol > 0.0)) throw std::invalid_argument("SolverConfig: picard_tol must be positive");
    if (!(rho >= 0.0)) throw std::invalid_argument("SolverConfig: rho must be nonnegative");
    frac.validate();
}

std::string Diagnostics::to_text() const
{
    std::ostringstream os;
    os << "steps=" << steps << '\n'
       << "dt=" << format_double(dt) << '\n'
       << "eps=" << format_double(eps) << '\n'
       << "x_weighted_norm=" << format_double(x_weighted_norm) << '\n'
       << "y_sup=" << format_double(y_sup) << '\n'
       << "z_sup=" << format_double(z_sup) << '\n'
       << "ou_past_horizon=" << format_double(ou_past_horizon) << '\n'
       << "ou_tail=" << format_double(ou_tail) << '\n'
       << "refinement_gap=" << format_double(refinement_gap) << '\n'
       << "picard_iterations=" << picard_iterations << '\n'
       << "contraction_factor=" << format_double(contraction_factor) << '\n'
       << "picard_converged=" << (picard_converged ? 1 : 0) << '\n';
    return os.str();
}

FastNoise fast_noise_on_grid(const SystemSpec& spec, const FbmPath& omega2, double T, double dt)
{
    const FbmPath scaled = scale_time(omega2, spec.eps);
    const std::size_t steps = check_steps(T, dt);
    FastNoise fn;
    OuSpec ou{spec.B, spec.Q2, spec.eps, spec.hurst.H2};
    if (steps == 0) {
        const StationaryOuSample s = ou_stationary(ou, scaled, 0.0);
        PathMatrix v(1, s.value.size());
        v.row(0) = s.value.transpose();
        fn.Z = GridFunction({0.0}, v);
        fn.past_horizon = s.past_horizon;
        fn.tail = s.tail_estimate;
        return fn;
    }
    const std::size_t stride = integer_ratio(dt, scaled.grid.step, "solver: dt must be a multiple of eps * (omega2 step)");
    const StationaryTrajectory tr = ou_stationary_trajectory(ou, scaled, 0.0, double(steps * stride) * scaled.grid.step);
    fn.Z = tr.Z.stride(stride);
    fn.Z.grid = time_grid(steps, dt);
    fn.past_horizon = tr.past_horizon;
    fn.tail = tr.tail_estimate;
    return fn;
}

SolutionPath solve_coupled(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                           const SpectralVector& X0, const SpectralVector& Y0, double T, const SolverConfig& cfg)
{
    spec.validate();
    cfg.validate();
    const Eigen::Index n = Eigen::Index(spec.dim());
    if (X0.size() != n || Y0.size() != n) throw std::invalid_argument("solve_coupled: initial data dimension");
    if (omega1.modes() != spec.dim() || omega2.modes() != spec.dim())
        throw std::invalid_argument("solve_coupled: noise dimension");
    const double dt = cfg.dt;
    const std::size_t steps = check_steps(T, dt);
    const FastNoise fn = fast_noise_on_grid(spec, omega2, T, dt);

    PathMatrix X(Eigen::Index(steps + 1), n), Y(Eigen::Index(steps + 1), n);
    X.row(0) = X0.transpose();
    Y.row(0) = Y0.transpose();
    SolutionPath sol;
    sol.diag.dt = dt;
    sol.diag.eps = spec.eps;
    sol.diag.steps = steps;
    sol.diag.ou_past_horizon = fn.past_horizon;
    sol.diag.ou_tail = fn.tail;
    sol.diag.z_sup = sup_norm(fn.Z);
    if (steps > 0) {
        const std::size_t s1 = integer_ratio(dt, omega1.grid.step, "solve_coupled: dt must be a multiple of the omega1 step");
        const std::size_t i0 = omega1.index_of(0.0);
        omega1.index_of(double(steps * s1) * omega1.grid.step);
        const Eigen::VectorXd lamA = spec.A.eigenvalues(), lamB = spec.B.eigenvalues();
        const Eigen::VectorXd decA = (-lamA * dt).array().exp().matrix();
        const Eigen::VectorXd gainA = phi1(lamA, dt);
        const Eigen::VectorXd decB = (-lamB * (dt / spec.eps)).array().exp().matrix();
        const Eigen::VectorXd gainB = ((1.0 - decB.array()) / lamB.array()).matrix();

        SpectralVector x = X0, yt = Y0 - fn.Z.at(0), y = Y0, dw(n), drift(n);
        for (std::size_t k = 0; k < steps; ++k) {
            dw = (omega1.values.row(Eigen::Index(i0 + (k + 1) * s1)) - omega1.values.row(Eigen::Index(i0 + k * s1))).transpose();
            const SpectralVector fx = spec.f(x, y);
            const SpectralVector gx = spec.g(x, y);
            drift.noalias() = dt * fx + spec.h(x) * dw;
            x = decA.cwiseProduct(x) + gainA.cwiseProduct(drift);
            yt = decB.cwiseProduct(yt) + gainB.cwiseProduct(gx);
            y = yt + fn.Z.at(k + 1);
            check_finite(x, k + 1, "X");
            check_finite(y, k + 1, "Y");
            X.row(Eigen::Index(k + 1)) = x.transpose();
            Y.row(Eigen::Index(k + 1)) = y.transpose();
        }
    }
    const std::vector<double> grid = time_grid(steps, dt);
    sol.X = GridFunction(grid, std::move(X));
    sol.Y = GridFunction(grid, std::move(Y));
    sol.diag.y_sup = sup_norm(sol.Y);
    if (steps > 0)
        sol.diag.x_weighted_norm = weighted_holder_norm(thin(sol.X), HolderParams{cfg.frac.gamma, cfg.rho, true});
    if (cfg.check_refinement && steps > 0)
        sol.diag.refinement_gap = coupled_refinement_gap(spec, omega1, omega2, X0, Y0, T, cfg);
    return sol;
}

double coupled_refinement_gap(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                              const SpectralVector& X0, const SpectralVector& Y0, double T, const SolverConfig& cfg)
{
    SolverConfig coarse = cfg, fine = cfg;
    coarse.check_refinement = false;
    fine.check_refinement = false;
    fine.dt = cfg.dt / 2.0;
    const SolutionPath a = solve_coupled(spec, omega1, omega2, X0, Y0, T, coarse);
    const SolutionPath b = solve_coupled(spec, omega1, omega2, X0, Y0, T, fine);
    double gap = 0.0;
    for (std::size_t k = 0; k < a.X.size(); ++k) gap = std::max(gap, (a.X.at(k) - b.X.at(2 * k)).norm());
    return gap;
}

GridFunction solve_averaged(const SystemSpec& spec, const DriftField& fbar, const FbmPath& omega1,
                            const SpectralVector& X0, double T, const SolverConfig& cfg)
{
    spec.validate();
    cfg.validate();
    const Eigen::Index n = Eigen::Index(spec.dim());
    if (X0.size() != n) throw std::invalid_argument("solve_averaged: initial data dimension");
    const double dt = cfg.dt;
    const std::size_t steps = check_steps(T, dt);
    PathMatrix X(Eigen::Index(steps + 1), n);
    X.row(0) = X0.transpose();
    if (steps > 0) {
        const std::size_t s1 = integer_ratio(dt, omega1.grid.step, "solve_averaged: dt must be a multiple of the omega1 step");
        const std::size_t i0 = omega1.index_of(0.0);
        omega1.index_of(double(steps * s1) * omega1.grid.step);
        const Eigen::VectorXd lamA = spec.A.eigenvalues();
        const Eigen::VectorXd decA = (-lamA * dt).array().exp().matrix();
        const Eigen::VectorXd gainA = phi1(lamA, dt);
        SpectralVector x = X0, dw(n), drift(n);
        for (std::size_t k = 0; k < steps; ++k) {
            dw = (omega1.values.row(Eigen::Index(i0 + (k + 1) * s1)) - omega1.values.row(Eigen::Index(i0 + k * s1))).transpose();
            drift.noalias() = dt * fbar(x) + spec.h(x) * dw;
            x = decA.cwiseProduct(x) + gainA.cwiseProduct(drift);
            check_finite(x, k + 1, "averaged X");
            X.row(Eigen::Index(k + 1)) = x.transpose();
        }
    }
    return GridFunction(time_grid(steps, dt), std::move(X));
}

void write_solution_csv(std::ostream& os, const SolutionPath& sol)
{
    const std::size_t n = sol.X.dim();
    os << "t";
    for (std::size_t i = 0; i < n; ++i) os << ",X_" << (i + 1);
    for (std::size_t i = 0; i < n; ++i) os << ",Y_" << (i + 1);
    os << '\n';
    for (std::size_t k = 0; k < sol.X.size(); ++k) {
        os << format_double(sol.X.grid[k]);
        for (std::size_t i = 0; i < n; ++i) os << ',' << format_double(sol.X.values(Eigen::Index(k), Eigen::Index(i)));
        for (std::size_t i = 0; i < n; ++i) os << ',' << format_double(sol.Y.values(Eigen::Index(k), Eigen::Index(i)));
        os << '\n';
    }
}

AprioriReport apriori_bounds_check(const std::vector<SolutionPath>& sols, const SpectralVector& X0,
                                   const HolderParams& norm)
{
    AprioriReport r;
    for (const auto& s : sols) {
        r.eps.push_back(s.diag.eps);
        r.x_ratio.push_back(weighted_holder_norm(thin(s.X), norm) / (X0.norm() + 1.0));
        r.y_scaled.push_back(s.diag.eps * sup_norm(s.Y));
    }
    if (sols.empty()) return r;
    const double mx = *std::max_element(r.x_ratio.begin(), r.x_ratio.end());
    const double mn = *std::min_element(r.x_ratio.begin(), r.x_ratio.end());
    r.x_spread = mn > 0.0 ? mx / mn : (mx == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    r.x_eps_independent = r.x_spread < 2.0;
    std::vector<std::size_t> order(sols.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.eps[a] > r.eps[b]; });
    r.y_decreasing = true;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (!(r.y_scaled[order[i]] < r.y_scaled[order[i - 1]]) && r.y_scaled[order[i - 1]] > 0.0) r.y_decreasing = false;
    return r;
}

AppendixParams AppendixParams::from_frac(const FracParams& p)
{
    AppendixParams a;
    a.a = -p.alpha;
    a.b = p.alpha - 1.0;
    a.d = p.beta - p.gamma;
    return a;
}

void AppendixParams::validate() const
{
    if (!(a > -1.0 && b > -1.0 && a + b >= -1.0 - 1e-12 && d > 0.0))
        throw std::invalid_argument("appendix: need a > -1, b > -1, a + b >= -1, d > 0");
    if (!(rho_a >= 0.0 && rho_d >= 0.0 && rho_a + rho_d < 1.0))
        throw std::invalid_argument("appendix: need nonnegative a, d with a + d < 1");
    if (!(T > 0.0)) throw std::invalid_argument("appendix: T must be positive");
    for (double r : rhos)
        if (!(r >= 1.0)) throw std::invalid_argument("appendix: rho must be at least 1");
}

double K_integral(double a, double b, double s)
{
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double v, double vc) {
        // vc = 1 - v computed without cancellation near the right endpoint
        const double one_minus = (v > 0.5) ? vc : 1.0 - v;
        return std::exp(-s * one_minus) * std::pow(v, a) * std::pow(one_minus, b);
    };
    return integrator.integrate(f, 0.0, 1.0);
}

namespace {

// Golden-section refinement of a dense log-grid maximum of a positive function on (lo, hi].
template <class F>
double sup_on_log_grid(F fn, double lo, double hi)
{
    const int n = 120;
    const double la = std::log(lo), lb = std::log(hi);
    double best = 0.0;
    int arg = 0;
    std::vector<double> xs(n + 1);
    for (int k = 0; k <= n; ++k) {
        xs[k] = la + (lb - la) * k / n;
        const double v = fn(std::exp(xs[k]));
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    double a = xs[std::max(0, arg - 1)], b = xs[std::min(n, arg + 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = fn(std::exp(c)), fd = fn(std::exp(d));
    for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = fn(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = fn(std::exp(d));
        }
    }
    return std::max({best, fc, fd});
}

}  // namespace

AppendixReport appendix_inequalities_check(const AppendixParams& p)
{
    p.validate();
    AppendixReport r;
    r.rho = p.rhos;
    // Second ratio depends on s = rho t only: s^{1-a-d} int_0^1 e^{-s(1-v)} (1-v)^-a v^-d dv.
    auto inq = [&](double s) { return std::pow(s, 1.0 - p.rho_a - p.rho_d) * K_integral(-p.rho_d, -p.rho_a, s); };
    for (double rho : p.rhos) {
        r.K.push_back(sup_on_log_grid([&](double t) { return std::pow(t, p.d) * K_integral(p.a, p.b, rho * t); },
                                      1e-9 * p.T, p.T));
        r.inq_ratio.push_back(sup_on_log_grid(inq, 1e-9, rho * p.T));
    }
    r.inq_bound = sup_on_log_grid(inq, 1e-9, 1e9);
    r.K_decreasing = true;
    for (std::size_t i = 1; i < r.K.size(); ++i)
        if (!(r.K[i] < r.K[i - 1])) r.K_decreasing = false;
    r.inq_bounded = std::isfinite(r.inq_bound);
    for (double v : r.inq_ratio)
        if (!(v <= r.inq_bound * (1.0 + 1e-6))) r.inq_bounded = false;
    return r;
}

}  // namespace fbmavg
