#include "fbmavg/fixed_point.hpp"

#include "fbmavg/ou.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

OuSpec fast_ou(const SystemSpec& s)
{
    return OuSpec{s.B, s.Q2, s.eps, s.hurst.H2};
}

std::size_t steps_for(double T, double h)
{
    return static_cast<std::size_t>(std::ceil(T / h - 1e-9));
}

std::size_t base_steps(const FrozenFastSpec& spec, double h)
{
    return std::max<std::size_t>(1, steps_for(10.0 / spec.rate_bound(), h));
}

void check_x(const FrozenFastSpec& spec)
{
    spec.validate();
}

// Pullback with doubling horizons; run(s) must return the state at r after a
// pullback of s steps from the given start.
template <class Run>
FixedPointResult pullback_loop(const FrozenFastSpec& spec, std::size_t available, std::size_t s0, double h,
                               double tol, std::size_t max_doublings, const SpectralVector& ya,
                               const SpectralVector& yb, Run run)
{
    FixedPointResult res;
    res.slow_attraction = spec.base.lambda_B() - spec.base.C1 < 0.05 * spec.base.lambda_B();
    if (s0 > available) throw std::out_of_range("pullback: insufficient past support for the first horizon");
    SpectralVector prev = run(s0, ya);
    {
        const SpectralVector other = run(s0, yb);
        const double ratio = (prev - other).norm() / (ya - yb).norm();
        res.rate_estimate = ratio > 0.0 ? -std::log(ratio) / (double(s0) * h)
                                        : std::numeric_limits<double>::infinity();
    }
    std::size_t s = s0;
    for (std::size_t k = 1; k <= max_doublings; ++k) {
        if (2 * s > available) break;
        s *= 2;
        const SpectralVector cur = run(s, ya);
        res.cauchy_gap = (cur - prev).norm();
        prev = cur;
        const double scale = 1.0 + cur.norm();
        if (res.cauchy_gap < tol * scale) {
            res.start_gap = (cur - run(s, yb)).norm();
            if (res.start_gap < 2.0 * tol * scale) {
                res.Y_F = cur;
                res.pullback_horizon = double(s) * h;
                return res;
            }
        }
    }
    throw std::runtime_error("pullback did not converge: last gap " + std::to_string(res.cauchy_gap) +
                             " after horizon " + std::to_string(double(s) * h) +
                             " (lambda_B <= C1 or past support exhausted)");
}

}  // namespace

void FrozenFastSpec::validate() const
{
    base.validate();
    if (x.size() != Eigen::Index(base.dim())) throw std::invalid_argument("frozen fast spec: x dimension");
}

FastStepper::FastStepper(const SystemSpec& spec, double h)
{
    const Eigen::ArrayXd lam = spec.B.eigenvalues().array();
    const Eigen::ArrayXd mh = lam * (h / spec.eps);
    decay = (-mh).exp().matrix();
    drift_gain = ((1.0 - (-mh).exp()) / lam).matrix();
    noise_gain = ((1.0 - (-mh).exp()) / mh).matrix();
    for (Eigen::Index i = 0; i < mh.size(); ++i)
        if (mh(i) < 1e-8) noise_gain(i) = 1.0 - 0.5 * mh(i);
}

SpectralVector fast_flow(const SystemSpec& spec, const SpectralVector& x, const FbmPath& scaled, std::size_t a,
                         std::size_t b, const SpectralVector& y0, PathMatrix* out)
{
    if (b < a || b >= scaled.size()) throw std::out_of_range("fast_flow: index range outside the path");
    const FastStepper st(spec, scaled.grid.step);
    SpectralVector y = y0;
    if (out) {
        out->resize(Eigen::Index(b - a + 1), y0.size());
        out->row(0) = y.transpose();
    }
    for (std::size_t k = a; k < b; ++k) {
        const SpectralVector dw =
            (scaled.values.row(Eigen::Index(k + 1)) - scaled.values.row(Eigen::Index(k))).transpose();
        const SpectralVector gy = spec.g(x, y);
        y = (st.decay.array() * y.array() + st.drift_gain.array() * gy.array() + st.noise_gain.array() * dw.array())
                .matrix();
        if (out) out->row(Eigen::Index(k + 1 - a)) = y.transpose();
    }
    if (!y.allFinite()) throw std::runtime_error("fast_flow: non-finite state");
    return y;
}

FixedPointResult pullback_fixed_point(const FrozenFastSpec& spec, const FbmPath& omega2, double r,
                                      const FixedPointOptions& opt)
{
    check_x(spec);
    const FbmPath scaled = scale_time(omega2, spec.base.eps);
    const std::size_t ir = scaled.index_of(r);
    const double h = scaled.grid.step;
    const Eigen::Index n = spec.x.size();
    const SpectralVector ya = SpectralVector::Zero(n);
    const SpectralVector yb = SpectralVector::Constant(n, 10.0 + spec.x.norm());
    auto run = [&](std::size_t s, const SpectralVector& y0) {
        return fast_flow(spec.base, spec.x, scaled, ir - s, ir, y0);
    };
    FixedPointResult res =
        pullback_loop(spec, ir, base_steps(spec, h), h, opt.tol, opt.max_doublings, ya, yb, run);
    res.Z = ou_stationary(fast_ou(spec.base), scaled, r).value;
    if (opt.with_radius) {
        const RadiusResult rad = absorbing_radius(spec, omega2, r);
        res.radius = rad.radius;
        res.radius_tail = rad.tail;
    }
    return res;
}

GridFunction fixed_point_trajectory(const FrozenFastSpec& spec, const FbmPath& omega2, double t0, double t1,
                                    const FixedPointOptions& opt)
{
    FixedPointOptions o = opt;
    o.with_radius = false;
    const FixedPointResult start = pullback_fixed_point(spec, omega2, t0, o);
    const FbmPath scaled = scale_time(omega2, spec.base.eps);
    const std::size_t a = scaled.index_of(t0), b = scaled.index_of(t1);
    PathMatrix out;
    fast_flow(spec.base, spec.x, scaled, a, b, start.Y_F, &out);
    std::vector<double> grid(b - a + 1);
    for (std::size_t k = a; k <= b; ++k) grid[k - a] = scaled.time(k);
    return GridFunction(std::move(grid), std::move(out));
}

RateFit attraction_rate(const FrozenFastSpec& spec, const FbmPath& omega2, const SpectralVector& y01,
                        const SpectralVector& y02, double window)
{
    check_x(spec);
    if ((y01 - y02).norm() == 0.0) throw std::invalid_argument("attraction_rate: y01 and y02 must differ");
    if (!(window > 0.0)) throw std::invalid_argument("attraction_rate: window must be positive");
    const FbmPath scaled = scale_time(omega2, spec.base.eps);
    const std::size_t a = scaled.index_of(0.0);
    const std::size_t m = steps_for(window, scaled.grid.step);
    if (a + m >= scaled.size()) throw std::out_of_range("attraction_rate: window exceeds the path support");
    PathMatrix p1, p2;
    fast_flow(spec.base, spec.x, scaled, a, a + m, y01, &p1);
    fast_flow(spec.base, spec.x, scaled, a, a + m, y02, &p2);
    const std::size_t first = m / 10;
    double st = 0, sy = 0, stt = 0, sty = 0;
    RateFit fit;
    for (std::size_t k = first; k <= m; ++k) {
        const double d = (p1.row(Eigen::Index(k)) - p2.row(Eigen::Index(k))).norm();
        const double scale = 1.0 + p1.row(Eigen::Index(k)).norm();
        if (d <= 1e-13 * scale) {
            fit.merged_early = true;
            break;
        }
        const double t = double(k) * scaled.grid.step, y = std::log(d);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++fit.points;
    }
    if (fit.points < 3) throw std::runtime_error("attraction_rate: trajectories merged before the fit window; shrink it");
    const double np = double(fit.points);
    fit.rate = -(np * sty - st * sy) / (np * stt - st * st);
    return fit;
}

double lipschitz_in_x(const SystemSpec& base, const FbmPath& omega2, const SpectralVector& x1,
                      const SpectralVector& x2, double eps, double tol)
{
    const double dx = (x1 - x2).norm();
    if (dx == 0.0) throw std::invalid_argument("lipschitz_in_x: x1 and x2 must differ");
    FixedPointOptions o;
    o.tol = tol;
    o.with_radius = false;
    const SystemSpec s = base.with_eps(eps);
    const auto y1 = pullback_fixed_point({s, x1}, omega2, 0.0, o).Y_F;
    const auto y2 = pullback_fixed_point({s, x2}, omega2, 0.0, o).Y_F;
    return (y1 - y2).norm() / dx;
}

RadiusResult absorbing_radius(const FrozenFastSpec& spec, const FbmPath& omega2, double r)
{
    check_x(spec);
    const SystemSpec& b = spec.base;
    const FbmPath scaled = scale_time(omega2, b.eps);
    const double h = scaled.grid.step;
    const double kappa = spec.rate_bound();
    // Window 40 / kappa, shortened to what the path supports behind the OU
    // horizon 30 eps / lambda_B; the reported tail covers the truncation.
    const std::size_t ir = scaled.index_of(r);
    const std::size_t ou_steps = steps_for(30.0 * b.eps / b.lambda_B(), h);
    if (ir < ou_steps + steps_for(10.0 / kappa, h))
        throw std::out_of_range("absorbing_radius: insufficient past support");
    const std::size_t m = std::min(steps_for(40.0 / kappa, h), ir - ou_steps);
    const double t0 = scaled.time(ir - m);
    const StationaryTrajectory z = ou_stationary_trajectory(fast_ou(b), scaled, t0, r, double(ou_steps) * h);
    const double xn = spec.x.norm();
    auto integrand = [&](std::size_t k) { return (b.C1 * (z.Z.at(k).norm() + xn) + b.C2) / b.eps; };
    // Exact integral of e^{kappa q} against the piecewise-linear interpolant,
    // q measured from r (q <= 0).
    const double e = std::exp(kappa * h), em1 = std::expm1(kappa * h);
    const double w0 = em1 / kappa;
    const double w1 = (h * e) / kappa - em1 / (kappa * kappa);
    double sum = 0.0, fmax = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double qj = -double(m - j) * h;
        const double fa = integrand(j), fb = integrand(j + 1);
        fmax = std::max({fmax, fa, fb});
        sum += std::exp(kappa * qj) * (fa * w0 + (fb - fa) / h * w1);
    }
    RadiusResult res;
    res.radius = 2.0 * sum;
    res.tail = 2.0 * std::exp(-kappa * double(m) * h) * fmax / kappa;
    return res;
}

double fixed_point_scaling_check(const FrozenFastSpec& spec, const FbmPath& omega2, double r)
{
    FixedPointOptions o;
    o.tol = 1e-12;
    o.with_radius = false;
    const double eps = spec.base.eps;
    const auto y_eps = pullback_fixed_point(spec, omega2, r, o).Y_F;
    const FrozenFastSpec unit{spec.base.with_eps(1.0), spec.x};
    const auto y_one = pullback_fixed_point(unit, omega2, r / eps, o).Y_F;
    return (y_eps - y_one).norm();
}

FixedPointHolderReport fixed_point_holder_check(const FrozenFastSpec& spec, const FbmPath& omega2, double t0,
                                                double t1, double gamma)
{
    FixedPointHolderReport rep;
    GridFunction finest;
    for (std::size_t stride : {1u, 2u, 4u}) {
        const FbmPath p = stride == 1 ? omega2 : subsample(omega2, stride);
        const GridFunction traj = fixed_point_trajectory(spec, p, t0, t1);
        if (stride == 1) finest = traj;
        rep.strides.push_back(stride);
        rep.seminorm.push_back(holder_seminorm(traj, gamma));
    }
    const auto [lo, hi] = std::minmax_element(rep.seminorm.begin(), rep.seminorm.end());
    rep.spread = *lo > 0.0 ? *hi / *lo : (*hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    FbmPath wrapped;
    wrapped.grid = UniformGrid{finest.grid[1] - finest.grid[0], 0, finest.size() - 1};
    wrapped.values = finest.values.rowwise() - finest.values.row(0);
    rep.exponent = estimate_holder_exponent(wrapped);
    return rep;
}

double fixed_point_invariance(const FrozenFastSpec& spec, const FbmPath& omega2, const std::vector<double>& times,
                              double tol)
{
    FixedPointOptions o;
    o.tol = tol;
    o.with_radius = false;
    const FbmPath scaled = scale_time(omega2, spec.base.eps);
    const SpectralVector y0 = pullback_fixed_point(spec, omega2, 0.0, o).Y_F;
    const std::size_t a = scaled.index_of(0.0);
    double worst = 0.0;
    for (double t : times) {
        const SpectralVector fwd = fast_flow(spec.base, spec.x, scaled, a, scaled.index_of(t), y0);
        const SpectralVector direct = pullback_fixed_point(spec, omega2, t, o).Y_F;
        worst = std::max(worst, (fwd - direct).norm());
    }
    return worst;
}

SpectralVector conjugated_fixed_point(const FrozenFastSpec& spec, const FbmPath& omega2, double r, double tol)
{
    check_x(spec);
    const SystemSpec& b = spec.base;
    const FbmPath scaled = scale_time(omega2, b.eps);
    const double h = scaled.grid.step;
    const std::size_t ir = scaled.index_of(r);
    const FastStepper st(b, h);
    const OuSpec ou = fast_ou(b);
    const Eigen::Index n = spec.x.size();
    // The Z trajectory needs its own past horizon before the pullback start.
    const std::size_t ou_reserve = steps_for(30.0 * b.eps / b.lambda_B(), h) * 4;
    if (ir < ou_reserve) throw std::out_of_range("conjugated_fixed_point: insufficient past support");
    auto run = [&](std::size_t s, const SpectralVector& y0) {
        const StationaryTrajectory z = ou_stationary_trajectory(ou, scaled, scaled.time(ir - s), r);
        SpectralVector yt = y0;
        for (std::size_t k = 0; k < s; ++k) {
            const SpectralVector gy = b.g(spec.x, yt + z.Z.at(k));
            yt = (st.decay.array() * yt.array() + st.drift_gain.array() * gy.array()).matrix();
        }
        return SpectralVector(yt + z.Z.at(s));
    };
    const SpectralVector ya = SpectralVector::Zero(n);
    const SpectralVector yb = SpectralVector::Constant(n, 10.0 + spec.x.norm());
    // Start values are offsets of Ytilde; the loop only compares outcomes.
    return pullback_loop(spec, ir - ou_reserve, base_steps(spec, h), h, tol, 16, ya, yb, run).Y_F;
}

}  // namespace fbmavg
