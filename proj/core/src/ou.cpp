#include "fbmavg/ou.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbmavg {

namespace {

struct StepCoefficients {
    Eigen::VectorXd decay;
    Eigen::VectorXd gain;
};

StepCoefficients step_coefficients(const OuSpec& spec, double h)
{
    const Eigen::ArrayXd mu_h = spec.B.eigenvalues().array() * (h / spec.eps);
    StepCoefficients c;
    c.decay = (-mu_h).exp().matrix();
    c.gain = ((-(-mu_h).exp() + 1.0) / mu_h).matrix();
    for (Eigen::Index i = 0; i < mu_h.size(); ++i)
        if (mu_h(i) < 1e-8) c.gain(i) = 1.0 - 0.5 * mu_h(i);
    return c;
}

void check_path(const OuSpec& spec, const FbmPath& omega)
{
    if (omega.modes() != spec.B.dim()) throw std::invalid_argument("OU: path dimension differs from the operator");
}

// Runs the recursion from index a (starting at zero) up to index b, writing
// every state from index keep_from on into out (rows relative to keep_from).
SpectralVector run_from_zero(const OuSpec& spec, const FbmPath& omega, std::size_t a, std::size_t b,
                             PathMatrix* out = nullptr, std::size_t keep_from = 0)
{
    const auto c = step_coefficients(spec, omega.grid.step);
    const Eigen::Index n = Eigen::Index(spec.B.dim());
    SpectralVector z = SpectralVector::Zero(n), next(n), dw(n);
    if (out && a >= keep_from) out->row(Eigen::Index(a - keep_from)) = z.transpose();
    for (std::size_t k = a; k < b; ++k) {
        dw = (omega.values.row(Eigen::Index(k + 1)) - omega.values.row(Eigen::Index(k))).transpose();
        ou_step(c.decay, c.gain, z.data(), dw.data(), next.data());
        z.swap(next);
        if (out && k + 1 >= keep_from) out->row(Eigen::Index(k + 1 - keep_from)) = z.transpose();
    }
    return z;
}

double max_deviation(const FbmPath& omega, std::size_t a, std::size_t b, std::size_t ref)
{
    double m = 0.0;
    for (std::size_t k = a; k <= b; ++k)
        m = std::max(m, (omega.values.row(Eigen::Index(k)) - omega.values.row(Eigen::Index(ref))).norm());
    return m;
}

struct Horizon {
    std::size_t steps = 0;
    double tail = 0.0;
};

// Horizon in grid steps before index t_idx.
Horizon choose_horizon(const OuSpec& spec, const FbmPath& omega, std::size_t t_idx,
                       std::optional<double> past_horizon)
{
    const double h = omega.grid.step;
    const double rate = 0.5 * spec.lambda_B() / spec.eps;
    auto steps_for = [&](double T) { return static_cast<std::size_t>(std::ceil(T / h - 1e-9)); };
    auto tail_for = [&](std::size_t s) {
        return std::exp(-rate * double(s) * h) * max_deviation(omega, t_idx - s, t_idx, t_idx);
    };
    if (past_horizon) {
        const std::size_t s = steps_for(*past_horizon);
        if (s > t_idx) throw std::out_of_range("OU: insufficient past support for the requested horizon");
        return {s, tail_for(s)};
    }
    std::size_t s = steps_for(30.0 * spec.eps / spec.lambda_B());
    if (s > t_idx) throw std::out_of_range("OU: insufficient past support for the default horizon");
    double tail = tail_for(s);
    while (tail >= kOuTailTolerance && 2 * s <= t_idx) {
        s *= 2;
        tail = tail_for(s);
    }
    return {s, tail};
}

}  // namespace

void OuSpec::validate() const
{
    if (B.dim() == 0) throw std::invalid_argument("OuSpec: empty operator");
    if (Q.dim() != B.dim()) throw std::invalid_argument("OuSpec: covariance dimension differs from operator");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("OuSpec: eps must lie in (0,1]");
    if (!(H2 > 0.0 && H2 < 1.0)) throw std::invalid_argument("OuSpec: H2 must lie in (0,1)");
}

void ou_step(const Eigen::VectorXd& decay, const Eigen::VectorXd& gain, const double* z_in, const double* dw,
             double* z_out)
{
    for (Eigen::Index i = 0; i < decay.size(); ++i) z_out[i] = decay(i) * z_in[i] + gain(i) * dw[i];
}

GridFunction ou_evolve(const OuSpec& spec, const SpectralVector& Z0, const FbmPath& omega, double t_start,
                       double t_end)
{
    spec.validate();
    check_path(spec, omega);
    if (Z0.size() != Eigen::Index(spec.B.dim())) throw std::invalid_argument("ou_evolve: Z0 dimension");
    const std::size_t a = omega.index_of(t_start), b = omega.index_of(t_end);
    if (b < a) throw std::invalid_argument("ou_evolve: t_end before t_start");
    const auto c = step_coefficients(spec, omega.grid.step);
    const Eigen::Index n = Z0.size();
    PathMatrix out(Eigen::Index(b - a + 1), n);
    std::vector<double> grid(b - a + 1);
    out.row(0) = Z0.transpose();
    grid[0] = omega.time(a);
    SpectralVector z = Z0, next(n), dw(n);
    for (std::size_t k = a; k < b; ++k) {
        dw = (omega.values.row(Eigen::Index(k + 1)) - omega.values.row(Eigen::Index(k))).transpose();
        ou_step(c.decay, c.gain, z.data(), dw.data(), next.data());
        z.swap(next);
        out.row(Eigen::Index(k + 1 - a)) = z.transpose();
        grid[k + 1 - a] = omega.time(k + 1);
    }
    return GridFunction(std::move(grid), std::move(out));
}

StationaryOuSample ou_stationary(const OuSpec& spec, const FbmPath& omega, double t,
                                 std::optional<double> past_horizon)
{
    spec.validate();
    check_path(spec, omega);
    const std::size_t idx = omega.index_of(t);
    const Horizon hz = choose_horizon(spec, omega, idx, past_horizon);
    StationaryOuSample s;
    s.value = run_from_zero(spec, omega, idx - hz.steps, idx);
    s.t = t;
    s.past_horizon = double(hz.steps) * omega.grid.step;
    s.tail_estimate = hz.tail;
    return s;
}

StationaryTrajectory ou_stationary_trajectory(const OuSpec& spec, const FbmPath& omega, double t0, double t1,
                                              std::optional<double> past_horizon)
{
    spec.validate();
    check_path(spec, omega);
    const std::size_t a = omega.index_of(t0), b = omega.index_of(t1);
    if (b < a) throw std::invalid_argument("ou_stationary_trajectory: t1 before t0");
    const Horizon hz = choose_horizon(spec, omega, a, past_horizon);
    PathMatrix vals(Eigen::Index(b - a + 1), Eigen::Index(spec.B.dim()));
    run_from_zero(spec, omega, a - hz.steps, b, &vals, a);
    std::vector<double> grid(b - a + 1);
    for (std::size_t k = a; k <= b; ++k) grid[k - a] = omega.time(k);
    StationaryTrajectory tr;
    tr.Z = GridFunction(std::move(grid), std::move(vals));
    tr.past_horizon = double(hz.steps) * omega.grid.step;
    tr.tail_estimate = hz.tail;
    return tr;
}

double ou_flow_check(const OuSpec& spec, const FbmPath& omega, double r, double t,
                     std::optional<double> past_horizon)
{
    if (!(r < t)) throw std::invalid_argument("ou_flow_check: need r < t");
    const StationaryOuSample zr = ou_stationary(spec, omega, r, past_horizon);
    const StationaryOuSample zt = ou_stationary(spec, omega, t, zr.past_horizon);
    const GridFunction path = ou_evolve(spec, zr.value, omega, r, t);
    return (path.at(path.size() - 1) - zt.value).norm();
}

double scaling_identity_check(const OuSpec& spec, const FbmPath& omega, double r)
{
    OuSpec unit = spec;
    unit.eps = 1.0;
    const StationaryOuSample a = ou_stationary(unit, omega, r / spec.eps);
    const FbmPath scaled = scale_time(omega, spec.eps);
    const StationaryOuSample b = ou_stationary(spec, scaled, r, a.past_horizon * spec.eps);
    return (a.value - b.value).norm();
}

SublinearityReport sublinearity_check(const OuSpec& spec, const std::vector<FbmPath>& ensemble, double T,
                                      const std::vector<double>& eps_list)
{
    if (ensemble.empty()) throw std::invalid_argument("sublinearity_check: empty ensemble");
    OuSpec unit = spec;
    unit.eps = 1.0;
    SublinearityReport rep;
    rep.eps = eps_list;
    rep.m.assign(eps_list.size(), std::vector<double>(ensemble.size(), 0.0));
    std::vector<double> sup_T(ensemble.size(), 0.0);
    const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
    for (std::size_t s = 0; s < ensemble.size(); ++s) {
        // Z^eps(theta_s w) = Z(theta_{s/eps} w): one unscaled trajectory serves all eps.
        const double tmax = T / eps_min;
        const double h = ensemble[s].grid.step;
        const StationaryTrajectory tr =
            ou_stationary_trajectory(unit, ensemble[s], 0.0, std::ceil(tmax / h - 1e-9) * h);
        const Eigen::VectorXd norms = tr.Z.values.rowwise().norm();
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const double lim = T / eps_list[e];
            double m = 0.0;
            for (std::size_t k = 0; k < tr.Z.size() && tr.Z.grid[k] <= lim + 1e-9 * h; ++k)
                m = std::max(m, norms(Eigen::Index(k)));
            rep.m[e][s] = eps_list[e] * m;
        }
        double m1 = 0.0;
        for (std::size_t k = 0; k < tr.Z.size() && tr.Z.grid[k] <= T + 1e-9 * h; ++k)
            m1 = std::max(m1, norms(Eigen::Index(k)));
        sup_T[s] = m1;
    }
    for (const auto& row : rep.m) {
        std::vector<double> v = row;
        std::nth_element(v.begin(), v.begin() + long(v.size() / 2), v.end());
        double med = v[v.size() / 2];
        if (v.size() % 2 == 0) {
            const double lo = *std::max_element(v.begin(), v.begin() + long(v.size() / 2));
            med = 0.5 * (med + lo);
        }
        rep.median.push_back(med);
    }
    // Medians indexed along eps_list; decreasing eps must give decreasing m.
    std::vector<std::size_t> order(eps_list.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps_list[a] > eps_list[b]; });
    rep.median_decreasing = true;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (!(rep.median[order[i]] < rep.median[order[i - 1]]) && rep.median[order[i - 1]] > 0.0)
            rep.median_decreasing = false;
    const std::size_t half = std::max<std::size_t>(1, ensemble.size() / 2);
    for (std::size_t s = 0; s < ensemble.size(); ++s) {
        rep.mean_sup_all += sup_T[s] / double(ensemble.size());
        if (s < half) rep.mean_sup_half += sup_T[s] / double(half);
    }
    return rep;
}

}  // namespace fbmavg
