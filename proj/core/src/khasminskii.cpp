#include "fbmavg/averaging.hpp"

#include "fbmavg/csv.hpp"
#include "fbmavg/fixed_point.hpp"
#include "fbmavg/parallel.hpp"
#include "fbmavg/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

constexpr std::uint64_t kNoiseTag = 0x6e6f697365;
constexpr std::uint64_t kCellTag = 0x63656c6c;

std::size_t steps_of(double a, double b, const char* what)
{
    const double r = a / b, k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-6 * std::max(1.0, k)) throw std::invalid_argument(what);
    return static_cast<std::size_t>(k);
}

Eigen::VectorXd phi1(const Eigen::VectorXd& lambda, double dt)
{
    const Eigen::ArrayXd z = lambda.array() * dt;
    Eigen::VectorXd out = ((1.0 - (-z).exp()) / z).matrix();
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (z(i) < 1e-8) out(i) = 1.0 - 0.5 * z(i);
    return out;
}

// Trapezoid integral of |a - b| over rows [i, j] with step h.
double block_l1(const PathMatrix& a, const PathMatrix& b, std::size_t i, std::size_t j, double h)
{
    double s = 0.0;
    for (std::size_t k = i; k <= j; ++k) {
        const double w = (k == i || k == j) ? 0.5 : 1.0;
        s += w * (a.row(Eigen::Index(k)) - b.row(Eigen::Index(k))).norm();
    }
    return s * h;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SpectralVector default_or(const SpectralVector& v, std::size_t n, double fill)
{
    return v.size() == 0 ? SpectralVector::Constant(Eigen::Index(n), fill) : v;
}

GridFunction thin_to(const GridFunction& f, std::size_t max_points)
{
    const std::size_t stride = std::max<std::size_t>(1, (f.size() - 1) / (max_points - 1));
    return f.stride(stride);
}

}  // namespace

void KhasConfig::validate(double dt) const
{
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("KhasConfig: delta must lie in (0, 1)");
    steps_of(delta, dt, "KhasConfig: delta must be an integer multiple of dt");
}

AuxPaths khasminskii_aux(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                         const SolutionPath& coupled, const SpectralVector& X0, const SpectralVector& Y0,
                         const KhasConfig& kc, const SolverConfig& cfg)
{
    spec.validate();
    const double dt = cfg.dt;
    kc.validate(dt);
    const std::size_t block = steps_of(kc.delta, dt, "khasminskii_aux: delta/dt");
    const std::size_t steps = coupled.X.size() - 1;
    const double T = double(steps) * dt;
    const Eigen::Index n = Eigen::Index(spec.dim());
    const FastNoise fn = fast_noise_on_grid(spec, omega2, T, dt);

    PathMatrix Xh(Eigen::Index(steps + 1), n), Yh(Eigen::Index(steps + 1), n);
    Xh.row(0) = X0.transpose();
    Yh.row(0) = Y0.transpose();
    if (steps > 0) {
        const std::size_t s1 = steps_of(dt, omega1.grid.step, "khasminskii_aux: dt must be a multiple of the omega1 step");
        const std::size_t i0 = omega1.index_of(0.0);
        const Eigen::VectorXd lamA = spec.A.eigenvalues(), lamB = spec.B.eigenvalues();
        const Eigen::VectorXd decA = (-lamA * dt).array().exp().matrix();
        const Eigen::VectorXd gainA = phi1(lamA, dt);
        const Eigen::VectorXd decB = (-lamB * (dt / spec.eps)).array().exp().matrix();
        const Eigen::VectorXd gainB = ((1.0 - decB.array()) / lamB.array()).matrix();
        SpectralVector xh = X0, yt = Y0 - fn.Z.at(0), yh = Y0, dw(n), drift(n);
        for (std::size_t k = 0; k < steps; ++k) {
            const SpectralVector xk = coupled.X.at(k);
            const SpectralVector xd = coupled.X.at((k / block) * block);
            dw = (omega1.values.row(Eigen::Index(i0 + (k + 1) * s1)) - omega1.values.row(Eigen::Index(i0 + k * s1))).transpose();
            drift.noalias() = dt * spec.f(xd, yh) + spec.h(xk) * dw;
            xh = decA.cwiseProduct(xh) + gainA.cwiseProduct(drift);
            yt = decB.cwiseProduct(yt) + gainB.cwiseProduct(spec.g(xd, yh));
            yh = yt + fn.Z.at(k + 1);
            Xh.row(Eigen::Index(k + 1)) = xh.transpose();
            Yh.row(Eigen::Index(k + 1)) = yh.transpose();
        }
    }
    AuxPaths out;
    out.Xhat = GridFunction(coupled.X.grid, std::move(Xh));
    out.Yhat = GridFunction(coupled.X.grid, std::move(Yh));
    return out;
}

NoisePair sample_noise_pair(const SystemSpec& spec, double T, double dt1, double eps_min, double h2, double past,
                            std::uint64_t seed)
{
    NoisePair p;
    const std::size_t n1 = steps_of(T, dt1, "sample_noise_pair: T must be a multiple of dt");
    p.omega1 = sample_trace_class_fbm(spec.Q1, spec.hurst.H1, UniformGrid::one_sided(T, n1),
                                      derive_seed(seed, 1, kNoiseTag), spec.normalization);
    p.omega2 = sample_trace_class_fbm(spec.Q2, spec.hurst.H2, UniformGrid::two_sided(past, T / eps_min, h2),
                                      derive_seed(seed, 2, kNoiseTag), spec.normalization);
    return p;
}

double y1_y2_block_integral(const SystemSpec& spec, const FbmPath& omega2, const SolutionPath& coupled,
                            const AuxPaths& aux, double delta)
{
    const double dt = coupled.diag.dt;
    const std::size_t block = steps_of(delta, dt, "y1_y2: delta/dt");
    const std::size_t steps = coupled.X.size() - 1;
    double total = 0.0;
    for (std::size_t a = 0; a + block <= steps; a += block) {
        const FrozenFastSpec fs{spec, coupled.X.at(a)};
        const GridFunction yf = fixed_point_trajectory(fs, omega2, double(a) * dt, double(a + block) * dt);
        const std::size_t stride = steps_of(dt, yf.grid[1] - yf.grid[0], "y1_y2: dt must be a multiple of eps * h2");
        const GridFunction yfs = yf.stride(stride);
        const PathMatrix yh = aux.Yhat.values.middleRows(Eigen::Index(a), Eigen::Index(block + 1));
        total += block_l1(yh, yfs.values, 0, block, dt);
    }
    return total;
}

double y_yhat_weighted_integral(const SolutionPath& coupled, const AuxPaths& aux, double delta, double gamma,
                                double rho)
{
    const double dt = coupled.diag.dt;
    const std::size_t block = steps_of(delta, dt, "y_yhat: delta/dt");
    const std::size_t steps = coupled.X.size() - 1;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; (k + 1) * block <= steps; ++k) {
        const double I = block_l1(coupled.Y.values, aux.Yhat.values, k * block, (k + 1) * block, dt);
        const double kd = double(k) * delta;
        sum += std::exp(-rho * (kd + delta)) * I / (1.0 + std::pow(kd, -gamma));
        ++count;
    }
    if (count == 0) throw std::invalid_argument("y_yhat: need at least two blocks in [0, T]");
    return sum / double(count);
}

ScalingReport y1_y2_scaling(const SystemSpec& spec, const std::vector<double>& eps_list, double delta,
                            const AuxStudyConfig& c)
{
    if (eps_list.size() < 2) throw std::invalid_argument("y1_y2_scaling: need at least two eps values");
    const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
    const std::size_t n = spec.dim();
    const SpectralVector X0 = default_or(c.X0, n, 0.5), Y0 = default_or(c.Y0, n, 1.0);
    std::vector<std::vector<double>> vals(eps_list.size(), std::vector<double>(c.seeds));
    parallel_for(c.seeds, c.jobs, [&](std::size_t s) {
        const NoisePair np = sample_noise_pair(spec, c.T, eps_min * c.h2, eps_min, c.h2, c.past,
                                               derive_seed(c.master_seed, s, kCellTag));
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const SystemSpec se = spec.with_eps(eps_list[e]);
            SolverConfig cfg;
            cfg.dt = eps_list[e] * c.h2;
            const SolutionPath sol = solve_coupled(se, np.omega1, np.omega2, X0, Y0, c.T, cfg);
            const AuxPaths aux = khasminskii_aux(se, np.omega1, np.omega2, sol, X0, Y0, KhasConfig{delta}, cfg);
            vals[e][s] = y1_y2_block_integral(se, np.omega2, sol, aux, delta);
        }
    });
    ScalingReport r;
    r.param = eps_list;
    for (const auto& v : vals) {
        double m = 0.0;
        for (double x : v) m += x;
        r.value.push_back(m / double(v.size()));
    }
    r.pass = true;
    for (std::size_t i = 0; i + 1 < r.value.size(); ++i) {
        r.ratio.push_back(r.value[i] / r.value[i + 1]);
        const double expected = r.param[i] / r.param[i + 1];
        if (std::abs(r.ratio.back() - expected) > 0.3 * expected) r.pass = false;
    }
    r.slope = loglog_slope(r.param, r.value);
    return r;
}

ScalingReport y_yhat_scaling(const SystemSpec& spec, double eps, const std::vector<double>& delta_list,
                             const AuxStudyConfig& c)
{
    if (delta_list.size() < 2) throw std::invalid_argument("y_yhat_scaling: need at least two delta values");
    const std::size_t n = spec.dim();
    const SpectralVector X0 = default_or(c.X0, n, 0.5), Y0 = default_or(c.Y0, n, 1.0);
    const SystemSpec se = spec.with_eps(eps);
    SolverConfig cfg;
    cfg.dt = eps * c.h2;
    const double d_min = *std::min_element(delta_list.begin(), delta_list.end());
    std::vector<std::vector<double>> vals(delta_list.size(), std::vector<double>(c.seeds));
    std::vector<double> zsup(c.seeds);
    std::vector<SolutionPath> sols(c.seeds);
    std::vector<NoisePair> noise(c.seeds);
    parallel_for(c.seeds, c.jobs, [&](std::size_t s) {
        noise[s] = sample_noise_pair(spec, c.T, cfg.dt, eps, c.h2, c.past, derive_seed(c.master_seed, s, kCellTag));
        sols[s] = solve_coupled(se, noise[s].omega1, noise[s].omega2, X0, Y0, c.T, cfg);
        zsup[s] = sols[s].diag.z_sup;
    });
    const double lhs = eps * (1.0 + X0.norm() + Y0.norm() + *std::max_element(zsup.begin(), zsup.end()));
    const double rhs = std::pow(d_min, 1.0 + c.gamma);
    if (lhs > rhs)
        throw std::invalid_argument("y_yhat_scaling: eps (1 + |X0| + |Y0| + sup|Z|) = " + format_double(lhs) +
                                    " exceeds delta^{1+gamma} = " + format_double(rhs) + "; reduce eps");
    parallel_for(c.seeds, c.jobs, [&](std::size_t s) {
        for (std::size_t d = 0; d < delta_list.size(); ++d) {
            const AuxPaths aux = khasminskii_aux(se, noise[s].omega1, noise[s].omega2, sols[s], X0, Y0,
                                                 KhasConfig{delta_list[d]}, cfg);
            vals[d][s] = y_yhat_weighted_integral(sols[s], aux, delta_list[d], c.gamma, c.rho);
        }
    });
    ScalingReport r;
    r.param = delta_list;
    for (const auto& v : vals) {
        double m = 0.0;
        for (double x : v) m += x;
        r.value.push_back(m / double(v.size()));
    }
    for (std::size_t i = 0; i + 1 < r.value.size(); ++i) r.ratio.push_back(r.value[i] / r.value[i + 1]);
    r.slope = loglog_slope(r.param, r.value);
    r.pass = r.slope >= 1.0 + c.gamma - 0.3;
    r.note = "guard " + format_double(lhs) + " <= " + format_double(rhs);
    return r;
}

ConvergenceTable convergence_experiment(const SystemSpec& spec_template, const ConvergenceConfig& cfg)
{
    spec_template.validate();
    cfg.solver.validate();
    if (cfg.eps_list.empty() || cfg.seeds == 0) throw std::invalid_argument("convergence: empty eps list or no seeds");
    const std::size_t n = spec_template.dim();
    const SpectralVector X0 = default_or(cfg.X0, n, 0.5), Y0 = default_or(cfg.Y0, n, 1.0);
    const double eps_min = *std::min_element(cfg.eps_list.begin(), cfg.eps_list.end());
    std::shared_ptr<FbarCache> cache;
    const DriftField fbar = make_fbar(spec_template, cfg.T_erg, cfg.fbar_seed, cfg.lattice, cfg.fbar_path, &cache);

    std::vector<NoisePair> noise(cfg.seeds);
    std::vector<GridFunction> xbar(cfg.seeds);
    std::vector<std::string> seed_error(cfg.seeds);
    parallel_for(cfg.seeds, cfg.jobs, [&](std::size_t s) {
        try {
            noise[s] = sample_noise_pair(spec_template, cfg.T, cfg.solver.dt, eps_min, cfg.h2, cfg.past,
                                         derive_seed(cfg.master_seed, s, kCellTag));
            xbar[s] = solve_averaged(spec_template, fbar, noise[s].omega1, X0, cfg.T, cfg.solver);
        } catch (const std::exception& e) {
            seed_error[s] = e.what();
        }
    });

    const std::size_t ne = cfg.eps_list.size();
    ConvergenceTable t;
    t.rows.resize(cfg.seeds * ne);
    parallel_for(t.rows.size(), cfg.jobs, [&](std::size_t cell) {
        const std::size_t s = cell / ne, e = cell % ne;
        ConvergenceRow& row = t.rows[cell];
        row.seed = s;
        row.eps = cfg.eps_list[e];
        row.delta = cfg.delta;
        const auto start = std::chrono::steady_clock::now();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.e_sup = row.e_gamma = row.e_hat = row.e_xx = nan;
        if (!seed_error[s].empty()) {
            row.error = seed_error[s];
            return;
        }
        try {
            const SystemSpec se = spec_template.with_eps(row.eps);
            const SolutionPath sol = solve_coupled(se, noise[s].omega1, noise[s].omega2, X0, Y0, cfg.T, cfg.solver);
            const AuxPaths aux = khasminskii_aux(se, noise[s].omega1, noise[s].omega2, sol, X0, Y0,
                                                 KhasConfig{cfg.delta}, cfg.solver);
            const GridFunction diff = sol.X - xbar[s];
            row.e_sup = sup_norm(diff);
            row.e_gamma = weighted_holder_norm(thin_to(diff, 1025),
                                               HolderParams{cfg.solver.frac.gamma, cfg.solver.rho, true});
            row.e_hat = sup_norm(aux.Xhat - xbar[s]);
            row.e_xx = sup_norm(sol.X - aux.Xhat);
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
        if (cfg.record_runtime)
            row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    t.eps = cfg.eps_list;
    for (std::size_t e = 0; e < ne; ++e) {
        std::vector<double> v;
        for (std::size_t s = 0; s < cfg.seeds; ++s)
            if (t.rows[s * ne + e].error.empty()) v.push_back(t.rows[s * ne + e].e_sup);
        t.median_e.push_back(median(v));
    }
    // Order along decreasing eps, independent of the listed order.
    std::vector<std::size_t> order(ne);
    for (std::size_t i = 0; i < ne; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return t.eps[a] > t.eps[b]; });
    t.monotone = true;
    for (std::size_t i = 1; i < ne; ++i)
        if (!(t.median_e[order[i]] < t.median_e[order[i - 1]])) t.monotone = false;
    t.halved = t.median_e[order.back()] < 0.5 * t.median_e[order.front()];
    t.fbar_nodes = cache ? cache->nodes() : 0;
    return t;
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& t)
{
    os << "seed,eps,delta,e_sup,e_gamma,e_hat,e_xx,runtime_s\n";
    for (const auto& r : t.rows)
        os << r.seed << ',' << format_double(r.eps) << ',' << format_double(r.delta) << ',' << format_double(r.e_sup)
           << ',' << format_double(r.e_gamma) << ',' << format_double(r.e_hat) << ',' << format_double(r.e_xx) << ','
           << format_double(r.runtime_s) << '\n';
}

void write_convergence_summary(std::ostream& os, const ConvergenceTable& t)
{
    for (std::size_t i = 0; i < t.eps.size(); ++i)
        os << "median_e_sup[eps=" << format_double(t.eps[i]) << "]=" << format_double(t.median_e[i]) << '\n';
    std::size_t failed = 0;
    for (const auto& r : t.rows) failed += r.error.empty() ? 0 : 1;
    os << "failed_cells=" << failed << '\n'
       << "fbar_nodes=" << t.fbar_nodes << '\n'
       << "monotone=" << (t.monotone ? "PASS" : "FAIL") << '\n'
       << "halved=" << (t.halved ? "PASS" : "FAIL") << '\n';
    for (const auto& r : t.rows)
        if (!r.error.empty()) os << "error[seed=" << r.seed << ",eps=" << format_double(r.eps) << "]=" << r.error << '\n';
}

}  // namespace fbmavg
