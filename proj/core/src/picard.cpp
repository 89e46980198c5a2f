#include "fbmavg/mild.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

// Exact weights of int_0^H e^{-mu (H-s)} l(s) ds for the two hat functions l.
struct TrapWeights {
    Eigen::VectorXd decay, w0, w1;
};

TrapWeights trap_weights(const Eigen::VectorXd& mu, double H)
{
    TrapWeights t;
    const Eigen::Index n = mu.size();
    t.decay.resize(n);
    t.w0.resize(n);
    t.w1.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = mu(i) * H;
        t.decay(i) = std::exp(-z);
        double w1, w0;
        if (z < 1e-4) {
            w1 = H * (0.5 - z / 6.0 + z * z / 24.0);
            w0 = H * (0.5 - z / 3.0 + z * z / 8.0);
        } else {
            const double phi = -std::expm1(-z) / z;
            w1 = H * (phi - (1.0 - std::exp(-z) * (1.0 + z)) / (z * z));
            w0 = H * phi - w1;
        }
        t.w0(i) = w0;
        t.w1(i) = w1;
    }
    return t;
}

std::size_t ratio_or_throw(double a, double b, const char* what)
{
    const double r = a / b;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-6 * k) throw std::invalid_argument(what);
    return static_cast<std::size_t>(k);
}

GridFunction coarse_omega(const FbmPath& omega1, const std::vector<double>& grid)
{
    const double H = grid[1] - grid[0];
    const std::size_t stride = ratio_or_throw(H, omega1.grid.step, "coarse grid step must be a multiple of the omega1 step");
    const std::size_t i0 = omega1.index_of(0.0);
    omega1.index_of(grid.back());
    PathMatrix v(Eigen::Index(grid.size()), Eigen::Index(omega1.modes()));
    for (std::size_t k = 0; k < grid.size(); ++k) v.row(Eigen::Index(k)) = omega1.values.row(Eigen::Index(i0 + k * stride));
    return GridFunction(grid, std::move(v));
}

HolderParams pair_norm(const SolverConfig& cfg, double rho) { return HolderParams{cfg.frac.gamma, rho, true}; }

GridFunction constant_pair(const std::vector<double>& grid, const SpectralVector& X0, const SpectralVector& Y0)
{
    const Eigen::Index n = X0.size();
    PathMatrix v(Eigen::Index(grid.size()), 2 * n);
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
        v.row(k).head(n) = X0.transpose();
        v.row(k).tail(n) = Y0.transpose();
    }
    return GridFunction(grid, std::move(v));
}

std::vector<double> coarse_grid(double T, std::size_t n)
{
    if (!(T > 0.0) || n < 2) throw std::invalid_argument("coarse grid needs T > 0 and n >= 2");
    std::vector<double> g(n + 1);
    for (std::size_t k = 0; k <= n; ++k) g[k] = T * double(k) / double(n);
    return g;
}

}  // namespace

GridFunction stack_pair(const GridFunction& X, const GridFunction& Y)
{
    if (X.size() != Y.size() || X.dim() != Y.dim()) throw std::invalid_argument("stack_pair: shape mismatch");
    PathMatrix v(Eigen::Index(X.size()), Eigen::Index(2 * X.dim()));
    v.leftCols(Eigen::Index(X.dim())) = X.values;
    v.rightCols(Eigen::Index(X.dim())) = Y.values;
    return GridFunction(X.grid, std::move(v));
}

GridFunction OperatorTParts::total() const { return GridFunction(linear.grid, linear.values + integral.values); }

OperatorTParts operator_T_parts(const SystemSpec& spec, const GridFunction& u, const FbmPath& omega1,
                                const GridFunction& Z, const SpectralVector& X0, const SpectralVector& Y0,
                                const FracParams& frac)
{
    const Eigen::Index N = Eigen::Index(spec.dim());
    if (Eigen::Index(u.dim()) != 2 * N) throw std::invalid_argument("operator T: u must stack (X, Y)");
    if (u.size() < 2 || !is_uniform(u.grid) || u.grid.front() != 0.0)
        throw std::invalid_argument("operator T: u needs a uniform grid starting at 0");
    if (Z.size() != u.size()) throw std::invalid_argument("operator T: Z must live on the grid of u");
    const std::size_t m = u.size();
    const double H = u.grid[1] - u.grid[0];
    const Eigen::VectorXd lamA = spec.A.eigenvalues();
    const Eigen::VectorXd muB = spec.B.eigenvalues() / spec.eps;

    OperatorTParts parts;
    PathMatrix lin(Eigen::Index(m), 2 * N), integ(Eigen::Index(m), 2 * N);
    const SpectralVector y_shift = Y0 - Z.at(0);
    for (std::size_t k = 0; k < m; ++k) {
        const double t = u.grid[k];
        lin.row(Eigen::Index(k)).head(N) = ((-lamA * t).array().exp() * X0.array()).matrix().transpose();
        lin.row(Eigen::Index(k)).tail(N) =
            ((-muB * t).array().exp() * y_shift.array()).matrix().transpose() + Z.values.row(Eigen::Index(k));
    }

    // Drift convolutions, exact for piecewise-linear F(u(.)).
    const TrapWeights wa = trap_weights(lamA, H), wb = trap_weights(muB, H);
    std::vector<SpectralVector> fv(m), gv(m);
    std::vector<Matrix> hv(m);
    for (std::size_t k = 0; k < m; ++k) {
        const SpectralVector x = u.values.row(Eigen::Index(k)).head(N).transpose();
        const SpectralVector y = u.values.row(Eigen::Index(k)).tail(N).transpose();
        fv[k] = spec.f(x, y);
        gv[k] = spec.g(x, y) / spec.eps;
        hv[k] = spec.h(x);
    }
    SpectralVector IX = SpectralVector::Zero(N), IY = SpectralVector::Zero(N);
    integ.row(0).setZero();
    for (std::size_t k = 0; k + 1 < m; ++k) {
        IX = wa.decay.cwiseProduct(IX) + wa.w0.cwiseProduct(fv[k]) + wa.w1.cwiseProduct(fv[k + 1]);
        IY = wb.decay.cwiseProduct(IY) + wb.w0.cwiseProduct(gv[k]) + wb.w1.cwiseProduct(gv[k + 1]);
        integ.row(Eigen::Index(k + 1)).head(N) = IX.transpose();
        integ.row(Eigen::Index(k + 1)).tail(N) = IY.transpose();
    }

    // Stochastic convolution int_0^t S_A(t - r) h(X(r)) dw1(r) by the Zahle integral.
    const GridFunction w1 = coarse_omega(omega1, u.grid);
    for (std::size_t k = 1; k < m; ++k) {
        std::vector<double> g(u.grid.begin(), u.grid.begin() + long(k + 1));
        std::vector<Matrix> psi(k + 1);
        for (std::size_t j = 0; j <= k; ++j)
            psi[j] = (-lamA * (u.grid[k] - u.grid[j])).array().exp().matrix().asDiagonal() * hv[j];
        const SpectralVector I = zahle_integral(OperatorPath(std::move(g), std::move(psi)), w1, frac, 0.0, u.grid[k]);
        integ.row(Eigen::Index(k)).head(N) += I.transpose();
    }
    parts.linear = GridFunction(u.grid, std::move(lin));
    parts.integral = GridFunction(u.grid, std::move(integ));
    return parts;
}

SolutionPath operator_T_apply(const SystemSpec& spec, const SolutionPath& u, const FbmPath& omega1,
                              const FbmPath& omega2, const SpectralVector& X0, const SpectralVector& Y0,
                              const SolverConfig& cfg)
{
    spec.validate();
    const double T = u.X.grid.back();
    const double H = u.X.grid[1] - u.X.grid[0];
    const FastNoise fn = fast_noise_on_grid(spec, omega2, T, H);
    const OperatorTParts parts = operator_T_parts(spec, stack_pair(u.X, u.Y), omega1, fn.Z, X0, Y0, cfg.frac);
    const GridFunction tot = parts.total();
    const Eigen::Index N = Eigen::Index(spec.dim());
    SolutionPath out;
    out.X = GridFunction(tot.grid, tot.values.leftCols(N));
    out.Y = GridFunction(tot.grid, tot.values.rightCols(N));
    out.diag.eps = spec.eps;
    out.diag.dt = H;
    out.diag.steps = tot.size() - 1;
    return out;
}

SolutionPath picard_solve(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                          const SpectralVector& X0, const SpectralVector& Y0, double T, std::size_t n,
                          const SolverConfig& cfg)
{
    spec.validate();
    cfg.validate();
    const std::vector<double> grid = coarse_grid(T, n);
    const FastNoise fn = fast_noise_on_grid(spec, omega2, T, T / double(n));
    const HolderParams hp = pair_norm(cfg, cfg.rho);
    GridFunction u = constant_pair(grid, X0, Y0);
    double prev = -1.0, factor = 0.0;
    std::size_t bad = 0, it = 0;
    bool converged = false;
    while (it < cfg.picard_max_iter) {
        ++it;
        const GridFunction next = operator_T_parts(spec, u, omega1, fn.Z, X0, Y0, cfg.frac).total();
        const double diff = weighted_holder_norm(next - u, hp);
        u = next;
        if (prev > 0.0) {
            const double q = diff / prev;
            factor = q;
            bad = q >= 1.0 ? bad + 1 : 0;
        }
        prev = diff;
        if (diff < cfg.picard_tol) {
            converged = true;
            break;
        }
        if (bad >= 5) break;
    }
    const Eigen::Index N = Eigen::Index(spec.dim());
    SolutionPath sol;
    sol.X = GridFunction(grid, u.values.leftCols(N));
    sol.Y = GridFunction(grid, u.values.rightCols(N));
    sol.diag.eps = spec.eps;
    sol.diag.dt = T / double(n);
    sol.diag.steps = n;
    sol.diag.picard_iterations = it;
    sol.diag.picard_converged = converged;
    sol.diag.contraction_factor = factor;
    sol.diag.z_sup = sup_norm(fn.Z);
    sol.diag.ou_past_horizon = fn.past_horizon;
    sol.diag.ou_tail = fn.tail;
    sol.diag.x_weighted_norm = weighted_holder_norm(sol.X, HolderParams{cfg.frac.gamma, cfg.rho, true});
    sol.diag.y_sup = sup_norm(sol.Y);
    return sol;
}

namespace {

// Perturbation directions: constant, ramp and exp(rho t)-shaped, each along a
// fixed unit direction in the stacked state.
std::vector<GridFunction> perturbations(const std::vector<double>& grid, Eigen::Index cols, double rho, double amp)
{
    std::vector<GridFunction> out;
    Eigen::VectorXd dir(cols);
    for (Eigen::Index i = 0; i < cols; ++i) dir(i) = 1.0 + 0.5 * std::sin(1.7 * double(i + 1));
    dir.normalize();
    const double T = grid.back();
    for (int shape = 0; shape < 3; ++shape) {
        PathMatrix v(Eigen::Index(grid.size()), cols);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double t = grid[k];
            double s = 1.0;
            if (shape == 1) s = t / T;
            if (shape == 2) s = std::exp(rho * (t - T));
            v.row(Eigen::Index(k)) = amp * s * dir.transpose();
        }
        out.emplace_back(grid, std::move(v));
    }
    return out;
}

bool strictly_decreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

}  // namespace

RhoSweep contraction_factor_sweep(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                                  const SpectralVector& X0, const SpectralVector& Y0, double T, std::size_t n,
                                  const SolverConfig& cfg, const std::vector<double>& rhos)
{
    const SolutionPath base = picard_solve(spec, omega1, omega2, X0, Y0, T, n, cfg);
    const GridFunction u = stack_pair(base.X, base.Y);
    const FastNoise fn = fast_noise_on_grid(spec, omega2, T, T / double(n));
    const GridFunction Tu = operator_T_parts(spec, u, omega1, fn.Z, X0, Y0, cfg.frac).total();
    RhoSweep sweep;
    sweep.rho = rhos;
    for (double rho : rhos) {
        const HolderParams hp = pair_norm(cfg, rho);
        double best = 0.0;
        for (const GridFunction& p : perturbations(u.grid, Eigen::Index(u.dim()), rho, 0.1)) {
            const GridFunction v(u.grid, u.values + p.values);
            const GridFunction Tv = operator_T_parts(spec, v, omega1, fn.Z, X0, Y0, cfg.frac).total();
            const double denom = weighted_holder_norm(p, hp);
            if (denom > 0.0) best = std::max(best, weighted_holder_norm(Tv - Tu, hp) / denom);
        }
        sweep.value.push_back(best);
    }
    sweep.decreasing = strictly_decreasing(sweep.value);
    return sweep;
}

RhoSweep integral_part_sweep(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                        const SpectralVector& X0, const SpectralVector& Y0, double T, std::size_t n,
                        const SolverConfig& cfg, const std::vector<double>& rhos)
{
    const SolutionPath base = picard_solve(spec, omega1, omega2, X0, Y0, T, n, cfg);
    const GridFunction ub = stack_pair(base.X, base.Y);
    const FastNoise fn = fast_noise_on_grid(spec, omega2, T, T / double(n));
    std::vector<GridFunction> tests{ub};
    const Eigen::Index cols = Eigen::Index(ub.dim());
    for (double amp : {0.5, 1.0, 2.0}) {
        PathMatrix v = PathMatrix::Constant(Eigen::Index(ub.size()), cols, amp);
        tests.emplace_back(ub.grid, std::move(v));
    }
    {
        PathMatrix v(Eigen::Index(ub.size()), cols);
        for (std::size_t k = 0; k < ub.size(); ++k) v.row(Eigen::Index(k)).setConstant(ub.grid[k] / T);
        tests.emplace_back(ub.grid, std::move(v));
    }
    std::vector<GridFunction> integrals;
    for (const auto& u : tests) integrals.push_back(operator_T_parts(spec, u, omega1, fn.Z, X0, Y0, cfg.frac).integral);
    RhoSweep sweep;
    sweep.rho = rhos;
    for (double rho : rhos) {
        const HolderParams hp = pair_norm(cfg, rho);
        double best = 0.0;
        for (std::size_t i = 0; i < tests.size(); ++i)
            best = std::max(best, weighted_holder_norm(integrals[i], hp) / (1.0 + weighted_holder_norm(tests[i], hp)));
        sweep.value.push_back(best);
    }
    sweep.decreasing = strictly_decreasing(sweep.value);
    return sweep;
}

}  // namespace fbmavg
