#include "fbmavg/young.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

constexpr int kNodes = 8;

struct Rule {
    std::array<double, kNodes> x{};  // nodes on (0,1)
    std::array<double, kNodes> w{};  // weights summing to 1
};

const Rule& gauss_rule()
{
    static const Rule rule = [] {
        using G = boost::math::quadrature::gauss<double, kNodes>;
        Rule r;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        int k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            r.x[k] = 0.5 * (1.0 - a[i]);
            r.w[k] = 0.5 * wt[i];
            ++k;
            r.x[k] = 0.5 * (1.0 + a[i]);
            r.w[k] = 0.5 * wt[i];
            ++k;
        }
        return r;
    }();
    return rule;
}

// Left kernel weights, up to the factor h^-alpha, for a cell whose far end
// lies at distance u grid steps from r (u > 1).
inline void left_weights(double u, double alpha, double& ia, double& ib)
{
    const double um = u - 1.0;
    const double i0 = (std::pow(um, -alpha) - std::pow(u, -alpha)) / alpha;
    ib = u * i0 - (std::pow(u, 1.0 - alpha) - std::pow(um, 1.0 - alpha)) / (1.0 - alpha);
    ia = i0 - ib;
}

// Right kernel weights, up to the factor h^{alpha-1}, for a cell whose near
// end lies at distance v grid steps from r (v > 0).
inline void right_weights(double v, double alpha, double& ja, double& jb)
{
    const double vp = v + 1.0;
    const double j0 = (std::pow(v, alpha - 1.0) - std::pow(vp, alpha - 1.0)) / (1.0 - alpha);
    jb = (std::pow(vp, alpha) - std::pow(v, alpha)) / alpha - v * j0;
    ja = j0 - jb;
}

std::size_t locate(const std::vector<double>& grid, double t, const char* what)
{
    const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
    auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-9 * h);
    if (it == grid.end() || std::abs(*it - t) > 1e-7 * h)
        throw std::invalid_argument(std::string(what) + " is not a grid point");
    return static_cast<std::size_t>(it - grid.begin());
}

// Window data flattened: P rows are Psi entries (row-major), W rows are w.
struct Window {
    std::size_t n = 0;  // number of cells
    double h = 0.0;
    Eigen::Index R = 0, C = 0;
    std::vector<double> P;  // (n+1) * R * C
    std::vector<double> W;  // (n+1) * C
};

Window make_window(const OperatorPath& psi, const GridFunction& omega, double T1, double T2)
{
    if (!(T2 > T1)) throw std::invalid_argument("integration window must satisfy T1 < T2");
    if (psi.size() < 2 || omega.size() < 2) throw std::invalid_argument("paths need at least two points");
    if (!is_uniform(omega.grid) || !is_uniform(psi.grid)) throw std::invalid_argument("integration requires uniform grids");
    if (psi.cols() != static_cast<Eigen::Index>(omega.dim()))
        throw std::invalid_argument("Psi column count must equal the integrator dimension");
    const std::size_t a = locate(psi.grid, T1, "T1"), b = locate(psi.grid, T2, "T2");
    const std::size_t oa = locate(omega.grid, T1, "T1"), ob = locate(omega.grid, T2, "T2");
    if (b - a != ob - oa) throw std::invalid_argument("Psi and omega grids differ inside the window");
    Window w;
    w.n = b - a;
    w.h = (T2 - T1) / double(w.n);
    w.R = psi.rows();
    w.C = psi.cols();
    const std::size_t rc = std::size_t(w.R * w.C);
    w.P.resize((w.n + 1) * rc);
    w.W.resize((w.n + 1) * std::size_t(w.C));
    for (std::size_t k = 0; k <= w.n; ++k) {
        const Matrix& m = psi.values[a + k];
        for (Eigen::Index i = 0; i < w.R; ++i)
            for (Eigen::Index j = 0; j < w.C; ++j) w.P[k * rc + std::size_t(i * w.C + j)] = m(i, j);
        for (Eigen::Index j = 0; j < w.C; ++j) w.W[k * std::size_t(w.C) + std::size_t(j)] = omega.values(Eigen::Index(oa + k), j);
    }
    return w;
}

// Gamma(1-alpha) * D^alpha Psi at r = t_c + h x, generic (untabulated) version.
void left_at(const Window& w, double alpha, std::size_t c, double x, double* out)
{
    const std::size_t rc = std::size_t(w.R * w.C);
    const double* Pc = &w.P[c * rc];
    const double* Pn = &w.P[(c + 1) * rc];
    const double hx = w.h * x;
    const double s0 = std::pow(hx, -alpha);
    const double s1 = alpha * std::pow(hx, 1.0 - alpha) / ((1.0 - alpha) * w.h);
    for (std::size_t e = 0; e < rc; ++e) {
        const double psi_r = Pc[e] + (Pn[e] - Pc[e]) * x;
        out[e] = psi_r * s0 + (Pn[e] - Pc[e]) * s1;
    }
    const double ha = alpha * std::pow(w.h, -alpha);
    for (std::size_t j = 0; j < c; ++j) {
        double ia, ib;
        left_weights(double(c - j) + x, alpha, ia, ib);
        const double* Pj = &w.P[j * rc];
        const double* Pj1 = &w.P[(j + 1) * rc];
        for (std::size_t e = 0; e < rc; ++e) out[e] -= ha * (Pj[e] * ia + Pj1[e] * ib);
    }
}

// -Gamma(alpha) * (right derivative) at r = t_c + h x, generic version.
void right_bracket_at(const Window& w, double alpha, std::size_t c, double x, double* out)
{
    const std::size_t C = std::size_t(w.C);
    const double* Wc = &w.W[c * C];
    const double* Wn = &w.W[(c + 1) * C];
    const double* WT = &w.W[w.n * C];
    const double rem = w.h * (1.0 - x);
    const double tail = w.h * (double(w.n - c) - x);
    const double a0 = std::pow(rem, alpha - 1.0);
    const double aT = std::pow(tail, alpha - 1.0);
    const double a1 = (1.0 - alpha) * std::pow(rem, alpha) / (alpha * w.h);
    for (std::size_t e = 0; e < C; ++e) {
        const double wr = Wc[e] + (Wn[e] - Wc[e]) * x;
        out[e] = wr * a0 - WT[e] * aT - (Wn[e] - Wc[e]) * a1;
    }
    const double ha = (1.0 - alpha) * std::pow(w.h, alpha - 1.0);
    for (std::size_t j = c + 1; j < w.n; ++j) {
        double ja, jb;
        right_weights(double(j - c) - x, alpha, ja, jb);
        const double* Wj = &w.W[j * C];
        const double* Wj1 = &w.W[(j + 1) * C];
        for (std::size_t e = 0; e < C; ++e) out[e] -= ha * (Wj[e] * ja + Wj1[e] * jb);
    }
}

SpectralVector zahle_core(const Window& w, double alpha)
{
    const Rule& rule = gauss_rule();
    const std::size_t n = w.n;
    const std::size_t R = std::size_t(w.R), C = std::size_t(w.C), rc = R * C;
    const double scale = -1.0 / (std::tgamma(1.0 - alpha) * std::tgamma(alpha));

    // Tabulated kernel weights by cell offset d and node p.
    std::vector<double> IA(n * kNodes), IB(n * kNodes), JA(n * kNodes), JB(n * kNodes);
    for (std::size_t d = 1; d < n; ++d)
        for (int p = 0; p < kNodes; ++p) {
            left_weights(double(d) + rule.x[p], alpha, IA[d * kNodes + p], IB[d * kNodes + p]);
            right_weights(double(d) - rule.x[p], alpha, JA[d * kNodes + p], JB[d * kNodes + p]);
        }
    const double hl = alpha * std::pow(w.h, -alpha);
    const double hr = (1.0 - alpha) * std::pow(w.h, alpha - 1.0);

    std::vector<double> L(rc), Rv(C);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(Eigen::Index(R));
    auto accumulate = [&](double weight) {
        for (std::size_t i = 0; i < R; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < C; ++j) s += L[i * C + j] * Rv[j];
            acc(Eigen::Index(i)) += weight * s;
        }
    };

    // First cell: r = T1 + h y^{1/(1-alpha)} removes the r^-alpha singularity.
    for (int p = 0; p < kNodes; ++p) {
        const double y = rule.x[p];
        const double x = std::pow(y, 1.0 / (1.0 - alpha));
        const double jac = w.h / (1.0 - alpha) * std::pow(y, alpha / (1.0 - alpha));
        left_at(w, alpha, 0, x, L.data());
        right_bracket_at(w, alpha, 0, x, Rv.data());
        accumulate(rule.w[p] * jac);
    }

    for (std::size_t c = 1; c < n; ++c) {
        const double* Pc = &w.P[c * rc];
        const double* Pn = &w.P[(c + 1) * rc];
        const double* Wc = &w.W[c * C];
        const double* Wn = &w.W[(c + 1) * C];
        const double* WT = &w.W[n * C];
        for (int p = 0; p < kNodes; ++p) {
            const double x = rule.x[p];
            const double hx = w.h * x;
            const double s0 = std::pow(hx, -alpha);
            const double s1 = alpha * std::pow(hx, 1.0 - alpha) / ((1.0 - alpha) * w.h);
            for (std::size_t e = 0; e < rc; ++e)
                L[e] = (Pc[e] + (Pn[e] - Pc[e]) * x) * s0 + (Pn[e] - Pc[e]) * s1;
            for (std::size_t j = 0; j < c; ++j) {
                const double ia = hl * IA[(c - j) * kNodes + p];
                const double ib = hl * IB[(c - j) * kNodes + p];
                const double* Pj = &w.P[j * rc];
                const double* Pj1 = &w.P[(j + 1) * rc];
                for (std::size_t e = 0; e < rc; ++e) L[e] -= Pj[e] * ia + Pj1[e] * ib;
            }

            const double rem = w.h * (1.0 - x);
            const double a0 = std::pow(rem, alpha - 1.0);
            const double aT = std::pow(w.h * (double(n - c) - x), alpha - 1.0);
            const double a1 = (1.0 - alpha) * std::pow(rem, alpha) / (alpha * w.h);
            for (std::size_t e = 0; e < C; ++e)
                Rv[e] = (Wc[e] + (Wn[e] - Wc[e]) * x) * a0 - WT[e] * aT - (Wn[e] - Wc[e]) * a1;
            for (std::size_t j = c + 1; j < n; ++j) {
                const double ja = hr * JA[(j - c) * kNodes + p];
                const double jb = hr * JB[(j - c) * kNodes + p];
                const double* Wj = &w.W[j * C];
                const double* Wj1 = &w.W[(j + 1) * C];
                for (std::size_t e = 0; e < C; ++e) Rv[e] -= Wj[e] * ja + Wj1[e] * jb;
            }
            accumulate(rule.w[p] * w.h);
        }
    }
    return acc * scale;
}

GridFunction flatten(const std::vector<double>& grid, const std::vector<Matrix>& vals)
{
    const Eigen::Index R = vals.front().rows(), C = vals.front().cols();
    PathMatrix m(Eigen::Index(vals.size()), R * C);
    for (std::size_t k = 0; k < vals.size(); ++k)
        for (Eigen::Index i = 0; i < R; ++i)
            for (Eigen::Index j = 0; j < C; ++j) m(Eigen::Index(k), i * C + j) = vals[k](i, j);
    return GridFunction(grid, std::move(m));
}

}  // namespace

FracParams FracParams::with_default_alpha(double beta, double gamma)
{
    FracParams p{0.5 * (1.0 - beta + gamma), beta, gamma};
    p.validate();
    return p;
}

void FracParams::validate() const
{
    if (!(beta > 0.5 && beta < 1.0)) throw std::invalid_argument("FracParams: beta must lie in (1/2, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("FracParams: gamma must lie in (0, 1)");
    if (!(alpha > 1.0 - beta && alpha < gamma))
        throw std::invalid_argument("FracParams: alpha must satisfy 1 - beta < alpha < gamma");
}

OperatorPath::OperatorPath(std::vector<double> g, std::vector<Matrix> v) : grid(std::move(g)), values(std::move(v))
{
    if (grid.size() != values.size()) throw std::invalid_argument("OperatorPath: values length differs from grid length");
    if (values.empty()) throw std::invalid_argument("OperatorPath: empty");
    for (const auto& m : values) {
        if (m.rows() != values.front().rows() || m.cols() != values.front().cols())
            throw std::invalid_argument("OperatorPath: inconsistent matrix shapes");
        if (!m.allFinite()) throw std::invalid_argument("OperatorPath: non-finite entry");
    }
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("OperatorPath: grid must be strictly increasing");
}

OperatorPath OperatorPath::constant(std::vector<double> grid, const Matrix& m)
{
    std::vector<Matrix> v(grid.size(), m);
    return OperatorPath(std::move(grid), std::move(v));
}

GridFunction OperatorPath::flattened() const { return flatten(grid, values); }

Matrix weyl_left_derivative(const OperatorPath& psi, double alpha, double T1, double r)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("weyl_left_derivative: alpha must lie in (0,1)");
    if (!is_uniform(psi.grid)) throw std::invalid_argument("weyl_left_derivative: grid must be uniform");
    const std::size_t a = locate(psi.grid, T1, "T1");
    const double h = psi.grid[1] - psi.grid[0];
    const double pos = (r - T1) / h;
    if (!(pos > 0.0) || r > psi.grid.back() + 1e-12 * h)
        throw std::invalid_argument("weyl_left_derivative: r outside (T1, T2]");
    std::size_t c = static_cast<std::size_t>(std::ceil(pos - 1e-12)) - 1;
    if (a + c + 1 >= psi.size()) c = psi.size() - a - 2;
    const double x = pos - double(c);
    OperatorPath sub(std::vector<double>(psi.grid.begin() + long(a), psi.grid.begin() + long(a + c + 2)),
                     std::vector<Matrix>(psi.values.begin() + long(a), psi.values.begin() + long(a + c + 2)));
    GridFunction dummy(sub.grid, PathMatrix::Zero(Eigen::Index(sub.size()), sub.cols()));
    const Window w = make_window(sub, dummy, sub.grid.front(), sub.grid.back());
    std::vector<double> L(std::size_t(w.R * w.C));
    left_at(w, alpha, c, x, L.data());
    Matrix out(w.R, w.C);
    for (Eigen::Index i = 0; i < w.R; ++i)
        for (Eigen::Index j = 0; j < w.C; ++j) out(i, j) = L[std::size_t(i * w.C + j)];
    return out / std::tgamma(1.0 - alpha);
}

SpectralVector weyl_right_derivative(const GridFunction& omega, double alpha, double T2, double r)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("weyl_right_derivative: alpha must lie in (0,1)");
    if (!is_uniform(omega.grid)) throw std::invalid_argument("weyl_right_derivative: grid must be uniform");
    const std::size_t b = locate(omega.grid, T2, "T2");
    const double h = omega.grid[1] - omega.grid[0];
    const double pos = (r - omega.grid.front()) / h;
    if (r < omega.grid.front() - 1e-12 * h || !(r < T2 - 1e-12 * h))
        throw std::invalid_argument("weyl_right_derivative: r outside [T1, T2)");
    const std::size_t c = std::min(static_cast<std::size_t>(std::floor(pos + 1e-12)), b - 1);
    const double x = pos - double(c);
    const GridFunction sub = omega.slice(c, b + 1);
    OperatorPath dummy = OperatorPath::constant(sub.grid, Matrix::Zero(1, Eigen::Index(omega.dim())));
    const Window w = make_window(dummy, sub, sub.grid.front(), sub.grid.back());
    std::vector<double> Rv(std::size_t(w.C));
    right_bracket_at(w, alpha, 0, x, Rv.data());
    SpectralVector out(w.C);
    for (Eigen::Index j = 0; j < w.C; ++j) out(j) = -Rv[std::size_t(j)] / std::tgamma(alpha);
    return out;
}

SpectralVector zahle_integral(const OperatorPath& psi, const GridFunction& omega, const FracParams& p,
                              double T1, double T2)
{
    p.validate();
    return zahle_core(make_window(psi, omega, T1, T2), p.alpha);
}

SpectralVector young_sum_integral(const OperatorPath& psi, const GridFunction& omega, double T1, double T2)
{
    if (psi.cols() != static_cast<Eigen::Index>(omega.dim()))
        throw std::invalid_argument("Psi column count must equal the integrator dimension");
    const std::size_t a = locate(psi.grid, T1, "T1"), b = locate(psi.grid, T2, "T2");
    const std::size_t oa = locate(omega.grid, T1, "T1");
    if (b <= a) throw std::invalid_argument("integration window must satisfy T1 < T2");
    SpectralVector acc = SpectralVector::Zero(psi.rows());
    for (std::size_t k = 0; k < b - a; ++k) {
        const SpectralVector dw = omega.at(oa + k + 1) - omega.at(oa + k);
        acc.noalias() += psi.values[a + k] * dw;
    }
    return acc;
}

Lemma1Report lemma1_bound_check(const OperatorPath& psi, const GridFunction& omega, const FracParams& p,
                                double T1, double T2, double bound)
{
    p.validate();
    Lemma1Report rep;
    const std::size_t a = locate(psi.grid, T1, "T1"), b = locate(psi.grid, T2, "T2");
    const std::size_t oa = locate(omega.grid, T1, "T1");
    const std::size_t n = b - a;
    const GridFunction flat = psi.flattened();
    for (std::size_t parts : {8u, 4u, 2u, 1u}) {
        if (n % parts != 0 || n / parts < 2) continue;
        const std::size_t len = n / parts;
        double best = 0.0;
        for (std::size_t k = 0; k < parts; ++k) {
            const std::size_t s = a + k * len, e = s + len;
            const double t1 = psi.grid[s], t2 = psi.grid[e];
            const SpectralVector I = zahle_integral(psi, omega, p, t1, t2);
            const GridFunction pw = flat.slice(s, e + 1);
            const double psi_norm = sup_norm(pw) + holder_seminorm(pw, p.gamma);
            const GridFunction ow = omega.slice(oa + k * len, oa + k * len + len + 1);
            const double w_semi = holder_seminorm(ow, p.beta);
            const double denom = psi_norm * w_semi * std::pow(t2 - t1, p.beta);
            if (denom > 0.0) best = std::max(best, I.norm() / denom);
        }
        rep.window_lengths.push_back(psi.grid[a + len] - psi.grid[a]);
        rep.max_ratio.push_back(best);
        rep.overall_max = std::max(rep.overall_max, best);
    }
    rep.bounded = std::isfinite(rep.overall_max) && rep.overall_max <= bound;
    return rep;
}

}  // namespace fbmavg
