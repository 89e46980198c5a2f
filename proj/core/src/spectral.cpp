#include "fbmavg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

void check_eigenvalues(const Eigen::VectorXd& lambda)
{
    if (lambda.size() == 0) throw std::invalid_argument("DiagonalOperator: empty spectrum");
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (!std::isfinite(lambda(i)) || lambda(i) <= 0.0)
            throw std::invalid_argument("DiagonalOperator: eigenvalue " + std::to_string(i) +
                                        " must be positive and finite");
        if (i > 0 && lambda(i) < lambda(i - 1))
            throw std::invalid_argument("DiagonalOperator: eigenvalues must be nondecreasing");
    }
}

void check_dims(const DiagonalOperator& op, const SpectralVector& v)
{
    if (static_cast<std::size_t>(v.size()) != op.dim())
        throw std::invalid_argument("dimension mismatch between operator and vector");
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = hi;
        return out;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = std::exp(a + (b - a) * double(k) / double(count - 1));
    return out;
}

// Smallest admissible constants for the four families on one grid.
struct RawFits {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
};

RawFits raw_fits(const DiagonalOperator& op, double sigma, double T, std::size_t n)
{
    const double dt = T / double(n);
    const double lo = 10.0 * dt;
    if (lo >= T) throw std::invalid_argument("semigroup_bound_check: grid too coarse");
    // Snap log-spaced samples onto grid multiples.
    auto snap = [&](std::vector<double> xs) {
        for (auto& x : xs) x = std::max(lo, std::round(x / dt) * dt);
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        return xs;
    };
    const auto args = snap(log_spaced(lo, T, 64));
    const auto coarse = snap(log_spaced(lo, T, 20));
    const Eigen::VectorXd& lam = op.eigenvalues();
    const double l1 = op.lambda_min();

    RawFits r;
    for (double t : args) {
        double m1 = 0, m2 = 0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            m1 = std::max(m1, std::pow(lam(i), sigma) * std::exp(-lam(i) * t));
            m2 = std::max(m2, -std::expm1(-lam(i) * t) * std::pow(lam(i), -sigma));
        }
        r.s1 = std::max(r.s1, m1 / (std::pow(t, -sigma) * std::exp(-l1 * t)));
        r.s2 = std::max(r.s2, m2 / std::pow(t, sigma));
    }
    for (double a : args)
        for (double b : args) {
            double m = 0;
            for (Eigen::Index i = 0; i < lam.size(); ++i)
                m = std::max(m, std::exp(-lam(i) * a) * -std::expm1(-lam(i) * b));
            r.s3 = std::max(r.s3, m / (std::pow(b, sigma) * std::pow(a, -sigma)));
        }
    for (double a : coarse)
        for (double b : coarse)
            for (double c : coarse) {
                double m = 0;
                for (Eigen::Index i = 0; i < lam.size(); ++i)
                    m = std::max(m, std::exp(-lam(i) * a) * std::expm1(-lam(i) * b) *
                                        std::expm1(-lam(i) * c));
                r.s4 = std::max(r.s4, m / (std::pow(b, sigma) * std::pow(c, sigma) *
                                           std::pow(a, -2.0 * sigma)));
            }
    return r;
}

SemigroupFit make_fit(double coarse, double fine)
{
    SemigroupFit f;
    f.c = coarse;
    f.c_refined = fine;
    f.diverging = fine > 1.25 * coarse + 1e-12;
    return f;
}

}  // namespace

DiagonalOperator::DiagonalOperator(std::vector<double> eigenvalues)
    : lambda_(Eigen::Map<const Eigen::VectorXd>(eigenvalues.data(),
                                                static_cast<Eigen::Index>(eigenvalues.size())))
{
    check_eigenvalues(lambda_);
}

DiagonalOperator::DiagonalOperator(const Eigen::VectorXd& eigenvalues) : lambda_(eigenvalues)
{
    check_eigenvalues(lambda_);
}

DiagonalOperator DiagonalOperator::scaled(double factor) const
{
    if (!(factor > 0.0)) throw std::invalid_argument("DiagonalOperator::scaled: factor must be positive");
    return DiagonalOperator(Eigen::VectorXd(lambda_ * factor));
}

SpectralVector semigroup_apply(const DiagonalOperator& op, double t, const SpectralVector& v)
{
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: negative time");
    check_dims(op, v);
    return ((-t * op.eigenvalues().array()).exp() * v.array()).matrix();
}

SpectralVector fractional_power_apply(const DiagonalOperator& op, double sigma,
                                      const SpectralVector& v)
{
    check_dims(op, v);
    return (op.eigenvalues().array().pow(sigma) * v.array()).matrix();
}

GridFunction::GridFunction(std::vector<double> g, PathMatrix v) : grid(std::move(g)), values(std::move(v))
{
    if (static_cast<Eigen::Index>(grid.size()) != values.rows())
        throw std::invalid_argument("GridFunction: values length differs from grid length");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw std::invalid_argument("GridFunction: grid must be strictly increasing");
}

GridFunction GridFunction::slice(std::size_t begin, std::size_t end) const
{
    if (begin >= end || end > grid.size()) throw std::out_of_range("GridFunction::slice");
    const auto len = static_cast<Eigen::Index>(end - begin);
    return GridFunction(std::vector<double>(grid.begin() + long(begin), grid.begin() + long(end)),
                        values.middleRows(static_cast<Eigen::Index>(begin), len));
}

GridFunction GridFunction::stride(std::size_t step) const
{
    if (step == 0) throw std::invalid_argument("GridFunction::stride: zero step");
    std::vector<double> g;
    for (std::size_t k = 0; k < grid.size(); k += step) g.push_back(grid[k]);
    PathMatrix v(static_cast<Eigen::Index>(g.size()), values.cols());
    for (std::size_t k = 0; k < g.size(); ++k)
        v.row(static_cast<Eigen::Index>(k)) = values.row(static_cast<Eigen::Index>(k * step));
    return GridFunction(std::move(g), std::move(v));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b)
{
    if (a.size() != b.size() || a.dim() != b.dim())
        throw std::invalid_argument("GridFunction difference: shape mismatch");
    return GridFunction(a.grid, a.values - b.values);
}

bool is_uniform(const std::vector<double>& grid, double rel_tol)
{
    if (grid.size() < 3) return true;
    const double h = (grid.back() - grid.front()) / double(grid.size() - 1);
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (std::abs((grid[k] - grid[k - 1]) - h) > rel_tol * h + 1e-14 * std::abs(grid[k])) return false;
    return true;
}

double sup_norm(const GridFunction& f)
{
    if (f.size() == 0) return 0.0;
    return f.values.rowwise().norm().maxCoeff();
}

namespace {

// Shared kernel for the seminorm and the weighted norm. weight(s_index, t_index)
// multiplies the quotient; lag powers are tabulated on uniform grids.
template <class Weight>
double pair_sup(const GridFunction& f, double gamma, Weight weight)
{
    const std::size_t m = f.size();
    const auto cols = f.values.cols();
    const bool uniform = is_uniform(f.grid);
    std::vector<double> lag_pow;
    if (uniform) {
        const double h = (f.grid.back() - f.grid.front()) / double(m - 1);
        lag_pow.resize(m);
        for (std::size_t d = 1; d < m; ++d) lag_pow[d] = std::pow(double(d) * h, -gamma);
    }
    const double* data = f.values.data();
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* xi = data + i * cols;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double* xj = data + j * cols;
            double sq = 0.0;
            for (Eigen::Index c = 0; c < cols; ++c) {
                const double d = xj[c] - xi[c];
                sq += d * d;
            }
            if (sq == 0.0) continue;
            const double inv = uniform ? lag_pow[j - i] : std::pow(f.grid[j] - f.grid[i], -gamma);
            best = std::max(best, std::sqrt(sq) * inv * weight(i, j));
        }
    }
    return best;
}

void check_holder_input(const GridFunction& f, double gamma)
{
    if (f.size() < 2) throw std::invalid_argument("Hoelder norm needs at least two grid points");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("Hoelder exponent must lie in (0,1]");
}

}  // namespace

double holder_seminorm(const GridFunction& f, double gamma)
{
    check_holder_input(f, gamma);
    return pair_sup(f, gamma, [](std::size_t, std::size_t) { return 1.0; });
}

double weighted_holder_norm(const GridFunction& f, const HolderParams& p)
{
    check_holder_input(f, p.gamma);
    if (p.rho < 0.0) throw std::invalid_argument("weighted_holder_norm: rho must be nonnegative");
    const double t1 = f.grid.front();
    const std::size_t m = f.size();
    std::vector<double> decay(m), lead(m);
    for (std::size_t k = 0; k < m; ++k) {
        decay[k] = std::exp(-p.rho * (f.grid[k] - t1));
        lead[k] = p.tilde_weight ? std::pow(f.grid[k] - t1, p.gamma) : 1.0;
    }
    double sup_part = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        sup_part = std::max(sup_part, decay[k] * f.values.row(static_cast<Eigen::Index>(k)).norm());
    // With the tilde weight the left endpoint s = T1 contributes nothing.
    const double semi = pair_sup(f, p.gamma, [&](std::size_t i, std::size_t j) { return lead[i] * decay[j]; });
    return sup_part + semi;
}

SemigroupBoundReport semigroup_bound_check(const DiagonalOperator& op, double sigma, double T,
                                           std::size_t n)
{
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("semigroup_bound_check: sigma outside [0,1]");
    if (!(T > 0.0) || n < 20) throw std::invalid_argument("semigroup_bound_check: bad grid");
    const RawFits a = raw_fits(op, sigma, T, n);
    const RawFits b = raw_fits(op, sigma, T, 2 * n);
    SemigroupBoundReport r;
    r.sigma = sigma;
    r.n = n;
    r.semi1 = make_fit(a.s1, b.s1);
    r.semi2 = make_fit(a.s2, b.s2);
    r.semi3 = make_fit(a.s3, b.s3);
    r.semi4 = make_fit(a.s4, b.s4);
    return r;
}

}  // namespace fbmavg
