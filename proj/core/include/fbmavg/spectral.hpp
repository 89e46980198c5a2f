#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace fbmavg {

// Coefficients with respect to the eigenbasis of -A / -B.
using SpectralVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Rows are time points, columns are modes.
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Diagonal model of a positive self-adjoint operator with compact inverse.
class DiagonalOperator {
public:
    DiagonalOperator() = default;
    explicit DiagonalOperator(std::vector<double> eigenvalues);
    explicit DiagonalOperator(const Eigen::VectorXd& eigenvalues);

    std::size_t dim() const { return static_cast<std::size_t>(lambda_.size()); }
    double lambda_min() const { return lambda_(0); }
    double eigenvalue(std::size_t i) const { return lambda_(static_cast<Eigen::Index>(i)); }
    const Eigen::VectorXd& eigenvalues() const { return lambda_; }

    DiagonalOperator scaled(double factor) const;

private:
    Eigen::VectorXd lambda_;
};

SpectralVector semigroup_apply(const DiagonalOperator& op, double t, const SpectralVector& v);
SpectralVector fractional_power_apply(const DiagonalOperator& op, double sigma,
                                      const SpectralVector& v);

struct GridFunction {
    std::vector<double> grid;
    PathMatrix values;

    GridFunction() = default;
    GridFunction(std::vector<double> grid, PathMatrix values);

    std::size_t size() const { return grid.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
    SpectralVector at(std::size_t k) const { return values.row(static_cast<Eigen::Index>(k)).transpose(); }
    GridFunction slice(std::size_t begin, std::size_t end) const;
    GridFunction stride(std::size_t step) const;
};

GridFunction operator-(const GridFunction& a, const GridFunction& b);

struct HolderParams {
    double gamma = 0.5;
    double rho = 0.0;
    bool tilde_weight = false;
};

double sup_norm(const GridFunction& f);
double holder_seminorm(const GridFunction& f, double gamma);
double weighted_holder_norm(const GridFunction& f, const HolderParams& p);

struct SemigroupFit {
    double c = 0.0;
    double c_refined = 0.0;
    bool diverging = false;
};

struct SemigroupBoundReport {
    double sigma = 0.0;
    std::size_t n = 0;
    SemigroupFit semi1;  // ||S(t)||_{V -> V_sigma} <= c t^-sigma e^{-lambda_1 t}
    SemigroupFit semi2;  // ||S(t) - id||_{V_sigma -> V} <= c t^sigma
    SemigroupFit semi3;  // ||S(a)(S(b) - id)|| <= c b^sigma a^-sigma
    SemigroupFit semi4;  // ||S(a)(S(b) - id)(S(c) - id)|| <= c b^sigma c^sigma a^-2sigma
    bool any_diverging() const
    {
        return semi1.diverging || semi2.diverging || semi3.diverging || semi4.diverging;
    }
};

// Smallest admissible constants on [0,T] sampled at n and 2n points, ignoring
// arguments below ten grid steps.
SemigroupBoundReport semigroup_bound_check(const DiagonalOperator& op, double sigma, double T,
                                           std::size_t n);

bool is_uniform(const std::vector<double>& grid, double rel_tol = 1e-9);

}  // namespace fbmavg
