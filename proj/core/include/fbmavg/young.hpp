#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/spectral.hpp"

#include <vector>

namespace fbmavg {

struct FracParams {
    double alpha = 0.4;
    double beta = 0.7;
    double gamma = 0.55;

    // alpha at the midpoint of (1 - beta, gamma)
    static FracParams with_default_alpha(double beta, double gamma);
    void validate() const;
};

// Matrix-valued path t -> Psi(t) on a uniform grid.
struct OperatorPath {
    std::vector<double> grid;
    std::vector<Matrix> values;

    OperatorPath() = default;
    OperatorPath(std::vector<double> grid, std::vector<Matrix> values);

    static OperatorPath constant(std::vector<double> grid, const Matrix& m);

    std::size_t size() const { return grid.size(); }
    Eigen::Index rows() const { return values.front().rows(); }
    Eigen::Index cols() const { return values.front().cols(); }
    // Entries flattened row-major per time point, for norm computations.
    GridFunction flattened() const;
};

// D^alpha_{T1+} Psi [r], for T1 < r <= end of grid.
Matrix weyl_left_derivative(const OperatorPath& psi, double alpha, double T1, double r);

// Right derivative of order 1 - alpha of w - w(T2) at r, T1 <= r < T2. The
// sign factor is combined with the one of the left derivative so that the
// pairing of both reproduces increments for constant integrands.
SpectralVector weyl_right_derivative(const GridFunction& omega, double alpha, double T2, double r);

// Zahle integral of Psi against omega over [T1, T2]. Psi and omega must share
// the grid points of the window. Inner singular integrals are exact for the
// piecewise-linear interpolants; the outer one uses Gauss-Legendre per cell.
SpectralVector zahle_integral(const OperatorPath& psi, const GridFunction& omega, const FracParams& p,
                              double T1, double T2);

// Left-point Riemann-Stieltjes sums.
SpectralVector young_sum_integral(const OperatorPath& psi, const GridFunction& omega, double T1, double T2);

struct Lemma1Report {
    std::vector<double> window_lengths;
    std::vector<double> max_ratio;  // per window length
    double overall_max = 0.0;
    bool bounded = false;
};

// Ratio |int Psi dw| / (||Psi||_gamma |||w|||_beta (T2-T1)^beta) over all
// disjoint windows of length L/8, L/4, L/2 and L.
Lemma1Report lemma1_bound_check(const OperatorPath& psi, const GridFunction& omega, const FracParams& p,
                                double T1, double T2, double bound = 1e3);

}  // namespace fbmavg
