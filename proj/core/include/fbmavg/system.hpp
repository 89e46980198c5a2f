#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/spectral.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fbmavg {

using DriftMap = std::function<SpectralVector(const SpectralVector& x, const SpectralVector& y)>;
using DiffusionMap = std::function<Matrix(const SpectralVector& x)>;
using DriftField = std::function<SpectralVector(const SpectralVector& x)>;

// Parameters of the built-in coefficient families.
//   benchmark:     f = f_scale tanh(x + y), g = g_x x + g_y y + g_const,
//                  h = (h_base + h_amp tanh(x_1)) Id
//   y_independent: f = f_scale tanh(x), g and h as above
//   linear:        f = f_lin x, g as above, h = h_base Id
//   zero:          f = g = 0, h = 0
struct CoefficientParams {
    std::string family = "benchmark";
    double f_scale = 0.5;
    double f_lin = 0.1;
    double g_x = 0.5;
    double g_y = -0.25;
    double g_const = 0.0;
    double h_base = 0.5;
    double h_amp = 0.25;
};

struct SystemSpec {
    std::string name;
    DiagonalOperator A;
    DiagonalOperator B;
    DriftMap f;
    DriftMap g;
    DiffusionMap h;
    double eps = 1.0;

    // f and g are each C1-Lipschitz for the metric |dx| + |dy|.
    double C1 = 0.5;
    double C2 = 0.0;  // |g(0,0)|
    double f_bound = 1.0;
    double c_h = 0.0, c_Dh = 0.0, c_D2h = 0.0;  // Hilbert-Schmidt bounds

    HurstPair hurst;
    CovarianceSpectrum Q1, Q2;
    Normalization normalization = Normalization::standard;

    // Declared structure, used for shortcuts and trivial checks.
    bool f_depends_on_y = true;
    bool g_depends_on_x = true;

    std::size_t dim() const { return A.dim(); }
    double lambda_B() const { return B.lambda_min(); }
    double lambda_A() const { return A.lambda_min(); }
    SystemSpec with_eps(double e) const;
    // Throws std::invalid_argument naming the violated hypothesis.
    void validate() const;
};

SystemSpec make_system(const CoefficientParams& params, const std::vector<double>& lambda_A,
                       const std::vector<double>& lambda_B, const std::vector<double>& q1,
                       const std::vector<double>& q2, const HurstPair& hurst, double eps = 1.0);

// N = 4, lambda_A = (1,2,3,4), lambda_B = (2,3,4,5), q^2 = (1, 1/4, 1/9, 1/16).
SystemSpec benchmark_system(double eps = 1.0, const std::string& family = "benchmark");

struct CoefficientAudit {
    double f_lipschitz = 0.0;
    double g_lipschitz = 0.0;
    double f_sup = 0.0;
    double h_sup = 0.0;
    double h_lipschitz = 0.0;
    bool pass = false;
    std::string message;
};

// Randomized difference quotients against the declared constants x 1.001.
CoefficientAudit audit_coefficients(const SystemSpec& spec, std::size_t samples, std::uint64_t seed,
                                    double radius = 4.0);

}  // namespace fbmavg
