#pragma once

#include "fbmavg/spectral.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fbmavg {

struct HurstPair {
    double H1 = 0.75;
    double H2 = 0.75;

    // H1 > 1/2 and H2 in (1 - H1, 1).
    void validate() const;
};

struct CovarianceSpectrum {
    std::vector<double> q_sq;

    CovarianceSpectrum() = default;
    explicit CovarianceSpectrum(std::vector<double> q);
    std::size_t dim() const { return q_sq.size(); }
    double trace() const;
};

// Uniform grid t_k = (k - n_past) * step, k = 0 .. n_past + n_future.
// Zero is always the grid point with index n_past.
struct UniformGrid {
    double step = 1.0;
    std::size_t n_past = 0;
    std::size_t n_future = 0;

    static UniformGrid one_sided(double T, std::size_t n);
    static UniformGrid two_sided(double T_past, double T_future, double step);

    std::size_t size() const { return n_past + n_future + 1; }
    double time(std::size_t k) const { return (double(k) - double(n_past)) * step; }
    double t_min() const { return time(0); }
    double t_max() const { return time(size() - 1); }
};

// kappa = 1/2 gives Var B(t) = t^{2H}; kappa = 1 doubles it.
enum class Normalization { standard, doubled };

double covariance_kappa(Normalization n);

struct FbmPath {
    UniformGrid grid;
    PathMatrix values;  // rows: grid points, columns: modes
    double hurst = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return grid.size(); }
    std::size_t modes() const { return static_cast<std::size_t>(values.cols()); }
    double time(std::size_t k) const { return grid.time(k); }
    std::size_t zero_index() const { return grid.n_past; }
    // Index of a grid-aligned time; throws when off-grid or outside the support.
    std::size_t index_of(double t) const;
    bool on_grid(double t) const;
    SpectralVector at(std::size_t k) const { return values.row(static_cast<Eigen::Index>(k)).transpose(); }
    SpectralVector value(double t) const { return at(index_of(t)); }
    GridFunction window(double t0, double t1) const;
};

std::vector<double> sample_fbm_1d(double H, const UniformGrid& grid, std::uint64_t seed,
                                  Normalization norm = Normalization::standard);

FbmPath sample_trace_class_fbm(const CovarianceSpectrum& Q, double H, const UniformGrid& grid,
                               std::uint64_t seed, Normalization norm = Normalization::standard);

// (theta_t w)(s) = w(s + t) - w(t)
FbmPath shift(const FbmPath& path, double t);
// w_eps(t) = w(t / eps)
FbmPath scale_time(const FbmPath& path, double eps);
// Keep every stride-th grid point, preserving the point at zero.
FbmPath subsample(const FbmPath& path, std::size_t stride);
// Restrict to the grid-aligned window [t0, t1]; t0 <= 0 <= t1.
FbmPath restrict_path(const FbmPath& path, double t0, double t1);
FbmPath zero_path(std::size_t modes, const UniformGrid& grid);

// Slope of the log second-order structure function over dyadic lags, halved.
double estimate_holder_exponent(const FbmPath& path);

void write_csv(std::ostream& os, const FbmPath& path);
FbmPath read_csv(std::istream& is, double hurst = 0.0, std::uint64_t seed = 0);

}  // namespace fbmavg
