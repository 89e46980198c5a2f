#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/mild.hpp"
#include "fbmavg/spectral.hpp"
#include "fbmavg/system.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace fbmavg {

// ---- Averaged drift ---------------------------------------------------------

enum class AveragingMode { monte_carlo, ergodic };

struct DriftEstimate {
    SpectralVector mean;
    SpectralVector ci;  // per-component half-width, three standard errors
    std::size_t samples = 0;
};

using DriftEstimator = std::function<DriftEstimate(const SpectralVector&)>;

// Grid of the unscaled fast noise used at eps = 1.
struct FastPathConfig {
    double step = 1.0 / 64.0;
    double past = 40.0;
};

FbmPath sample_fast_path(const SystemSpec& spec, double T_future, std::uint64_t seed, const FastPathConfig& fp = {});

// Mean of f(x, Y_F^1(w^(m), x)) over M independent draws.
DriftEstimate average_drift_mc(const SystemSpec& spec, const SpectralVector& x, std::size_t M, std::uint64_t seed,
                               const FastPathConfig& fp = {});

// Trapezoid time average of f(x, Y_F^1(theta_r w2, x)) over [0, T_erg], with
// batch-means error bars. omega2 is unscaled.
DriftEstimate average_drift_ergodic(const SystemSpec& spec, const SpectralVector& x, const FbmPath& omega2,
                                    double T_erg, std::size_t batches = 20);

// C' = C1 + C1^2 / (lambda_B - C1)
double fbar_lipschitz_bound(const SystemSpec& spec);

struct FbarLipschitzReport {
    double max_ratio = 0.0;
    double bound = 0.0;     // C' * 1.1
    double ci_slack = 0.0;  // 2 max CI / min |dx|
    std::size_t pairs_used = 0;
    bool pass = false;
};

FbarLipschitzReport fbar_lipschitz_audit(const DriftEstimator& fbar,
                                         const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs,
                                         double C_prime);

struct ErgodicResidualReport {
    std::vector<double> T;
    std::vector<double> rms;  // RMS over seeds of |(1/T) int (-A)^{-nu} (f - fbar) dr|
    double nu = 0.5;
    bool decreasing = false;
};

// Prefix averages of one trajectory per seed against a long independent
// reference run of length T_ref.
ErgodicResidualReport ergodic_residual_check(const SystemSpec& spec, const SpectralVector& x,
                                             const std::vector<double>& Ts, std::size_t seeds,
                                             std::uint64_t master_seed, double T_ref, double nu = 0.5,
                                             const FastPathConfig& fp = {});

// Multilinear interpolation of fbar over a lattice of the given spacing; node
// values are computed on demand and shared between threads. Node values
// depend only on the node, so results do not depend on evaluation order.
class FbarCache {
public:
    using NodeEvaluator = std::function<SpectralVector(const SpectralVector&)>;

    FbarCache(NodeEvaluator eval, std::size_t dim, double spacing);

    SpectralVector operator()(const SpectralVector& x);
    std::size_t nodes() const;
    double spacing() const { return spacing_; }

private:
    using Key = std::vector<long long>;
    SpectralVector node(const Key& k);

    NodeEvaluator eval_;
    std::size_t dim_;
    double spacing_;
    mutable std::shared_mutex mutex_;
    std::map<Key, SpectralVector> nodes_;
};

// fbar from the ergodic route on one common path (common random numbers
// across x). For y-independent f this is f itself and no cache is used.
DriftField make_fbar(const SystemSpec& spec, double T_erg, std::uint64_t seed, double lattice,
                     const FastPathConfig& fp = {}, std::shared_ptr<FbarCache>* cache_out = nullptr);

// ---- Khasminskii auxiliary processes ----------------------------------------

struct KhasConfig {
    double delta = 0.05;
    void validate(double dt) const;
};

struct AuxPaths {
    GridFunction Xhat;
    GridFunction Yhat;
};

// Yhat follows the fast equation with x frozen at X^eps(k delta) on each
// block; Xhat integrates f(X^eps(r_delta), Yhat(r)) with h(X^eps(r)) dw1.
AuxPaths khasminskii_aux(const SystemSpec& spec, const FbmPath& omega1, const FbmPath& omega2,
                         const SolutionPath& coupled, const SpectralVector& X0, const SpectralVector& Y0,
                         const KhasConfig& kc, const SolverConfig& cfg);

struct NoisePair {
    FbmPath omega1;  // one-sided on [0, T], step dt1
    FbmPath omega2;  // unscaled, two-sided on [-past, T / eps_min], step h2
};

NoisePair sample_noise_pair(const SystemSpec& spec, double T, double dt1, double eps_min, double h2, double past,
                            std::uint64_t seed);

// sum over blocks of int |Yhat - Y_F^eps(theta_t w2, X^eps(k delta))| dt
double y1_y2_block_integral(const SystemSpec& spec, const FbmPath& omega2, const SolutionPath& coupled,
                            const AuxPaths& aux, double delta);

// Mean over blocks k >= 1 of e^{-rho (k+1) delta} int |Y - Yhat| ds / (1 + (k delta)^-gamma).
double y_yhat_weighted_integral(const SolutionPath& coupled, const AuxPaths& aux, double delta, double gamma,
                                double rho);

struct AuxStudyConfig {
    double T = 1.0;
    double h2 = 1.0 / 32.0;
    double past = 128.0;
    std::size_t seeds = 4;
    std::uint64_t master_seed = 1;
    double gamma = 0.55;
    double rho = 1.0;
    std::size_t jobs = 1;
    SpectralVector X0, Y0;
};

struct ScalingReport {
    std::vector<double> param;  // eps or delta
    std::vector<double> value;  // mean over seeds
    std::vector<double> ratio;  // value[i] / value[i+1]
    double slope = 0.0;         // log-log least squares
    bool pass = false;
    std::string note;
};

// Solver dt = eps * h2 at each eps; delta fixed.
ScalingReport y1_y2_scaling(const SystemSpec& spec, const std::vector<double>& eps_list, double delta,
                            const AuxStudyConfig& c);

// One eps for all deltas; refuses to run unless
// eps (1 + |X0| + |Y0| + sup |Z^eps|) <= delta^{1+gamma} for every delta.
ScalingReport y_yhat_scaling(const SystemSpec& spec, double eps, const std::vector<double>& delta_list,
                             const AuxStudyConfig& c);

// ---- Convergence experiment -------------------------------------------------

struct ConvergenceConfig {
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.02};
    std::size_t seeds = 20;
    std::uint64_t master_seed = 1;
    double T = 1.0;
    double h2 = 1.0 / 1280.0;  // unscaled omega2 step; eps * h2 must divide solver.dt
    double past = 40.0;
    double delta = 0.05;
    double T_erg = 1000.0;
    double lattice = 0.1;
    std::uint64_t fbar_seed = 7;
    FastPathConfig fbar_path;
    SolverConfig solver = [] {
        SolverConfig s;
        s.dt = 1.0 / 6400.0;
        return s;
    }();
    SpectralVector X0, Y0;
    std::size_t jobs = 1;
    bool record_runtime = true;
};

struct ConvergenceRow {
    std::uint64_t seed = 0;
    double eps = 0.0, delta = 0.0;
    double e_sup = 0.0, e_gamma = 0.0, e_hat = 0.0, e_xx = 0.0;
    double runtime_s = 0.0;
    std::string error;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::vector<double> eps;
    std::vector<double> median_e;
    bool monotone = false;
    bool halved = false;  // median e(eps_min) < median e(eps_max) / 2
    std::size_t fbar_nodes = 0;
};

ConvergenceTable convergence_experiment(const SystemSpec& spec_template, const ConvergenceConfig& cfg);

void write_convergence_csv(std::ostream& os, const ConvergenceTable& t);
void write_convergence_summary(std::ostream& os, const ConvergenceTable& t);

double median(std::vector<double> v);

}  // namespace fbmavg
