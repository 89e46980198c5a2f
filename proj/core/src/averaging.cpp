#include "fbmavg/averaging.hpp"

#include "fbmavg/fixed_point.hpp"
#include "fbmavg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

constexpr std::uint64_t kMcTag = 0x6d63;
constexpr std::uint64_t kResidualTag = 0x726573;
constexpr double kCiZ = 3.0;

FrozenFastSpec unit_frozen(const SystemSpec& spec, const SpectralVector& x)
{
    return FrozenFastSpec{spec.with_eps(1.0), x};
}

// Trapezoid integral of the rows of F on a uniform grid of step h.
SpectralVector trapezoid(const PathMatrix& F, std::size_t a, std::size_t b, double h)
{
    SpectralVector s = SpectralVector::Zero(F.cols());
    if (b <= a) return s;
    s += 0.5 * (F.row(Eigen::Index(a)) + F.row(Eigen::Index(b))).transpose();
    for (std::size_t k = a + 1; k < b; ++k) s += F.row(Eigen::Index(k)).transpose();
    return s * h;
}

PathMatrix drift_along(const SystemSpec& spec, const SpectralVector& x, const GridFunction& traj)
{
    PathMatrix F(Eigen::Index(traj.size()), Eigen::Index(spec.dim()));
    for (std::size_t k = 0; k < traj.size(); ++k) F.row(Eigen::Index(k)) = spec.f(x, traj.at(k)).transpose();
    return F;
}

}  // namespace

FbmPath sample_fast_path(const SystemSpec& spec, double T_future, std::uint64_t seed, const FastPathConfig& fp)
{
    const UniformGrid grid = UniformGrid::two_sided(fp.past, T_future, fp.step);
    return sample_trace_class_fbm(spec.Q2, spec.hurst.H2, grid, seed, spec.normalization);
}

DriftEstimate average_drift_mc(const SystemSpec& spec, const SpectralVector& x, std::size_t M, std::uint64_t seed,
                               const FastPathConfig& fp)
{
    if (M < 2) throw std::invalid_argument("average_drift_mc: need M >= 2");
    const FrozenFastSpec fs = unit_frozen(spec, x);
    fs.validate();
    FixedPointOptions opt;
    opt.with_radius = false;
    const Eigen::Index n = x.size();
    SpectralVector mean = SpectralVector::Zero(n), m2 = SpectralVector::Zero(n);
    for (std::size_t m = 0; m < M; ++m) {
        const FbmPath w = sample_fast_path(spec, 0.0, derive_seed(seed, m, kMcTag), fp);
        SpectralVector v;
        try {
            v = spec.f(x, pullback_fixed_point(fs, w, 0.0, opt).Y_F);
        } catch (const std::exception& e) {
            throw std::runtime_error("average_drift_mc: sample " + std::to_string(m) + ": " + e.what());
        }
        const SpectralVector d = v - mean;
        mean += d / double(m + 1);
        m2 += d.cwiseProduct(v - mean);
    }
    DriftEstimate est;
    est.mean = mean;
    est.ci = kCiZ * (m2 / double(M - 1) / double(M)).cwiseSqrt();
    est.samples = M;
    return est;
}

DriftEstimate average_drift_ergodic(const SystemSpec& spec, const SpectralVector& x, const FbmPath& omega2,
                                    double T_erg, std::size_t batches)
{
    if (!(T_erg > 0.0)) throw std::invalid_argument("average_drift_ergodic: T_erg must be positive");
    const FrozenFastSpec fs = unit_frozen(spec, x);
    const GridFunction traj = fixed_point_trajectory(fs, omega2, 0.0, T_erg);
    const PathMatrix F = drift_along(spec, x, traj);
    const std::size_t m = traj.size() - 1;
    const double h = omega2.grid.step;
    DriftEstimate est;
    est.samples = m;
    est.mean = trapezoid(F, 0, m, h) / (double(m) * h);
    batches = std::min(batches, m);
    if (batches >= 2) {
        const std::size_t len = m / batches;
        SpectralVector s = SpectralVector::Zero(x.size()), s2 = SpectralVector::Zero(x.size());
        for (std::size_t b = 0; b < batches; ++b) {
            const SpectralVector bm = trapezoid(F, b * len, (b + 1) * len, h) / (double(len) * h);
            s += bm;
            s2 += bm.cwiseProduct(bm);
        }
        const double B = double(batches);
        const SpectralVector var = ((s2 - s.cwiseProduct(s) / B) / (B - 1.0)).cwiseMax(0.0);
        est.ci = kCiZ * (var / B).cwiseSqrt();
    } else {
        est.ci = SpectralVector::Constant(x.size(), std::numeric_limits<double>::infinity());
    }
    if (!spec.f_depends_on_y) est.ci.setZero();
    return est;
}

double fbar_lipschitz_bound(const SystemSpec& spec)
{
    const double c1 = spec.C1;
    return c1 + c1 * c1 / (spec.lambda_B() - c1);
}

FbarLipschitzReport fbar_lipschitz_audit(const DriftEstimator& fbar,
                                         const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs,
                                         double C_prime)
{
    FbarLipschitzReport r;
    r.bound = 1.1 * C_prime;
    double min_dx = std::numeric_limits<double>::infinity(), max_ci = 0.0;
    for (const auto& [x1, x2] : pairs) {
        const double dx = (x1 - x2).norm();
        if (!(dx > 0.0)) continue;
        const DriftEstimate a = fbar(x1), b = fbar(x2);
        r.max_ratio = std::max(r.max_ratio, (a.mean - b.mean).norm() / dx);
        min_dx = std::min(min_dx, dx);
        max_ci = std::max({max_ci, a.ci.norm(), b.ci.norm()});
        ++r.pairs_used;
    }
    if (r.pairs_used < 10) throw std::invalid_argument("fbar_lipschitz_audit: need at least 10 nondegenerate pairs");
    r.ci_slack = 2.0 * max_ci / min_dx;
    r.pass = r.max_ratio <= r.bound + r.ci_slack;
    return r;
}

ErgodicResidualReport ergodic_residual_check(const SystemSpec& spec, const SpectralVector& x,
                                             const std::vector<double>& Ts, std::size_t seeds,
                                             std::uint64_t master_seed, double T_ref, double nu,
                                             const FastPathConfig& fp)
{
    if (Ts.empty() || seeds == 0) throw std::invalid_argument("ergodic_residual_check: empty T list or no seeds");
    const double T_max = *std::max_element(Ts.begin(), Ts.end());
    const FbmPath ref_path = sample_fast_path(spec, T_ref, derive_seed(master_seed, seeds, kResidualTag), fp);
    const SpectralVector fbar = average_drift_ergodic(spec, x, ref_path, T_ref).mean;
    const FrozenFastSpec fs = unit_frozen(spec, x);
    const double h = fp.step;
    std::vector<double> sq(Ts.size(), 0.0);
    for (std::size_t s = 0; s < seeds; ++s) {
        const FbmPath w = sample_fast_path(spec, T_max, derive_seed(master_seed, s, kResidualTag), fp);
        const PathMatrix F = drift_along(spec, x, fixed_point_trajectory(fs, w, 0.0, T_max));
        for (std::size_t i = 0; i < Ts.size(); ++i) {
            const std::size_t m = w.index_of(Ts[i]) - w.zero_index();
            const SpectralVector avg = trapezoid(F, 0, m, h) / (double(m) * h) - fbar;
            const double r = fractional_power_apply(spec.A, -nu, avg).norm();
            sq[i] += r * r;
        }
    }
    ErgodicResidualReport rep;
    rep.T = Ts;
    rep.nu = nu;
    for (double v : sq) rep.rms.push_back(std::sqrt(v / double(seeds)));
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.rms.size(); ++i)
        if (!(rep.rms[i] < rep.rms[i - 1])) rep.decreasing = false;
    return rep;
}

FbarCache::FbarCache(NodeEvaluator eval, std::size_t dim, double spacing)
    : eval_(std::move(eval)), dim_(dim), spacing_(spacing)
{
    if (!(spacing > 0.0)) throw std::invalid_argument("FbarCache: spacing must be positive");
    if (dim == 0 || dim > 16) throw std::invalid_argument("FbarCache: dimension must lie in [1, 16]");
}

std::size_t FbarCache::nodes() const
{
    std::shared_lock lock(mutex_);
    return nodes_.size();
}

SpectralVector FbarCache::node(const Key& k)
{
    {
        std::shared_lock lock(mutex_);
        const auto it = nodes_.find(k);
        if (it != nodes_.end()) return it->second;
    }
    SpectralVector x(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i) x(Eigen::Index(i)) = double(k[i]) * spacing_;
    SpectralVector v = eval_(x);
    std::unique_lock lock(mutex_);
    return nodes_.emplace(k, std::move(v)).first->second;
}

SpectralVector FbarCache::operator()(const SpectralVector& x)
{
    if (x.size() != Eigen::Index(dim_)) throw std::invalid_argument("FbarCache: dimension mismatch");
    Key base(dim_);
    std::vector<double> frac(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const double q = x(Eigen::Index(i)) / spacing_;
        if (!std::isfinite(q)) throw std::invalid_argument("FbarCache: non-finite argument");
        const double fl = std::floor(q);
        base[i] = static_cast<long long>(fl);
        frac[i] = q - fl;
    }
    SpectralVector out = SpectralVector::Zero(Eigen::Index(dim_));
    Key k(dim_);
    for (std::size_t corner = 0; corner < (std::size_t(1) << dim_); ++corner) {
        double w = 1.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const bool up = (corner >> i) & 1u;
            k[i] = base[i] + (up ? 1 : 0);
            w *= up ? frac[i] : 1.0 - frac[i];
        }
        if (w == 0.0) continue;
        out += w * node(k);
    }
    return out;
}

DriftField make_fbar(const SystemSpec& spec, double T_erg, std::uint64_t seed, double lattice,
                     const FastPathConfig& fp, std::shared_ptr<FbarCache>* cache_out)
{
    if (!spec.f_depends_on_y) {
        const DriftMap f = spec.f;
        const Eigen::Index n = Eigen::Index(spec.dim());
        return [f, n](const SpectralVector& x) { return f(x, SpectralVector::Zero(n)); };
    }
    auto path = std::make_shared<const FbmPath>(sample_fast_path(spec, T_erg, seed, fp));
    const SystemSpec unit = spec.with_eps(1.0);
    auto cache = std::make_shared<FbarCache>(
        [unit, path, T_erg](const SpectralVector& x) { return average_drift_ergodic(unit, x, *path, T_erg).mean; },
        spec.dim(), lattice);
    if (cache_out) *cache_out = cache;
    return [cache](const SpectralVector& x) { return (*cache)(x); };
}

double median(std::vector<double> v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace fbmavg
