#include "fbmavg/fbm.hpp"

#include "fbmavg/csv.hpp"
#include "fbmavg/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fbmavg {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

void fft_inplace(std::vector<std::complex<double>>& data)
{
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

// Autocovariance of unit-variance fractional Gaussian noise at lag k.
double fgn_autocov(double H, std::size_t k)
{
    const double h2 = 2.0 * H;
    const double kk = double(k);
    if (k == 0) return 1.0;
    return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

std::vector<double> fgn_cholesky(double H, std::size_t n, std::mt19937_64& rng)
{
    if (n > 4096) throw std::runtime_error("fractional Gaussian noise: embedding failed and grid too large for Cholesky");
    Eigen::MatrixXd C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            C(Eigen::Index(i), Eigen::Index(j)) = fgn_autocov(H, i > j ? i - j : j - i);
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) throw std::runtime_error("fractional Gaussian noise: Cholesky failed");
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    Eigen::VectorXd x = llt.matrixL() * z;
    return std::vector<double>(x.data(), x.data() + x.size());
}

// Davies-Harte circulant embedding of length 2n.
std::vector<double> fgn_circulant(double H, std::size_t n, std::mt19937_64& rng)
{
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> c(m);
    for (std::size_t k = 0; k <= n; ++k) c[k] = fgn_autocov(H, k);
    for (std::size_t k = n + 1; k < m; ++k) c[k] = c[m - k];
    fft_inplace(c);
    double lmax = 0.0;
    for (const auto& v : c) lmax = std::max(lmax, v.real());
    std::vector<double> lam(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double l = c[k].real();
        if (l < -1e-10 * lmax) return fgn_cholesky(H, n, rng);
        lam[k] = std::max(l, 0.0);
    }
    std::normal_distribution<double> normal;
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double a = normal(rng);
        const double b = normal(rng);
        w[k] = std::sqrt(lam[k] / double(m)) * std::complex<double>(a, b);
    }
    fft_inplace(w);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = w[k].real();
    return out;
}

std::uint64_t mode_seed(std::uint64_t seed, std::size_t mode)
{
    return mode == 0 ? seed : derive_seed(seed, mode, 0x66626d);
}

}  // namespace

void HurstPair::validate() const
{
    if (!(H1 > 0.5 && H1 < 1.0))
        throw std::invalid_argument("H1 = " + std::to_string(H1) + " violates the constraint H1 > 1/2 (and H1 < 1)");
    if (!(H2 > 1.0 - H1 && H2 < 1.0))
        throw std::invalid_argument("H2 = " + std::to_string(H2) + " violates the constraint 1 - H1 < H2 < 1");
}

CovarianceSpectrum::CovarianceSpectrum(std::vector<double> q) : q_sq(std::move(q))
{
    for (double v : q_sq)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("CovarianceSpectrum: entries must be finite and nonnegative");
}

double CovarianceSpectrum::trace() const { return std::accumulate(q_sq.begin(), q_sq.end(), 0.0); }

UniformGrid UniformGrid::one_sided(double T, std::size_t n)
{
    if (!(T > 0.0) || n == 0) throw std::invalid_argument("UniformGrid: need T > 0 and n > 0");
    return UniformGrid{T / double(n), 0, n};
}

UniformGrid UniformGrid::two_sided(double T_past, double T_future, double step)
{
    if (!(step > 0.0) || T_past < 0.0 || T_future < 0.0)
        throw std::invalid_argument("UniformGrid: need positive step and nonnegative extents");
    return UniformGrid{step, static_cast<std::size_t>(std::ceil(T_past / step - 1e-9)),
                       static_cast<std::size_t>(std::ceil(T_future / step - 1e-9))};
}

double covariance_kappa(Normalization n) { return n == Normalization::doubled ? 1.0 : 0.5; }

bool FbmPath::on_grid(double t) const
{
    const double q = t / grid.step;
    const double k = std::round(q);
    if (std::abs(q - k) > 1e-6) return false;
    const double idx = k + double(grid.n_past);
    return idx >= 0.0 && idx < double(size());
}

std::size_t FbmPath::index_of(double t) const
{
    const double q = t / grid.step;
    const double k = std::round(q);
    if (std::abs(q - k) > 1e-6)
        throw std::invalid_argument("time " + std::to_string(t) + " is not on the path grid");
    const double idx = k + double(grid.n_past);
    if (idx < 0.0 || idx >= double(size()))
        throw std::out_of_range("time " + std::to_string(t) + " lies outside the sampled support [" +
                                std::to_string(grid.t_min()) + ", " + std::to_string(grid.t_max()) + "]");
    return static_cast<std::size_t>(idx);
}

GridFunction FbmPath::window(double t0, double t1) const
{
    const std::size_t a = index_of(t0), b = index_of(t1);
    if (b <= a) throw std::invalid_argument("FbmPath::window: empty window");
    std::vector<double> g(b - a + 1);
    for (std::size_t k = a; k <= b; ++k) g[k - a] = time(k);
    return GridFunction(std::move(g), values.middleRows(Eigen::Index(a), Eigen::Index(b - a + 1)));
}

std::vector<double> sample_fbm_1d(double H, const UniformGrid& grid, std::uint64_t seed, Normalization norm)
{
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("Hurst index must lie in (0,1)");
    if (!(grid.step > 0.0)) throw std::invalid_argument("grid step must be positive");
    const std::size_t n = grid.size() - 1;
    std::vector<double> path(grid.size(), 0.0);
    if (n == 0) return path;
    auto rng = substream(seed, 0, 0x6667);
    const std::vector<double> inc = fgn_circulant(H, n, rng);
    const double scale = std::sqrt(2.0 * covariance_kappa(norm)) * std::pow(grid.step, H);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += scale * inc[k];
        path[k + 1] = acc;
    }
    const double origin = path[grid.n_past];
    for (double& v : path) v -= origin;
    path[grid.n_past] = 0.0;
    return path;
}

FbmPath sample_trace_class_fbm(const CovarianceSpectrum& Q, double H, const UniformGrid& grid,
                               std::uint64_t seed, Normalization norm)
{
    if (Q.dim() == 0) throw std::invalid_argument("CovarianceSpectrum: empty");
    FbmPath p;
    p.grid = grid;
    p.hurst = H;
    p.seed = seed;
    p.values = PathMatrix::Zero(Eigen::Index(grid.size()), Eigen::Index(Q.dim()));
    for (std::size_t i = 0; i < Q.dim(); ++i) {
        if (Q.q_sq[i] == 0.0) continue;
        const auto mode = sample_fbm_1d(H, grid, mode_seed(seed, i), norm);
        const double q = std::sqrt(Q.q_sq[i]);
        for (std::size_t k = 0; k < mode.size(); ++k) p.values(Eigen::Index(k), Eigen::Index(i)) = q * mode[k];
    }
    return p;
}

FbmPath shift(const FbmPath& path, double t)
{
    const std::size_t idx = path.index_of(t);
    FbmPath out = path;
    out.grid.n_past = idx;
    out.grid.n_future = path.size() - 1 - idx;
    out.values.rowwise() -= path.values.row(Eigen::Index(idx));
    out.values.row(Eigen::Index(idx)).setZero();
    return out;
}

FbmPath scale_time(const FbmPath& path, double eps)
{
    if (!(eps > 0.0)) throw std::invalid_argument("scale_time: eps must be positive");
    FbmPath out = path;
    out.grid.step = path.grid.step * eps;
    return out;
}

FbmPath subsample(const FbmPath& path, std::size_t stride)
{
    if (stride == 0) throw std::invalid_argument("subsample: zero stride");
    FbmPath out;
    out.hurst = path.hurst;
    out.seed = path.seed;
    out.grid.step = path.grid.step * double(stride);
    out.grid.n_past = path.grid.n_past / stride;
    out.grid.n_future = path.grid.n_future / stride;
    out.values.resize(Eigen::Index(out.grid.size()), path.values.cols());
    const std::size_t first = path.grid.n_past - out.grid.n_past * stride;
    for (std::size_t k = 0; k < out.grid.size(); ++k)
        out.values.row(Eigen::Index(k)) = path.values.row(Eigen::Index(first + k * stride));
    return out;
}

FbmPath restrict_path(const FbmPath& path, double t0, double t1)
{
    if (t0 > 0.0 || t1 < 0.0) throw std::invalid_argument("restrict_path: window must contain zero");
    const std::size_t a = path.index_of(t0), b = path.index_of(t1);
    FbmPath out;
    out.hurst = path.hurst;
    out.seed = path.seed;
    out.grid.step = path.grid.step;
    out.grid.n_past = path.grid.n_past - a;
    out.grid.n_future = b - path.grid.n_past;
    out.values = path.values.middleRows(Eigen::Index(a), Eigen::Index(b - a + 1));
    return out;
}

FbmPath zero_path(std::size_t modes, const UniformGrid& grid)
{
    FbmPath p;
    p.grid = grid;
    p.values = PathMatrix::Zero(Eigen::Index(grid.size()), Eigen::Index(modes));
    return p;
}

double estimate_holder_exponent(const FbmPath& path)
{
    const std::size_t n = path.size();
    if (n < 256) throw std::invalid_argument("estimate_holder_exponent: need at least 256 grid points");
    std::vector<double> lx, ly;
    for (std::size_t lag = 1; lag <= n / 16; lag *= 2) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            acc += (path.values.row(Eigen::Index(i + lag)) - path.values.row(Eigen::Index(i))).squaredNorm();
        acc /= double(n - lag);
        if (acc <= 0.0) continue;
        lx.push_back(std::log(double(lag) * path.grid.step));
        ly.push_back(std::log(acc));
    }
    if (lx.size() < 2) return 1.0;
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / double(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / double(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    return 0.5 * sxy / sxx;
}

void write_csv(std::ostream& os, const FbmPath& path)
{
    os << "t";
    for (std::size_t i = 0; i < path.modes(); ++i) os << ",mode_" << (i + 1);
    os << '\n';
    for (std::size_t k = 0; k < path.size(); ++k) {
        os << format_double(path.time(k));
        for (std::size_t i = 0; i < path.modes(); ++i) os << ',' << format_double(path.values(Eigen::Index(k), Eigen::Index(i)));
        os << '\n';
    }
}

FbmPath read_csv(std::istream& is, double hurst, std::uint64_t seed)
{
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t") throw std::runtime_error("read_csv: expected header t,mode_1,...");
    const std::size_t modes = header.size() - 1;
    std::vector<double> times;
    std::vector<double> vals;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != modes + 1) throw std::runtime_error("read_csv: ragged row");
        times.push_back(parse_double(cells[0]));
        for (std::size_t i = 1; i < cells.size(); ++i) vals.push_back(parse_double(cells[i]));
    }
    if (times.size() < 2) throw std::runtime_error("read_csv: need at least two rows");
    if (!is_uniform(times, 1e-6)) throw std::runtime_error("read_csv: grid is not uniform");
    FbmPath p;
    p.hurst = hurst;
    p.seed = seed;
    p.grid.step = (times.back() - times.front()) / double(times.size() - 1);
    const double np = -times.front() / p.grid.step;
    if (std::abs(np - std::round(np)) > 1e-6 || np < 0.0) throw std::runtime_error("read_csv: zero is not a grid point");
    p.grid.n_past = static_cast<std::size_t>(std::llround(np));
    p.grid.n_future = times.size() - 1 - p.grid.n_past;
    p.values = Eigen::Map<PathMatrix>(vals.data(), Eigen::Index(times.size()), Eigen::Index(modes));
    if (p.values.row(Eigen::Index(p.grid.n_past)).cwiseAbs().maxCoeff() != 0.0)
        throw std::runtime_error("read_csv: path is not zero at zero");
    return p;
}

}  // namespace fbmavg
