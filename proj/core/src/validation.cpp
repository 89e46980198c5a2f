#include "fbmavg/validation.hpp"

#include "fbmavg/averaging.hpp"
#include "fbmavg/fixed_point.hpp"
#include "fbmavg/ou.hpp"
#include "fbmavg/parallel.hpp"
#include "fbmavg/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fbmavg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt(const std::vector<double>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
    return s + "]";
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double mean_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

CheckResult guarded(std::string id, std::string title, const std::function<void(CheckResult&)>& body)
{
    CheckResult r;
    r.id = std::move(id);
    r.title = std::move(title);
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("error: ") + e.what();
    }
    return r;
}

SpectralVector uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    SpectralVector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
    return v;
}

// Psi_ij(t) = a_ij + b_ij sin(c_ij t + d_ij), a smooth random integrand.
OperatorPath random_smooth_operator(const std::vector<double>& grid, Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng = substream(seed, 0, 0x707369);
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.0, 2.0 * kPi);
    Matrix a(n, n), b(n, n), c(n, n), d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = u(rng);
            b(i, j) = u(rng);
            c(i, j) = w(rng);
            d(i, j) = w(rng);
        }
    std::vector<Matrix> vals;
    vals.reserve(grid.size());
    for (double t : grid) {
        Matrix m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a(i, j) + b(i, j) * std::sin(c(i, j) * t + d(i, j));
        vals.push_back(m);
    }
    return OperatorPath(grid, std::move(vals));
}

std::vector<double> grid_times(const FbmPath& p)
{
    std::vector<double> g(p.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = p.time(k);
    return g;
}

GridFunction as_grid_function(const FbmPath& p) { return GridFunction(grid_times(p), p.values); }

OuSpec ou_of(const SystemSpec& s, double eps) { return OuSpec{s.B, s.Q2, eps, s.hurst.H2}; }

FastPathConfig fast_config(const ExperimentConfig& cfg) { return FastPathConfig{cfg.noise.fast_step, cfg.noise.fast_past}; }

ConvergenceConfig convergence_config(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs)
{
    const auto& e = cfg.experiment;
    ConvergenceConfig c;
    c.eps_list = e.eps_list;
    c.seeds = e.seeds;
    c.master_seed = seed;
    c.T = e.T;
    c.h2 = cfg.noise.h2;
    c.past = cfg.noise.fast_past;
    c.delta = e.delta;
    c.T_erg = e.T_erg;
    c.lattice = e.lattice;
    c.fbar_seed = e.fbar_seed;
    c.fbar_path = fast_config(cfg);
    c.solver = cfg.solver;
    c.X0 = Eigen::Map<const SpectralVector>(e.X0.data(), Eigen::Index(e.X0.size()));
    c.Y0 = Eigen::Map<const SpectralVector>(e.Y0.data(), Eigen::Index(e.Y0.size()));
    c.jobs = jobs;
    c.record_runtime = false;
    return c;
}

SpectralVector config_x(const ExperimentConfig& cfg)
{
    return Eigen::Map<const SpectralVector>(cfg.experiment.x.data(), Eigen::Index(cfg.experiment.x.size()));
}

// ---- quick checks -------------------------------------------------------------

struct QuickContext {
    const ExperimentConfig& cfg;
    SystemSpec spec;
    std::uint64_t seed;
    std::size_t jobs;
    FbmPath omega2;  // unscaled, step 1/64, past 64, future 16
};

CheckResult q_config(const QuickContext& c)
{
    return guarded("Q01", "config hypotheses", [&](CheckResult& r) {
        c.cfg.validate();
        const SystemSpec s = c.cfg.system_spec();
        s.validate();
        r.pass = true;
        r.detail = "lambda_B=" + fmt(s.lambda_B()) + " C1=" + fmt(s.C1) + " H1=" + fmt(s.hurst.H1) +
                   " H2=" + fmt(s.hurst.H2);
    });
}

CheckResult q_coefficients(const QuickContext& c)
{
    return guarded("Q02", "coefficient constants audit", [&](CheckResult& r) {
        const CoefficientAudit a = audit_coefficients(c.spec, 400, derive_seed(c.seed, 2));
        r.pass = a.pass;
        r.detail = "f_lip=" + fmt(a.f_lipschitz) + " g_lip=" + fmt(a.g_lipschitz) + " f_sup=" + fmt(a.f_sup) +
                   " h_sup=" + fmt(a.h_sup) + (a.message.empty() ? "" : " " + a.message);
    });
}

CheckResult q_semigroup(const QuickContext& c)
{
    return guarded("Q03", "semigroup smoothing constants", [&](CheckResult& r) {
        const SemigroupBoundReport a = semigroup_bound_check(c.spec.A, 0.5, 1.0, 256);
        const SemigroupBoundReport b = semigroup_bound_check(c.spec.B, 0.5, 1.0, 256);
        r.pass = !a.any_diverging() && !b.any_diverging();
        r.detail = "A c=" + fmt({a.semi1.c, a.semi2.c, a.semi3.c, a.semi4.c}) +
                   " B c=" + fmt({b.semi1.c, b.semi2.c, b.semi3.c, b.semi4.c});
    });
}

FbmPath slow_path(const SystemSpec& s, std::size_t n, std::uint64_t seed)
{
    return sample_trace_class_fbm(s.Q1, s.hurst.H1, UniformGrid::one_sided(1.0, n), seed, s.normalization);
}

CheckResult q_zahle_identity(const QuickContext& c)
{
    return guarded("Q04", "Zahle integral of the identity", [&](CheckResult& r) {
        const FbmPath w = slow_path(c.spec, 512, derive_seed(c.seed, 4));
        const GridFunction om = as_grid_function(w);
        const Matrix id = Matrix::Identity(Eigen::Index(c.spec.dim()), Eigen::Index(c.spec.dim()));
        const OperatorPath psi = OperatorPath::constant(om.grid, id);
        double worst = 0.0;
        for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.25, 0.75}}) {
            const SpectralVector z = zahle_integral(psi, om, c.cfg.solver.frac, a, b);
            const SpectralVector inc = w.value(b) - w.value(a);
            const double err = (z - inc).norm();
            worst = std::max(worst, inc.norm() > 0.0 ? err / inc.norm() : err);
        }
        r.pass = worst < 1e-3;
        r.detail = "max_rel_err=" + fmt(worst);
    });
}

CheckResult q_zahle_young(const QuickContext& c)
{
    return guarded("Q05", "Zahle integral against Riemann-Stieltjes sums", [&](CheckResult& r) {
        const FbmPath w = slow_path(c.spec, 1024, derive_seed(c.seed, 5));
        const GridFunction om = as_grid_function(w);
        const OperatorPath psi = random_smooth_operator(om.grid, Eigen::Index(c.spec.dim()), derive_seed(c.seed, 5));
        const SpectralVector z = zahle_integral(psi, om, c.cfg.solver.frac, 0.0, 1.0);
        const SpectralVector y = young_sum_integral(psi, om, 0.0, 1.0);
        const double gap = y.norm() > 0.0 ? (z - y).norm() / y.norm() : (z - y).norm();
        r.pass = gap < 1e-2;
        r.detail = "rel_gap=" + fmt(gap);
    });
}

CheckResult q_ou_flow(const QuickContext& c)
{
    return guarded("Q06", "OU stationary solution is a flow", [&](CheckResult& r) {
        const double eps = c.spec.eps;
        const FbmPath scaled = scale_time(c.omega2, eps);
        const double s = scaled.grid.step;
        const double res = ou_flow_check(ou_of(c.spec, eps), scaled, 32 * s, 64 * s);
        r.pass = res < 1e-3;
        r.detail = "residual=" + fmt(res);
    });
}

CheckResult q_ou_scaling(const QuickContext& c)
{
    return guarded("Q07", "OU time-scaling identity", [&](CheckResult& r) {
        const double res = scaling_identity_check(ou_of(c.spec, 0.25), c.omega2, 1.0);
        r.pass = res < 1e-4;
        r.detail = "eps=0.25 residual=" + fmt(res);
    });
}

FrozenFastSpec frozen(const SystemSpec& s, double eps, const SpectralVector& x) { return FrozenFastSpec{s.with_eps(eps), x}; }

CheckResult q_fixed_point_scaling(const QuickContext& c)
{
    return guarded("Q08", "fixed point time-scaling identity", [&](CheckResult& r) {
        const double res = fixed_point_scaling_check(frozen(c.spec, 0.25, config_x(c.cfg)), c.omega2, 1.0);
        r.pass = res < 1e-4;
        r.detail = "eps=0.25 residual=" + fmt(res);
    });
}

CheckResult q_invariance(const QuickContext& c)
{
    return guarded("Q09", "fixed point invariance under the flow", [&](CheckResult& r) {
        const double eps = c.spec.eps, s = eps * c.omega2.grid.step;
        const double res = fixed_point_invariance(frozen(c.spec, eps, config_x(c.cfg)), c.omega2, {8 * s, 32 * s, 128 * s});
        r.pass = res < 1e-8;
        r.detail = "residual=" + fmt(res);
    });
}

CheckResult q_rate(const QuickContext& c)
{
    return guarded("Q10", "attraction rate of the fast flow", [&](CheckResult& r) {
        const FrozenFastSpec fs = frozen(c.spec, c.spec.eps, config_x(c.cfg));
        const double bound = fs.rate_bound();
        const Eigen::Index n = Eigen::Index(c.spec.dim());
        const RateFit f = attraction_rate(fs, c.omega2, SpectralVector::Zero(n), SpectralVector::Ones(n), 10.0 / bound);
        r.pass = f.rate >= 0.85 * bound;
        r.detail = "rate=" + fmt(f.rate) + " bound=" + fmt(bound) + " points=" + std::to_string(f.points);
    });
}

CheckResult q_lipschitz(const QuickContext& c)
{
    return guarded("Q11", "fixed point Lipschitz in x", [&](CheckResult& r) {
        const double bound = 1.1 * c.spec.C1 / (c.spec.lambda_B() - c.spec.C1);
        std::mt19937_64 rng = substream(c.seed, 11);
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            const SpectralVector x1 = uniform_vector(rng, c.spec.dim(), -2, 2), x2 = uniform_vector(rng, c.spec.dim(), -2, 2);
            worst = std::max(worst, lipschitz_in_x(c.spec, c.omega2, x1, x2, c.spec.eps));
        }
        r.pass = worst <= bound + 1e-9;
        r.detail = "max_ratio=" + fmt(worst) + " bound=" + fmt(bound);
    });
}

CheckResult q_control(const QuickContext& c)
{
    return guarded("Q12", "y-independent drift control", [&](CheckResult& r) {
        ExperimentConfig yc = c.cfg;
        yc.system.coeff.family = "y_independent";
        ConvergenceConfig cc = convergence_config(yc, c.seed, c.jobs);
        cc.seeds = 2;
        const ConvergenceTable t = convergence_experiment(yc.system_spec(), cc);
        double worst = 0.0;
        bool ok = true;
        for (const auto& row : t.rows) {
            if (!row.error.empty() || !std::isfinite(row.e_sup)) ok = false;
            else worst = std::max(worst, row.e_sup);
        }
        r.pass = ok && worst <= 2.0 * cc.solver.picard_tol;
        r.detail = "max_e=" + fmt(worst) + " limit=" + fmt(2.0 * cc.solver.picard_tol);
    });
}

CheckResult q_appendix(const QuickContext& c)
{
    return guarded("Q13", "weighted-norm kernel inequalities", [&](CheckResult& r) {
        AppendixParams p = AppendixParams::from_frac(c.cfg.solver.frac);
        p.rhos = {1.0, 10.0, 100.0};
        const AppendixReport a = appendix_inequalities_check(p);
        r.pass = a.K_decreasing && a.inq_bounded;
        r.detail = "K=" + fmt(a.K) + " inq=" + fmt(a.inq_ratio) + " inq_bound=" + fmt(a.inq_bound);
    });
}

CheckResult q_refinement(const QuickContext& c)
{
    return guarded("Q14", "coupled solver step-halving gap", [&](CheckResult& r) {
        const double eps = c.spec.eps, h2 = c.cfg.noise.h2;
        SolverConfig sc = c.cfg.solver;
        sc.dt *= 2.0;
        const NoisePair np = sample_noise_pair(c.spec, 1.0, c.cfg.solver.dt, eps, h2, c.cfg.noise.fast_past,
                                               derive_seed(c.seed, 14));
        const auto& e = c.cfg.experiment;
        const SpectralVector X0 = Eigen::Map<const SpectralVector>(e.X0.data(), Eigen::Index(e.X0.size()));
        const SpectralVector Y0 = Eigen::Map<const SpectralVector>(e.Y0.data(), Eigen::Index(e.Y0.size()));
        const double gap = coupled_refinement_gap(c.spec, np.omega1, np.omega2, X0, Y0, 1.0, sc);
        r.pass = std::isfinite(gap) && gap < 5e-3;
        r.detail = "dt=" + fmt(sc.dt) + " gap=" + fmt(gap);
    });
}

CheckResult q_holder(const QuickContext& c)
{
    return guarded("Q15", "sampled fBm regularity", [&](CheckResult& r) {
        const FbmPath w = slow_path(c.spec, 4096, derive_seed(c.seed, 15));
        if (w.values.cwiseAbs().maxCoeff() == 0.0) {
            r.pass = true;
            r.detail = "zero covariance, zero path";
            return;
        }
        const double est = estimate_holder_exponent(w);
        r.pass = std::abs(est - c.spec.hurst.H1) < 0.1;
        r.detail = "H1=" + fmt(c.spec.hurst.H1) + " estimate=" + fmt(est);
    });
}

// ---- acceptance criteria ------------------------------------------------------

SystemSpec two_mode_slow()
{
    SystemSpec s;
    s.Q1 = CovarianceSpectrum({1.0, 0.5});
    s.hurst = HurstPair{0.75, 0.75};
    return s;
}

CheckResult criterion1(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C01", "Zahle and Riemann-Stieltjes integrals agree", [&](CheckResult& r) {
        const SystemSpec s = two_mode_slow();
        const std::size_t seeds = 10;
        std::vector<double> g2048(seeds), g4096(seeds);
        parallel_for(seeds, o.jobs, [&](std::size_t k) {
            const std::uint64_t sd = derive_seed(o.seed, k, 0xc1);
            const FbmPath fine = slow_path(s, 4096, sd);
            const FbmPath coarse = subsample(fine, 2);
            for (const FbmPath* p : {&coarse, &fine}) {
                const GridFunction om = as_grid_function(*p);
                const OperatorPath psi = random_smooth_operator(om.grid, 2, sd);
                const SpectralVector z = zahle_integral(psi, om, cfg.solver.frac, 0.0, 1.0);
                const SpectralVector y = young_sum_integral(psi, om, 0.0, 1.0);
                (p == &fine ? g4096 : g2048)[k] = (z - y).norm() / y.norm();
            }
        });
        const double s2048 = std::accumulate(g2048.begin(), g2048.end(), 0.0);
        const double s4096 = std::accumulate(g4096.begin(), g4096.end(), 0.0);
        r.pass = max_of(g2048) < 1e-2 && s4096 < s2048;
        r.detail = "max_gap_n2048=" + fmt(max_of(g2048)) + " mean_gap n2048=" + fmt(s2048 / seeds) +
                   " n4096=" + fmt(s4096 / seeds);
    });
}

CheckResult criterion2(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C02", "Zahle integral of the identity equals the increment", [&](CheckResult& r) {
        const SystemSpec s = two_mode_slow();
        double worst = 0.0;
        for (std::size_t k = 0; k < 10; ++k) {
            const FbmPath w = slow_path(s, 1024, derive_seed(o.seed, k, 0xc2));
            const GridFunction om = as_grid_function(w);
            const OperatorPath psi = OperatorPath::constant(om.grid, Matrix::Identity(2, 2));
            for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.125, 0.625}}) {
                const SpectralVector inc = w.value(b) - w.value(a);
                worst = std::max(worst, (zahle_integral(psi, om, cfg.solver.frac, a, b) - inc).norm() / inc.norm());
            }
        }
        r.pass = worst < 1e-3;
        r.detail = "max_rel_err=" + fmt(worst);
    });
}

CheckResult criterion3(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C03", "integral bound ratio bounded and grid-stable", [&](CheckResult& r) {
        const SystemSpec s = two_mode_slow();
        const std::size_t seeds = 20;
        std::vector<double> coarse(seeds), fine(seeds);
        std::vector<char> bounded(seeds, 0);
        parallel_for(seeds, o.jobs, [&](std::size_t k) {
            const std::uint64_t sd = derive_seed(o.seed, k, 0xc3);
            const FbmPath wf = slow_path(s, 2048, sd);
            const FbmPath wc = subsample(wf, 2);
            const GridFunction of = as_grid_function(wf), oc = as_grid_function(wc);
            const Lemma1Report a = lemma1_bound_check(random_smooth_operator(oc.grid, 2, sd), oc, cfg.solver.frac, 0, 1);
            const Lemma1Report b = lemma1_bound_check(random_smooth_operator(of.grid, 2, sd), of, cfg.solver.frac, 0, 1);
            coarse[k] = a.overall_max;
            fine[k] = b.overall_max;
            bounded[k] = a.bounded && b.bounded;
        });
        bool stable = true;
        double lo = 1e300, hi = 0.0;
        for (std::size_t k = 0; k < seeds; ++k) {
            const double q = fine[k] / coarse[k];
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            if (!(q >= 0.5 && q <= 1.5) || !bounded[k]) stable = false;
        }
        r.pass = stable;
        r.detail = "max_ratio=" + fmt(std::max(max_of(coarse), max_of(fine))) + " doubling_factor_range=[" + fmt(lo) +
                   ", " + fmt(hi) + "]";
    });
}

CheckResult criterion4(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C04", "OU stationary variance and flow property", [&](CheckResult& r) {
        const double lambda = 1.0, q2 = 1.0;
        const OuSpec scalar{DiagonalOperator(std::vector<double>{lambda}), CovarianceSpectrum({q2}), 1.0, 0.5};
        const std::size_t M = 10000;
        std::vector<double> sq(M);
        const UniformGrid grid = UniformGrid::two_sided(40.0, 0.0, 1.0 / 64.0);
        parallel_for(M, o.jobs, [&](std::size_t m) {
            const FbmPath w = sample_trace_class_fbm(scalar.Q, 0.5, grid, derive_seed(o.seed, m, 0xc4));
            const double z = ou_stationary(scalar, w, 0.0, 40.0).value(0);
            sq[m] = z * z;
        });
        const double v = mean_of(sq);
        double s2 = 0.0;
        for (double x : sq) s2 += (x - v) * (x - v);
        const double se = std::sqrt(s2 / double(M - 1) / double(M));
        const double target = q2 / (2.0 * lambda);
        const bool var_ok = std::abs(v - target) <= 3.0 * se;

        const SystemSpec spec = cfg.system_spec();
        double flow = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            const FbmPath w2 = sample_fast_path(spec, 8.0, derive_seed(o.seed, k, 0xc44), FastPathConfig{1.0 / 64, 64});
            const FbmPath scaled = scale_time(w2, spec.eps);
            const double st = scaled.grid.step;
            flow = std::max(flow, ou_flow_check(ou_of(spec, spec.eps), scaled, 32 * st, 64 * st));
        }
        r.pass = var_ok && flow < 1e-3;
        r.detail = "variance=" + fmt(v) + " target=" + fmt(target) + " se=" + fmt(se) + " flow_residual=" + fmt(flow);
    });
}

CheckResult criterion5(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C05", "time-scaling identities", [&](CheckResult& r) {
        const SystemSpec spec = cfg.system_spec();
        double ou = 0.0, fp = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            const FbmPath w2 = sample_fast_path(spec, 8.0, derive_seed(o.seed, k, 0xc5), FastPathConfig{1.0 / 64, 64});
            for (double eps : {1.0, 0.25}) {
                ou = std::max(ou, scaling_identity_check(ou_of(spec, eps), w2, 1.0));
                fp = std::max(fp, fixed_point_scaling_check(frozen(spec, eps, config_x(cfg)), w2, 1.0));
            }
        }
        r.pass = ou < 1e-4 && fp < 1e-4;
        r.detail = "ou_residual=" + fmt(ou) + " fixed_point_residual=" + fmt(fp);
    });
}

CheckResult criterion6(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C06", "fixed point attraction rate", [&](CheckResult& r) {
        const SystemSpec spec = cfg.system_spec();
        const Eigen::Index n = Eigen::Index(spec.dim());
        const std::vector<double> eps_list{0.1, 0.05};
        std::vector<double> means, mins;
        bool ok = true;
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const FrozenFastSpec fs = frozen(spec, eps_list[e], config_x(cfg));
            const double bound = fs.rate_bound(), W = 10.0 / bound;
            std::vector<double> rates(10);
            parallel_for(rates.size(), o.jobs, [&](std::size_t k) {
                const FbmPath w2 = sample_fast_path(spec, W / eps_list[e] + 1.0, derive_seed(o.seed, 10 * e + k, 0xc6));
                rates[k] = attraction_rate(fs, w2, SpectralVector::Zero(n), SpectralVector::Ones(n), W).rate;
            });
            const double mn = *std::min_element(rates.begin(), rates.end());
            if (!(mn >= 0.85 * bound)) ok = false;
            mins.push_back(mn / bound);
            means.push_back(mean_of(rates));
        }
        const double ratio = means[1] / means[0];
        r.pass = ok && std::abs(ratio - 2.0) <= 0.3;
        r.detail = "mean_rate=" + fmt(means) + " min_rate/bound=" + fmt(mins) + " ratio=" + fmt(ratio);
    });
}

CheckResult criterion7(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C07", "fixed point Lipschitz in x", [&](CheckResult& r) {
        const SystemSpec spec = cfg.system_spec();
        const double bound = 1.1 * spec.C1 / (spec.lambda_B() - spec.C1);
        std::vector<double> worst;
        for (double eps : {0.1, 0.05}) {
            std::vector<double> q(20);
            parallel_for(q.size(), o.jobs, [&](std::size_t k) {
                const std::uint64_t sd = derive_seed(o.seed, k + (eps < 0.075 ? 100 : 0), 0xc7);
                std::mt19937_64 rng = substream(sd, 1);
                const SpectralVector x1 = uniform_vector(rng, spec.dim(), -2, 2), x2 = uniform_vector(rng, spec.dim(), -2, 2);
                q[k] = lipschitz_in_x(spec, sample_fast_path(spec, 1.0, sd), x1, x2, eps);
            });
            worst.push_back(max_of(q));
        }
        r.pass = max_of(worst) <= bound;
        r.detail = "max_ratio(eps=0.1,0.05)=" + fmt(worst) + " bound=" + fmt(bound);
    });
}

CheckResult criterion8(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C08", "averaged drift audits", [&](CheckResult& r) {
        const SystemSpec spec = cfg.system_spec().with_eps(1.0);
        const FastPathConfig fp = fast_config(cfg);
        const double T_erg = cfg.experiment.T_erg;
        const FbmPath path = sample_fast_path(spec, T_erg, derive_seed(o.seed, 0, 0xc8), fp);
        auto ergodic = [&](const SpectralVector& x) { return average_drift_ergodic(spec, x, path, T_erg); };

        std::mt19937_64 rng = substream(o.seed, 1, 0xc8);
        std::vector<SpectralVector> pts;
        for (int j = 0; j < 5; ++j) pts.push_back(uniform_vector(rng, spec.dim(), -1, 1));
        std::vector<double> z(pts.size());
        parallel_for(pts.size(), o.jobs, [&](std::size_t j) {
            const DriftEstimate mc = average_drift_mc(spec, pts[j], cfg.experiment.M, derive_seed(o.seed, j, 0xc88), fp);
            const DriftEstimate er = ergodic(pts[j]);
            double w = 0.0;
            for (Eigen::Index i = 0; i < mc.mean.size(); ++i) {
                const double ci = std::hypot(mc.ci(i), er.ci(i));
                const double d = std::abs(mc.mean(i) - er.mean(i));
                w = std::max(w, ci > 0.0 ? d / ci : (d == 0.0 ? 0.0 : 1e300));
            }
            z[j] = w;
        });
        const bool agree = max_of(z) <= 1.0;

        std::vector<std::pair<SpectralVector, SpectralVector>> pairs;
        for (int j = 0; j < 12; ++j) {
            SpectralVector a = uniform_vector(rng, spec.dim(), -1, 1);
            pairs.emplace_back(a, uniform_vector(rng, spec.dim(), -1, 1));
        }
        const FbarLipschitzReport lip = fbar_lipschitz_audit(ergodic, pairs, fbar_lipschitz_bound(spec));

        const double lb = spec.lambda_B();
        const ErgodicResidualReport res = ergodic_residual_check(spec, config_x(cfg), {50.0 / lb, 100.0 / lb, 200.0 / lb},
                                                                 64, derive_seed(o.seed, 2, 0xc8), 20000.0, 0.5, fp);
        r.pass = agree && lip.pass && res.decreasing;
        r.detail = "mc_vs_ergodic max |d|/ci=" + fmt(max_of(z)) + " lipschitz=" + fmt(lip.max_ratio) + " bound=" +
                   fmt(lip.bound) + " slack=" + fmt(lip.ci_slack) + " residual=" + fmt(res.rms);
    });
}

CheckResult criterion9(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C09", "auxiliary process error scalings", [&](CheckResult& r) {
        const SystemSpec spec = cfg.system_spec();
        AuxStudyConfig c;
        c.seeds = 4;
        c.h2 = 1.0 / 32.0;
        c.past = 64.0;
        c.master_seed = derive_seed(o.seed, 0, 0xc9);
        c.gamma = cfg.solver.frac.gamma;
        c.jobs = o.jobs;
        c.X0 = Eigen::Map<const SpectralVector>(cfg.experiment.X0.data(), Eigen::Index(cfg.experiment.X0.size()));
        c.Y0 = Eigen::Map<const SpectralVector>(cfg.experiment.Y0.data(), Eigen::Index(cfg.experiment.Y0.size()));
        const ScalingReport a = y1_y2_scaling(spec, {0.1, 0.05, 0.025}, 0.25, c);
        const ScalingReport b = y_yhat_scaling(spec, 0.001, {0.2, 0.1, 0.05}, c);
        r.pass = a.pass && b.pass;
        r.detail = "eps_ratios=" + fmt(a.ratio) + " delta_slope=" + fmt(b.slope) + " min_slope=" +
                   fmt(1.0 + c.gamma - 0.3);
    });
}

CheckResult criterion10(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C10", "averaging convergence on the benchmark", [&](CheckResult& r) {
        const ConvergenceConfig cc = convergence_config(cfg, derive_seed(o.seed, 0, 0xca), o.jobs);
        const ConvergenceTable t = convergence_experiment(cfg.system_spec(), cc);
        std::size_t failed = 0;
        for (const auto& row : t.rows)
            if (!row.error.empty()) ++failed;

        ExperimentConfig yc = cfg;
        yc.system.coeff.family = "y_independent";
        const ConvergenceTable ct = convergence_experiment(yc.system_spec(), cc);
        double control = 0.0;
        for (const auto& row : ct.rows) {
            if (!row.error.empty()) ++failed;
            control = std::max(control, row.e_sup);
        }
        const double limit = 2.0 * cc.solver.picard_tol;
        r.pass = failed == 0 && t.monotone && t.halved && control <= limit;
        r.detail = "eps=" + fmt(t.eps) + " median_e=" + fmt(t.median_e) + " control_max=" + fmt(control) +
                   " failed_cells=" + std::to_string(failed);
    });
}

CheckResult criterion11(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C11", "a-priori bounds and contraction diagnostics", [&](CheckResult& r) {
        const SystemSpec spec = cfg.system_spec();
        const Eigen::Index n = Eigen::Index(spec.dim());
        const SpectralVector X0 = Eigen::Map<const SpectralVector>(cfg.experiment.X0.data(), n);
        const SpectralVector Y0 = Eigen::Map<const SpectralVector>(cfg.experiment.Y0.data(), n);
        SolverConfig sc = cfg.solver;
        sc.dt = 1.0 / 1024.0;
        const NoisePair np = sample_noise_pair(spec, 1.0, sc.dt, 0.01, 1.0 / 1024.0, 40.0, derive_seed(o.seed, 0, 0xcb));
        const std::vector<double> eps_list{1.0, 0.1, 0.01};
        std::vector<SolutionPath> sols(eps_list.size());
        parallel_for(eps_list.size(), o.jobs, [&](std::size_t i) {
            sols[i] = solve_coupled(spec.with_eps(eps_list[i]), np.omega1, np.omega2, X0, Y0, 1.0, sc);
        });
        const AprioriReport ap = apriori_bounds_check(sols, X0, HolderParams{sc.frac.gamma, sc.rho, true});

        const std::vector<double> rhos{1.0, 10.0, 100.0};
        const RhoSweep tt = integral_part_sweep(spec.with_eps(0.1), np.omega1, np.omega2, X0, Y0, 1.0, 64, sc, rhos);
        AppendixParams p = AppendixParams::from_frac(sc.frac);
        p.rhos = rhos;
        const AppendixReport apx = appendix_inequalities_check(p);
        r.pass = ap.x_eps_independent && tt.decreasing && apx.K_decreasing && apx.inq_bounded;
        r.detail = "x_ratio=" + fmt(ap.x_ratio) + " spread=" + fmt(ap.x_spread) + " C(rho)=" + fmt(tt.value) +
                   " K(rho)=" + fmt(apx.K) + " inq=" + fmt(apx.inq_ratio);
    });
}

CheckResult criterion12(const ExperimentConfig& cfg, const ValidationOptions& o)
{
    return guarded("C12", "quick report is reproducible", [&](CheckResult& r) {
        const std::string a = run_quick(cfg, o).to_json();
        ValidationOptions o2 = o;
        o2.jobs = std::max<std::size_t>(2, o.jobs);
        const std::string b = run_quick(cfg, o2).to_json();
        r.pass = a == b;
        r.detail = "bytes=" + std::to_string(a.size()) + (r.pass ? " identical" : " differ");
    });
}

}  // namespace

bool ValidationReport::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string ValidationReport::to_text() const
{
    std::ostringstream os;
    os << "validation level=" << level << " seed=" << seed << "\n";
    std::size_t passed = 0;
    for (const auto& c : checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.id << " " << c.title << ": " << c.detail << "\n";
        passed += c.pass;
    }
    os << passed << "/" << checks.size() << " checks passed\n";
    return os.str();
}

std::string ValidationReport::to_json() const
{
    nlohmann::ordered_json j;
    j["level"] = level;
    j["seed"] = seed;
    j["all_pass"] = all_pass();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"detail", c.detail}});
    return j.dump(2) + "\n";
}

ValidationReport run_quick(const ExperimentConfig& cfg, const ValidationOptions& opt)
{
    ValidationReport rep;
    rep.level = "quick";
    rep.seed = opt.seed;
    rep.checks.push_back(q_config(QuickContext{cfg, SystemSpec{}, opt.seed, opt.jobs, {}}));
    if (!rep.checks.back().pass) return rep;  // nothing else is meaningful on a broken config

    QuickContext c{cfg, cfg.system_spec(), opt.seed, opt.jobs, {}};
    c.omega2 = sample_fast_path(c.spec, 16.0, derive_seed(opt.seed, 6), FastPathConfig{1.0 / 64, 64});
    const std::vector<std::function<CheckResult(const QuickContext&)>> checks{
        q_coefficients, q_semigroup, q_zahle_identity, q_zahle_young, q_ou_flow, q_ou_scaling, q_fixed_point_scaling,
        q_invariance,   q_rate,      q_lipschitz,      q_control,     q_appendix, q_refinement, q_holder};
    for (const auto& f : checks) rep.checks.push_back(f(c));
    return rep;
}

CheckResult run_criterion(int k, const ExperimentConfig& cfg, const ValidationOptions& opt)
{
    using Fn = CheckResult (*)(const ExperimentConfig&, const ValidationOptions&);
    static const Fn table[kCriterionCount] = {criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
                                              criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
    if (k < 1 || k > kCriterionCount) throw std::out_of_range("run_criterion: criteria are numbered 1..12");
    return table[k - 1](cfg, opt);
}

ValidationReport run_full(const ExperimentConfig& cfg, const ValidationOptions& opt)
{
    ValidationReport rep = run_quick(cfg, opt);
    rep.level = "full";
    if (!rep.all_pass() && rep.checks.size() == 1) return rep;
    for (int k = 1; k <= kCriterionCount; ++k) rep.checks.push_back(run_criterion(k, cfg, opt));
    return rep;
}

}  // namespace fbmavg
