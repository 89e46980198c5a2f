#include "fbmavg/averaging.hpp"
#include "fbmavg/config.hpp"
#include "fbmavg/csv.hpp"
#include "fbmavg/fixed_point.hpp"
#include "fbmavg/ou.hpp"
#include "fbmavg/rng.hpp"
#include "fbmavg/validation.hpp"
#include "fbmavg/young.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fs = std::filesystem;
using namespace fbmavg;

namespace {

struct Options {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t jobs = 0;
    std::string out;
    std::string level = "quick";
    std::string integrand = "identity";
};

ExperimentConfig load(const Options& o)
{
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.seed_given) cfg.noise.seed = o.seed;
    if (o.jobs > 0) cfg.jobs = o.jobs;
    if (!o.out.empty()) cfg.output.dir = o.out;
    cfg.validate();
    return cfg;
}

// Write to a temporary sibling, then rename, so readers never see a partial file.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body)
{
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        body(os);
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

SpectralVector vec(const std::vector<double>& v)
{
    return Eigen::Map<const SpectralVector>(v.data(), Eigen::Index(v.size()));
}

std::string x_hash(const SpectralVector& x)
{
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        std::uint64_t bits;
        const double v = x(i);
        std::memcpy(&bits, &v, sizeof bits);
        h = splitmix64(h ^ bits);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void header(std::ostream& os, const char* first, const char* prefix, std::size_t n)
{
    os << first;
    for (std::size_t i = 1; i <= n; ++i) os << ',' << prefix << i;
}

void rows(std::ostream& os, const GridFunction& f)
{
    for (std::size_t k = 0; k < f.size(); ++k) {
        os << format_double(f.grid[k]);
        for (Eigen::Index i = 0; i < f.values.cols(); ++i) os << ',' << format_double(f.values(Eigen::Index(k), i));
        os << '\n';
    }
}

// Unscaled fast noise. The extra past covers the radius window 40 / (lambda_B - C1)
// plus a doubled OU horizon behind its far end.
FbmPath fast_noise(const ExperimentConfig& cfg, const SystemSpec& spec, double future)
{
    const double extra = 40.0 / (spec.lambda_B() - spec.C1) + 60.0 / spec.lambda_B();
    return sample_fast_path(spec, future, derive_seed(cfg.noise.seed, 0, 0x6632),
                            FastPathConfig{cfg.noise.fast_step, cfg.noise.fast_past + extra});
}

int cmd_fbm_sample(const ExperimentConfig& cfg)
{
    const SystemSpec spec = cfg.system_spec();
    const auto& n = cfg.noise;
    const UniformGrid grid = n.past > 0.0 ? UniformGrid::two_sided(n.past, n.T, n.T / double(n.n))
                                          : UniformGrid::one_sided(n.T, n.n);
    const FbmPath w1 = sample_trace_class_fbm(spec.Q1, spec.hurst.H1, grid, derive_seed(n.seed, 1), spec.normalization);
    const FbmPath w2 = sample_trace_class_fbm(spec.Q2, spec.hurst.H2, grid, derive_seed(n.seed, 2), spec.normalization);
    const fs::path dir = cfg.output.dir;
    write_atomic(dir / "omega1.csv", [&](std::ostream& os) { write_csv(os, w1); });
    write_atomic(dir / "omega2.csv", [&](std::ostream& os) { write_csv(os, w2); });
    auto est = [](const FbmPath& p) {
        return p.values.cwiseAbs().maxCoeff() > 0.0 ? format_double(estimate_holder_exponent(p)) : std::string("nan");
    };
    write_atomic(dir / "holder.csv", [&](std::ostream& os) {
        os << "path,hurst,estimate\n"
           << "omega1," << format_double(spec.hurst.H1) << ',' << est(w1) << '\n'
           << "omega2," << format_double(spec.hurst.H2) << ',' << est(w2) << '\n';
    });
    std::cout << "wrote " << (dir / "omega1.csv").string() << ", omega2.csv, holder.csv\n";
    return 0;
}

int cmd_validate(const ExperimentConfig& cfg, const std::string& level)
{
    ValidationOptions o;
    o.seed = cfg.noise.seed;
    o.jobs = cfg.jobs;
    ValidationReport rep;
    if (level == "quick") rep = run_quick(cfg, o);
    else if (level == "full") rep = run_full(cfg, o);
    else throw std::invalid_argument("validate: level must be quick or full");
    std::cout << rep.to_text();
    write_atomic(fs::path(cfg.output.dir) / ("validation_" + level + ".json"),
                 [&](std::ostream& os) { os << rep.to_json(); });
    return rep.all_pass() ? 0 : 1;
}

int cmd_converge(const ExperimentConfig& cfg)
{
    const auto& e = cfg.experiment;
    ConvergenceConfig c;
    c.eps_list = e.eps_list;
    c.seeds = e.seeds;
    c.master_seed = cfg.noise.seed;
    c.T = e.T;
    c.h2 = cfg.noise.h2;
    c.past = cfg.noise.fast_past;
    c.delta = e.delta;
    c.T_erg = e.T_erg;
    c.lattice = e.lattice;
    c.fbar_seed = e.fbar_seed;
    c.fbar_path = FastPathConfig{cfg.noise.fast_step, cfg.noise.fast_past};
    c.solver = cfg.solver;
    c.X0 = vec(e.X0);
    c.Y0 = vec(e.Y0);
    c.jobs = cfg.jobs;
    c.record_runtime = e.record_runtime;
    const ConvergenceTable t = convergence_experiment(cfg.system_spec(), c);
    const fs::path dir = cfg.output.dir;
    write_atomic(dir / "convergence.csv", [&](std::ostream& os) { write_convergence_csv(os, t); });
    std::ostringstream summary;
    write_convergence_summary(summary, t);
    write_atomic(dir / "convergence_summary.txt", [&](std::ostream& os) { os << summary.str(); });
    std::cout << summary.str();
    for (const auto& r : t.rows)
        if (!r.error.empty()) return 1;
    return 0;
}

int cmd_fixed_point(const ExperimentConfig& cfg)
{
    const SystemSpec spec = cfg.system_spec();
    const auto& e = cfg.experiment;
    const SpectralVector x = vec(e.x);
    const double eps = spec.eps;
    const FbmPath w2 = fast_noise(cfg, spec, std::max(e.r, e.ou_T) / eps + 10.0 / (spec.lambda_B() - spec.C1));
    const FrozenFastSpec frozen{spec, x};
    const FixedPointResult fp = pullback_fixed_point(frozen, w2, e.r);
    const Eigen::Index n = Eigen::Index(spec.dim());
    const RateFit rate =
        attraction_rate(frozen, w2, SpectralVector::Zero(n), SpectralVector::Ones(n), 10.0 / frozen.rate_bound());
    const double lip = lipschitz_in_x(spec, w2, x, x + SpectralVector::Constant(n, 0.1), eps);
    const fs::path dir = cfg.output.dir;
    write_atomic(dir / "fixed_point.csv", [&](std::ostream& os) {
        os << "x_hash,eps,seed,rate,lipschitz_ratio,radius,cauchy_gap\n"
           << x_hash(x) << ',' << format_double(eps) << ',' << cfg.noise.seed << ',' << format_double(rate.rate) << ','
           << format_double(lip) << ',' << format_double(fp.radius) << ',' << format_double(fp.cauchy_gap) << '\n';
    });
    const GridFunction traj = fixed_point_trajectory(frozen, w2, 0.0, e.ou_T);
    write_atomic(dir / "fixed_point_trajectory.csv", [&](std::ostream& os) {
        header(os, "t", "Y_", spec.dim());
        os << '\n';
        rows(os, traj);
    });
    std::cout << "Y_F(r=" << format_double(e.r) << ") =";
    for (Eigen::Index i = 0; i < n; ++i) std::cout << ' ' << format_double(fp.Y_F(i));
    std::cout << "\nrate=" << format_double(rate.rate) << " bound=" << format_double(frozen.rate_bound())
              << " radius=" << format_double(fp.radius) << " horizon=" << format_double(fp.pullback_horizon) << '\n';
    return 0;
}

int cmd_average_drift(const ExperimentConfig& cfg)
{
    const SystemSpec spec = cfg.system_spec().with_eps(1.0);
    const auto& e = cfg.experiment;
    const SpectralVector x = vec(e.x);
    const FastPathConfig fp{cfg.noise.fast_step, cfg.noise.fast_past};
    const DriftEstimate mc = average_drift_mc(spec, x, e.M, derive_seed(cfg.noise.seed, 0, 0x6d63), fp);
    const FbmPath path = sample_fast_path(spec, e.T_erg, derive_seed(cfg.noise.seed, 1, 0x6572), fp);
    const DriftEstimate er = average_drift_ergodic(spec, x, path, e.T_erg);
    write_atomic(fs::path(cfg.output.dir) / "average_drift.csv", [&](std::ostream& os) {
        os << "x_hash,method,component,mean,ci,samples\n";
        for (const auto& [name, d] : {std::pair{"monte_carlo", &mc}, std::pair{"ergodic", &er}})
            for (Eigen::Index i = 0; i < x.size(); ++i)
                os << x_hash(x) << ',' << name << ',' << (i + 1) << ',' << format_double(d->mean(i)) << ','
                   << format_double(d->ci(i)) << ',' << d->samples << '\n';
    });
    for (Eigen::Index i = 0; i < x.size(); ++i)
        std::cout << "fbar_" << (i + 1) << ": mc " << format_double(mc.mean(i)) << " +- " << format_double(mc.ci(i))
                  << "  ergodic " << format_double(er.mean(i)) << " +- " << format_double(er.ci(i)) << '\n';
    return 0;
}

int cmd_ou(const ExperimentConfig& cfg)
{
    const SystemSpec spec = cfg.system_spec();
    const double eps = spec.eps;
    const FbmPath w2 = fast_noise(cfg, spec, cfg.experiment.ou_T / eps + 10.0 / (spec.lambda_B() - spec.C1));
    const OuSpec ou{spec.B, spec.Q2, eps, spec.hurst.H2};
    const StationaryTrajectory st = ou_stationary_trajectory(ou, scale_time(w2, eps), 0.0, cfg.experiment.ou_T);
    write_atomic(fs::path(cfg.output.dir) / "ou.csv", [&](std::ostream& os) {
        header(os, "t", "Z_", spec.dim());
        os << '\n';
        rows(os, st.Z);
    });
    std::cout << "past_horizon=" << format_double(st.past_horizon) << " tail=" << format_double(st.tail_estimate)
              << " points=" << st.Z.size() << '\n';
    return 0;
}

int cmd_integral(const ExperimentConfig& cfg, const std::string& integrand)
{
    const SystemSpec spec = cfg.system_spec();
    const auto& n = cfg.noise;
    const FbmPath w = sample_trace_class_fbm(spec.Q1, spec.hurst.H1, UniformGrid::one_sided(n.T, n.n),
                                             derive_seed(n.seed, 1), spec.normalization);
    std::vector<double> grid(w.size());
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = w.time(k);
    const GridFunction om(grid, w.values);
    const Eigen::Index d = Eigen::Index(spec.dim());
    OperatorPath psi;
    if (integrand == "identity") {
        psi = OperatorPath::constant(grid, Matrix::Identity(d, d));
    } else if (integrand == "diffusion") {
        // h evaluated along the path itself, a typical integrand of the slow equation
        std::vector<Matrix> vals;
        for (std::size_t k = 0; k < grid.size(); ++k) vals.push_back(spec.h(w.at(k)));
        psi = OperatorPath(grid, std::move(vals));
    } else {
        throw std::invalid_argument("integral: --integrand must be identity or diffusion");
    }
    if (n.n % 8 != 0) throw std::invalid_argument("integral: noise.n must be a multiple of 8");
    write_atomic(fs::path(cfg.output.dir) / "integral.csv", [&](std::ostream& os) {
        os << "T1,T2";
        for (Eigen::Index i = 1; i <= d; ++i) os << ",zahle_" << i;
        for (Eigen::Index i = 1; i <= d; ++i) os << ",young_" << i;
        for (Eigen::Index i = 1; i <= d; ++i) os << ",increment_" << i;
        os << '\n';
        for (int k = 1; k <= 8; ++k) {
            const double T2 = grid[std::size_t(k) * n.n / 8];
            const SpectralVector z = zahle_integral(psi, om, cfg.solver.frac, 0.0, T2);
            const SpectralVector y = young_sum_integral(psi, om, 0.0, T2);
            const SpectralVector inc = w.value(T2) - w.value(0.0);
            os << "0," << format_double(T2);
            for (const SpectralVector* v : {&z, &y, &inc})
                for (Eigen::Index i = 0; i < d; ++i) os << ',' << format_double((*v)(i));
            os << '\n';
        }
    });
    std::cout << "wrote " << (fs::path(cfg.output.dir) / "integral.csv").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Averaging experiments for slow-fast SPDEs driven by fractional noise"};
    app.set_help_all_flag("--help-all");
    app.require_subcommand(0, 1);
    Options o;
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default configuration as JSON and exit");

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master seed (overrides noise.seed)")->each([&](const std::string&) {
            o.seed_given = true;
        });
        sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    };

    std::function<int(const ExperimentConfig&)> action;
    auto add = [&](const char* name, const char* help, std::function<int(const ExperimentConfig&)> fn) {
        CLI::App* sub = app.add_subcommand(name, help);
        common(sub);
        sub->callback([&action, fn] { action = fn; });
        return sub;
    };

    add("fbm-sample", "Sample both noises and write Holder diagnostics", cmd_fbm_sample);
    add("validate", "Run the validation suite", [&](const ExperimentConfig& c) { return cmd_validate(c, o.level); })
        ->add_option("level", o.level, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}));
    add("converge", "Convergence table of the coupled system against the averaged one", cmd_converge);
    add("fixed-point", "Random fixed point of the frozen fast equation", cmd_fixed_point);
    add("average-drift", "Averaged drift by Monte Carlo and by time averaging", cmd_average_drift);
    add("ou", "Stationary fractional OU trajectory", cmd_ou);
    add("integral", "Zahle integrals against the slow noise",
        [&](const ExperimentConfig& c) { return cmd_integral(c, o.integrand); })
        ->add_option("--integrand", o.integrand, "identity or diffusion")
        ->check(CLI::IsMember({"identity", "diffusion"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (print_defaults) {
        std::cout << default_config_text();
        return 0;
    }
    if (!action) {
        std::cout << app.help();
        return 2;
    }
    ExperimentConfig cfg;
    try {
        cfg = load(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    try {
        return action(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
