#include "fbmavg/config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace fbmavg {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void field_error(const std::string& path, const std::string& msg)
{
    throw std::invalid_argument("config: " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed)
{
    if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) field_error(path.empty() ? k : path + "." + k, "unknown key");
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

void read(const json& j, const std::string& path, const std::string& key, double& out)
{
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number()) field_error(join(path, key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) field_error(join(path, key), "must be finite");
}

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seed fields are read through the size_t overload");

void read(const json& j, const std::string& path, const std::string& key, std::size_t& out)
{
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        field_error(join(path, key), "expected a nonnegative integer");
    out = v.get<std::size_t>();
}

void read(const json& j, const std::string& path, const std::string& key, bool& out)
{
    if (!j.contains(key)) return;
    if (!j.at(key).is_boolean()) field_error(join(path, key), "expected true or false");
    out = j.at(key).get<bool>();
}

void read(const json& j, const std::string& path, const std::string& key, std::string& out)
{
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) field_error(join(path, key), "expected a string");
    out = j.at(key).get<std::string>();
}

void read(const json& j, const std::string& path, const std::string& key, std::vector<double>& out)
{
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array()) field_error(join(path, key), "expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
        if (!e.is_number()) field_error(join(path, key), "expected an array of numbers");
        out.push_back(e.get<double>());
    }
}

void require(bool ok, const std::string& path, const std::string& msg)
{
    if (!ok) field_error(path, msg);
}

bool multiple_of(double a, double b)
{
    const double r = a / b;
    return std::abs(r - std::round(r)) <= 1e-6 * std::max(1.0, std::round(r)) && std::round(r) >= 1.0;
}

}  // namespace

SystemSpec ExperimentConfig::system_spec() const
{
    return system_spec(system.eps);
}

SystemSpec ExperimentConfig::system_spec(double eps) const
{
    SystemSpec s = make_system(system.coeff, system.lambda_A, system.lambda_B, system.q1, system.q2, system.hurst, eps);
    s.normalization = system.normalization;
    return s;
}

void ExperimentConfig::validate() const
{
    const auto& s = system;
    require(!s.lambda_A.empty(), "system.lambda_A", "must not be empty");
    const std::size_t n = s.lambda_A.size();
    require(s.lambda_B.size() == n, "system.lambda_B", "must have the same length as system.lambda_A");
    require(s.q1.size() == n, "system.q1", "must have the same length as system.lambda_A");
    require(s.q2.size() == n, "system.q2", "must have the same length as system.lambda_A");
    for (const char* name : {"lambda_A", "lambda_B"}) {
        const auto& v = std::string(name) == "lambda_A" ? s.lambda_A : s.lambda_B;
        for (std::size_t i = 0; i < v.size(); ++i) {
            require(v[i] > 0.0, std::string("system.") + name, "eigenvalues must be positive");
            if (i > 0) require(v[i] >= v[i - 1], std::string("system.") + name, "eigenvalues must be nondecreasing");
        }
    }
    for (double q : s.q1) require(q >= 0.0, "system.q1", "covariance eigenvalues must be nonnegative");
    for (double q : s.q2) require(q >= 0.0, "system.q2", "covariance eigenvalues must be nonnegative");
    require(s.hurst.H1 > 0.5 && s.hurst.H1 < 1.0, "system.H1", "H1 > 1/2 is required (and H1 < 1)");
    require(s.hurst.H2 > 1.0 - s.hurst.H1 && s.hurst.H2 < 1.0, "system.H2", "1 - H1 < H2 < 1 is required");
    require(s.eps > 0.0 && s.eps <= 1.0, "system.eps", "must lie in (0, 1]");
    if (s.coeff.family == "linear")
        require(s.coeff.f_lin == 0.0, "system.f_lin", "the slow drift must be bounded; linear f needs f_lin = 0");
    const SystemSpec spec = [&] {
        try {
            return system_spec();
        } catch (const std::invalid_argument& e) {
            field_error("system.family", e.what());
        }
    }();
    if (!(spec.lambda_B() > spec.C1))
        field_error("system.lambda_B", "lambda_B = " + std::to_string(spec.lambda_B()) + " must exceed C1 = " +
                                           std::to_string(spec.C1) + " (fast contraction)");
    require(std::isfinite(spec.f_bound), "system.family", "f must be declared bounded");
    spec.validate();

    try {
        solver.validate();
    } catch (const std::invalid_argument& e) {
        field_error("solver", e.what());
    }
    require(noise.n > 0, "noise.n", "must be positive");
    require(noise.T > 0.0, "noise.T", "must be positive");
    require(noise.past >= 0.0, "noise.past", "must be nonnegative");
    require(noise.h2 > 0.0, "noise.h2", "must be positive");
    require(noise.fast_past > 0.0, "noise.fast_past", "must be positive");
    require(noise.fast_step > 0.0, "noise.fast_step", "must be positive");

    const auto& e = experiment;
    require(!e.eps_list.empty(), "experiment.eps_list", "must not be empty");
    for (double v : e.eps_list) {
        require(v > 0.0 && v <= 1.0, "experiment.eps_list", "entries must lie in (0, 1]");
        require(multiple_of(solver.dt, v * noise.h2), "experiment.eps_list",
                "solver.dt must be a multiple of eps * noise.h2 for every eps");
    }
    require(e.seeds > 0, "experiment.seeds", "must be positive");
    require(e.T > 0.0 && multiple_of(e.T, solver.dt), "experiment.T", "must be a positive multiple of solver.dt");
    require(e.delta > 0.0 && e.delta < 1.0, "experiment.delta", "must lie in (0, 1)");
    require(multiple_of(e.delta, solver.dt), "experiment.delta", "must be an integer multiple of solver.dt");
    require(e.T_erg > 0.0, "experiment.T_erg", "must be positive");
    require(e.M >= 2, "experiment.M", "must be at least 2");
    require(e.lattice > 0.0, "experiment.lattice", "must be positive");
    require(e.x.size() == n, "experiment.x", "dimension must match the spectra");
    require(e.X0.size() == n, "experiment.X0", "dimension must match the spectra");
    require(e.Y0.size() == n, "experiment.Y0", "dimension must match the spectra");
    require(e.ou_T > 0.0, "experiment.ou_T", "must be positive");
    require(output.csv_precision == "shortest", "output.csv_precision",
            "only \"shortest\" (round-trip decimal) is supported");
    require(jobs >= 1, "jobs", "must be at least 1");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    ExperimentConfig c;
    check_keys(j, "", {"system", "solver", "noise", "experiment", "output", "jobs"});
    if (j.contains("system")) {
        const json& s = j.at("system");
        check_keys(s, "system",
                   {"family", "lambda_A", "lambda_B", "q1", "q2", "H1", "H2", "normalization", "eps", "f_scale",
                    "f_lin", "g_x", "g_y", "g_const", "h_base", "h_amp"});
        auto& cs = c.system;
        read(s, "system", "family", cs.coeff.family);
        read(s, "system", "lambda_A", cs.lambda_A);
        read(s, "system", "lambda_B", cs.lambda_B);
        read(s, "system", "q1", cs.q1);
        read(s, "system", "q2", cs.q2);
        read(s, "system", "H1", cs.hurst.H1);
        read(s, "system", "H2", cs.hurst.H2);
        std::string norm = cs.normalization == Normalization::doubled ? "doubled" : "standard";
        read(s, "system", "normalization", norm);
        if (norm == "doubled")
            cs.normalization = Normalization::doubled;
        else if (norm == "standard")
            cs.normalization = Normalization::standard;
        else
            field_error("system.normalization", "expected \"standard\" or \"doubled\"");
        read(s, "system", "eps", cs.eps);
        read(s, "system", "f_scale", cs.coeff.f_scale);
        read(s, "system", "f_lin", cs.coeff.f_lin);
        read(s, "system", "g_x", cs.coeff.g_x);
        read(s, "system", "g_y", cs.coeff.g_y);
        read(s, "system", "g_const", cs.coeff.g_const);
        read(s, "system", "h_base", cs.coeff.h_base);
        read(s, "system", "h_amp", cs.coeff.h_amp);
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, "solver", {"dt", "picard_tol", "rho", "beta", "gamma", "alpha", "picard_max_iter"});
        auto& v = c.solver;
        read(s, "solver", "dt", v.dt);
        read(s, "solver", "picard_tol", v.picard_tol);
        read(s, "solver", "rho", v.rho);
        double beta = v.frac.beta, gamma = v.frac.gamma;
        read(s, "solver", "beta", beta);
        read(s, "solver", "gamma", gamma);
        v.frac = FracParams::with_default_alpha(beta, gamma);
        if (s.contains("alpha") && !s.at("alpha").is_null()) read(s, "solver", "alpha", v.frac.alpha);
        read(s, "solver", "picard_max_iter", v.picard_max_iter);
    }
    if (j.contains("noise")) {
        const json& s = j.at("noise");
        check_keys(s, "noise", {"n", "T", "past", "h2", "fast_past", "fast_step", "seed"});
        read(s, "noise", "n", c.noise.n);
        read(s, "noise", "T", c.noise.T);
        read(s, "noise", "past", c.noise.past);
        read(s, "noise", "h2", c.noise.h2);
        read(s, "noise", "fast_past", c.noise.fast_past);
        read(s, "noise", "fast_step", c.noise.fast_step);
        read(s, "noise", "seed", c.noise.seed);
    }
    if (j.contains("experiment")) {
        const json& s = j.at("experiment");
        check_keys(s, "experiment",
                   {"eps_list", "seeds", "T", "delta", "T_erg", "M", "lattice", "fbar_seed", "x", "X0", "Y0", "r",
                    "ou_T", "record_runtime"});
        auto& e = c.experiment;
        read(s, "experiment", "eps_list", e.eps_list);
        read(s, "experiment", "seeds", e.seeds);
        read(s, "experiment", "T", e.T);
        read(s, "experiment", "delta", e.delta);
        read(s, "experiment", "T_erg", e.T_erg);
        read(s, "experiment", "M", e.M);
        read(s, "experiment", "lattice", e.lattice);
        read(s, "experiment", "fbar_seed", e.fbar_seed);
        read(s, "experiment", "x", e.x);
        read(s, "experiment", "X0", e.X0);
        read(s, "experiment", "Y0", e.Y0);
        read(s, "experiment", "r", e.r);
        read(s, "experiment", "ou_T", e.ou_T);
        read(s, "experiment", "record_runtime", e.record_runtime);
    }
    if (j.contains("output")) {
        const json& s = j.at("output");
        check_keys(s, "output", {"dir", "csv_precision"});
        read(s, "output", "dir", c.output.dir);
        read(s, "output", "csv_precision", c.output.csv_precision);
    }
    read(j, "", "jobs", c.jobs);
    c.validate();
    return c;
}

std::string ExperimentConfig::to_json_text() const
{
    json j;
    const auto& s = system;
    j["system"] = {{"family", s.coeff.family},
                   {"lambda_A", s.lambda_A},
                   {"lambda_B", s.lambda_B},
                   {"q1", s.q1},
                   {"q2", s.q2},
                   {"H1", s.hurst.H1},
                   {"H2", s.hurst.H2},
                   {"normalization", s.normalization == Normalization::doubled ? "doubled" : "standard"},
                   {"eps", s.eps},
                   {"f_scale", s.coeff.f_scale},
                   {"f_lin", s.coeff.f_lin},
                   {"g_x", s.coeff.g_x},
                   {"g_y", s.coeff.g_y},
                   {"g_const", s.coeff.g_const},
                   {"h_base", s.coeff.h_base},
                   {"h_amp", s.coeff.h_amp}};
    j["solver"] = {{"dt", solver.dt},
                   {"picard_tol", solver.picard_tol},
                   {"rho", solver.rho},
                   {"beta", solver.frac.beta},
                   {"gamma", solver.frac.gamma},
                   {"alpha", solver.frac.alpha},
                   {"picard_max_iter", solver.picard_max_iter}};
    j["noise"] = {{"n", noise.n},   {"T", noise.T},       {"past", noise.past}, {"h2", noise.h2},
                  {"fast_past", noise.fast_past}, {"fast_step", noise.fast_step}, {"seed", noise.seed}};
    const auto& e = experiment;
    j["experiment"] = {{"eps_list", e.eps_list}, {"seeds", e.seeds},   {"T", e.T},
                       {"delta", e.delta},       {"T_erg", e.T_erg},   {"M", e.M},
                       {"lattice", e.lattice},   {"fbar_seed", e.fbar_seed}, {"x", e.x},
                       {"X0", e.X0},             {"Y0", e.Y0},         {"r", e.r},
                       {"ou_T", e.ou_T},         {"record_runtime", e.record_runtime}};
    j["output"] = {{"dir", output.dir}, {"csv_precision", output.csv_precision}};
    j["jobs"] = jobs;
    return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ExperimentConfig::from_json_text(ss.str());
}

std::string default_config_text()
{
    return ExperimentConfig{}.to_json_text();
}

}  // namespace fbmavg
