#pragma once

#include "fbmavg/fbm.hpp"
#include "fbmavg/mild.hpp"
#include "fbmavg/system.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fbmavg {

struct ExperimentConfig {
    struct System {
        CoefficientParams coeff;
        std::vector<double> lambda_A{1, 2, 3, 4};
        std::vector<double> lambda_B{2, 3, 4, 5};
        std::vector<double> q1{1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0};
        std::vector<double> q2{1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0};
        HurstPair hurst{0.75, 0.55};
        Normalization normalization = Normalization::standard;
        double eps = 0.1;
    } system;

    SolverConfig solver = [] {
        SolverConfig s;
        s.dt = 1.0 / 6400.0;
        return s;
    }();

    struct Noise {
        std::size_t n = 4096;  // grid points on [0, T] for fbm-sample / integral
        double T = 1.0;
        double past = 0.0;      // fbm-sample: two-sided when positive
        double h2 = 1.0 / 1280.0;       // unscaled step of the fast noise driving the solver
        double fast_past = 40.0;
        double fast_step = 1.0 / 64.0;  // unscaled step used for fbar and fixed-point paths
        std::uint64_t seed = 42;
    } noise;

    struct Experiment {
        std::vector<double> eps_list{0.2, 0.1, 0.05, 0.02};
        std::size_t seeds = 20;
        double T = 1.0;
        double delta = 0.05;
        double T_erg = 1000.0;
        std::size_t M = 500;
        double lattice = 0.1;
        std::uint64_t fbar_seed = 7;
        std::vector<double> x{0.5, 0.5, 0.5, 0.5};  // evaluation point for fixed-point / average-drift
        std::vector<double> X0{0.5, 0.5, 0.5, 0.5};
        std::vector<double> Y0{1.0, 1.0, 1.0, 1.0};
        double r = 0.0;  // fixed-point evaluation time
        double ou_T = 10.0;
        bool record_runtime = true;
    } experiment;

    struct Output {
        std::string dir = "out";
        std::string csv_precision = "shortest";
    } output;

    std::size_t jobs = 1;

    SystemSpec system_spec() const;
    SystemSpec system_spec(double eps) const;
    // Re-checks every hypothesis; throws std::invalid_argument naming the field.
    void validate() const;

    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

ExperimentConfig load_config(const std::string& path);
std::string default_config_text();

}  // namespace fbmavg
