// Runs the twelve acceptance criteria on the default configuration and prints
// one PASS/FAIL line per criterion. Exit status is nonzero on any failure.
#include "fbmavg/validation.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

int main(int argc, char** argv)
{
    fbmavg::ExperimentConfig cfg;
    fbmavg::ValidationOptions opt;
    opt.seed = cfg.noise.seed;
    opt.jobs = std::max(1u, std::thread::hardware_concurrency());
    int first = 1, last = fbmavg::kCriterionCount;
    if (argc > 1) first = last = std::atoi(argv[1]);
    int failed = 0;
    for (int k = first; k <= last; ++k) {
        const fbmavg::CheckResult r = fbmavg::run_criterion(k, cfg, opt);
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << r.title << "): " << r.detail
                  << std::endl;
        failed += r.pass ? 0 : 1;
    }
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
