#include "fbmavg/validation.hpp"

#include "doctest.h"

using namespace fbmavg;

TEST_CASE("quick suite on the benchmark")
{
    const ExperimentConfig cfg;
    const ValidationReport r = run_quick(cfg);
    CHECK(r.checks.size() == 15);
    for (const auto& c : r.checks) CHECK_MESSAGE(c.pass, c.id, " ", c.title, ": ", c.detail);
    CHECK(r.to_text().find("15/15 checks passed") != std::string::npos);
}

TEST_CASE("quick suite on the zero system")
{
    ExperimentConfig cfg;
    cfg.system.coeff.family = "zero";
    const ValidationReport r = run_quick(cfg);
    CHECK(r.all_pass());
}

TEST_CASE("broken configuration stops the suite at the first check")
{
    ExperimentConfig cfg;
    cfg.system.lambda_B = {0.3, 3, 4, 5};
    const ValidationReport r = run_quick(cfg);
    REQUIRE(r.checks.size() == 1);
    CHECK_FALSE(r.checks[0].pass);
    CHECK(r.checks[0].detail.find("lambda_B") != std::string::npos);
}

TEST_CASE("reports are reproducible byte for byte")
{
    const ExperimentConfig cfg;
    ValidationOptions a, b;
    b.jobs = 3;
    CHECK(run_quick(cfg, a).to_json() == run_quick(cfg, b).to_json());
    CHECK_THROWS(run_criterion(13, cfg));
}
