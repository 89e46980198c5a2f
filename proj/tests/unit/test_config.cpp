#include "fbmavg/config.hpp"
#include "fbmavg/csv.hpp"
#include "fbmavg/rng.hpp"

#include "doctest.h"

#include "json.hpp"

#include <random>

using namespace fbmavg;
using nlohmann::json;

namespace {

std::string edited(const std::function<void(json&)>& edit)
{
    json j = json::parse(default_config_text());
    edit(j);
    return j.dump();
}

std::string load_error(const std::string& text)
{
    try {
        ExperimentConfig::from_json_text(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults validate and round trip")
{
    const ExperimentConfig d;
    CHECK_NOTHROW(d.validate());
    const ExperimentConfig r = ExperimentConfig::from_json_text(default_config_text());
    CHECK(r.to_json_text() == d.to_json_text());
    CHECK(r.system_spec().dim() == 4);
    CHECK(r.system_spec(0.02).eps == 0.02);
}

TEST_CASE("partial configs keep the remaining defaults")
{
    const ExperimentConfig c = ExperimentConfig::from_json_text(R"({"experiment": {"seeds": 3}})");
    CHECK(c.experiment.seeds == 3);
    CHECK(c.experiment.T_erg == ExperimentConfig{}.experiment.T_erg);
}

TEST_CASE("hypotheses are re-checked at load with field names")
{
    CHECK(load_error(edited([](json& j) { j["system"]["H1"] = 0.4; })).find("H1 > 1/2") != std::string::npos);
    CHECK(load_error(edited([](json& j) { j["system"]["lambda_B"] = {0.3, 3, 4, 5}; })).find("system.lambda_B") !=
          std::string::npos);
    CHECK(load_error(edited([](json& j) {
              j["system"]["family"] = "linear";
              j["system"]["f_lin"] = 0.2;
          })).find("bounded") != std::string::npos);
    CHECK(load_error(edited([](json& j) { j["noise"]["h2"] = 1.0 / 7; })).find("noise.h2") != std::string::npos);
    CHECK(load_error(edited([](json& j) { j["system"]["unknown_key"] = 1; })).find("unknown_key") != std::string::npos);
    CHECK(load_error(edited([](json& j) { j["experiment"]["x"] = {1.0, 2.0}; })).find("experiment.x") !=
          std::string::npos);
}

TEST_CASE("shortest round-trip decimal")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double v = u(rng) * std::pow(10.0, double(k % 40) - 20.0);
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    const auto cells = split_csv_line("a,1.5,,x");
    CHECK(cells.size() == 4);
    CHECK(cells[2].empty());
}

TEST_CASE("seed derivation")
{
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    auto a = substream(9, 1), b = substream(9, 1);
    CHECK(a() == b());
}
