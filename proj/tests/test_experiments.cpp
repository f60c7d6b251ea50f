#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "gcomm/errors.hpp"
#include "gcomm/experiments.hpp"

using namespace gcomm;

namespace {

std::string csv(const OutputRecord& rec)
{
    std::ostringstream out;
    write_csv(out, rec);
    return out.str();
}

std::string rows_only(const std::string& text)
{
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#')
            out += line + "\n";
    return out;
}

std::string footer(const OutputRecord& rec, const std::string& key)
{
    for (const auto& [k, v] : rec.footer)
        if (k == key)
            return v;
    return {};
}

const char* random_walk = R"({"horizon": 2, "system": {"a": 1, "b": 1}, "channel": {"P": 1, "N": 1}})";

} // namespace

TEST_CASE("config parsing broadcasts scalars and checks lengths")
{
    const ExperimentConfig cfg = parse_config(R"({
        "horizon": 3,
        "system": {"a": [0.5, 0.9, 1.1], "b": 2, "c": 1, "d": 0.5, "V_ww": 1, "V_wv": 0.1, "V_vv": 1, "x0": 1.5},
        "channel": {"P": [1, 2, 3], "N": 0.5},
        "scheme": "noisy_state", "samples": 10, "seed": 7,
        "baseline": {"restarts": 4, "max_iters": 100, "tol": 1e-9}
    })");
    CHECK(cfg.horizon == 3);
    CHECK(cfg.system.a(2) == 1.1);
    CHECK(cfg.system.b(1) == 2.0);
    CHECK(cfg.system.cov(2)(1, 0) == 0.1);
    CHECK(cfg.system.x0 == 1.5);
    CHECK(cfg.channel.P(2) == 3.0);
    CHECK(cfg.channel.N(0) == 0.5);
    CHECK(cfg.scheme == SchemeKind::NoisyState);
    CHECK(cfg.samples == 10);
    CHECK(cfg.seed == 7);
    REQUIRE(cfg.baseline.has_value());
    CHECK(cfg.baseline->restarts == 4);

    const ExperimentConfig defaults = parse_config(random_walk);
    CHECK(defaults.scheme == SchemeKind::FullState);
    CHECK(defaults.samples == 0);
    CHECK_FALSE(defaults.baseline.has_value());
}

TEST_CASE("config errors name the field")
{
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 3, "system": {"a": [1, 2]}, "channel": {"P": 1, "N": 1}})"),
                         doctest::Contains("system.a"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 2, "channel": {"P": 1, "N": 1}, "colour": 3})"),
                         doctest::Contains("colour"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 2, "channel": {"P": 0, "N": 1}})"), doctest::Contains("P at step 1"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 2, "system": {"V_wv": [0, 0.5], "V_vw": [0, 0.2]}, "channel": {"P": 1, "N": 1}})"),
                         doctest::Contains("step 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 0, "channel": {"P": 1, "N": 1}})"), doctest::Contains("horizon"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 2, "channel": {"P": 1, "N": 1}, "samples": -1})"),
                         doctest::Contains("samples"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"horizon": 2, "channel": {"P": 1, "N": 1}, "scheme": "magic"})"),
                         doctest::Contains("scheme"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"horizon": 2})"), ConfigError);
}

TEST_CASE("config round trip")
{
    for (const char* text : { random_walk,
                              R"({"horizon": 4, "system": {"a": [0.5, 0.9, 1.1, 0.3], "b": 2, "d": [0, 1, 0.5, 0.25],
                                  "V_ww": 1.5, "V_wv": [0, 0.1, 0.2, 0.3], "V_vv": 1, "x0": -0.75},
                                  "channel": {"P": [1, 2, 3, 0.1], "N": 0.5}, "scheme": "noisy_state",
                                  "samples": 100000, "seed": 18446744073709551615,
                                  "baseline": {"restarts": 3, "max_iters": 50, "tol": 1.25e-11}})" }) {
        const ExperimentConfig cfg = parse_config(text);
        const std::string serialized = serialize_config(cfg);
        CHECK(parse_config(serialized) == cfg);
        CHECK(serialize_config(parse_config(serialized)) == serialized);
    }
}

TEST_CASE("number formatting")
{
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1234567.891011121) == "1234567.89101");
}

TEST_CASE("analytic runs")
{
    SUBCASE("a single step")
    {
        const OutputRecord rec = run_analytic(parse_config(R"({"horizon": 1, "system": {"a": 0.4, "b": 3}, "channel": {"P": 1, "N": 1}})"));
        REQUIRE(rec.rows.size() == 1);
        CHECK(rec.rows[0].mse_analytic == doctest::Approx(9.0));
    }
    SUBCASE("unit random walk, P = N")
    {
        const std::string text = csv(run_analytic(parse_config(random_walk)));
        CHECK(rows_only(text) == "t,mse_analytic,mse_empirical,stderr,power_used\n1,1,,,1\n2,1.5,,,1\n");
        CHECK(text.find("# avg_mse_analytic=1.25\n") != std::string::npos);
    }
    SUBCASE("noisy scheme with perfect observation prints the same numbers")
    {
        const char* full = R"({"horizon": 5, "system": {"a": 0.9, "b": 1.3, "V_ww": 0.7}, "channel": {"P": [1, 2, 1, 2, 1], "N": 0.5}})";
        const char* noisy = R"({"horizon": 5, "system": {"a": 0.9, "b": 1.3, "V_ww": 0.7, "c": 1, "d": 0, "V_vv": 2},
                                "channel": {"P": [1, 2, 1, 2, 1], "N": 0.5}, "scheme": "noisy_state"})";
        CHECK(rows_only(csv(run_analytic(parse_config(full)))) == rows_only(csv(run_analytic(parse_config(noisy)))));
    }
}

TEST_CASE("simulate and compare")
{
    ExperimentConfig cfg = parse_config(R"({"horizon": 3, "system": {"a": 0.9, "b": 1}, "channel": {"P": 1, "N": 0.5},
                                            "samples": 3000, "seed": 5, "baseline": {"restarts": 3}})");
    SUBCASE("simulate needs samples")
    {
        ExperimentConfig none = cfg;
        none.samples = 0;
        CHECK_THROWS_AS(run_simulate(none), ConfigError);
        const OutputRecord rec = run_simulate(cfg);
        CHECK(rec.rows[2].mse_empirical.has_value());
        CHECK(footer(rec, "samples") == "3000");
    }
    SUBCASE("compare without samples omits the Monte Carlo columns")
    {
        ExperimentConfig none = cfg;
        none.samples = 0;
        const OutputRecord rec = run_compare(none);
        CHECK_FALSE(rec.rows[0].mse_empirical.has_value());
        CHECK_FALSE(footer(rec, "baseline_objective").empty());
        CHECK(footer(rec, "baseline_restarts") == "3");
        CHECK(footer(rec, "avg_mse_empirical").empty());
    }
    SUBCASE("fixed seed gives identical bytes")
    {
        CHECK(csv(run_compare(cfg)) == csv(run_compare(cfg)));
        ExperimentConfig other = cfg;
        other.seed = 6;
        CHECK(csv(run_simulate(cfg)) != csv(run_simulate(other)));
    }
    SUBCASE("long horizons are refused for the baseline")
    {
        ExperimentConfig big = parse_config(R"({"horizon": 51, "channel": {"P": 1, "N": 1}})");
        CHECK_THROWS_WITH_AS(run_compare(big), doctest::Contains("cap"), UsageError);
        CHECK_THROWS_AS(run_baseline(big), UsageError);
        CHECK_NOTHROW(run_analytic(big));
    }
}

TEST_CASE("sweeps")
{
    const ExperimentConfig cfg = parse_config(R"({"horizon": 5, "system": {"a": 0.9, "b": 1}, "channel": {"P": 1, "N": 0.5}})");
    auto averages = [](const SweepResult& s) {
        std::vector<double> out;
        for (const OutputRecord& rec : s.records) {
            double sum = 0;
            for (const OutputRow& row : rec.rows)
                sum += row.mse_analytic;
            out.push_back(sum / static_cast<double>(rec.rows.size()));
        }
        return out;
    };
    SUBCASE("more power never hurts")
    {
        const std::vector<double> avg = averages(run_sweep(cfg, "P", { 0.5, 1, 2, 4 }));
        for (std::size_t i = 1; i < avg.size(); ++i)
            CHECK(avg[i] <= avg[i - 1]);
    }
    SUBCASE("more noise never helps")
    {
        const std::vector<double> avg = averages(run_sweep(cfg, "N", { 0.1, 1, 10 }));
        for (std::size_t i = 1; i < avg.size(); ++i)
            CHECK(avg[i] >= avg[i - 1]);
    }
    SUBCASE("an unstable plant is flagged")
    {
        ExperimentConfig eight = cfg;
        eight = parse_config(R"({"horizon": 8, "system": {"a": 0.9, "b": 1}, "channel": {"P": 1, "N": 0.5}})");
        const SweepResult s = run_sweep(eight, "a", { 0.5, 0.9, 1.1 });
        CHECK(s.records[0].warnings.empty());
        CHECK(s.records[1].warnings.empty());
        CHECK_FALSE(s.records[2].warnings.empty());
        for (const OutputRecord& rec : s.records)
            CHECK_NOTHROW(rec.check_finite());
        std::ostringstream out;
        write_sweep_csv(out, s);
        CHECK(out.str().rfind("value,avg_mse_analytic,avg_mse_empirical,avg_stderr\n0.5,", 0) == 0);
    }
    SUBCASE("bad requests")
    {
        CHECK_THROWS_AS(run_sweep(cfg, "b", { 1.0 }), UsageError);
        CHECK_THROWS_AS(run_sweep(cfg, "P", { -1.0 }), UsageError);
        CHECK_THROWS_AS(run_sweep(cfg, "P", {}), UsageError);
    }
}

TEST_CASE("huge variances trigger a warning")
{
    const ExperimentConfig cfg = parse_config(R"({"horizon": 30, "system": {"a": 3, "b": 1}, "channel": {"P": 1, "N": 1}})");
    const std::vector<std::string> w = stability_warnings(cfg.system);
    REQUIRE(w.size() == 2);
    CHECK(w[1].find("1e12") != std::string::npos);
}
