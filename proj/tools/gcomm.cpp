#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcomm/errors.hpp"
#include "gcomm/experiments.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Options
{
    std::string config;
    std::string out;
    std::optional<std::int64_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<int> restarts;
    std::string field;
    std::vector<double> values;
};

gcomm::ExperimentConfig resolve(const Options& opt)
{
    gcomm::ExperimentConfig cfg = gcomm::load_config(opt.config);
    if (opt.samples)
        cfg.samples = *opt.samples;
    if (opt.seed)
        cfg.seed = *opt.seed;
    if (opt.restarts) {
        gcomm::BaselineConfig bc = cfg.baseline.value_or(gcomm::BaselineConfig{});
        bc.restarts = *opt.restarts;
        cfg.baseline = bc;
    }
    return cfg;
}

void emit(const Options& opt, const std::string& text)
{
    if (opt.out.empty() || opt.out == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream file(opt.out, std::ios::binary | std::ios::trunc);
    if (!file)
        throw gcomm::ConfigError("--out: cannot open '" + opt.out + "' for writing");
    file << text;
}

void warn(const std::vector<std::string>& warnings)
{
    for (const std::string& w : warnings)
        std::cerr << "warning: " << w << '\n';
}

int run(const std::string& command, const Options& opt)
{
    const gcomm::ExperimentConfig cfg = resolve(opt);
    std::ostringstream text;
    if (command == "sweep") {
        const gcomm::SweepResult sweep = gcomm::run_sweep(cfg, opt.field, opt.values);
        for (const gcomm::OutputRecord& rec : sweep.records)
            warn(rec.warnings);
        gcomm::write_sweep_csv(text, sweep);
    } else {
        gcomm::OutputRecord rec;
        if (command == "analytic")
            rec = gcomm::run_analytic(cfg);
        else if (command == "simulate")
            rec = gcomm::run_simulate(cfg);
        else if (command == "baseline")
            rec = gcomm::run_baseline(cfg);
        else
            rec = gcomm::run_compare(cfg);
        warn(rec.warnings);
        gcomm::write_csv(text, rec);
    }
    emit(opt, text.str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Optimal linear encoding of a first-order plant over a power-constrained Gaussian channel" };
    app.require_subcommand(1);
    Options opt;

    auto common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output CSV path (default: stdout)");
        sub->add_option("--samples", opt.samples, "Monte Carlo samples (overrides config)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", opt.seed, "master RNG seed (overrides config)");
        sub->add_option("--restarts", opt.restarts, "baseline restarts (overrides config)")->check(CLI::PositiveNumber);
    };
    common(app.add_subcommand("analytic", "exact per-step MSE of the closed-form scheme"));
    common(app.add_subcommand("simulate", "analytic MSE plus Monte Carlo estimate"));
    common(app.add_subcommand("baseline", "brute-force optimum over causal linear encoder/decoder pairs"));
    common(app.add_subcommand("compare", "analytic, Monte Carlo and brute-force baseline side by side"));
    CLI::App* sweep = app.add_subcommand("sweep", "average MSE as one parameter varies");
    common(sweep);
    sweep->add_option("--field", opt.field, "parameter to sweep")->required()->check(CLI::IsMember({ "P", "N", "a" }));
    sweep->add_option("--values", opt.values, "values to sweep over")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const gcomm::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const gcomm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const gcomm::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_config;
    }
}
