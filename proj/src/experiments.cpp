#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gcomm/baseline.hpp"
#include "gcomm/errors.hpp"
#include "gcomm/experiments.hpp"

namespace gcomm {

namespace {

constexpr double variance_warning_level = 1e12;

RunResult<double> monte_carlo(const ExperimentConfig& cfg)
{
    return monte_carlo_mse(cfg.scheme, cfg.system, cfg.channel, static_cast<Index>(cfg.samples), RngSeed{ cfg.seed });
}

OutputRecord analytic_record(const ExperimentConfig& cfg, const RunResult<double>& analytic)
{
    OutputRecord rec;
    for (Index t = 1; t <= cfg.horizon; ++t) {
        OutputRow row;
        row.t = t;
        row.mse_analytic = analytic.mse_analytic(t - 1);
        row.power_used = analytic.power_used(t - 1);
        rec.rows.push_back(row);
    }
    rec.footer.emplace_back("scheme", std::string(scheme_label(cfg.scheme)));
    rec.footer.emplace_back("horizon", std::to_string(cfg.horizon));
    rec.footer.emplace_back("avg_mse_analytic", format_number(analytic.avg_mse_analytic));
    rec.warnings = stability_warnings(cfg.system);
    return rec;
}

void add_monte_carlo(OutputRecord& rec, const ExperimentConfig& cfg, const RunResult<double>& mc)
{
    double max_corr = 0;
    for (Index t = 0; t < cfg.horizon; ++t) {
        OutputRow& row = rec.rows[static_cast<std::size_t>(t)];
        row.mse_empirical = mc.mse_empirical(t);
        row.std_error = mc.std_error(t);
        row.power_used = mc.power_used(t);
        max_corr = std::max(max_corr, std::abs(mc.orthogonality(t)));
    }
    rec.footer.emplace_back("samples", std::to_string(mc.samples));
    rec.footer.emplace_back("seed", std::to_string(cfg.seed));
    rec.footer.emplace_back("avg_mse_empirical", format_number(mc.avg_mse_empirical));
    rec.footer.emplace_back("avg_stderr", format_number(mc.avg_std_error));
    rec.footer.emplace_back("max_abs_estimate_residual_corr", format_number(max_corr));
}

void add_baseline(OutputRecord& rec, const ExperimentConfig& cfg, double analytic_average)
{
    if (cfg.horizon > baseline_horizon_cap)
        throw UsageError("baseline: horizon " + std::to_string(cfg.horizon) + " exceeds the dense-operator cap of "
                         + std::to_string(baseline_horizon_cap)
                         + "; use 'analytic' or 'simulate' for long horizons");
    const BaselineConfig bc = cfg.baseline.value_or(BaselineConfig{});
    BaselineOptions opt;
    opt.restarts = bc.restarts;
    opt.max_iters = bc.max_iters;
    opt.tol = bc.tol;
    const ChannelChain<double> chain = scheme_chain(cfg.scheme, cfg.system, cfg.channel);
    const BaselineResult<double> res = alternating_optimize(chain, opt, RngSeed{ cfg.seed });

    std::vector<double> objectives = res.restart_objectives;
    std::sort(objectives.begin(), objectives.end());
    const double best = objectives.front();
    const auto near_best = std::count_if(objectives.begin(), objectives.end(), [best](double v) {
        return v - best <= 1e-6 * std::max(1.0, std::abs(best));
    });
    const auto converged = std::count(res.restart_converged.begin(), res.restart_converged.end(), true);
    double power_ratio = 0;
    for (Index r = 0; r < chain.horizon(); ++r)
        if (chain.reaches_decoder(r))
            power_ratio = std::max(power_ratio, res.per_row_power(r) / chain.power(r));

    rec.footer.emplace_back("baseline_objective", format_number(res.objective));
    rec.footer.emplace_back("baseline_gap_relative", format_number((res.objective - analytic_average) / analytic_average));
    rec.footer.emplace_back("baseline_restarts", std::to_string(res.restarts_run));
    rec.footer.emplace_back("baseline_restarts_converged", std::to_string(converged));
    rec.footer.emplace_back("baseline_restarts_within_1e-6_of_best", std::to_string(near_best));
    rec.footer.emplace_back("baseline_worst_restart_objective", format_number(objectives.back()));
    rec.footer.emplace_back("baseline_converged", res.converged ? "true" : "false");
    rec.footer.emplace_back("baseline_max_row_power_ratio", format_number(power_ratio));
    rec.footer.emplace_back("baseline_encoder_memory_ratio", format_number(encoder_memory_ratio(res.G_opt, chain)));
}

} // namespace

std::string format_number(double value)
{
    if (value == 0)
        value = 0;  // drop the sign of negative zero
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

void OutputRecord::check_finite() const
{
    auto check = [](double v, const std::string& what) {
        if (!std::isfinite(v))
            throw NumericalError("non-finite value in " + what);
    };
    for (const OutputRow& row : rows) {
        const std::string at = " at t=" + std::to_string(row.t);
        check(row.mse_analytic, "mse_analytic" + at);
        if (row.mse_empirical)
            check(*row.mse_empirical, "mse_empirical" + at);
        if (row.std_error)
            check(*row.std_error, "stderr" + at);
        if (row.power_used)
            check(*row.power_used, "power_used" + at);
    }
    for (const auto& [key, value] : footer)
        if (value == "nan" || value == "-nan" || value == "inf" || value == "-inf")
            throw NumericalError("non-finite value in " + key);
}

void write_csv(std::ostream& out, const OutputRecord& record)
{
    auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    out << "t,mse_analytic,mse_empirical,stderr,power_used\n";
    for (const OutputRow& row : record.rows)
        out << row.t << ',' << format_number(row.mse_analytic) << ',' << cell(row.mse_empirical) << ','
            << cell(row.std_error) << ',' << cell(row.power_used) << '\n';
    for (const auto& [key, value] : record.footer)
        out << "# " << key << '=' << value << '\n';
}

std::vector<std::string> stability_warnings(const SystemParams<double>& params)
{
    std::vector<std::string> out;
    const Index T = params.horizon();
    const Vec<double> var = state_variance(params);
    if ((params.a.array().abs() > 1).any())
        out.push_back("unstable plant (|a| > 1): state variance grows to " + format_number(var(T)) + " at t="
                      + std::to_string(T));
    for (Index t = 1; t <= T; ++t)
        if (var(t) > variance_warning_level) {
            out.push_back("state variance " + format_number(var(t)) + " at t=" + std::to_string(t)
                          + " exceeds 1e12; double-precision results may be inaccurate");
            break;
        }
    return out;
}

OutputRecord run_analytic(const ExperimentConfig& config)
{
    const RunResult<double> analytic = analytic_mse(config.scheme, config.system, config.channel);
    OutputRecord rec = analytic_record(config, analytic);
    rec.check_finite();
    return rec;
}

OutputRecord run_simulate(const ExperimentConfig& config)
{
    if (config.samples < 1)
        throw ConfigError("samples: simulate needs at least 1 sample");
    const RunResult<double> analytic = analytic_mse(config.scheme, config.system, config.channel);
    OutputRecord rec = analytic_record(config, analytic);
    add_monte_carlo(rec, config, monte_carlo(config));
    rec.check_finite();
    return rec;
}

OutputRecord run_baseline(const ExperimentConfig& config)
{
    const RunResult<double> analytic = analytic_mse(config.scheme, config.system, config.channel);
    OutputRecord rec = analytic_record(config, analytic);
    add_baseline(rec, config, analytic.avg_mse_analytic);
    rec.check_finite();
    return rec;
}

OutputRecord run_compare(const ExperimentConfig& config)
{
    if (config.horizon > baseline_horizon_cap)
        throw UsageError("compare: horizon " + std::to_string(config.horizon) + " exceeds the dense-operator cap of "
                         + std::to_string(baseline_horizon_cap)
                         + "; use 'analytic' or 'simulate' for long horizons");
    const RunResult<double> analytic = analytic_mse(config.scheme, config.system, config.channel);
    OutputRecord rec = analytic_record(config, analytic);
    if (config.samples >= 1)
        add_monte_carlo(rec, config, monte_carlo(config));
    add_baseline(rec, config, analytic.avg_mse_analytic);
    rec.check_finite();
    return rec;
}

SweepResult run_sweep(const ExperimentConfig& config, std::string_view field, const std::vector<double>& values)
{
    if (field != "P" && field != "N" && field != "a")
        throw UsageError("sweep: unknown field '" + std::string(field) + "' (expected P, N or a)");
    if (values.empty())
        throw UsageError("sweep: no values given");
    SweepResult sweep;
    sweep.field = std::string(field);
    sweep.values = values;
    for (double v : values) {
        if (!std::isfinite(v))
            throw UsageError("sweep: values must be finite");
        ExperimentConfig cfg = config;
        const Vec<double> broadcast = Vec<double>::Constant(cfg.horizon, v);
        if (field == "P")
            cfg.channel.P = broadcast;
        else if (field == "N")
            cfg.channel.N = broadcast;
        else
            cfg.system.a = broadcast;
        try {
            cfg.channel.validate(cfg.horizon);
        } catch (const ConfigError& e) {
            throw UsageError(std::string("sweep: ") + e.what());
        }
        sweep.records.push_back(cfg.samples >= 1 ? run_simulate(cfg) : run_analytic(cfg));
    }
    return sweep;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep)
{
    auto footer = [](const OutputRecord& rec, const std::string& key) {
        for (const auto& [k, v] : rec.footer)
            if (k == key)
                return v;
        return std::string();
    };
    out << "value,avg_mse_analytic,avg_mse_empirical,avg_stderr\n";
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
        const OutputRecord& rec = sweep.records[i];
        out << format_number(sweep.values[i]) << ',' << footer(rec, "avg_mse_analytic") << ','
            << footer(rec, "avg_mse_empirical") << ',' << footer(rec, "avg_stderr") << '\n';
    }
    out << "# sweep_field=" << sweep.field << '\n';
}

} // namespace gcomm
