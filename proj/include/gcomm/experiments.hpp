#ifndef GCOMM_EXPERIMENTS_HPP
#define GCOMM_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gcomm/core_model.hpp"
#include "gcomm/scheme.hpp"

namespace gcomm {

struct BaselineConfig
{
    int restarts = 20;
    int max_iters = 20000;
    double tol = 1e-13;

    bool operator==(const BaselineConfig&) const = default;
};

/**
 * One experiment, as read from JSON:
 *
 *   {
 *     "horizon": 4,
 *     "system":  { "a": 0.9, "b": 1, "c": 1, "d": 0,
 *                  "V_ww": 1, "V_wv": 0, "V_vv": 0, "x0": 0 },
 *     "channel": { "P": 1, "N": [0.5, 0.5, 1, 1] },
 *     "scheme":  "full_state",          // or "noisy_state"
 *     "samples": 100000,
 *     "seed":    42,
 *     "baseline": { "restarts": 20, "max_iters": 20000, "tol": 1e-13 }
 *   }
 *
 * Every per-step field takes a scalar (broadcast over the horizon) or an array
 * of exactly `horizon` numbers. Only "horizon" and "channel" are required.
 */
struct ExperimentConfig
{
    Index horizon = 1;
    SystemParams<double> system;
    ChannelParams<double> channel;
    SchemeKind scheme = SchemeKind::FullState;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    std::optional<BaselineConfig> baseline;

    bool operator==(const ExperimentConfig& other) const;
};

/// Throws ConfigError with a field-level message.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
/// Constant sequences are written back as scalars.
std::string serialize_config(const ExperimentConfig& config);

std::string_view scheme_label(SchemeKind kind);

struct OutputRow
{
    Index t = 0;
    double mse_analytic = 0;
    std::optional<double> mse_empirical;
    std::optional<double> std_error;
    std::optional<double> power_used;
};

/// Rows for t = 1..T, then `#`-prefixed footer lines (key=value).
struct OutputRecord
{
    std::vector<OutputRow> rows;
    std::vector<std::pair<std::string, std::string>> footer;
    std::vector<std::string> warnings;

    /// Throws NumericalError if any emitted number is not finite.
    void check_finite() const;
};

/// CSV with header t,mse_analytic,mse_empirical,stderr,power_used; 12
/// significant digits; LF line endings; missing values left empty.
void write_csv(std::ostream& out, const OutputRecord& record);
std::string format_number(double value);

/// Horizon above which the dense baseline is refused.
inline constexpr Index baseline_horizon_cap = 50;

OutputRecord run_analytic(const ExperimentConfig& config);
/// Analytic plus Monte Carlo columns; requires samples >= 1.
OutputRecord run_simulate(const ExperimentConfig& config);
/// Analytic columns plus the brute-force optimum in the footer.
OutputRecord run_baseline(const ExperimentConfig& config);
/// Analytic, Monte Carlo (when samples >= 1) and brute-force baseline.
OutputRecord run_compare(const ExperimentConfig& config);

struct SweepResult
{
    std::string field;
    std::vector<double> values;
    std::vector<OutputRecord> records;
};

/// One analytic (and, with samples >= 1, Monte Carlo) record per value of
/// P, N or a, each broadcast over the horizon.
SweepResult run_sweep(const ExperimentConfig& config, std::string_view field, const std::vector<double>& values);
/// Summary table value,avg_mse_analytic,avg_mse_empirical,avg_stderr.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

/// Warnings about numerically risky regimes (unstable plant, variance above 1e12).
std::vector<std::string> stability_warnings(const SystemParams<double>& params);

} // namespace gcomm

#endif // GCOMM_EXPERIMENTS_HPP
