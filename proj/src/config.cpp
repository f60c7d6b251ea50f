#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gcomm/errors.hpp"
#include "gcomm/experiments.hpp"

namespace gcomm {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& object, const std::string& where, const std::set<std::string>& known)
{
    for (const auto& [key, value] : object.items())
        if (!known.count(key))
            throw ConfigError(where + ": unknown field '" + key + "'");
}

double number(const json& value, const std::string& field)
{
    if (!value.is_number())
        throw ConfigError(field + ": expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v))
        throw ConfigError(field + ": must be finite");
    return v;
}

/// Scalar or array of exactly T numbers.
Vec<double> sequence(const json& value, const std::string& field, Index T)
{
    if (value.is_array()) {
        if (static_cast<Index>(value.size()) != T)
            throw ConfigError(field + ": array has length " + std::to_string(value.size()) + ", expected horizon "
                              + std::to_string(T));
        Vec<double> out(T);
        for (Index i = 0; i < T; ++i)
            out(i) = number(value[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
        return out;
    }
    return Vec<double>::Constant(T, number(value, field));
}

Vec<double> sequence_or(const json& object, const char* key, const std::string& where, Index T, double fallback)
{
    if (!object.contains(key))
        return Vec<double>::Constant(T, fallback);
    return sequence(object.at(key), where + "." + key, T);
}

template<typename Int>
Int integer(const json& value, const std::string& field, Int lo)
{
    if (!value.is_number_integer())
        throw ConfigError(field + ": expected an integer");
    if (value.is_number_unsigned()) {
        const auto u = value.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
            throw ConfigError(field + ": out of range");
        return static_cast<Int>(u);
    }
    const auto v = value.get<std::int64_t>();
    if (v < static_cast<std::int64_t>(lo))
        throw ConfigError(field + ": must be at least " + std::to_string(lo));
    return static_cast<Int>(v);
}

json sequence_json(const Vec<double>& v)
{
    if (v.size() > 0 && (v.array() == v(0)).all())
        return v(0);
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

} // namespace

std::string_view scheme_label(SchemeKind kind)
{
    return kind == SchemeKind::FullState ? "full_state" : "noisy_state";
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const
{
    auto same_system = [](const SystemParams<double>& p, const SystemParams<double>& q) {
        return p.a == q.a && p.b == q.b && p.c == q.c && p.d == q.d && p.V == q.V && p.x0 == q.x0;
    };
    return horizon == other.horizon && same_system(system, other.system) && channel.P == other.channel.P
           && channel.N == other.channel.N && scheme == other.scheme && samples == other.samples
           && seed == other.seed && baseline == other.baseline;
}

ExperimentConfig parse_config(std::string_view json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config: top level must be an object");
    reject_unknown(root, "config", { "horizon", "system", "channel", "scheme", "samples", "seed", "baseline" });

    ExperimentConfig cfg;
    if (!root.contains("horizon"))
        throw ConfigError("horizon: required");
    cfg.horizon = integer<Index>(root.at("horizon"), "horizon", 1);
    if (cfg.horizon < 1)
        throw ConfigError("horizon: must be at least 1");
    const Index T = cfg.horizon;

    const json system = root.value("system", json::object());
    if (!system.is_object())
        throw ConfigError("system: expected an object");
    reject_unknown(system, "system", { "a", "b", "c", "d", "V_ww", "V_wv", "V_vw", "V_vv", "x0" });
    cfg.system.a = sequence_or(system, "a", "system", T, 1.0);
    cfg.system.b = sequence_or(system, "b", "system", T, 1.0);
    cfg.system.c = sequence_or(system, "c", "system", T, 1.0);
    cfg.system.d = sequence_or(system, "d", "system", T, 0.0);
    const Vec<double> Vww = sequence_or(system, "V_ww", "system", T, 1.0);
    const Vec<double> Vwv = sequence_or(system, "V_wv", "system", T, 0.0);
    const Vec<double> Vvw = system.contains("V_vw") ? sequence(system.at("V_vw"), "system.V_vw", T) : Vwv;
    const Vec<double> Vvv = sequence_or(system, "V_vv", "system", T, 0.0);
    cfg.system.V.resize(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t)
        cfg.system.V[static_cast<std::size_t>(t)] << Vww(t), Vwv(t), Vvw(t), Vvv(t);
    cfg.system.x0 = system.contains("x0") ? number(system.at("x0"), "system.x0") : 0.0;
    cfg.system.validate();

    if (!root.contains("channel"))
        throw ConfigError("channel: required");
    const json& channel = root.at("channel");
    if (!channel.is_object())
        throw ConfigError("channel: expected an object");
    reject_unknown(channel, "channel", { "P", "N" });
    if (!channel.contains("P") || !channel.contains("N"))
        throw ConfigError("channel: P and N are required");
    cfg.channel.P = sequence(channel.at("P"), "channel.P", T);
    cfg.channel.N = sequence(channel.at("N"), "channel.N", T);
    cfg.channel.validate(T);

    if (root.contains("scheme")) {
        const json& s = root.at("scheme");
        if (s == "full_state")
            cfg.scheme = SchemeKind::FullState;
        else if (s == "noisy_state")
            cfg.scheme = SchemeKind::NoisyState;
        else
            throw ConfigError("scheme: expected \"full_state\" or \"noisy_state\"");
    }
    if (root.contains("samples"))
        cfg.samples = integer<std::int64_t>(root.at("samples"), "samples", 0);
    if (root.contains("seed"))
        cfg.seed = integer<std::uint64_t>(root.at("seed"), "seed", 0);

    if (root.contains("baseline")) {
        const json& b = root.at("baseline");
        if (!b.is_object())
            throw ConfigError("baseline: expected an object");
        reject_unknown(b, "baseline", { "restarts", "max_iters", "tol" });
        BaselineConfig bc;
        if (b.contains("restarts"))
            bc.restarts = integer<int>(b.at("restarts"), "baseline.restarts", 1);
        if (b.contains("max_iters"))
            bc.max_iters = integer<int>(b.at("max_iters"), "baseline.max_iters", 1);
        if (b.contains("tol")) {
            bc.tol = number(b.at("tol"), "baseline.tol");
            if (!(bc.tol > 0))
                throw ConfigError("baseline.tol: must be positive");
        }
        cfg.baseline = bc;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& config)
{
    const Index T = config.horizon;
    Vec<double> Vww(T), Vwv(T), Vvw(T), Vvv(T);
    for (Index t = 0; t < T; ++t) {
        const Cov2<double>& v = config.system.cov(t);
        Vww(t) = v(0, 0);
        Vwv(t) = v(0, 1);
        Vvw(t) = v(1, 0);
        Vvv(t) = v(1, 1);
    }
    json system = { { "a", sequence_json(config.system.a) },
                    { "b", sequence_json(config.system.b) },
                    { "c", sequence_json(config.system.c) },
                    { "d", sequence_json(config.system.d) },
                    { "V_ww", sequence_json(Vww) },
                    { "V_wv", sequence_json(Vwv) },
                    { "V_vv", sequence_json(Vvv) },
                    { "x0", config.system.x0 } };
    if (Vvw != Vwv)
        system["V_vw"] = sequence_json(Vvw);
    json root = { { "horizon", T },
                  { "system", system },
                  { "channel", { { "P", sequence_json(config.channel.P) }, { "N", sequence_json(config.channel.N) } } },
                  { "scheme", std::string(scheme_label(config.scheme)) },
                  { "samples", config.samples },
                  { "seed", config.seed } };
    if (config.baseline)
        root["baseline"] = { { "restarts", config.baseline->restarts },
                             { "max_iters", config.baseline->max_iters },
                             { "tol", config.baseline->tol } };
    return root.dump(2) + "\n";
}

} // namespace gcomm
