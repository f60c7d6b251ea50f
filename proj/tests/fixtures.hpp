#ifndef GCOMM_TESTS_FIXTURES_HPP
#define GCOMM_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdint>

#include "gcomm/core_model.hpp"
#include "gcomm/random.hpp"

namespace fixtures {

using gcomm::Index;
using gcomm::NormalStream;
using gcomm::RngSeed;
using gcomm::StreamRole;
using gcomm::Vec;
using Params = gcomm::SystemParams<double>;
using Channel = gcomm::ChannelParams<double>;

inline Vec<double> zeros(Index n) { return Vec<double>::Zero(n); }
inline Vec<double> ones(Index n) { return Vec<double>::Ones(n); }

/// Time-varying configuration with correlated noise and a nonzero initial state.
inline Params varied(Index T, std::uint64_t seed)
{
    NormalStream rng(RngSeed{ seed }, StreamRole::Baseline);
    Params p = Params::constant(T, 0.0, 0.0);
    for (Index t = 0; t < T; ++t) {
        p.a(t) = 0.9 + 0.3 * rng();
        p.b(t) = 1.0 + 0.3 * rng();
        p.c(t) = 1.0 + 0.5 * rng();
        p.d(t) = 0.8 + 0.3 * rng();
        const double vww = 1.0 + 0.2 * rng();
        const double vvv = 0.7 + 0.2 * rng();
        const double rho = 0.5 * std::tanh(rng());
        p.V[static_cast<std::size_t>(t)] << vww, rho * std::sqrt(vww * vvv), rho * std::sqrt(vww * vvv), vvv;
    }
    p.x0 = 0.5 * rng();
    return p;
}

inline Channel varied_channel(Index T, std::uint64_t seed)
{
    NormalStream rng(RngSeed{ seed }, StreamRole::Channel);
    Channel ch = Channel::constant(T, 1.0, 1.0);
    for (Index t = 0; t < T; ++t) {
        ch.P(t) = std::exp(0.5 * rng());
        ch.N(t) = std::exp(0.5 * rng());
    }
    return ch;
}

struct Draw
{
    Vec<double> e1, e2, c;
};

inline Draw draw(Index T, std::uint64_t seed)
{
    NormalStream p(RngSeed{ seed }, StreamRole::Process);
    NormalStream m(RngSeed{ seed }, StreamRole::Measurement);
    NormalStream c(RngSeed{ seed }, StreamRole::Channel);
    Draw d{ Vec<double>(T + 1), Vec<double>(T + 1), Vec<double>(T) };
    for (Index t = 0; t <= T; ++t)
        d.e1(t) = p();
    for (Index t = 0; t <= T; ++t)
        d.e2(t) = m();
    for (Index t = 0; t < T; ++t)
        d.c(t) = c();
    return d;
}

} // namespace fixtures

#endif // GCOMM_TESTS_FIXTURES_HPP
