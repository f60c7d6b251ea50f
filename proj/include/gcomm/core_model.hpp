#ifndef GCOMM_CORE_MODEL_HPP
#define GCOMM_CORE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gcomm/errors.hpp"
#include "gcomm/random.hpp"

namespace gcomm {

using Index = Eigen::Index;

template<typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template<typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
/// Joint covariance of (w(t), v(t)).
template<typename Scalar>
using Cov2 = Eigen::Matrix<Scalar, 2, 2>;

/**
 * First-order plant with a noisy transmitter-side observation
 *
 *   x(t+1)   = a(t) x(t) + b(t) w(t),      x(0) = x0
 *   gamma(t) = c(t) x(t) + d(t) v(t)
 *
 * for t = 0..T-1, where (w(t), v(t)) is zero-mean Gaussian with covariance V(t)
 * and independent across t. All sequences are indexed by t and have length T.
 *
 * The observation gamma(T) lies one step past the horizon. It only feeds the
 * transmitter estimate of x(T), which no decoder estimate inside the horizon
 * depends on; its parameters repeat those of step T-1 (see observation_at()).
 */
template<typename Scalar>
struct SystemParams
{
    Vec<Scalar> a;
    Vec<Scalar> b;
    Vec<Scalar> c;
    Vec<Scalar> d;
    std::vector<Cov2<Scalar>> V;
    Scalar x0 = Scalar(0);

    Index horizon() const { return a.size(); }

    /// Constant parameters broadcast over T steps.
    static SystemParams constant(Index T,
                                 Scalar a,
                                 Scalar b,
                                 Scalar c = Scalar(1),
                                 Scalar d = Scalar(0),
                                 Scalar Vww = Scalar(1),
                                 Scalar Vwv = Scalar(0),
                                 Scalar Vvv = Scalar(0),
                                 Scalar x0 = Scalar(0))
    {
        SystemParams p;
        p.a = Vec<Scalar>::Constant(T, a);
        p.b = Vec<Scalar>::Constant(T, b);
        p.c = Vec<Scalar>::Constant(T, c);
        p.d = Vec<Scalar>::Constant(T, d);
        Cov2<Scalar> v;
        v << Vww, Vwv, Vwv, Vvv;
        p.V.assign(static_cast<std::size_t>(T), v);
        p.x0 = x0;
        return p;
    }

    const Cov2<Scalar>& cov(Index t) const { return V[static_cast<std::size_t>(t)]; }

    /// Observation parameters (c, d, V) at step t in 0..T; step T repeats T-1.
    Index observation_index(Index t) const { return std::min(t, horizon() - 1); }

    /// Throws ConfigError naming the offending field or step.
    void validate() const
    {
        const Index T = horizon();
        if (T < 1)
            throw ConfigError("system: horizon must be at least 1");
        if (b.size() != T || c.size() != T || d.size() != T || static_cast<Index>(V.size()) != T)
            throw ConfigError("system: a, b, c, d and V must all have length " + std::to_string(T));
        auto finite = [](const Vec<Scalar>& s) { return s.allFinite(); };
        if (!finite(a) || !finite(b) || !finite(c) || !finite(d) || !std::isfinite(static_cast<double>(x0)))
            throw ConfigError("system: parameters must be finite");
        for (Index t = 0; t < T; ++t) {
            const Cov2<Scalar>& v = cov(t);
            const std::string where = "system: V at step " + std::to_string(t);
            if (!v.allFinite())
                throw ConfigError(where + " is not finite");
            if (v(0, 1) != v(1, 0))
                throw ConfigError(where + " is not symmetric (V_wv != V_vw)");
            if (v(0, 0) < 0 || v(1, 1) < 0 || v(0, 0) * v(1, 1) - v(0, 1) * v(0, 1) < 0)
                throw ConfigError(where + " is not positive semidefinite");
        }
    }
};

/// Per-sample power budget and channel noise. P and N have length T; entry t-1
/// governs the channel use at time t in 1..T.
template<typename Scalar>
struct ChannelParams
{
    Vec<Scalar> P;
    Vec<Scalar> N;

    static ChannelParams constant(Index T, Scalar P, Scalar N)
    {
        return ChannelParams{ Vec<Scalar>::Constant(T, P), Vec<Scalar>::Constant(T, N) };
    }

    Index horizon() const { return P.size(); }
    Scalar power(Index t) const { return P(t - 1); }
    Scalar noise(Index t) const { return N(t - 1); }

    void validate(Index T) const
    {
        if (P.size() != T || N.size() != T)
            throw ConfigError("channel: P and N must have length " + std::to_string(T));
        for (Index i = 0; i < T; ++i) {
            if (!(P(i) > 0) || !std::isfinite(static_cast<double>(P(i))))
                throw ConfigError("channel: P at step " + std::to_string(i + 1) + " must be positive");
            if (!(N(i) > 0) || !std::isfinite(static_cast<double>(N(i))))
                throw ConfigError("channel: N at step " + std::to_string(i + 1) + " must be positive");
        }
    }
};

/**
 * One realisation of the whole chain. Index conventions:
 *   x      size T+1, x(t) for t = 0..T
 *   gamma  size T+1, gamma(t) for t = 0..T
 *   z      size T,   z(t) stored at t-1 for t = 1..T
 *   y      size T,   y(t) for t = 0..T-1, y(0) = 0
 *   xhat   size T,   xhat(t) stored at t-1 for t = 1..T
 * The offset between z and y is the one-step channel delay.
 */
template<typename Scalar>
struct Trajectory
{
    Vec<Scalar> x;
    Vec<Scalar> gamma;
    Vec<Scalar> z;
    Vec<Scalar> y;
    Vec<Scalar> xhat;
};

/// Plant noise for one trajectory: w(t), t = 0..T-1 and v(t), t = 0..T.
template<typename Scalar>
struct PlantNoise
{
    Vec<Scalar> w;
    Vec<Scalar> v;
};

/// Lower Cholesky factor of a 2x2 PSD matrix, with zero pivots handled explicitly.
template<typename Scalar>
Cov2<Scalar> cholesky2(const Cov2<Scalar>& v)
{
    using std::sqrt;
    Cov2<Scalar> l = Cov2<Scalar>::Zero();
    l(0, 0) = sqrt(std::max(v(0, 0), Scalar(0)));
    if (l(0, 0) > 0)
        l(1, 0) = v(1, 0) / l(0, 0);
    l(1, 1) = sqrt(std::max(v(1, 1) - l(1, 0) * l(1, 0), Scalar(0)));
    return l;
}

/// Maps standard normal pairs to (w(t), v(t)) with covariance V(t).
/// `process` needs T+1 entries, `measurement` needs T+1 entries.
template<typename Scalar>
PlantNoise<Scalar> correlate_noise(const SystemParams<Scalar>& params,
                                   const Vec<Scalar>& process,
                                   const Vec<Scalar>& measurement)
{
    const Index T = params.horizon();
    PlantNoise<Scalar> noise{ Vec<Scalar>(T), Vec<Scalar>(T + 1) };
    for (Index t = 0; t <= T; ++t) {
        const Cov2<Scalar> l = cholesky2(params.cov(params.observation_index(t)));
        if (t < T)
            noise.w(t) = l(0, 0) * process(t);
        noise.v(t) = l(1, 0) * process(t) + l(1, 1) * measurement(t);
    }
    return noise;
}

/// Runs the plant on given noise; fills x and gamma.
template<typename Scalar>
Trajectory<Scalar> propagate_plant(const SystemParams<Scalar>& params, const PlantNoise<Scalar>& noise)
{
    const Index T = params.horizon();
    if (noise.w.size() != T || noise.v.size() != T + 1)
        throw UsageError("propagate_plant: expected T process and T+1 measurement noise samples");
    Trajectory<Scalar> traj;
    traj.x.resize(T + 1);
    traj.gamma.resize(T + 1);
    traj.x(0) = params.x0;
    for (Index t = 0; t < T; ++t)
        traj.x(t + 1) = params.a(t) * traj.x(t) + params.b(t) * noise.w(t);
    for (Index t = 0; t <= T; ++t) {
        const Index o = params.observation_index(t);
        traj.gamma(t) = params.c(o) * traj.x(t) + params.d(o) * noise.v(t);
    }
    return traj;
}

/// Draws standard normals for one trajectory from the per-role streams.
template<typename Scalar>
PlantNoise<Scalar> draw_plant_noise(const SystemParams<Scalar>& params,
                                    NormalStream& process,
                                    NormalStream& measurement)
{
    const Index T = params.horizon();
    Vec<Scalar> e1(T + 1), e2(T + 1);
    for (Index t = 0; t <= T; ++t)
        e1(t) = static_cast<Scalar>(process());
    for (Index t = 0; t <= T; ++t)
        e2(t) = static_cast<Scalar>(measurement());
    return correlate_noise(params, e1, e2);
}

/// Simulates x and gamma with (w, v) drawn from the seeded process and
/// measurement streams.
template<typename Scalar>
Trajectory<Scalar> simulate_plant(const SystemParams<Scalar>& params, RngSeed seed)
{
    params.validate();
    NormalStream process(seed, StreamRole::Process);
    NormalStream measurement(seed, StreamRole::Measurement);
    return propagate_plant(params, draw_plant_noise(params, process, measurement));
}

/// Variance of x(t) for t = 0..T. The known initial state contributes nothing.
template<typename Scalar>
Vec<Scalar> state_variance(const SystemParams<Scalar>& params)
{
    const Index T = params.horizon();
    Vec<Scalar> var(T + 1);
    var(0) = Scalar(0);
    for (Index t = 0; t < T; ++t)
        var(t + 1) = params.a(t) * params.a(t) * var(t) + params.b(t) * params.b(t) * params.cov(t)(0, 0);
    return var;
}

/// Deterministic mean of x(t), t = 0..T.
template<typename Scalar>
Vec<Scalar> state_mean(const SystemParams<Scalar>& params)
{
    const Index T = params.horizon();
    Vec<Scalar> mean(T + 1);
    mean(0) = params.x0;
    for (Index t = 0; t < T; ++t)
        mean(t + 1) = params.a(t) * mean(t);
    return mean;
}

} // namespace gcomm

#endif // GCOMM_CORE_MODEL_HPP
