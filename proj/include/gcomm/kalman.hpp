#ifndef GCOMM_KALMAN_HPP
#define GCOMM_KALMAN_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "gcomm/core_model.hpp"

namespace gcomm {

/**
 * Transmitter-side Kalman filter for x(t) given gamma(0..t).
 *
 * With the innovation e(t) = gamma(t) - c(t) xpred(t), xpred(t) = E{x(t) | gamma^{t-1}}:
 *
 *   xbreve(t)   = xpred(t) + L(t) e(t)
 *   xpred(t+1)  = a(t) xbreve(t) + cross(t) e(t)
 *
 * cross(t) = b(t) V_wv(t) d(t) / S(t) is the part of w(t) visible in the
 * innovation; it vanishes for uncorrelated (w, v). Index ranges: L, Vxi, S,
 * sigma_breve_sq and filtered_error cover t = 0..T; cross, pred_gain and beta
 * cover t = 0..T-1.
 */
template<typename Scalar>
struct GainSchedule
{
    Vec<Scalar> L;               ///< filter gain
    Vec<Scalar> Vxi;             ///< prediction error variance E|x(t) - xpred(t)|^2
    Vec<Scalar> S;               ///< innovation variance c^2 Vxi + d^2 V_vv
    Vec<Scalar> cross;           ///< innovation feed-through into the next prediction
    Vec<Scalar> pred_gain;       ///< a L + cross
    Vec<Scalar> beta;            ///< innovation scale of the xbreve process, beta(t)^2 = L(t+1)^2 S(t+1)
    Vec<Scalar> sigma_breve_sq;  ///< E|xbreve(t) - mean|^2
    Vec<Scalar> filtered_error;  ///< E|x(t) - xbreve(t)|^2 = Vxi (1 - L c)
};

template<typename Scalar>
GainSchedule<Scalar> transmitter_gain_schedule(const SystemParams<Scalar>& params)
{
    params.validate();
    const Index T = params.horizon();
    GainSchedule<Scalar> g;
    g.L.resize(T + 1);
    g.Vxi.resize(T + 1);
    g.S.resize(T + 1);
    g.cross.resize(T);
    g.pred_gain.resize(T);
    g.beta.resize(T);
    g.sigma_breve_sq.resize(T + 1);
    g.filtered_error.resize(T + 1);

    g.Vxi(0) = Scalar(0);
    for (Index t = 0; t <= T; ++t) {
        const Index o = params.observation_index(t);
        const Scalar c = params.c(o);
        const Scalar d = params.d(o);
        const Cov2<Scalar>& V = params.cov(o);
        g.S(t) = c * c * g.Vxi(t) + d * d * V(1, 1);
        // deterministic measurement: every gain is MSE-equivalent, take 0
        g.L(t) = g.S(t) > 0 ? g.Vxi(t) * c / g.S(t) : Scalar(0);
        g.filtered_error(t) = std::max(Scalar(0), g.Vxi(t) * (Scalar(1) - g.L(t) * c));
        if (t == T)
            break;

        const Scalar a = params.a(t);
        const Scalar b = params.b(t);
        g.cross(t) = g.S(t) > 0 ? b * V(0, 1) * d / g.S(t) : Scalar(0);
        g.pred_gain(t) = a * g.L(t) + g.cross(t);
        const Scalar k = g.pred_gain(t);
        const Scalar u0 = b;
        const Scalar u1 = -k * d;
        const Scalar quad = u0 * u0 * V(0, 0) + Scalar(2) * u0 * u1 * V(0, 1) + u1 * u1 * V(1, 1);
        const Scalar r = a - k * c;
        g.Vxi(t + 1) = std::max(Scalar(0), r * r * g.Vxi(t) + quad);
    }

    using std::sqrt;
    g.sigma_breve_sq(0) = Scalar(0);
    for (Index t = 0; t < T; ++t) {
        const Scalar a = params.a(t);
        const Scalar m = g.cross(t);
        g.beta(t) = sqrt(g.L(t + 1) * g.L(t + 1) * g.S(t + 1));
        g.sigma_breve_sq(t + 1) = a * a * g.sigma_breve_sq(t) + (m * m + Scalar(2) * a * m * g.L(t)) * g.S(t)
                                  + g.beta(t) * g.beta(t);
    }
    return g;
}

/// xbreve(t) = E{x(t) | gamma^t}. Accepts gamma of length T or T+1 and returns
/// the same length.
template<typename Scalar>
Vec<Scalar> transmitter_filter(const SystemParams<Scalar>& params,
                               const GainSchedule<Scalar>& schedule,
                               const Vec<Scalar>& gamma)
{
    const Index T = params.horizon();
    if (schedule.L.size() != T + 1)
        throw UsageError("transmitter_filter: schedule horizon does not match the system");
    if (gamma.size() != T && gamma.size() != T + 1)
        throw UsageError("transmitter_filter: gamma must have T or T+1 samples");
    Vec<Scalar> xb(gamma.size());
    Scalar pred = params.x0;
    for (Index t = 0; t < gamma.size(); ++t) {
        const Scalar e = gamma(t) - params.c(params.observation_index(t)) * pred;
        xb(t) = pred + schedule.L(t) * e;
        if (t < T)
            pred = params.a(t) * xb(t) + schedule.cross(t) * e;
    }
    return xb;
}

/**
 * The signal the encoder scales and transmits, in innovations form:
 *
 *   u(t+1) = a(t) u(t) + cross(t) e(t) + load(t+1) e(t+1),   e(t) ~ N(0, innov_var(t))
 *
 * with u(0) - mean(0) = load(0) e(0). For the full-state scheme u = x,
 * e(t+1) = b(t) w(t), load = 1 and cross = 0. For the noisy scheme u = xbreve
 * and e is the transmitter's innovation. The decoder's prediction of x(t+1)
 * is a(t) E{u(t)|y^t} + cross(t) E{e(t)|y^t}.
 */
template<typename Scalar>
struct SourceModel
{
    Vec<Scalar> a;          ///< t = 0..T-1
    Vec<Scalar> cross;      ///< t = 0..T-1
    Vec<Scalar> load;       ///< t = 0..T
    Vec<Scalar> innov_var;  ///< t = 0..T
    Vec<Scalar> variance;   ///< Var u(t), t = 0..T
    Vec<Scalar> mean;       ///< E u(t) = E x(t), t = 0..T
    Vec<Scalar> residual;   ///< E|x(t) - u(t)|^2, t = 0..T (zero for full state)

    Index horizon() const { return a.size(); }
};

template<typename Scalar>
SourceModel<Scalar> full_state_source(const SystemParams<Scalar>& params)
{
    const Index T = params.horizon();
    SourceModel<Scalar> s;
    s.a = params.a;
    s.cross = Vec<Scalar>::Zero(T);
    s.load = Vec<Scalar>::Ones(T + 1);
    s.innov_var.resize(T + 1);
    s.innov_var(0) = Scalar(0);
    for (Index t = 0; t < T; ++t)
        s.innov_var(t + 1) = params.b(t) * params.b(t) * params.cov(t)(0, 0);
    s.variance = state_variance(params);
    s.mean = state_mean(params);
    s.residual = Vec<Scalar>::Zero(T + 1);
    return s;
}

template<typename Scalar>
SourceModel<Scalar> noisy_state_source(const SystemParams<Scalar>& params, const GainSchedule<Scalar>& g)
{
    SourceModel<Scalar> s;
    s.a = params.a;
    s.cross = g.cross;
    s.load = g.L;
    s.innov_var = g.S;
    s.variance = g.sigma_breve_sq;
    s.mean = state_mean(params);
    s.residual = g.filtered_error;
    return s;
}

/**
 * Decoder schedule for x̂(t) = E{x(t) | y^{t-1}}, y(t) = k_t (u(t) - mean) + n(t).
 *
 * The recursion tracks the pair (u(t), e(t)); when cross = 0 the second
 * component decouples and R, Q reduce to the scalar Riccati pair
 *   Q(t) = R(t) N(t) / (k_t^2 R(t) + N(t)),   R(t+1) = a(t)^2 Q(t) + load^2 innov_var.
 * Vectors k, R, Q and mse are indexed t = 1..T at position t-1.
 */
template<typename Scalar>
struct DecoderSchedule
{
    Vec<Scalar> k;    ///< encoder scale sqrt(P(t) / Var u(t)), 0 for a silent source
    Vec<Scalar> R;    ///< E|u(t) - E{u(t)|y^{t-1}}|^2
    Vec<Scalar> Q;    ///< E|u(t) - E{u(t)|y^t}|^2
    Vec<Scalar> mse;  ///< E|x(t) - x̂(t)|^2 = R(t) + residual(t)
    std::vector<Eigen::Matrix<Scalar, 2, 1>> gain;  ///< update gain at t = 1..T (position t-1)
    std::vector<Cov2<Scalar>> posterior;            ///< covariance after y(t), t = 0..T
    Vec<Scalar> a;
    Vec<Scalar> cross;
    Vec<Scalar> mean;

    Index horizon() const { return k.size(); }
};

template<typename Scalar>
DecoderSchedule<Scalar> decoder_schedule(const SourceModel<Scalar>& source, const ChannelParams<Scalar>& channel)
{
    const Index T = source.horizon();
    if (channel.horizon() != T || source.variance.size() != T + 1 || source.innov_var.size() != T + 1)
        throw UsageError("decoder_schedule: horizon mismatch between source and channel");
    if ((source.variance.array() < 0).any() || (source.innov_var.array() < 0).any())
        throw UsageError("decoder_schedule: variances must be non-negative");

    using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
    using std::sqrt;
    DecoderSchedule<Scalar> ds;
    ds.k.resize(T);
    ds.R.resize(T);
    ds.Q.resize(T);
    ds.mse.resize(T);
    ds.gain.resize(static_cast<std::size_t>(T));
    ds.posterior.resize(static_cast<std::size_t>(T + 1));
    ds.a = source.a;
    ds.cross = source.cross;
    ds.mean = source.mean;

    const Vec2 b0(source.load(0), Scalar(1));
    ds.posterior[0] = source.innov_var(0) * b0 * b0.transpose();  // y(0) = 0 carries nothing

    for (Index t = 1; t <= T; ++t) {
        Cov2<Scalar> A;
        A << source.a(t - 1), source.cross(t - 1), Scalar(0), Scalar(0);
        const Vec2 b(source.load(t), Scalar(1));
        const Cov2<Scalar> prior = A * ds.posterior[static_cast<std::size_t>(t - 1)] * A.transpose()
                                   + source.innov_var(t) * b * b.transpose();

        const Scalar var = source.variance(t);
        const Scalar k = var > 0 ? sqrt(channel.power(t) / var) : Scalar(0);
        const Scalar R = prior(0, 0);
        const Scalar N = channel.noise(t);
        const Scalar s = k * k * R + N;

        Cov2<Scalar> post = prior - (k * k / s) * prior.col(0) * prior.row(0);
        post(0, 0) = R * N / s;
        post(1, 0) = post(0, 1);

        ds.k(t - 1) = k;
        ds.R(t - 1) = R;
        ds.Q(t - 1) = post(0, 0);
        ds.mse(t - 1) = R + source.residual(t);
        ds.gain[static_cast<std::size_t>(t - 1)] = prior.col(0) * (k / s);
        ds.posterior[static_cast<std::size_t>(t)] = post;
    }
    return ds;
}

/// Scalar form: the transmitted source is Markov with innovation variance
/// source_noise_sq(t) entering at t+1 (b^2 V_ww for the full-state scheme,
/// beta^2 for the noisy one). sigma_sq and the mean are indexed t = 0..T.
template<typename Scalar>
DecoderSchedule<Scalar> decoder_schedule(const Vec<Scalar>& sigma_sq,
                                         const ChannelParams<Scalar>& channel,
                                         const SystemParams<Scalar>& params,
                                         const Vec<Scalar>& source_noise_sq)
{
    const Index T = params.horizon();
    if (sigma_sq.size() != T + 1 || source_noise_sq.size() != T)
        throw UsageError("decoder_schedule: expected T+1 variances and T innovation variances");
    if ((sigma_sq.array() < 0).any() || (source_noise_sq.array() < 0).any())
        throw UsageError("decoder_schedule: variances must be non-negative");
    SourceModel<Scalar> s;
    s.a = params.a;
    s.cross = Vec<Scalar>::Zero(T);
    s.load = Vec<Scalar>::Ones(T + 1);
    s.innov_var.resize(T + 1);
    s.innov_var(0) = Scalar(0);
    s.innov_var.tail(T) = source_noise_sq;
    s.variance = sigma_sq;
    s.mean = state_mean(params);
    s.residual = Vec<Scalar>::Zero(T + 1);
    return decoder_schedule(s, channel);
}

/// x̂(t) for t = 1..T from y(0..T-1). x̂(t) uses y(0..t-1) only.
template<typename Scalar>
Vec<Scalar> decoder_filter(const DecoderSchedule<Scalar>& ds, const Vec<Scalar>& y)
{
    using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
    const Index T = ds.horizon();
    if (y.size() != T)
        throw UsageError("decoder_filter: y must have T samples (t = 0..T-1)");
    Vec<Scalar> xhat(T);
    Vec2 post = Vec2::Zero();
    for (Index t = 1; t <= T; ++t) {
        Vec2 prior(ds.a(t - 1) * post(0) + ds.cross(t - 1) * post(1), Scalar(0));
        xhat(t - 1) = ds.mean(t) + prior(0);
        if (t < T)
            post = prior + ds.gain[static_cast<std::size_t>(t - 1)] * (y(t) - ds.k(t - 1) * prior(0));
    }
    return xhat;
}

} // namespace gcomm

#endif // GCOMM_KALMAN_HPP
