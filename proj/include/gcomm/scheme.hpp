#ifndef GCOMM_SCHEME_HPP
#define GCOMM_SCHEME_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gcomm/core_model.hpp"
#include "gcomm/kalman.hpp"
#include "gcomm/random.hpp"

namespace gcomm {

enum class SchemeKind
{
    FullState,   ///< transmitter observes x(t)
    NoisyState   ///< transmitter observes gamma(t) and sends its estimate of x(t)
};

/// Per-step results; every vector is indexed t = 1..T at position t-1.
/// Empirical fields are empty for purely analytic runs.
template<typename Scalar>
struct RunResult
{
    Vec<Scalar> mse_analytic;
    Vec<Scalar> mse_empirical;
    Vec<Scalar> std_error;
    Scalar avg_mse_analytic = Scalar(0);
    Scalar avg_mse_empirical = Scalar(0);
    Scalar avg_std_error = Scalar(0);
    Vec<Scalar> power_used;
    Vec<Scalar> power_std_error;
    Index samples = 0;

    // Monte Carlo diagnostics
    Vec<Scalar> source_mse;            ///< E|u(t) - x̂(t)|^2 (u = xbreve for the noisy scheme)
    Vec<Scalar> source_std_error;
    Vec<Scalar> transmitter_mse;       ///< E|x(t) - u(t)|^2
    Vec<Scalar> transmitter_std_error;
    Vec<Scalar> cross_term;            ///< E{(x - u)(u - x̂)}
    Vec<Scalar> cross_std_error;
    Vec<Scalar> orthogonality;         ///< sample correlation of x̂(t) and x(t) - x̂(t)
};

/// Encoder scale sqrt(P(t) / var(t)) for t = 1..T (position t-1).
template<typename Scalar>
Vec<Scalar> encoder_scale(const Vec<Scalar>& variance, const ChannelParams<Scalar>& channel)
{
    using std::sqrt;
    const Index T = channel.horizon();
    Vec<Scalar> k(T);
    for (Index t = 1; t <= T; ++t)
        k(t - 1) = variance(t) > 0 ? sqrt(channel.power(t) / variance(t)) : Scalar(0);
    return k;
}

/// z(t) = sqrt(P(t)) / sigma_t (x(t) - E x(t)), t = 1..T. Memoryless: z(t)
/// reads x(t) only. x holds t = 0..T.
template<typename Scalar>
Vec<Scalar> encode_full_state(const SystemParams<Scalar>& params,
                              const ChannelParams<Scalar>& channel,
                              const Vec<Scalar>& x)
{
    const Index T = params.horizon();
    if (x.size() != T + 1)
        throw UsageError("encode_full_state: x must have T+1 samples");
    const Vec<Scalar> k = encoder_scale(state_variance(params), channel);
    const Vec<Scalar> mean = state_mean(params);
    return k.cwiseProduct(x.tail(T) - mean.tail(T));
}

/// Returns (z, xbreve); z(t) = sqrt(P(t)) / sigma_t (xbreve(t) - E x(t)) with
/// sigma_t^2 = Var xbreve(t). gamma holds t = 0..T.
template<typename Scalar>
std::pair<Vec<Scalar>, Vec<Scalar>> encode_noisy_state(const SystemParams<Scalar>& params,
                                                       const ChannelParams<Scalar>& channel,
                                                       const Vec<Scalar>& gamma)
{
    const Index T = params.horizon();
    if (gamma.size() != T + 1)
        throw UsageError("encode_noisy_state: gamma must have T+1 samples");
    const GainSchedule<Scalar> g = transmitter_gain_schedule(params);
    Vec<Scalar> xb = transmitter_filter(params, g, gamma);
    const Vec<Scalar> k = encoder_scale(g.sigma_breve_sq, channel);
    const Vec<Scalar> mean = state_mean(params);
    Vec<Scalar> z = k.cwiseProduct(xb.tail(T) - mean.tail(T));
    return { std::move(z), std::move(xb) };
}

/// Source model and decoder schedule of a scheme.
template<typename Scalar>
struct SchemePlan
{
    SchemeKind kind = SchemeKind::FullState;
    SourceModel<Scalar> source;
    DecoderSchedule<Scalar> decoder;
    GainSchedule<Scalar> gains;  ///< populated for NoisyState only
};

template<typename Scalar>
SchemePlan<Scalar> plan_scheme(SchemeKind kind, const SystemParams<Scalar>& params, const ChannelParams<Scalar>& channel)
{
    params.validate();
    channel.validate(params.horizon());
    SchemePlan<Scalar> plan;
    plan.kind = kind;
    if (kind == SchemeKind::FullState) {
        plan.source = full_state_source(params);
    } else {
        plan.gains = transmitter_gain_schedule(params);
        plan.source = noisy_state_source(params, plan.gains);
    }
    plan.decoder = decoder_schedule(plan.source, channel);
    return plan;
}

/**
 * Exact MSE of the scheme. The error splits into the decoder's error on the
 * transmitted source and the transmitter's own filtering error,
 * E|x - x̂|^2 = E|u - x̂|^2 + E|x - u|^2, which are orthogonal.
 */
template<typename Scalar>
RunResult<Scalar> analytic_mse(SchemeKind kind, const SystemParams<Scalar>& params, const ChannelParams<Scalar>& channel)
{
    const SchemePlan<Scalar> plan = plan_scheme(kind, params, channel);
    const Index T = params.horizon();
    RunResult<Scalar> r;
    r.mse_analytic = plan.decoder.mse;
    r.avg_mse_analytic = r.mse_analytic.mean();
    r.power_used.resize(T);
    for (Index t = 1; t <= T; ++t)
        r.power_used(t - 1) = plan.source.variance(t) > 0 ? channel.power(t) : Scalar(0);
    return r;
}

namespace detail {

/// Streaming mean / second central moment, mergeable in a fixed order.
template<typename Scalar>
struct Moments
{
    double count = 0;
    Scalar mean = Scalar(0);
    Scalar m2 = Scalar(0);

    void add(Scalar v)
    {
        count += 1;
        const Scalar delta = v - mean;
        mean += delta / static_cast<Scalar>(count);
        m2 += delta * (v - mean);
    }

    void merge(const Moments& o)
    {
        if (o.count == 0)
            return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = count + o.count;
        const Scalar delta = o.mean - mean;
        mean += delta * static_cast<Scalar>(o.count / n);
        m2 += o.m2 + delta * delta * static_cast<Scalar>(count * o.count / n);
        count = n;
    }

    Scalar variance() const { return count > 1 ? m2 / static_cast<Scalar>(count - 1) : Scalar(0); }
    Scalar std_error() const
    {
        using std::sqrt;
        return count > 0 ? sqrt(variance() / static_cast<Scalar>(count)) : Scalar(0);
    }
};

/// Streaming co-moments of a pair, for the sample correlation.
template<typename Scalar>
struct CoMoments
{
    double count = 0;
    Scalar mx = Scalar(0), my = Scalar(0);
    Scalar cxx = Scalar(0), cyy = Scalar(0), cxy = Scalar(0);

    void add(Scalar x, Scalar y)
    {
        count += 1;
        const Scalar dx = x - mx;
        mx += dx / static_cast<Scalar>(count);
        const Scalar dy = y - my;
        my += dy / static_cast<Scalar>(count);
        cxx += dx * (x - mx);
        cyy += dy * (y - my);
        cxy += dx * (y - my);
    }

    void merge(const CoMoments& o)
    {
        if (o.count == 0)
            return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = count + o.count;
        const Scalar dx = o.mx - mx;
        const Scalar dy = o.my - my;
        const Scalar f = static_cast<Scalar>(count * o.count / n);
        cxx += o.cxx + dx * dx * f;
        cyy += o.cyy + dy * dy * f;
        cxy += o.cxy + dx * dy * f;
        mx += dx * static_cast<Scalar>(o.count / n);
        my += dy * static_cast<Scalar>(o.count / n);
        count = n;
    }

    /// Zero when either variable is constant.
    Scalar correlation() const
    {
        using std::sqrt;
        if (cxx <= 0 || cyy <= 0)
            return Scalar(0);
        return cxy / sqrt(cxx * cyy);
    }
};

template<typename Scalar>
struct StepAccumulator
{
    Moments<Scalar> sq_error, power, source_error, transmitter_error, cross;
    CoMoments<Scalar> orth;

    void merge(const StepAccumulator& o)
    {
        sq_error.merge(o.sq_error);
        power.merge(o.power);
        source_error.merge(o.source_error);
        transmitter_error.merge(o.transmitter_error);
        cross.merge(o.cross);
        orth.merge(o.orth);
    }
};

} // namespace detail

/// Samples per independently seeded block of the Monte Carlo run.
inline constexpr Index monte_carlo_block = 1024;

/// One end-to-end realisation from given plant and channel noise.
template<typename Scalar>
Trajectory<Scalar> run_pipeline(const SchemePlan<Scalar>& plan,
                                const SystemParams<Scalar>& params,
                                const PlantNoise<Scalar>& plant_noise,
                                const Vec<Scalar>& channel_noise,
                                Vec<Scalar>* source_out = nullptr)
{
    const Index T = params.horizon();
    Trajectory<Scalar> traj = propagate_plant(params, plant_noise);
    Vec<Scalar> source = plan.kind == SchemeKind::FullState
                             ? traj.x
                             : transmitter_filter(params, plan.gains, traj.gamma);
    traj.z = plan.decoder.k.cwiseProduct(source.tail(T) - plan.source.mean.tail(T));
    traj.y.resize(T);
    traj.y(0) = Scalar(0);
    for (Index t = 1; t < T; ++t)
        traj.y(t) = traj.z(t - 1) + channel_noise(t - 1);
    traj.xhat = decoder_filter(plan.decoder, traj.y);
    if (source_out)
        *source_out = std::move(source);
    return traj;
}

/**
 * Monte Carlo estimate of the per-step MSE and transmit power. Samples are cut
 * into blocks of monte_carlo_block; block j draws from streams seeded with
 * block index j, and block results are merged in block order, so the output
 * does not depend on the thread count.
 */
template<typename Scalar>
RunResult<Scalar> monte_carlo_mse(SchemeKind kind,
                                  const SystemParams<Scalar>& params,
                                  const ChannelParams<Scalar>& channel,
                                  Index samples,
                                  RngSeed seed,
                                  unsigned threads = 0)
{
    if (samples < 1)
        throw UsageError("monte_carlo_mse: samples must be at least 1");
    const SchemePlan<Scalar> plan = plan_scheme(kind, params, channel);
    const Index T = params.horizon();
    using Acc = std::vector<detail::StepAccumulator<Scalar>>;
    struct BlockAcc
    {
        Acc steps;
        detail::Moments<Scalar> average;
    };

    const Index blocks = (samples + monte_carlo_block - 1) / monte_carlo_block;
    std::vector<BlockAcc> partial(static_cast<std::size_t>(blocks),
                                  BlockAcc{ Acc(static_cast<std::size_t>(T)), {} });

    auto run_block = [&](Index block) {
        Acc& acc = partial[static_cast<std::size_t>(block)].steps;
        auto& average = partial[static_cast<std::size_t>(block)].average;
        NormalStream process(seed, StreamRole::Process, static_cast<std::uint64_t>(block));
        NormalStream measurement(seed, StreamRole::Measurement, static_cast<std::uint64_t>(block));
        NormalStream chan(seed, StreamRole::Channel, static_cast<std::uint64_t>(block));
        const Index begin = block * monte_carlo_block;
        const Index end = std::min(samples, begin + monte_carlo_block);
        Vec<Scalar> n(T);
        Vec<Scalar> source;
        for (Index s = begin; s < end; ++s) {
            const PlantNoise<Scalar> noise = draw_plant_noise(params, process, measurement);
            for (Index t = 1; t <= T; ++t) {
                using std::sqrt;
                n(t - 1) = sqrt(channel.noise(t)) * static_cast<Scalar>(chan());
            }
            const Trajectory<Scalar> traj = run_pipeline(plan, params, noise, n, &source);
            Scalar sum = Scalar(0);
            for (Index t = 1; t <= T; ++t) {
                auto& step = acc[static_cast<std::size_t>(t - 1)];
                const Scalar x = traj.x(t);
                const Scalar xh = traj.xhat(t - 1);
                const Scalar u = source(t);
                step.sq_error.add((x - xh) * (x - xh));
                step.power.add(traj.z(t - 1) * traj.z(t - 1));
                step.source_error.add((u - xh) * (u - xh));
                step.transmitter_error.add((x - u) * (x - u));
                step.cross.add((x - u) * (u - xh));
                step.orth.add(xh, x - xh);
                sum += (x - xh) * (x - xh);
            }
            average.add(sum / static_cast<Scalar>(T));
        }
    };

    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<Index>(workers, blocks));
    if (workers <= 1) {
        for (Index b = 0; b < blocks; ++b)
            run_block(b);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (Index b = w; b < blocks; b += workers)
                    run_block(b);
            });
    }

    Acc total(static_cast<std::size_t>(T));
    detail::Moments<Scalar> average;
    for (const BlockAcc& block : partial) {
        for (Index t = 0; t < T; ++t)
            total[static_cast<std::size_t>(t)].merge(block.steps[static_cast<std::size_t>(t)]);
        average.merge(block.average);
    }

    RunResult<Scalar> r;
    r.samples = samples;
    r.mse_analytic = plan.decoder.mse;
    r.avg_mse_analytic = r.mse_analytic.mean();
    auto resize = [T](auto&... v) { (v.resize(T), ...); };
    resize(r.mse_empirical, r.std_error, r.power_used, r.power_std_error, r.source_mse, r.source_std_error,
           r.transmitter_mse, r.transmitter_std_error, r.cross_term, r.cross_std_error, r.orthogonality);
    for (Index t = 0; t < T; ++t) {
        const auto& step = total[static_cast<std::size_t>(t)];
        r.mse_empirical(t) = step.sq_error.mean;
        r.std_error(t) = step.sq_error.std_error();
        r.power_used(t) = step.power.mean;
        r.power_std_error(t) = step.power.std_error();
        r.source_mse(t) = step.source_error.mean;
        r.source_std_error(t) = step.source_error.std_error();
        r.transmitter_mse(t) = step.transmitter_error.mean;
        r.transmitter_std_error(t) = step.transmitter_error.std_error();
        r.cross_term(t) = step.cross.mean;
        r.cross_std_error(t) = step.cross.std_error();
        r.orthogonality(t) = step.orth.correlation();
    }
    r.avg_mse_empirical = r.mse_empirical.mean();
    r.avg_std_error = average.std_error();
    return r;
}

} // namespace gcomm

#endif // GCOMM_SCHEME_HPP
