#ifndef GCOMM_BASELINE_HPP
#define GCOMM_BASELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include "gcomm/core_model.hpp"
#include "gcomm/kalman.hpp"
#include "gcomm/random.hpp"
#include "gcomm/scheme.hpp"

namespace gcomm {

/// Dense T x T causal (lower-triangular) linear filter. Entries above the
/// diagonal are exactly zero.
template<typename Scalar>
class CausalOperator
{
  public:
    using Matrix = Mat<Scalar>;

    CausalOperator() = default;
    explicit CausalOperator(Index T) : m_(Matrix::Zero(T, T)) {}

    /// Throws UsageError unless `m` is square with a zero strict upper part.
    static CausalOperator from_dense(const Matrix& m)
    {
        if (m.rows() != m.cols())
            throw UsageError("CausalOperator: matrix must be square");
        if (m.template triangularView<Eigen::StrictlyUpper>().toDenseMatrix().any())
            throw UsageError("CausalOperator: entries above the diagonal must be zero");
        CausalOperator op;
        op.m_ = m;
        return op;
    }

    /// Lower-triangular part of `m`.
    static CausalOperator lower_part(const Matrix& m)
    {
        if (m.rows() != m.cols())
            throw UsageError("CausalOperator: matrix must be square");
        CausalOperator op;
        op.m_ = m.template triangularView<Eigen::Lower>();
        return op;
    }

    Index size() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    Scalar operator()(Index i, Index j) const { return m_(i, j); }

    void set(Index i, Index j, Scalar v)
    {
        if (j > i)
            throw UsageError("CausalOperator: cannot set an entry above the diagonal");
        m_(i, j) = v;
    }

  private:
    Matrix m_;
};

/**
 * Linear-Gaussian picture of one encoder/decoder problem over a horizon T, in
 * terms of a standard white vector e of dimension m:
 *
 *   target  (T x m)   x(1..T) = target e
 *   source  (T x m)   encoder input vector = source e
 *   delay   (T x T)   decoder input y = delay (G source e + n)
 *
 * Row r of the encoder output has noise variance noise_var(r) and power
 * budget power(r). Rows that `delay` drops never reach the decoder.
 */
template<typename Scalar>
struct ChannelChain
{
    Mat<Scalar> target;
    Mat<Scalar> source;
    Mat<Scalar> delay;
    Vec<Scalar> noise_var;
    Vec<Scalar> power;

    Index horizon() const { return target.rows(); }
    bool reaches_decoder(Index row) const { return delay.col(row).any(); }
};

/// One-step delay with y(0) = 0: (S v)(0) = 0, (S v)(i) = v(i-1).
template<typename Scalar>
Mat<Scalar> shift_operator(Index T)
{
    Mat<Scalar> S = Mat<Scalar>::Zero(T, T);
    if (T > 1)
        S.diagonal(-1).setOnes();
    return S;
}

/// Impulse response from w(0..T-1) (unit variance) to x(1..T): entry (t-1, s)
/// is b(s) a(s+1) ... a(t-1) for s < t.
template<typename Scalar>
CausalOperator<Scalar> build_H(const SystemParams<Scalar>& params)
{
    const Index T = params.horizon();
    Mat<Scalar> H = Mat<Scalar>::Zero(T, T);
    for (Index s = 0; s < T; ++s) {
        Scalar gain = params.b(s);
        for (Index t = s + 1; t <= T; ++t) {
            H(t - 1, s) = gain;
            if (t < T)
                gain *= params.a(t);
        }
    }
    return CausalOperator<Scalar>::from_dense(H);
}

/// Encoder sees x(1..T); rows are z(1..T); z(T) is dropped by the delay.
template<typename Scalar>
ChannelChain<Scalar> full_state_chain(const SystemParams<Scalar>& params, const ChannelParams<Scalar>& channel)
{
    params.validate();
    const Index T = params.horizon();
    channel.validate(T);
    Vec<Scalar> scale(T);
    for (Index s = 0; s < T; ++s) {
        using std::sqrt;
        scale(s) = sqrt(params.cov(s)(0, 0));
    }
    ChannelChain<Scalar> chain;
    chain.target = build_H(params).matrix() * scale.asDiagonal();
    chain.source = chain.target;
    chain.delay = shift_operator<Scalar>(T);
    chain.noise_var = channel.N;
    chain.power = channel.P;
    return chain;
}

/// Encoder sees gamma(0..T-1); rows are z(0..T-1); z(0) is dropped since
/// y(0) = 0. White coordinates: columns 2s, 2s+1 drive (w(s), v(s)).
template<typename Scalar>
ChannelChain<Scalar> noisy_state_chain(const SystemParams<Scalar>& params, const ChannelParams<Scalar>& channel)
{
    params.validate();
    const Index T = params.horizon();
    channel.validate(T);
    const Index m = 2 * T;
    Mat<Scalar> X = Mat<Scalar>::Zero(T + 1, m);
    Mat<Scalar> G = Mat<Scalar>::Zero(T, m);
    for (Index t = 0; t < T; ++t) {
        const Cov2<Scalar> l = cholesky2(params.cov(t));
        G.row(t) = params.c(t) * X.row(t);
        G(t, 2 * t) += params.d(t) * l(1, 0);
        G(t, 2 * t + 1) += params.d(t) * l(1, 1);
        X.row(t + 1) = params.a(t) * X.row(t);
        X(t + 1, 2 * t) += params.b(t) * l(0, 0);
    }
    ChannelChain<Scalar> chain;
    chain.target = X.bottomRows(T);
    chain.source = G;
    chain.delay = Mat<Scalar>::Identity(T, T);
    chain.delay(0, 0) = Scalar(0);
    chain.noise_var.resize(T);
    chain.power.resize(T);
    chain.noise_var(0) = channel.N(0);
    chain.power(0) = channel.P(0);
    for (Index t = 1; t < T; ++t) {
        chain.noise_var(t) = channel.noise(t);
        chain.power(t) = channel.power(t);
    }
    return chain;
}

template<typename Scalar>
ChannelChain<Scalar> scheme_chain(SchemeKind kind, const SystemParams<Scalar>& params, const ChannelParams<Scalar>& channel)
{
    return kind == SchemeKind::FullState ? full_state_chain(params, channel) : noisy_state_chain(params, channel);
}

namespace detail {

template<typename Scalar>
void check_dims(const Mat<Scalar>& G, const ChannelChain<Scalar>& chain)
{
    const Index T = chain.horizon();
    if (G.rows() != T || G.cols() != T || chain.source.rows() != T || chain.delay.rows() != T
        || chain.delay.cols() != T || chain.noise_var.size() != T || chain.power.size() != T
        || chain.source.cols() != chain.target.cols())
        throw UsageError("baseline: operator dimensions do not agree");
}

template<typename Scalar>
Scalar objective(const Mat<Scalar>& G, const Mat<Scalar>& F, const ChannelChain<Scalar>& chain)
{
    const Mat<Scalar> FD = F * chain.delay;
    const Scalar signal = (chain.target - FD * G * chain.source).squaredNorm();
    const Scalar noise = (FD * chain.noise_var.cwiseSqrt().asDiagonal()).squaredNorm();
    return (signal + noise) / static_cast<Scalar>(chain.horizon());
}

template<typename Scalar>
Mat<Scalar> optimal_F(const Mat<Scalar>& G, const ChannelChain<Scalar>& chain)
{
    const Index T = chain.horizon();
    const Mat<Scalar> A = chain.delay * G * chain.source;
    const Mat<Scalar> Cyy = A * A.transpose()
                            + chain.delay * chain.noise_var.asDiagonal() * chain.delay.transpose();
    const Mat<Scalar> Cxy = chain.target * A.transpose();

    std::vector<Index> visible;
    for (Index j = 0; j < T; ++j)
        if (chain.delay.row(j).any())
            visible.push_back(j);

    Mat<Scalar> F = Mat<Scalar>::Zero(T, T);
    std::vector<Index> J;
    for (Index t = 0; t < T; ++t) {
        J.clear();
        for (Index j : visible)
            if (j <= t)
                J.push_back(j);
        if (J.empty())
            continue;
        const Index n = static_cast<Index>(J.size());
        Mat<Scalar> C(n, n);
        Vec<Scalar> rhs(n);
        for (Index i = 0; i < n; ++i) {
            rhs(i) = Cxy(t, J[static_cast<std::size_t>(i)]);
            for (Index k = 0; k < n; ++k)
                C(i, k) = Cyy(J[static_cast<std::size_t>(i)], J[static_cast<std::size_t>(k)]);
        }
        Eigen::CompleteOrthogonalDecomposition<Mat<Scalar>> cod;
        cod.setThreshold(Scalar(1e-10));
        cod.compute(C);
        const Vec<Scalar> f = cod.solve(rhs);
        for (Index i = 0; i < n; ++i)
            F(t, J[static_cast<std::size_t>(i)]) = f(i);
    }
    return F;
}

template<typename Scalar>
Mat<Scalar> gradient(const Mat<Scalar>& G, const Mat<Scalar>& F, const ChannelChain<Scalar>& chain)
{
    const Mat<Scalar> FD = F * chain.delay;
    const Mat<Scalar> residual = chain.target - FD * G * chain.source;
    Mat<Scalar> grad = (Scalar(-2) / static_cast<Scalar>(chain.horizon())) * FD.transpose() * residual
                       * chain.source.transpose();
    return grad.template triangularView<Eigen::Lower>();
}

template<typename Scalar>
Vec<Scalar> row_power(const Mat<Scalar>& G, const Mat<Scalar>& source)
{
    return (G * source).rowwise().squaredNorm();
}

template<typename Scalar>
Mat<Scalar> project(const Mat<Scalar>& G, const ChannelChain<Scalar>& chain, bool to_equality)
{
    using std::sqrt;
    Mat<Scalar> out = G;
    const Vec<Scalar> p = row_power(G, chain.source);
    for (Index r = 0; r < G.rows(); ++r) {
        if (p(r) <= 0)
            continue;
        // rows within rounding of their budget count as feasible, which keeps
        // the projection idempotent
        if (to_equality || p(r) > chain.power(r) * (Scalar(1) + Scalar(1e-12)))
            out.row(r) *= sqrt(chain.power(r) / p(r));
    }
    return out;
}

} // namespace detail

/// Average MSE (1/T)[ |target - F D G source|_F^2 + |F D diag(sqrt N)|_F^2 ].
template<typename Scalar>
Scalar mse_objective(const CausalOperator<Scalar>& G, const CausalOperator<Scalar>& F, const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    if (F.size() != chain.horizon())
        throw UsageError("mse_objective: decoder dimension does not match the chain");
    return detail::objective(G.matrix(), F.matrix(), chain);
}

/// Full-state form with unit-variance process noise: target = source = H,
/// one-step shift, per-step channel noise N.
template<typename Scalar>
Scalar mse_objective(const CausalOperator<Scalar>& G,
                     const CausalOperator<Scalar>& F,
                     const CausalOperator<Scalar>& H,
                     const Vec<Scalar>& N)
{
    const Index T = H.size();
    if (G.size() != T || F.size() != T || N.size() != T)
        throw UsageError("mse_objective: dimension mismatch");
    ChannelChain<Scalar> chain{ H.matrix(), H.matrix(), shift_operator<Scalar>(T), N, Vec<Scalar>::Ones(T) };
    return detail::objective(G.matrix(), F.matrix(), chain);
}

/// Row-wise linear MMSE decoder for a fixed encoder: row t regresses x(t+1)
/// on the decoder inputs it can see. Inputs the delay drops are excluded
/// (pseudo-inverse with relative threshold 1e-10 on the rest).
template<typename Scalar>
CausalOperator<Scalar> optimal_F_given_G(const CausalOperator<Scalar>& G, const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    return CausalOperator<Scalar>::from_dense(detail::optimal_F(G.matrix(), chain));
}

template<typename Scalar>
CausalOperator<Scalar> optimal_F_given_G(const CausalOperator<Scalar>& G,
                                         const CausalOperator<Scalar>& H,
                                         const Vec<Scalar>& N)
{
    const Index T = H.size();
    ChannelChain<Scalar> chain{ H.matrix(), H.matrix(), shift_operator<Scalar>(T), N, Vec<Scalar>::Ones(T) };
    return optimal_F_given_G(G, chain);
}

/// Scales row t by min(1, sqrt(P(t)) / |(G source)_t|); silent rows stay.
template<typename Scalar>
CausalOperator<Scalar> project_power(const CausalOperator<Scalar>& G, const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    return CausalOperator<Scalar>::from_dense(detail::project(G.matrix(), chain, false));
}

template<typename Scalar>
CausalOperator<Scalar> project_power(const CausalOperator<Scalar>& G,
                                     const CausalOperator<Scalar>& H,
                                     const Vec<Scalar>& P)
{
    const Index T = H.size();
    ChannelChain<Scalar> chain{ H.matrix(), H.matrix(), shift_operator<Scalar>(T), Vec<Scalar>::Ones(T), P };
    return project_power(G, chain);
}

/// Power of each encoder output row, |(G source)_t|^2.
template<typename Scalar>
Vec<Scalar> row_power(const CausalOperator<Scalar>& G, const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    return detail::row_power(G.matrix(), chain.source);
}

/// d objective / dG on the lower-triangular support:
/// (-2/T) (F D)^T (target - F D G source) source^T.
template<typename Scalar>
Mat<Scalar> objective_gradient_G(const CausalOperator<Scalar>& G,
                                 const CausalOperator<Scalar>& F,
                                 const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    return detail::gradient(G.matrix(), F.matrix(), chain);
}

template<typename Scalar>
Mat<Scalar> objective_gradient_G(const CausalOperator<Scalar>& G,
                                 const CausalOperator<Scalar>& F,
                                 const CausalOperator<Scalar>& H,
                                 const Vec<Scalar>& N)
{
    const Index T = H.size();
    ChannelChain<Scalar> chain{ H.matrix(), H.matrix(), shift_operator<Scalar>(T), N, Vec<Scalar>::Ones(T) };
    return objective_gradient_G(G, F, chain);
}

/**
 * Gradient with the normal of every active power constraint removed: row r
 * loses its component along d/dG_r |(G source)_r|^2 = 2 G_r source source^T
 * when that row is at its budget (relative slack below 1e-9). A KKT point of
 * the constrained problem has a zero projected gradient when the constraint
 * multipliers are non-negative.
 */
template<typename Scalar>
Mat<Scalar> projected_gradient_G(const CausalOperator<Scalar>& G,
                                 const CausalOperator<Scalar>& F,
                                 const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    Mat<Scalar> grad = detail::gradient(G.matrix(), F.matrix(), chain);
    const Mat<Scalar> normal_all = G.matrix() * chain.source * chain.source.transpose();
    const Vec<Scalar> p = detail::row_power(G.matrix(), chain.source);
    for (Index r = 0; r < chain.horizon(); ++r) {
        if (p(r) < chain.power(r) * (Scalar(1) - Scalar(1e-9)))
            continue;
        const auto normal = normal_all.row(r).head(r + 1);
        const Scalar nn = normal.squaredNorm();
        if (nn > 0) {
            const Scalar along = grad.row(r).head(r + 1).dot(normal) / nn;
            // the descent direction -grad points outward and is blocked
            if (along < 0)
                grad.row(r).head(r + 1) -= along * normal;
        }
    }
    return grad;
}

struct BaselineOptions
{
    int restarts = 20;
    int max_iters = 20000;
    double tol = 1e-13;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

template<typename Scalar>
struct BaselineResult
{
    CausalOperator<Scalar> G_opt;
    CausalOperator<Scalar> F_opt;
    Scalar objective = std::numeric_limits<Scalar>::infinity();
    Vec<Scalar> per_row_power;
    int restarts_run = 0;
    bool converged = false;
    std::vector<Scalar> restart_objectives;
    std::vector<int> restart_iterations;
    std::vector<bool> restart_converged;
    /// objective after each alternation of the best restart
    std::vector<Scalar> trace;
};

namespace detail {

template<typename Scalar>
struct RestartOutcome
{
    Mat<Scalar> G;
    Mat<Scalar> F;
    Scalar objective = std::numeric_limits<Scalar>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<Scalar> trace;
};

/**
 * One restart: random encoder at full power, then alternate
 *   F <- optimal F for G
 *   G <- project(G - step * grad) with Armijo backtracking (F fixed)
 * until the relative decrease of the objective falls below tol.
 */
template<typename Scalar>
RestartOutcome<Scalar> run_restart(const ChannelChain<Scalar>& chain, const BaselineOptions& opt, NormalStream& rng)
{
    const Index T = chain.horizon();
    Mat<Scalar> G = Mat<Scalar>::Zero(T, T);
    for (Index i = 0; i < T; ++i)
        for (Index j = 0; j <= i; ++j)
            G(i, j) = static_cast<Scalar>(rng());
    G = project(G, chain, true);

    RestartOutcome<Scalar> out;
    Mat<Scalar> F = optimal_F(G, chain);
    Scalar f = objective(G, F, chain);
    out.trace.push_back(f);

    constexpr Scalar slope = Scalar(1e-4);
    constexpr Scalar shrink = Scalar(0.5);
    constexpr int max_backtracks = 60;
    int it = 0;
    for (; it < opt.max_iters; ++it) {
        const Mat<Scalar> grad = gradient(G, F, chain);
        if (grad.squaredNorm() == 0) {
            out.converged = true;
            break;
        }
        Scalar step = Scalar(1);
        Mat<Scalar> candidate;
        bool accepted = false;
        for (int k = 0; k < max_backtracks; ++k, step *= shrink) {
            candidate = project(Mat<Scalar>(G - step * grad), chain, false);
            const Scalar decrease = (grad.array() * (candidate - G).array()).sum();
            if (objective(candidate, F, chain) <= f + slope * decrease) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.converged = true;
            break;
        }
        const Mat<Scalar> nextF = optimal_F(candidate, chain);
        const Scalar next = objective(candidate, nextF, chain);
        const Scalar rel = (f - next) / std::max(std::abs(f), std::numeric_limits<Scalar>::min());
        G = candidate;
        F = nextF;
        f = next;
        out.trace.push_back(f);
        if (rel < Scalar(opt.tol)) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.G = G;
    out.F = F;
    out.objective = f;
    out.iterations = it;
    return out;
}

} // namespace detail

/**
 * Brute-force minimisation of the average MSE over all causal linear
 * encoder/decoder pairs under per-row power constraints.
 *
 * The search runs in whitened encoder-input coordinates: with
 * source source^T = L L^T, the encoder G L acts on unit innovations, its row
 * powers are plain Euclidean norms, and row scaling is the exact projection
 * onto the feasible set. Causality is unchanged since L is lower-triangular.
 * Restarts run concurrently; the best objective wins, ties to the lowest index.
 */
template<typename Scalar>
BaselineResult<Scalar> alternating_optimize(const ChannelChain<Scalar>& chain, const BaselineOptions& opt, RngSeed seed)
{
    if (opt.restarts < 1)
        throw UsageError("alternating_optimize: restarts must be at least 1");
    if (!(opt.tol > 0))
        throw UsageError("alternating_optimize: tol must be positive");
    const Index T = chain.horizon();
    detail::check_dims(Mat<Scalar>(Mat<Scalar>::Zero(T, T)), chain);

    ChannelChain<Scalar> work = chain;
    Mat<Scalar> whitener = Mat<Scalar>::Identity(T, T);
    const Eigen::LLT<Mat<Scalar>> llt(chain.source * chain.source.transpose());
    const bool whitened = llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0;
    if (whitened) {
        whitener = llt.matrixL();
        work.source = llt.matrixL().solve(chain.source);
    }

    std::vector<detail::RestartOutcome<Scalar>> outcomes(static_cast<std::size_t>(opt.restarts));
    auto run = [&](int r) {
        NormalStream rng(seed, StreamRole::Baseline, static_cast<std::uint64_t>(r));
        outcomes[static_cast<std::size_t>(r)] = detail::run_restart(work, opt, rng);
    };
    unsigned workers = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(opt.restarts));
    if (workers <= 1) {
        for (int r = 0; r < opt.restarts; ++r)
            run(r);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int r = static_cast<int>(w); r < opt.restarts; r += static_cast<int>(workers))
                    run(r);
            });
    }

    BaselineResult<Scalar> result;
    result.restarts_run = opt.restarts;
    std::size_t best = 0;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        result.restart_objectives.push_back(outcomes[r].objective);
        result.restart_iterations.push_back(outcomes[r].iterations);
        result.restart_converged.push_back(outcomes[r].converged);
        result.converged = result.converged || outcomes[r].converged;
        if (outcomes[r].objective < outcomes[best].objective)
            best = r;
    }
    const auto& winner = outcomes[best];
    // back to the caller's encoder-input coordinates: G = G_w L^{-1}
    Mat<Scalar> G = winner.G;
    if (whitened)
        G = whitener.template triangularView<Eigen::Lower>().template solve<Eigen::OnTheRight>(winner.G);
    result.G_opt = CausalOperator<Scalar>::lower_part(G);
    result.F_opt = CausalOperator<Scalar>::from_dense(winner.F);
    result.objective = winner.objective;
    result.per_row_power = detail::row_power(result.G_opt.matrix(), chain.source);
    result.trace = winner.trace;
    return result;
}

template<typename Scalar>
BaselineResult<Scalar> alternating_optimize(SchemeKind kind,
                                            const SystemParams<Scalar>& params,
                                            const ChannelParams<Scalar>& channel,
                                            const BaselineOptions& opt,
                                            RngSeed seed)
{
    return alternating_optimize(scheme_chain(kind, params, channel), opt, seed);
}

/// Encoder of the closed-form scheme written as an operator on the chain's
/// encoder input (initial state taken as 0).
template<typename Scalar>
CausalOperator<Scalar> scheme_encoder(SchemeKind kind, SystemParams<Scalar> params, const ChannelParams<Scalar>& channel)
{
    params.x0 = Scalar(0);
    const Index T = params.horizon();
    CausalOperator<Scalar> G(T);
    if (kind == SchemeKind::FullState) {
        const Vec<Scalar> k = encoder_scale(state_variance(params), channel);
        for (Index t = 0; t < T; ++t)
            G.set(t, t, k(t));
        return G;
    }
    const GainSchedule<Scalar> g = transmitter_gain_schedule(params);
    const Vec<Scalar> k = encoder_scale(g.sigma_breve_sq, channel);
    for (Index s = 0; s < T; ++s) {
        Vec<Scalar> impulse = Vec<Scalar>::Zero(T);
        impulse(s) = Scalar(1);
        const Vec<Scalar> xb = transmitter_filter(params, g, impulse);
        for (Index t = std::max<Index>(s, 1); t < T; ++t)
            G.set(t, s, k(t - 1) * xb(t));
    }
    return G;
}

/// Decoder of the closed-form scheme as an operator on y(0..T-1).
template<typename Scalar>
CausalOperator<Scalar> scheme_decoder(SchemeKind kind, SystemParams<Scalar> params, const ChannelParams<Scalar>& channel)
{
    params.x0 = Scalar(0);
    const Index T = params.horizon();
    const SchemePlan<Scalar> plan = plan_scheme(kind, params, channel);
    Mat<Scalar> F = Mat<Scalar>::Zero(T, T);
    for (Index j = 0; j < T; ++j) {
        Vec<Scalar> impulse = Vec<Scalar>::Zero(T);
        impulse(j) = Scalar(1);
        F.col(j) = decoder_filter(plan.decoder, impulse);
    }
    return CausalOperator<Scalar>::lower_part(F);
}

/**
 * Memory of an encoder: with E = G diag(std of each encoder input), the energy
 * ratio |strictly lower part of E|_F^2 / |diagonal of E|_F^2 over the rows that
 * reach the decoder. Zero for a memoryless encoder.
 */
template<typename Scalar>
Scalar encoder_memory_ratio(const CausalOperator<Scalar>& G, const ChannelChain<Scalar>& chain)
{
    detail::check_dims(G.matrix(), chain);
    const Index T = chain.horizon();
    const Vec<Scalar> input_std = chain.source.rowwise().norm();
    const Mat<Scalar> E = G.matrix() * input_std.asDiagonal();
    Scalar off = Scalar(0), diag = Scalar(0);
    for (Index r = 0; r < T; ++r) {
        if (!chain.reaches_decoder(r))
            continue;
        diag += E(r, r) * E(r, r);
        off += E.row(r).head(r).squaredNorm();
    }
    return diag > 0 ? off / diag : std::numeric_limits<Scalar>::infinity();
}

/**
 * Monte Carlo estimate of the average MSE of an arbitrary encoder/decoder
 * pair on the chain, independent of the closed-form objective. Returns
 * (mean, standard error) of the per-sample average squared error.
 */
template<typename Scalar>
std::pair<Scalar, Scalar> monte_carlo_objective(const CausalOperator<Scalar>& G,
                                                const CausalOperator<Scalar>& F,
                                                const ChannelChain<Scalar>& chain,
                                                Index samples,
                                                RngSeed seed)
{
    detail::check_dims(G.matrix(), chain);
    if (samples < 1)
        throw UsageError("monte_carlo_objective: samples must be at least 1");
    const Index T = chain.horizon();
    const Index m = chain.target.cols();
    const Mat<Scalar> encode = G.matrix() * chain.source;
    const Mat<Scalar> decode = F.matrix() * chain.delay;
    const Vec<Scalar> noise_std = chain.noise_var.cwiseSqrt();
    NormalStream white(seed, StreamRole::Process);
    NormalStream chan(seed, StreamRole::Channel);
    detail::Moments<Scalar> average;
    Vec<Scalar> e(m), n(T);
    for (Index s = 0; s < samples; ++s) {
        for (Index i = 0; i < m; ++i)
            e(i) = static_cast<Scalar>(white());
        for (Index t = 0; t < T; ++t)
            n(t) = noise_std(t) * static_cast<Scalar>(chan());
        const Vec<Scalar> err = chain.target * e - decode * (encode * e + n);
        average.add(err.squaredNorm() / static_cast<Scalar>(T));
    }
    return { average.mean, average.std_error() };
}

} // namespace gcomm

#endif // GCOMM_BASELINE_HPP
