// SPDX-License-Identifier: Apache-2.0
//
// irsopt: joint uplink power control, multi-user detection and IRS passive
// beamforming for delay-constrained mmWave systems
// Copyright (C) 2026 The irsopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "irsopt/framework.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "irsopt/error.hpp"

namespace irsopt {

std::string_view to_string(Beamformer b)
{
    switch (b)
    {
    case Beamformer::ccmo: return "ccmo";
    case Beamformer::admm: return "admm";
    case Beamformer::none: return "none";
    case Beamformer::fixed_random: return "fixed_random";
    }
    return "unknown";
}

Beamformer parse_beamformer(std::string_view name)
{
    if (name == "ccmo")
        return Beamformer::ccmo;
    if (name == "admm")
        return Beamformer::admm;
    if (name == "none")
        return Beamformer::none;
    if (name == "fixed_random")
        return Beamformer::fixed_random;
    throw SpecError("unknown beamformer '" + std::string(name) + "'");
}

std::string_view to_string(CapVerdict v)
{
    switch (v)
    {
    case CapVerdict::feasible: return "feasible";
    case CapVerdict::infeasible_round_cap: return "infeasible_round_cap";
    case CapVerdict::infeasible_stalled: return "infeasible_stalled";
    }
    return "unknown";
}

bool ConvergenceTrace::monotone(double relative_slack) const
{
    for (std::size_t i = 1; i < records.size(); ++i)
    {
        const double prev = records[i - 1].sum_power_w;
        if (records[i].sum_power_w > prev * (1.0 + relative_slack))
            return false;
    }
    return true;
}

namespace {

using Clock = std::chrono::steady_clock;

CVector random_phases(Eigen::Index n, Rng& rng)
{
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    CVector theta(n);
    for (Eigen::Index i = 0; i < n; ++i)
        theta(i) = std::polar(1.0, phase(rng));
    return theta;
}

RVector power_refresh(const CVectorList& h, const CVectorList& F, const LatencyProfile& latency, double noise_w,
                      const RVector& warm, const PowerSolveOptions& opts)
{
    const InterferenceMatrix sys = build_interference(h, F, latency.min_ratio, noise_w);
    const RVector& start = (warm.size() == sys.tau.size()) ? warm : sys.tau;
    PowerSolveReport rep = solve_power_fixed_point(sys, start, opts);
    // A radius estimate just below one can still leave the iteration unconverged.
    if (!rep.converged || !rep.p.allFinite())
        throw InfeasibleError("power iteration did not converge");
    return std::move(rep.p);
}

double weighted_sum(const RVector& w, const RVector& p) { return w.dot(p); }

double ratio_objective(const ChannelSet& ch, const SolverState& state, const LatencyProfile& latency,
                       double noise_w, const RVector& w)
{
    try
    {
        const BeamformingProblem prob(EffectiveCoeffs(ch, state.F), state.p, latency.min_ratio, noise_w, w);
        return sum_of_ratios(prob, state.theta);
    }
    catch (const SingularError&)
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

SolveResult solve(const FrameworkConfig& cfg, const ChannelSet& channels, const LatencyProfile& latency,
                  double noise_w, const std::optional<CVector>& theta_init, const RVector& weights)
{
    channels.validate();
    const std::size_t users = channels.users();
    if (latency.users() != users || latency.min_ratio.size() != static_cast<Eigen::Index>(users))
        throw DimensionError("latency profile does not match the user count");
    if (!(noise_w > 0.0))
        throw DomainError("noise power must be positive");
    const RVector w = weights.size() == 0 ? RVector::Ones(static_cast<Eigen::Index>(users)) : weights;
    if (w.size() != static_cast<Eigen::Index>(users) || (w.array() <= 0.0).any())
        throw DimensionError("weights must be positive, one per user");

    const ChannelSet ch = (cfg.beamformer == Beamformer::none) ? channels.without_irs() : channels;
    const Eigen::Index n = ch.irs_elements();
    Rng rng(cfg.seed);
    const bool optimizes_theta = cfg.beamformer == Beamformer::ccmo || cfg.beamformer == Beamformer::admm;
    if (theta_init && theta_init->size() != n)
        throw DimensionError("initial phase vector length differs from the element count");

    // Feasible starting point: given/unit phases first, then a few random configurations.
    std::vector<CVector> candidates;
    if (cfg.beamformer == Beamformer::fixed_random)
        for (int i = 0; i < 4; ++i)
            candidates.push_back(random_phases(n, rng));
    else
    {
        candidates.push_back(theta_init ? *theta_init : unit_phases(n));
        if (optimizes_theta)
            for (int i = 0; i < 3; ++i)
                candidates.push_back(random_phases(n, rng));
    }

    SolveResult result;
    SolverState& state = result.state;
    bool feasible = false;
    for (const CVector& theta : candidates)
    {
        state.theta = theta;
        state.refresh(ch);
        try
        {
            state.F = matched_filters(state.h_eff);
            state.p = power_refresh(state.h_eff, state.F, latency, noise_w, RVector(), cfg.power);
            feasible = true;
            break;
        }
        catch (const InfeasibleError&)
        {
        }
        catch (const SingularError&)
        {
        }
    }
    if (!feasible)
        throw InfeasibleError("no feasible starting point: the latency targets cannot be met");

    const auto start = Clock::now();
    auto record = [&](int outer, int inner) {
        TraceRecord rec;
        rec.outer = outer;
        rec.sum_power_w = state.p.sum();
        rec.p = state.p;
        rec.sinr = sinr_all(state, noise_w);
        rec.beamformer_objective = ratio_objective(ch, state, latency, noise_w, w);
        rec.inner_iterations = inner;
        rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        result.trace.records.push_back(std::move(rec));
    };
    record(0, 0);

    double previous_outer = weighted_sum(w, state.p);
    for (int outer = 1; outer <= cfg.max_outer; ++outer)
    {
        result.outer_iterations = outer;
        state.p = power_refresh(state.h_eff, state.F, latency, noise_w, state.p, cfg.power);
        double previous_inner = weighted_sum(w, state.p);
        int inner_done = 0;
        for (int inner = 1; inner <= cfg.max_inner; ++inner)
        {
            ++inner_done;
            // Detector update; the power vector can only drop, but guard against numerical trouble.
            CVectorList F_new = mvdr_bank(state.p, state.h_eff, noise_w);
            RVector p_f;
            try
            {
                p_f = power_refresh(state.h_eff, F_new, latency, noise_w, state.p, cfg.power);
            }
            catch (const InfeasibleError&)
            {
                F_new = state.F;
                p_f = state.p;
            }
            if (weighted_sum(w, p_f) > weighted_sum(w, state.p))
            {
                F_new = state.F;
                p_f = state.p;
            }

            if (optimizes_theta)
            {
                const BeamformingProblem prob(EffectiveCoeffs(ch, F_new), state.p, latency.min_ratio, noise_w, w);
                CVector candidate;
                try
                {
                    if (cfg.beamformer == Beamformer::ccmo)
                    {
                        CcmoOptions opts = cfg.ccmo;
                        opts.seed = mix(cfg.seed, static_cast<std::uint64_t>(result.inner_iterations + inner_done));
                        candidate = run_ccmo_multistart(prob, assemble_quadratic(prob), {state.theta}, opts).theta;
                    }
                    else
                        candidate = run_admm(prob, state.theta, cfg.admm).theta;
                }
                catch (const SingularError&)
                {
                    candidate.resize(0);
                }
                bool accepted = false;
                if (candidate.size() == n)
                {
                    const CVectorList h_cand = effective_channels(ch, candidate);
                    try
                    {
                        RVector p_cand = power_refresh(h_cand, F_new, latency, noise_w, p_f, cfg.power);
                        if (weighted_sum(w, p_cand) <= weighted_sum(w, p_f))
                        {
                            state.theta = candidate;
                            state.h_eff = h_cand;
                            p_f = std::move(p_cand);
                            accepted = true;
                        }
                    }
                    catch (const InfeasibleError&)
                    {
                    }
                }
                if (!accepted)
                    ++result.rejected_theta_updates;
            }
            state.F = std::move(F_new);
            state.p = std::move(p_f);

            const double current = weighted_sum(w, state.p);
            const bool settled = std::abs(previous_inner - current) <= cfg.inner_tol * previous_inner;
            previous_inner = current;
            if (settled)
                break;
        }
        result.inner_iterations += inner_done;
        record(outer, inner_done);

        const double current = weighted_sum(w, state.p);
        if (std::abs(previous_outer - current) <= cfg.outer_tol * previous_outer)
        {
            result.converged = true;
            break;
        }
        previous_outer = current;
    }
    return result;
}

namespace {

CMatrix user_effective_matrix(const MultiAntennaChannelSet& ch, const CVector& theta, std::size_t j)
{
    CMatrix e = ch.H_direct[j];
    if (ch.G.cols() > 0)
        e.noalias() += ch.G * theta.asDiagonal() * ch.H_irs[j];
    return e;
}

CVector dominant_right_singular(const CMatrix& m)
{
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinV);
    CVector v = svd.matrixV().col(0);
    return v / v.norm();
}

// q_bar_j proportional to (sum_{k != j} y_k Ttilde_k w_kj w_kj^H / |q_k^H w_kk|^2 + y_j I)^{-1} w_jj,
// with y = (I - Q)^{-T} 1 the sensitivity of sum(p) to the constraint offsets.
CVectorList update_transmit_beamformers(const MultiAntennaChannelSet& ch, const SolveResult& res,
                                        const CVectorList& q_bar, const LatencyProfile& latency)
{
    const std::size_t users = ch.users();
    const CVector theta = ch.G.cols() > 0 ? res.state.theta : CVector();
    std::vector<CMatrix> effective(users);
    for (std::size_t j = 0; j < users; ++j)
        effective[j] = user_effective_matrix(ch, theta, j);
    // w[k][j] = E_j^H f_k.
    std::vector<CVectorList> wv(users, CVectorList(users));
    for (std::size_t k = 0; k < users; ++k)
        for (std::size_t j = 0; j < users; ++j)
            wv[k][j] = effective[j].adjoint() * res.state.F[k];

    const auto kk = static_cast<Eigen::Index>(users);
    RMatrix Q = RMatrix::Zero(kk, kk);
    RVector desired(kk);
    for (std::size_t k = 0; k < users; ++k)
    {
        desired(static_cast<Eigen::Index>(k)) = std::norm(q_bar[k].dot(wv[k][k]));
        for (std::size_t j = 0; j < users; ++j)
            if (j != k)
                Q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                    latency.min_ratio(static_cast<Eigen::Index>(k)) * std::norm(q_bar[j].dot(wv[k][j])) /
                    desired(static_cast<Eigen::Index>(k));
    }
    const RMatrix A = RMatrix::Identity(kk, kk) - Q;
    const RVector y = A.transpose().partialPivLu().solve(RVector::Ones(kk));

    CVectorList out(users);
    const Eigen::Index nu = ch.user_antennas();
    for (std::size_t j = 0; j < users; ++j)
    {
        const double yj = y(static_cast<Eigen::Index>(j));
        if (!(yj > 0.0))
        {
            out[j] = q_bar[j];
            continue;
        }
        CMatrix R = yj * CMatrix::Identity(nu, nu);
        for (std::size_t k = 0; k < users; ++k)
            if (k != j)
            {
                const double c = y(static_cast<Eigen::Index>(k)) * latency.min_ratio(static_cast<Eigen::Index>(k)) /
                                 desired(static_cast<Eigen::Index>(k));
                if (c > 0.0)
                    R.noalias() += c * (wv[k][j] * wv[k][j].adjoint());
            }
        const CVector x = R.llt().solve(wv[j][j]);
        const double norm = x.norm();
        out[j] = (norm > 0.0 && std::isfinite(norm)) ? CVector(x / norm) : q_bar[j];
    }
    return out;
}

} // namespace

MultiAntennaResult solve_multi_antenna(const FrameworkConfig& cfg, const MultiAntennaChannelSet& channels,
                                       const LatencyProfile& latency, double noise_w, int max_rounds)
{
    if (channels.users() == 0)
        throw DimensionError("channel set has no users");
    if (max_rounds < 1)
        throw DomainError("at least one round is required");
    const MultiAntennaChannelSet ch = (cfg.beamformer == Beamformer::none) ? channels.without_irs() : channels;
    const Eigen::Index n = ch.G.cols();

    MultiAntennaResult out;
    out.q_bar.resize(ch.users());
    const CVector ones = unit_phases(n);
    for (std::size_t k = 0; k < ch.users(); ++k)
        out.q_bar[k] = ch.user_antennas() == 1 ? CVector(CVector::Ones(1)) : dominant_right_singular(user_effective_matrix(ch, ones, k));

    out.solve = solve(cfg, ch.reduce(out.q_bar), latency, noise_w);
    out.rounds = 1;
    if (ch.user_antennas() == 1)
        return out;

    for (int round = 2; round <= max_rounds; ++round)
    {
        const CVectorList q_next = update_transmit_beamformers(ch, out.solve, out.q_bar, latency);
        std::optional<CVector> warm;
        if (n > 0)
            warm = out.solve.state.theta;
        SolveResult next;
        try
        {
            next = solve(cfg, ch.reduce(q_next), latency, noise_w, warm);
        }
        catch (const InfeasibleError&)
        {
            break;
        }
        const double before = out.solve.sum_power();
        const double after = next.sum_power();
        if (!(after < before))
            break;
        out.q_bar = q_next;
        out.solve = std::move(next);
        out.rounds = round;
        if (before - after <= cfg.outer_tol * before)
            break;
    }
    return out;
}

CappedResult solve_with_power_caps(const FrameworkConfig& cfg, const ChannelSet& channels,
                                   const LatencyProfile& latency, double noise_w)
{
    if (!cfg.power_cap_w || !(*cfg.power_cap_w > 0.0))
        throw DomainError("solve_with_power_caps needs a positive power cap");
    if (cfg.max_cap_rounds < 1)
        throw DomainError("at least one penalization round is required");
    const double cap = *cfg.power_cap_w;

    CappedResult out;
    out.weights = RVector::Ones(static_cast<Eigen::Index>(channels.users()));
    RVector previous;
    for (int round = 1; round <= cfg.max_cap_rounds; ++round)
    {
        out.rounds = round;
        out.result = solve(cfg, channels, latency, noise_w, std::nullopt, out.weights);
        const RVector& p = out.result.state.p;
        if ((p.array() <= cap * (1.0 + 1e-9)).all())
        {
            out.verdict = CapVerdict::feasible;
            return out;
        }
        if (previous.size() == p.size() &&
            (p - previous).lpNorm<Eigen::Infinity>() <= 1e-9 * previous.lpNorm<Eigen::Infinity>())
        {
            out.verdict = CapVerdict::infeasible_stalled;
            return out;
        }
        previous = p;
        if (round == cfg.max_cap_rounds)
            break;
        for (Eigen::Index k = 0; k < p.size(); ++k)
            out.weights(k) *= std::max(p(k), cap) / cap;
    }
    out.verdict = CapVerdict::infeasible_round_cap;
    return out;
}

} // namespace irsopt
