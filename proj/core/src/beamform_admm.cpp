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

#include "irsopt/beamform_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "irsopt/error.hpp"

namespace irsopt {

BeamformingProblem::BeamformingProblem(EffectiveCoeffs c, RVector powers, RVector ratios, double noise, RVector w)
    : coeffs(std::move(c)), p(std::move(powers)), min_ratio(std::move(ratios)), noise_w(noise), weights(std::move(w))
{
    const auto k = static_cast<Eigen::Index>(coeffs.users());
    if (weights.size() == 0)
        weights = RVector::Ones(k);
    if (p.size() != k || min_ratio.size() != k || weights.size() != k)
        throw DimensionError("beamforming problem: per-user vectors must match the user count");
}

namespace {

// Numerator sum without the leading weight and ratio: sum_{j != k} p_j |e_kj|^2 + sigma^2 ||f_k||^2.
double interference_plus_noise(const BeamformingProblem& prob, std::size_t k, const CVector& theta)
{
    double acc = prob.noise_w * prob.coeffs.f_norm2(k);
    for (std::size_t j = 0; j < prob.users(); ++j)
        if (j != k)
            acc += prob.p(static_cast<Eigen::Index>(j)) * std::norm(prob.coeffs.projection(k, j, theta));
    return acc;
}

double numerator_scale(const BeamformingProblem& prob, std::size_t k)
{
    const auto i = static_cast<Eigen::Index>(k);
    return prob.weights(i) * prob.min_ratio(i);
}

void require_unit_modulus(const CVector& theta, const char* what)
{
    for (Eigen::Index n = 0; n < theta.size(); ++n)
        if (std::abs(std::abs(theta(n)) - 1.0) > 1e-8)
            throw DomainError(std::string(what) + ": phase vector is not unit modulus");
}

CVector project_unit_disk(const CVector& x)
{
    CVector out = x;
    for (Eigen::Index n = 0; n < out.size(); ++n)
    {
        const double a = std::abs(out(n));
        if (a > 1.0)
            out(n) /= a;
    }
    return out;
}

// Gradient of the theta-step objective in the convention d f = Re(grad^H dx).
CVector theta_step_gradient(const BeamformingProblem& prob, const AdmmState& state, const CVector& x)
{
    CVector grad = state.rho * (x - state.q + state.r);
    for (std::size_t k = 0; k < prob.users(); ++k)
    {
        const double c = numerator_scale(prob, k);
        if (c == 0.0)
            continue;
        const double a_k = c * interference_plus_noise(prob, k, x);
        const double outer = 2.0 * state.beta(static_cast<Eigen::Index>(k)) * a_k * 2.0 * c;
        for (std::size_t j = 0; j < prob.users(); ++j)
            if (j != k)
                grad += (outer * prob.p(static_cast<Eigen::Index>(j)) * prob.coeffs.projection(k, j, x)) *
                        prob.coeffs.g(k, j);
    }
    return grad;
}

CVector q_step_gradient(const BeamformingProblem& prob, const AdmmState& state, const CVector& x, double floor,
                        bool* floored)
{
    CVector grad = state.rho * (x - state.theta - state.r);
    for (std::size_t k = 0; k < prob.users(); ++k)
    {
        const cplx e = prob.coeffs.projection(k, k, x);
        const double b = std::norm(e);
        if (b <= floor)
        {
            if (floored)
                *floored = true;
            continue;
        }
        const double beta = state.beta(static_cast<Eigen::Index>(k));
        grad -= (e / (beta * b * b * b)) * prob.coeffs.g(k, k);
    }
    return grad;
}

RVector to_real(const CVector& z)
{
    RVector out(2 * z.size());
    out.head(z.size()) = z.real();
    out.tail(z.size()) = z.imag();
    return out;
}

CVector to_complex(const RVector& x)
{
    const Eigen::Index n = x.size() / 2;
    CVector out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out(i) = cplx(x(i), x(n + i));
    return out;
}

} // namespace

RatioTerms ratio_terms(const BeamformingProblem& prob, const CVector& theta)
{
    if (theta.size() != prob.elements())
        throw DimensionError("phase vector length differs from the element count");
    const auto users = static_cast<Eigen::Index>(prob.users());
    RatioTerms t{RVector(users), RVector(users)};
    for (std::size_t k = 0; k < prob.users(); ++k)
    {
        const auto i = static_cast<Eigen::Index>(k);
        t.A(i) = numerator_scale(prob, k) * interference_plus_noise(prob, k, theta);
        t.B(i) = std::norm(prob.coeffs.projection(k, k, theta));
    }
    return t;
}

double sum_of_ratios(const BeamformingProblem& prob, const CVector& theta)
{
    const RatioTerms t = ratio_terms(prob, theta);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < t.A.size(); ++k)
    {
        if (!(t.B(k) > 0.0))
            throw SingularError("sum_of_ratios: desired-signal term of user " + std::to_string(k) + " vanishes");
        acc += t.A(k) / t.B(k);
    }
    return acc;
}

RVector beta_from_terms(const RatioTerms& terms)
{
    RVector beta(terms.A.size());
    for (Eigen::Index k = 0; k < beta.size(); ++k)
    {
        if (!(terms.A(k) > 0.0) || !(terms.B(k) > 0.0))
            throw SingularError("beta update needs positive numerator and denominator terms");
        beta(k) = 1.0 / (2.0 * terms.A(k) * terms.B(k));
    }
    return beta;
}

RVector update_beta(const BeamformingProblem& prob, const CVector& theta)
{
    return beta_from_terms(ratio_terms(prob, theta));
}

double transformed_objective(const BeamformingProblem& prob, const CVector& theta, const RVector& beta)
{
    const RatioTerms t = ratio_terms(prob, theta);
    if (beta.size() != t.A.size())
        throw DimensionError("one beta per user is required");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < beta.size(); ++k)
    {
        if (!(t.B(k) > 0.0) || !(beta(k) > 0.0))
            throw SingularError("transformed objective needs positive beta and denominators");
        acc += beta(k) * t.A(k) * t.A(k) + 1.0 / (4.0 * beta(k) * t.B(k) * t.B(k));
    }
    return acc;
}

double theta_step_objective(const BeamformingProblem& prob, const AdmmState& state, const CVector& x)
{
    const RatioTerms t = ratio_terms(prob, x);
    double acc = 0.5 * state.rho * (x - state.q + state.r).squaredNorm();
    for (Eigen::Index k = 0; k < t.A.size(); ++k)
        acc += state.beta(k) * t.A(k) * t.A(k);
    return acc;
}

double q_step_objective(const BeamformingProblem& prob, const AdmmState& state, const CVector& x,
                        double denominator_floor)
{
    double acc = 0.5 * state.rho * (state.theta - x + state.r).squaredNorm();
    for (std::size_t k = 0; k < prob.users(); ++k)
    {
        const double b = std::max(std::norm(prob.coeffs.projection(k, k, x)), denominator_floor);
        acc += 1.0 / (4.0 * state.beta(static_cast<Eigen::Index>(k)) * b * b);
    }
    return acc;
}

ThetaStepResult admm_theta_step(const BeamformingProblem& prob, const AdmmState& state, const AdmmOptions& opts)
{
    if (!(state.rho > 0.0))
        throw DomainError("ADMM penalty must be positive");
    ThetaStepResult res;
    CVector x = project_unit_disk(state.theta);
    double fx = theta_step_objective(prob, state, x);
    double step = 1.0 / state.rho;
    for (int it = 1; it <= opts.theta_max_iter; ++it)
    {
        res.iterations = it;
        const CVector grad = theta_step_gradient(prob, state, x);
        CVector next;
        double fn = 0.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving)
        {
            next = project_unit_disk(x - step * grad);
            const CVector d = next - x;
            fn = theta_step_objective(prob, state, next);
            // Sufficient decrease for the projected step (quadratic upper model).
            if (fn <= fx + grad.dot(d).real() + d.squaredNorm() / (2.0 * step) + 1e-15 * std::abs(fx))
            {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;
        const double move = (next - x).norm();
        x = std::move(next);
        fx = fn;
        if (move <= opts.theta_tol * (1.0 + x.norm()))
        {
            res.converged = true;
            break;
        }
        step *= 2.0;
    }
    res.relaxed = x;
    res.theta = state.theta;
    for (Eigen::Index n = 0; n < x.size(); ++n)
    {
        const double a = std::abs(x(n));
        if (a > 0.0)
            res.theta(n) = x(n) / a;
    }
    return res;
}

QStepResult admm_q_step(const BeamformingProblem& prob, const AdmmState& state, const AdmmOptions& opts)
{
    if (!(state.rho > 0.0))
        throw DomainError("ADMM penalty must be positive");
    const double floor = opts.denominator_floor;
    QStepResult res;
    CVector q = state.q;
    double fq = q_step_objective(prob, state, q, floor);
    CVector gq = q_step_gradient(prob, state, q, floor, &res.floored);
    RVector g = to_real(gq);
    const Eigen::Index dim = g.size();
    RMatrix H = RMatrix::Identity(dim, dim) / state.rho;

    for (int it = 0; it < opts.q_max_iter; ++it)
    {
        res.grad_norm = g.norm();
        if (res.grad_norm <= opts.q_grad_tol)
        {
            res.converged = true;
            break;
        }
        RVector d = -H * g;
        double slope = g.dot(d);
        if (!(slope < 0.0))
        {
            H.setIdentity();
            H /= state.rho;
            d = -H * g;
            slope = g.dot(d);
        }
        double alpha = 1.0;
        bool accepted = false;
        CVector q_new;
        double f_new = 0.0;
        for (int halving = 0; halving < 60; ++halving)
        {
            q_new = q + alpha * to_complex(d);
            f_new = q_step_objective(prob, state, q_new, floor);
            if (f_new <= fq + 1e-4 * alpha * slope)
            {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted)
        {
            res.stalled = true;
            break;
        }
        const RVector g_new = to_real(q_step_gradient(prob, state, q_new, floor, &res.floored));
        const RVector s = alpha * d;
        const RVector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm())
        {
            const RVector Hy = H * y;
            const double yHy = y.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) - (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }
        q = std::move(q_new);
        fq = f_new;
        g = g_new;
    }
    res.grad_norm = g.norm();
    if (res.grad_norm <= opts.q_grad_tol)
        res.converged = true;
    res.q = std::move(q);
    return res;
}

AdmmReport run_admm(const BeamformingProblem& prob, const CVector& theta0, const AdmmOptions& opts)
{
    if (theta0.size() != prob.elements())
        throw DimensionError("initial phase vector length differs from the element count");
    require_unit_modulus(theta0, "run_admm");

    // Scale so the objective at theta0 equals N: per-element gradients are then O(1) against rho.
    const double elements = static_cast<double>(std::max<Eigen::Index>(prob.elements(), 1));
    const double base = sum_of_ratios(prob, theta0) / elements;
    BeamformingProblem scaled = prob;
    scaled.weights /= base;

    AdmmReport report;
    AdmmState state;
    state.theta = theta0;
    state.r = CVector::Zero(theta0.size());

    CVector best_theta = theta0;
    double best = elements;
    double previous = elements;

    for (int outer = 1; outer <= opts.max_outer; ++outer)
    {
        report.outer_iterations = outer;
        // Each beta defines a new splitting problem: restart the consensus copy, dual and penalty.
        state.beta = update_beta(scaled, state.theta);
        state.q = state.theta;
        state.r.setZero();
        state.rho = opts.rho;

        double best_residual = std::numeric_limits<double>::infinity();
        int since_progress = 0;
        report.consensus_reached = false;
        for (int inner = 1; inner <= opts.max_inner; ++inner)
        {
            ++report.inner_iterations;
            state.theta = admm_theta_step(scaled, state, opts).theta;
            CVector q_next = admm_q_step(scaled, state, opts).q;
            const double dual_residual = state.rho * (q_next - state.q).norm();
            state.q = std::move(q_next);
            state.r += state.theta - state.q;

            const double residual = (state.theta - state.q).norm();
            report.consensus_trace.push_back(residual);
            report.final_consensus = residual;
            try
            {
                const double value = sum_of_ratios(scaled, state.theta);
                if (value < best)
                {
                    best = value;
                    best_theta = state.theta;
                }
            }
            catch (const SingularError&)
            {
            }
            if (residual < opts.tol_consensus && dual_residual < opts.tol_consensus)
            {
                report.consensus_reached = true;
                break;
            }
            if (residual < best_residual * (1.0 - 1e-3))
            {
                best_residual = residual;
                since_progress = 0;
            }
            else if (++since_progress >= opts.stall_window)
            {
                // Scaled dual r = lambda / rho halves when rho doubles.
                state.rho *= 2.0;
                state.r *= 0.5;
                since_progress = 0;
                best_residual = residual;
            }
        }

        double current = previous;
        try
        {
            current = sum_of_ratios(scaled, state.theta);
        }
        catch (const SingularError&)
        {
            state.theta = best_theta;
            current = best;
        }
        report.objective_trace.push_back(current * base);
        if (std::abs(current - previous) <= opts.tol * previous)
        {
            report.converged = true;
            break;
        }
        previous = current;
    }

    report.theta = best_theta;
    report.objective = best * base;
    return report;
}

} // namespace irsopt
