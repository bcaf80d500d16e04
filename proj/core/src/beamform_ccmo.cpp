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

#include "irsopt/beamform_ccmo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irsopt/error.hpp"

namespace irsopt {

double QuadraticForm::residual_sum(const CVector& theta) const
{
    if (theta.size() != v.size())
        throw DimensionError("quadratic form: phase vector length mismatch");
    return theta.dot(U * theta).real() + 2.0 * theta.dot(v).real() + C;
}

QuadraticForm assemble_quadratic(const BeamformingProblem& prob)
{
    const Eigen::Index n = prob.elements();
    QuadraticForm form{CMatrix::Zero(n, n), CVector::Zero(n), 0.0};
    for (std::size_t k = 0; k < prob.users(); ++k)
    {
        const auto ik = static_cast<Eigen::Index>(k);
        const double w = prob.weights(ik);
        const double t = prob.min_ratio(ik);
        for (std::size_t j = 0; j < prob.users(); ++j)
        {
            const double coef = (j == k) ? w * prob.p(ik) : -w * t * prob.p(static_cast<Eigen::Index>(j));
            if (coef == 0.0)
                continue;
            const CVector& g = prob.coeffs.g(k, j);
            const cplx b = prob.coeffs.b(k, j);
            form.U.noalias() += coef * (g * g.adjoint());
            form.v += (coef * b) * g;
            form.C += coef * std::norm(b);
        }
        form.C -= w * t * prob.noise_w * prob.coeffs.f_norm2(k);
    }
    // Keep U exactly Hermitian.
    form.U = 0.5 * (form.U + form.U.adjoint()).eval();
    return form;
}

RVector latency_residuals(const BeamformingProblem& prob, const CVector& theta)
{
    if (theta.size() != prob.elements())
        throw DimensionError("phase vector length differs from the element count");
    RVector alpha(static_cast<Eigen::Index>(prob.users()));
    for (std::size_t k = 0; k < prob.users(); ++k)
    {
        const auto ik = static_cast<Eigen::Index>(k);
        double interference = prob.noise_w * prob.coeffs.f_norm2(k);
        for (std::size_t j = 0; j < prob.users(); ++j)
            if (j != k)
                interference += prob.p(static_cast<Eigen::Index>(j)) * std::norm(prob.coeffs.projection(k, j, theta));
        alpha(ik) = prob.weights(ik) * (prob.p(ik) * std::norm(prob.coeffs.projection(k, k, theta)) -
                                        prob.min_ratio(ik) * interference);
    }
    return alpha;
}

double ccmo_objective(const QuadraticForm& form, const CVector& theta)
{
    return -theta.dot(form.U * theta).real() - 2.0 * theta.dot(form.v).real();
}

CVector euclidean_gradient(const QuadraticForm& form, const CVector& theta)
{
    return -2.0 * (form.U * theta) - 2.0 * form.v;
}

CVector riemannian_gradient(const QuadraticForm& form, const CVector& theta)
{
    const CVector grad = euclidean_gradient(form, theta);
    CVector out(grad.size());
    for (Eigen::Index n = 0; n < grad.size(); ++n)
        out(n) = grad(n) - (std::conj(grad(n)) * theta(n)).real() * theta(n);
    return out;
}

CVector retract(const CVector& theta, const CVector& step)
{
    if (theta.size() != step.size())
        throw DimensionError("retraction: step length mismatch");
    CVector out(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n)
    {
        const cplx z = theta(n) + step(n);
        const double a = std::abs(z);
        if (a < 1e-14)
            throw SingularError("retraction: coordinate collapsed to zero");
        out(n) = z / a;
    }
    return out;
}

double hermitian_spectral_norm(const CMatrix& U, int max_iter, double tol)
{
    if (U.rows() != U.cols())
        throw DimensionError("spectral norm needs a square matrix");
    const Eigen::Index n = U.rows();
    if (n == 0)
        return 0.0;
    // Fixed pseudo-random start so no eigenvector is missed by symmetry.
    Rng rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss;
    CVector x(n);
    for (Eigen::Index i = 0; i < n; ++i)
        x(i) = cplx(gauss(rng), gauss(rng));
    x.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it)
    {
        const CVector y = U * x;
        const double norm = y.norm();
        if (norm == 0.0)
            return 0.0;
        const double next = norm;
        x = y / norm;
        if (std::abs(next - estimate) <= tol * next)
            return next;
        estimate = next;
    }
    return estimate;
}

double descent_step_bound(const QuadraticForm& form)
{
    // With B = U + lambda I (positive semidefinite) and c = B theta + v, f(theta') <= f(theta) whenever
    // Re(conj(theta'_n) c_n) >= Re(conj(theta_n) c_n) for every n. A retracted gradient step moves theta_n
    // along the short arc towards c_n as long as 2 zeta Re(conj(c_n) theta_n) <= 1, and |c_n| is bounded by
    // the row sums of B plus |v_n|.
    const double lambda = hermitian_spectral_norm(form.U);
    double worst = 0.0;
    for (Eigen::Index n = 0; n < form.U.rows(); ++n)
        worst = std::max(worst, form.U.row(n).cwiseAbs().sum() + lambda + std::abs(form.v(n)));
    return 2.0 * worst;
}

CcmoReport run_ccmo(const QuadraticForm& form, const CVector& theta0, const CcmoOptions& opts)
{
    if (theta0.size() != form.v.size())
        throw DimensionError("initial phase vector length mismatch");
    for (Eigen::Index n = 0; n < theta0.size(); ++n)
        if (std::abs(std::abs(theta0(n)) - 1.0) > 1e-8)
            throw DomainError("run_ccmo: initial point is not unit modulus");

    CcmoReport report;
    const double bound = descent_step_bound(form);
    double step = bound > 0.0 ? 1.0 / bound : opts.step.value_or(1.0);
    if (opts.step)
    {
        if (!(*opts.step > 0.0))
            throw DomainError("run_ccmo: step must be positive");
        step = std::min(step, *opts.step);
    }
    report.step = step;

    CVector theta = theta0;
    double f = ccmo_objective(form, theta);
    if (opts.record_trace)
        report.trace.push_back(f);

    for (int it = 1; it <= opts.max_iter; ++it)
    {
        const CVector grad = riemannian_gradient(form, theta);
        if (grad.norm() == 0.0)
        {
            report.converged = true;
            break;
        }
        double s = step;
        CVector next;
        double f_next = f;
        bool moved = false;
        for (int halving = 0; halving < 50; ++halving)
        {
            try
            {
                next = retract(theta, -s * grad);
            }
            catch (const SingularError&)
            {
                ++report.retraction_halvings;
                s *= 0.5;
                continue;
            }
            f_next = ccmo_objective(form, next);
            if (opts.backtracking && f_next > f)
            {
                s *= 0.5;
                continue;
            }
            moved = true;
            break;
        }
        report.iterations = it;
        if (!moved)
        {
            report.converged = true;
            break;
        }
        theta = std::move(next);
        const double change = std::abs(f_next - f);
        const double scale = std::max({std::abs(f), std::abs(f_next), std::numeric_limits<double>::min()});
        f = f_next;
        if (opts.record_trace)
            report.trace.push_back(f);
        if (change <= opts.tol * scale)
        {
            report.converged = true;
            break;
        }
    }
    report.theta = std::move(theta);
    report.objective = f;
    return report;
}

CVector ccmo_initial_point(const BeamformingProblem& prob)
{
    const Eigen::Index n = prob.elements();
    if (prob.users() != 1)
        return unit_phases(n);
    const cplx b = prob.coeffs.b(0, 0);
    const CVector& g = prob.coeffs.g(0, 0);
    CVector theta(n);
    for (Eigen::Index i = 0; i < n; ++i)
        theta(i) = (g(i) == cplx(0.0)) ? cplx(1.0) : std::polar(1.0, std::arg(b) + std::arg(g(i)));
    return theta;
}

CcmoReport run_ccmo_multistart(const BeamformingProblem& prob, const QuadraticForm& form,
                               const std::vector<CVector>& extra_starts, const CcmoOptions& opts)
{
    std::vector<CVector> starts;
    starts.push_back(ccmo_initial_point(prob));
    for (const CVector& s : extra_starts)
        starts.push_back(s);
    Rng rng(opts.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (int r = 0; r < opts.restarts; ++r)
    {
        CVector s(prob.elements());
        for (Eigen::Index i = 0; i < s.size(); ++i)
            s(i) = std::polar(1.0, phase(rng));
        starts.push_back(std::move(s));
    }

    CcmoReport best;
    bool have = false;
    for (const CVector& s : starts)
    {
        CcmoReport rep = run_ccmo(form, s, opts);
        if (!have || rep.objective < best.objective)
        {
            best = std::move(rep);
            have = true;
        }
    }
    return best;
}

} // namespace irsopt
