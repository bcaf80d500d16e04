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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "irsopt/beamform_ccmo.hpp"
#include "irsopt/error.hpp"
#include "irsopt/system.hpp"
#include "oracles.hpp"

using namespace irsopt;
using namespace irsopt::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CVector random_tangent(const CVector& theta, Rng& rng)
{
    // i t theta with real t is tangent to the circle at theta.
    const RVector t = random_uniform(theta.size(), -1.0, 1.0, rng);
    CVector eta(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n)
        eta(n) = cplx(0.0, t(n)) * theta(n);
    return eta;
}

double max_tangency(const CVector& theta, const CVector& eta)
{
    double worst = 0.0;
    for (Eigen::Index n = 0; n < theta.size(); ++n)
        worst = std::max(worst, std::abs((std::conj(eta(n)) * theta(n)).real()));
    return worst;
}

} // namespace

TEST_CASE("single user quadratic is rank one", "[ccmo]")
{
    Rng rng(51);
    const auto prob = random_problem(6, 1, rng);
    const QuadraticForm form = assemble_quadratic(prob);
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(form.U).eigenvalues();
    CHECK(ev(5) > 0.0);
    CHECK(ev.head(5).cwiseAbs().maxCoeff() < 1e-12 * ev(5));
    CHECK_THAT(ev(5), WithinRel(prob.p(0) * prob.coeffs.g(0, 0).squaredNorm(), 1e-12));
}

TEST_CASE("quadratic form reproduces the latency residuals", "[ccmo][property]")
{
    Rng rng(52);
    for (int t = 0; t < 200; ++t)
    {
        const std::size_t users = 1 + static_cast<std::size_t>(t % 3);
        auto prob = random_problem(5, users, rng);
        prob.weights = random_uniform(static_cast<Eigen::Index>(users), 0.5, 2.0, rng);
        const QuadraticForm form = assemble_quadratic(prob);
        CHECK((form.U - form.U.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        const CVector theta = random_phases(5, rng);
        const RVector alpha = latency_residuals(prob, theta);
        const double scale = 1.0 + alpha.cwiseAbs().sum();
        CHECK_THAT(form.residual_sum(theta), WithinAbs(alpha.sum(), 1e-10 * scale));
        // Maximizing the residual sum and minimizing f differ by the constant C.
        CHECK_THAT(form.residual_sum(theta) + ccmo_objective(form, theta), WithinAbs(form.C, 1e-10 * scale));
    }
}

TEST_CASE("residual sign matches the latency constraint", "[ccmo]")
{
    Rng rng(53);
    int both = 0;
    for (int t = 0; t < 50; ++t)
    {
        const ChannelSet ch = random_channels(4, 5, 2, rng);
        const CVectorList F{random_cvector(4, rng), random_cvector(4, rng)};
        const RVector p = random_uniform(2, 0.2, 2.0, rng);
        const RVector tt = random_uniform(2, 0.1, 2.0, rng);
        const BeamformingProblem prob(EffectiveCoeffs(ch, F), p, tt, 0.3);
        const CVector theta = random_phases(5, rng);
        const RVector alpha = latency_residuals(prob, theta);
        const CVectorList h = effective_channels(ch, theta);
        for (std::size_t k = 0; k < 2; ++k)
        {
            const bool met = sinr(h, F, p, 0.3, k) >= tt(static_cast<Eigen::Index>(k));
            CHECK(met == (alpha(static_cast<Eigen::Index>(k)) >= 0.0));
            both += met ? 1 : 0;
        }
    }
    CHECK(both > 0);
    CHECK(both < 100);
}

TEST_CASE("identity quadratic has zero Riemannian gradient", "[ccmo]")
{
    Rng rng(54);
    const QuadraticForm form{CMatrix::Identity(4, 4), CVector::Zero(4), 0.0};
    const CVector theta = random_phases(4, rng);
    CHECK(riemannian_gradient(form, theta).norm() < 1e-15);
}

TEST_CASE("Riemannian gradient is tangent and matches finite differences", "[ccmo][property]")
{
    Rng rng(55);
    for (int t = 0; t < 100; ++t)
    {
        const auto prob = random_problem(6, 2, rng);
        const QuadraticForm form = assemble_quadratic(prob);
        const CVector theta = random_phases(6, rng);
        const CVector rg = riemannian_gradient(form, theta);
        CHECK(max_tangency(theta, rg) < 1e-12 * (1.0 + rg.norm()));
        const CVector eta = random_tangent(theta, rng);
        const double analytic = eta.dot(rg).real();
        const auto f = [&](const CVector& x) { return ccmo_objective(form, x); };
        const double numeric = tangent_directional_derivative(f, theta, eta);
        CHECK(std::abs(analytic - numeric) <= 1e-6 * std::max(std::abs(analytic), 1e-3 * rg.norm()));
    }
}

TEST_CASE("retraction properties", "[ccmo]")
{
    Rng rng(56);
    const CVector theta = random_phases(5, rng);
    CHECK((retract(theta, CVector::Zero(5)) - theta).norm() < 1e-15);
    const CVector eta = random_tangent(theta, rng);
    const CVector out = retract(theta, 0.7 * eta);
    CHECK((out.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);
    // Second-order agreement with the straight step along a tangent direction.
    const double e1 = (retract(theta, 1e-3 * eta) - (theta + 1e-3 * eta)).norm();
    const double e2 = (retract(theta, 5e-4 * eta) - (theta + 5e-4 * eta)).norm();
    CHECK_THAT(e1 / e2, WithinRel(4.0, 1e-2));
    CVector cancel = CVector::Zero(5);
    cancel(2) = -theta(2);
    CHECK_THROWS_AS(retract(theta, cancel), SingularError);
    CHECK_THROWS_AS(retract(theta, CVector::Zero(4)), DimensionError);
}

TEST_CASE("spectral norm by power iteration agrees with an eigen solve", "[ccmo]")
{
    Rng rng(57);
    for (int t = 0; t < 30; ++t)
    {
        const auto prob = random_problem(8, 3, rng);
        const QuadraticForm form = assemble_quadratic(prob);
        const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(form.U).eigenvalues();
        const double exact = ev.cwiseAbs().maxCoeff();
        CHECK_THAT(hermitian_spectral_norm(form.U, 5000, 1e-14), WithinRel(exact, 1e-6));
    }
    CHECK(hermitian_spectral_norm(CMatrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("descent is monotone and iterates stay on the manifold", "[ccmo][property]")
{
    Rng rng(58);
    for (int t = 0; t < 20; ++t)
    {
        const auto prob = random_problem(8, 2, rng);
        const QuadraticForm form = assemble_quadratic(prob);
        const CVector start = random_phases(8, rng);
        CcmoOptions opts;
        opts.record_trace = true;
        const CcmoReport rep = run_ccmo(form, start, opts);
        for (std::size_t i = 1; i < rep.trace.size(); ++i)
            CHECK(rep.trace[i] <= rep.trace[i - 1] + 1e-12 * std::abs(rep.trace[i - 1]));
        for (int stop : {1, 2, 5, 20})
        {
            opts.max_iter = stop;
            const CVector th = run_ccmo(form, start, opts).theta;
            CHECK((th.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("single element reaches the phase-aligned optimum", "[ccmo]")
{
    Rng rng(59);
    for (int t = 0; t < 20; ++t)
    {
        const auto prob = random_problem(1, 1, rng);
        const QuadraticForm form = assemble_quadratic(prob);
        const CcmoReport rep = run_ccmo(form, CVector::Ones(1));
        const double b = std::abs(prob.coeffs.b(0, 0));
        const double g = std::abs(prob.coeffs.g(0, 0)(0));
        const double best = prob.p(0) * (b + g) * (b + g) -
                            prob.min_ratio(0) * prob.noise_w * prob.coeffs.f_norm2(0);
        CHECK_THAT(form.residual_sum(rep.theta), WithinAbs(best, 1e-7 * std::abs(best) + 1e-12));
    }
}

TEST_CASE("multistart is close to the exhaustive maximum for three elements", "[ccmo]")
{
    Rng rng(60);
    for (int t = 0; t < 8; ++t)
    {
        const auto prob = random_problem(3, 2, rng);
        const QuadraticForm form = assemble_quadratic(prob);
        const auto neg = [&](const CVector& th) { return -form.residual_sum(th); };
        const GridResult grid = phase_grid_minimize(3, 64, neg);
        const double top = -grid.value;
        const double bottom = -grid.max;
        const CcmoReport rep = run_ccmo_multistart(prob, form, {});
        CHECK(form.residual_sum(rep.theta) - bottom >= 0.95 * (top - bottom));
    }
}

TEST_CASE("initial point aligns a single user", "[ccmo]")
{
    Rng rng(61);
    const auto prob = random_problem(4, 1, rng);
    const CVector theta = ccmo_initial_point(prob);
    const cplx proj = prob.coeffs.projection(0, 0, theta);
    double sum = std::abs(prob.coeffs.b(0, 0));
    for (Eigen::Index n = 0; n < 4; ++n)
        sum += std::abs(prob.coeffs.g(0, 0)(n));
    CHECK_THAT(std::abs(proj), WithinRel(sum, 1e-12));
    CHECK(ccmo_initial_point(random_problem(4, 2, rng)) == CVector::Ones(4));
}

TEST_CASE("run_ccmo argument checks", "[ccmo]")
{
    Rng rng(62);
    const QuadraticForm form = assemble_quadratic(random_problem(3, 2, rng));
    CHECK_THROWS_AS(run_ccmo(form, CVector::Constant(3, 0.5)), DomainError);
    CHECK_THROWS_AS(run_ccmo(form, CVector::Ones(2)), DimensionError);
    CcmoOptions opts;
    opts.step = -1.0;
    CHECK_THROWS_AS(run_ccmo(form, CVector::Ones(3), opts), DomainError);
    opts.step = 1e-6;
    CHECK(run_ccmo(form, CVector::Ones(3), opts).step == 1e-6);
}
