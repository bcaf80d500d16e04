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

#include "irsopt/power_detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "irsopt/error.hpp"

namespace irsopt {

InterferenceMatrix build_interference(const CVectorList& h_eff, const CVectorList& F, const RVector& min_ratio,
                                      double noise_w)
{
    const std::size_t users = h_eff.size();
    if (F.size() != users || static_cast<std::size_t>(min_ratio.size()) != users)
        throw DimensionError("build_interference: inconsistent user counts");
    const auto n = static_cast<Eigen::Index>(users);
    InterferenceMatrix out{RMatrix::Zero(n, n), RVector::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const CVector& f = F[static_cast<std::size_t>(i)];
        const double desired = std::norm(f.dot(h_eff[static_cast<std::size_t>(i)]));
        if (!(desired > 0.0))
            throw SingularError("detector of user " + std::to_string(i) + " has no desired-signal projection");
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i)
                out.Q(i, j) = min_ratio(i) * std::norm(f.dot(h_eff[static_cast<std::size_t>(j)])) / desired;
        out.tau(i) = noise_w * min_ratio(i) * f.squaredNorm() / desired;
    }
    return out;
}

double spectral_radius(const RMatrix& Q, const SpectralRadiusOptions& opts)
{
    if (Q.rows() != Q.cols())
        throw DimensionError("spectral_radius: matrix must be square");
    if (Q.size() == 0)
        return 0.0;
    if ((Q.array() < 0.0).any())
        throw DomainError("spectral_radius: matrix must be entrywise nonnegative");
    if ((Q.array() == 0.0).all())
        return 0.0;

    // Collatz-Wielandt: min_i (Ax)_i / x_i <= rho(A) <= max_i (Ax)_i / x_i for positive x, A = c I + Q.
    // The shift c is the largest row sum so that it stays on the scale of rho(Q).
    const double shift = Q.rowwise().sum().maxCoeff();
    RVector x = RVector::Ones(Q.rows());
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < std::max(opts.max_iter, 1); ++it)
    {
        const RVector y = shift * x + Q * x;
        const RVector ratio = y.cwiseQuotient(x);
        lo = ratio.minCoeff();
        hi = ratio.maxCoeff();
        x = y / y.maxCoeff();
        if (hi - lo <= opts.tol * hi)
            break;
    }
    return 0.5 * (lo + hi) - shift;
}

PowerSolveReport solve_power_fixed_point(const InterferenceMatrix& system, const RVector& p0,
                                         const PowerSolveOptions& opts)
{
    const RMatrix& Q = system.Q;
    const RVector& tau = system.tau;
    if (Q.rows() != tau.size() || Q.cols() != tau.size())
        throw DimensionError("solve_power_fixed_point: Q and tau sizes differ");
    PowerSolveReport report;
    report.spectral_radius_estimate = spectral_radius(Q, opts.radius);
    if (!(report.spectral_radius_estimate < 1.0))
        throw InfeasibleError("spectral radius of the interference matrix is " +
                              std::to_string(report.spectral_radius_estimate) + " (>= 1)");

    RVector p = (p0.size() == tau.size()) ? p0 : RVector(RVector::Zero(tau.size()));
    for (int it = 1; it <= opts.max_iter; ++it)
    {
        RVector next = Q * p + tau;
        const double scale = next.cwiseAbs().maxCoeff();
        const double step = (next - p).cwiseAbs().maxCoeff();
        p = std::move(next);
        report.iterations = it;
        if (scale == 0.0 || step <= opts.tol * scale)
            break;
    }
    const double scale = p.cwiseAbs().maxCoeff();
    report.residual = scale > 0.0 ? (p - (Q * p + tau)).cwiseAbs().maxCoeff() / scale : 0.0;
    report.converged = report.residual <= opts.tol;
    report.p = std::move(p);
    return report;
}

CVector mvdr_detector(const RVector& p, const CVectorList& h_eff, double noise_w, std::size_t k)
{
    const std::size_t users = h_eff.size();
    if (static_cast<std::size_t>(p.size()) != users || k >= users)
        throw DimensionError("mvdr_detector: inconsistent user counts");
    if (!(noise_w > 0.0))
        throw DomainError("mvdr_detector: noise power must be positive");
    const CVector& h = h_eff[k];
    const Eigen::Index m = h.size();
    CMatrix R = noise_w * CMatrix::Identity(m, m);
    for (std::size_t j = 0; j < users; ++j)
        if (j != k && p(static_cast<Eigen::Index>(j)) != 0.0)
            R.selfadjointView<Eigen::Lower>().rankUpdate(h_eff[j], p(static_cast<Eigen::Index>(j)));
    const Eigen::LLT<CMatrix, Eigen::Lower> llt(R);
    if (llt.info() != Eigen::Success)
        throw SingularError("mvdr_detector: covariance is not positive definite");
    const CVector r_inv_h = llt.solve(h);
    const double denom = h.dot(r_inv_h).real();
    if (!(denom > 0.0))
        throw SingularError("mvdr_detector: zero effective channel");
    return r_inv_h / denom;
}

CVectorList mvdr_bank(const RVector& p, const CVectorList& h_eff, double noise_w)
{
    CVectorList out;
    out.reserve(h_eff.size());
    for (std::size_t k = 0; k < h_eff.size(); ++k)
        out.push_back(mvdr_detector(p, h_eff, noise_w, k));
    return out;
}

CVector matched_filter(const CVector& h)
{
    const double n2 = h.squaredNorm();
    if (!(n2 > 0.0))
        throw SingularError("matched_filter: zero channel");
    return h / n2;
}

CVectorList matched_filters(const CVectorList& h_eff)
{
    CVectorList out;
    out.reserve(h_eff.size());
    for (const auto& h : h_eff)
        out.push_back(matched_filter(h));
    return out;
}

double detector_quotient(const CVector& f, const RVector& p, const CVectorList& h_eff, double noise_w, std::size_t k)
{
    double num = noise_w * f.squaredNorm();
    for (std::size_t j = 0; j < h_eff.size(); ++j)
        if (j != k)
            num += p(static_cast<Eigen::Index>(j)) * std::norm(f.dot(h_eff[j]));
    const double den = std::norm(f.dot(h_eff[k]));
    if (!(den > 0.0))
        throw SingularError("detector_quotient: zero desired-signal projection");
    return num / den;
}

} // namespace irsopt
