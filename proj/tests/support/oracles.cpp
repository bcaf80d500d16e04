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

#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace irsopt::testing {

CVector random_cvector(Eigen::Index n, Rng& rng, double scale)
{
    std::normal_distribution<double> g(0.0, scale / std::sqrt(2.0));
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = cplx(g(rng), g(rng));
    return v;
}

CVector random_phases(Eigen::Index n, Rng& rng)
{
    std::uniform_real_distribution<double> u(-kPi, kPi);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = std::polar(1.0, u(rng));
    return v;
}

RVector random_uniform(Eigen::Index n, double lo, double hi, Rng& rng)
{
    std::uniform_real_distribution<double> u(lo, hi);
    RVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = u(rng);
    return v;
}

ChannelSet random_channels(Eigen::Index m, Eigen::Index n, std::size_t users, Rng& rng, bool rank_one_g)
{
    ChannelSet ch;
    for (std::size_t k = 0; k < users; ++k)
    {
        ch.h_direct.push_back(random_cvector(m, rng));
        if (n > 0)
            ch.h_irs.push_back(random_cvector(n, rng));
        ch.blockage.push_back(false);
    }
    if (n == 0)
        ch.G = CMatrix(m, 0);
    else if (rank_one_g)
        ch.G = random_cvector(m, rng) * random_cvector(n, rng).adjoint();
    else
    {
        ch.G = CMatrix(m, n);
        for (Eigen::Index c = 0; c < n; ++c)
            ch.G.col(c) = random_cvector(m, rng);
    }
    return ch;
}

InterferenceMatrix random_interference(std::size_t users, double max_radius, Rng& rng)
{
    const auto k = static_cast<Eigen::Index>(users);
    InterferenceMatrix sys{RMatrix::Zero(k, k), random_uniform(k, 0.1, 2.0, rng)};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            if (i != j)
                sys.Q(i, j) = u(rng);
    // Scale by the exact radius from a dense eigen solve.
    const double radius = sys.Q.eigenvalues().cwiseAbs().maxCoeff();
    if (radius > 0.0)
        sys.Q *= max_radius * u(rng) / radius;
    return sys;
}

RVector direct_power_solve(const InterferenceMatrix& sys)
{
    const Eigen::Index k = sys.Q.rows();
    return (RMatrix::Identity(k, k) - sys.Q).fullPivLu().solve(sys.tau);
}

InterferenceMatrix loop_interference(const CVectorList& h, const CVectorList& F, const RVector& ttilde,
                                     double noise_w)
{
    const auto k = static_cast<Eigen::Index>(h.size());
    InterferenceMatrix sys{RMatrix::Zero(k, k), RVector::Zero(k)};
    for (Eigen::Index i = 0; i < k; ++i)
    {
        cplx desired = 0.0;
        double fnorm = 0.0;
        for (Eigen::Index m = 0; m < F[i].size(); ++m)
        {
            desired += std::conj(F[i](m)) * h[i](m);
            fnorm += std::norm(F[i](m));
        }
        for (Eigen::Index j = 0; j < k; ++j)
        {
            if (j == i)
                continue;
            cplx cross = 0.0;
            for (Eigen::Index m = 0; m < F[i].size(); ++m)
                cross += std::conj(F[i](m)) * h[j](m);
            sys.Q(i, j) = ttilde(i) * std::norm(cross) / std::norm(desired);
        }
        sys.tau(i) = noise_w * ttilde(i) * fnorm / std::norm(desired);
    }
    return sys;
}

BeamformingProblem random_problem(Eigen::Index n, std::size_t users, Rng& rng, double g_scale)
{
    std::vector<cplx> b;
    CVectorList g;
    for (std::size_t k = 0; k < users; ++k)
        for (std::size_t j = 0; j < users; ++j)
        {
            b.push_back(random_cvector(1, rng)(0));
            g.push_back(random_cvector(n, rng, g_scale));
        }
    const auto kk = static_cast<Eigen::Index>(users);
    EffectiveCoeffs coeffs = EffectiveCoeffs::from_raw(users, n, b, g, random_uniform(kk, 0.5, 1.5, rng));
    return BeamformingProblem(coeffs, random_uniform(kk, 0.5, 2.0, rng), random_uniform(kk, 0.1, 0.6, rng), 0.2);
}

GridResult phase_grid_minimize(Eigen::Index n, int steps, const std::function<double(const CVector&)>& f)
{
    GridResult best;
    best.value = std::numeric_limits<double>::infinity();
    best.min = std::numeric_limits<double>::infinity();
    best.max = -std::numeric_limits<double>::infinity();
    std::vector<cplx> table(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s)
        table[static_cast<std::size_t>(s)] = std::polar(1.0, 2.0 * kPi * s / steps);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    CVector theta(n);
    while (true)
    {
        for (Eigen::Index i = 0; i < n; ++i)
            theta(i) = table[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        const double v = f(theta);
        best.min = std::min(best.min, v);
        best.max = std::max(best.max, v);
        if (v < best.value)
        {
            best.value = v;
            best.theta = theta;
        }
        Eigen::Index pos = 0;
        while (pos < n && ++idx[static_cast<std::size_t>(pos)] == steps)
            idx[static_cast<std::size_t>(pos++)] = 0;
        if (pos == n)
            break;
    }
    return best;
}

double tangent_directional_derivative(const std::function<double(const CVector&)>& f, const CVector& theta,
                                      const CVector& eta, double h)
{
    auto along = [&](double t) {
        CVector x = theta + t * eta;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) /= std::abs(x(i));
        return f(x);
    };
    return (along(h) - along(-h)) / (2.0 * h);
}

CVector compass_search(const std::function<double(const CVector&)>& f, CVector x, double step, double min_step,
                       int max_evals)
{
    double fx = f(x);
    int evals = 1;
    const Eigen::Index n = x.size();
    while (step > min_step && evals < max_evals)
    {
        bool improved = false;
        for (Eigen::Index i = 0; i < 2 * n; ++i)
        {
            for (double sign : {1.0, -1.0})
            {
                CVector y = x;
                const cplx delta = (i < n) ? cplx(sign * step, 0.0) : cplx(0.0, sign * step);
                y(i % n) += delta;
                const double fy = f(y);
                ++evals;
                if (fy < fx)
                {
                    x = std::move(y);
                    fx = fy;
                    improved = true;
                }
            }
        }
        if (!improved)
            step *= 0.5;
    }
    return x;
}

} // namespace irsopt::testing
