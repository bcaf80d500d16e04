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

#ifndef IRSOPT_BEAMFORM_CCMO_HPP
#define IRSOPT_BEAMFORM_CCMO_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "irsopt/beamform_admm.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

// Sum of latency residuals as a quadratic in theta: f0(theta) = theta^H U theta + 2 Re(theta^H v) + C.
struct QuadraticForm
{
    CMatrix U;
    CVector v;
    double C = 0.0;

    // f0, the value being maximized.
    double residual_sum(const CVector& theta) const;
};

// U, v, C such that f0(theta) equals the sum of latency_residuals(prob, theta) for every theta.
QuadraticForm assemble_quadratic(const BeamformingProblem& prob);

// alpha_k = w_k [p_k |b_kk + g_kk^H theta|^2 - Ttilde_k (sum_{j != k} p_j |b_kj + g_kj^H theta|^2 + sigma^2 ||f_k||^2)]
RVector latency_residuals(const BeamformingProblem& prob, const CVector& theta);

// Minimized objective f(theta) = -theta^H U theta - 2 Re(theta^H v).
double ccmo_objective(const QuadraticForm& form, const CVector& theta);

// -2 U theta - 2 v.
CVector euclidean_gradient(const QuadraticForm& form, const CVector& theta);

// Tangent projection grad - Re{conj(grad) .* theta} .* theta.
CVector riemannian_gradient(const QuadraticForm& form, const CVector& theta);

// (theta_n + s_n) / |theta_n + s_n|; throws SingularError if some |theta_n + s_n| < 1e-14.
CVector retract(const CVector& theta, const CVector& step);

// Largest eigenvalue magnitude of a Hermitian matrix by power iteration.
double hermitian_spectral_norm(const CMatrix& U, int max_iter = 200, double tol = 1e-10);

// 2 max_n (sum_m |U_nm| + lambda + |v_n|) with lambda the spectral norm of U. A constant step at or below
// its inverse cannot increase f.
double descent_step_bound(const QuadraticForm& form);

struct CcmoOptions
{
    int max_iter = 5000;
    double tol = 1e-8;                 // relative change of f between iterates
    std::optional<double> step;        // user step; capped by 1 / descent_step_bound
    bool backtracking = false;
    int restarts = 3;                  // random starts in addition to the deterministic ones
    std::uint64_t seed = 0x5eedULL;
    bool record_trace = false;
};

struct CcmoReport
{
    CVector theta;
    double objective = 0.0;       // f at theta
    std::vector<double> trace;    // f per iterate when requested
    int iterations = 0;
    double step = 0.0;
    int retraction_halvings = 0;
    bool converged = false;
};

// Riemannian gradient descent with constant step min(step, 1 / descent_step_bound(form)).
CcmoReport run_ccmo(const QuadraticForm& form, const CVector& theta0, const CcmoOptions& opts = {});

// Deterministic starting point: phase alignment with b_11 for a single user, all ones otherwise.
CVector ccmo_initial_point(const BeamformingProblem& prob);

// Runs from the deterministic start, from each extra start given, and from opts.restarts random phase
// vectors, keeping the lowest f.
CcmoReport run_ccmo_multistart(const BeamformingProblem& prob, const QuadraticForm& form,
                               const std::vector<CVector>& extra_starts, const CcmoOptions& opts = {});

} // namespace irsopt

#endif
