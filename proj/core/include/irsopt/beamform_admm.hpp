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

#ifndef IRSOPT_BEAMFORM_ADMM_HPP
#define IRSOPT_BEAMFORM_ADMM_HPP

#include <vector>

#include "irsopt/system.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

// Passive beamforming subproblem for fixed powers and detectors.
//   A_k(theta) = w_k Ttilde_k (sum_{j != k} p_j |b_kj + g_kj^H theta|^2 + sigma^2 ||f_k||^2)
//   B_k(theta) = |b_kk + g_kk^H theta|^2
// The weights w_k are 1 unless per-user power caps are being enforced.
struct BeamformingProblem
{
    EffectiveCoeffs coeffs;
    RVector p;
    RVector min_ratio;
    double noise_w = 0.0;
    RVector weights;

    BeamformingProblem() = default;
    BeamformingProblem(EffectiveCoeffs c, RVector powers, RVector ratios, double noise, RVector w = {});

    std::size_t users() const { return coeffs.users(); }
    Eigen::Index elements() const { return coeffs.elements(); }
};

struct RatioTerms
{
    RVector A;
    RVector B;
};

RatioTerms ratio_terms(const BeamformingProblem& prob, const CVector& theta);

// sum_k A_k / B_k; equals sum_k w_k p_k Ttilde_k / Gamma_k(theta). Throws SingularError when some B_k = 0.
double sum_of_ratios(const BeamformingProblem& prob, const CVector& theta);

// beta_k = 1 / (2 A_k B_k), the exact minimizer of beta A^2 + 1 / (4 beta B^2).
RVector beta_from_terms(const RatioTerms& terms);
RVector update_beta(const BeamformingProblem& prob, const CVector& theta);

// sum_k beta_k A_k^2 + 1 / (4 beta_k B_k^2).
double transformed_objective(const BeamformingProblem& prob, const CVector& theta, const RVector& beta);

struct AdmmOptions
{
    double rho = 1.0;
    int max_outer = 50;
    int max_inner = 300;
    double tol = 1e-7;            // relative change of the sum of ratios between beta updates
    double tol_consensus = 1e-4;  // ||theta - q|| for ending an inner loop
    int stall_window = 20;        // rho doubles after this many inner iterations without residual progress
    int theta_max_iter = 500;
    double theta_tol = 1e-12;
    int q_max_iter = 200;
    double q_grad_tol = 1e-7;      // on the internally scaled objective
    double denominator_floor = 1e-12;
};

struct AdmmState
{
    CVector theta;
    CVector q;
    CVector r;
    RVector beta;
    double rho = 1.0;
};

// theta-step objective sum_k beta_k A_k(x)^2 + rho/2 ||x - q + r||^2.
double theta_step_objective(const BeamformingProblem& prob, const AdmmState& state, const CVector& x);

// q-step objective sum_k 1 / (4 beta_k B_k(x)^2) + rho/2 ||theta - x + r||^2.
double q_step_objective(const BeamformingProblem& prob, const AdmmState& state, const CVector& x,
                        double denominator_floor = 1e-12);

struct ThetaStepResult
{
    CVector theta;   // unit modulus
    CVector relaxed; // minimizer over |x_n| <= 1 before phase extraction
    int iterations = 0;
    bool converged = false;
};

// Projected gradient on the unit-disk relaxation, then theta_n = x_n / |x_n|.
ThetaStepResult admm_theta_step(const BeamformingProblem& prob, const AdmmState& state, const AdmmOptions& opts = {});

struct QStepResult
{
    CVector q;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;  // line search failed; q is the best iterate
    bool floored = false;  // some B_k(q) hit the denominator floor
};

// BFGS on the 2N real coordinates of q with Armijo backtracking (c = 1e-4, halving).
QStepResult admm_q_step(const BeamformingProblem& prob, const AdmmState& state, const AdmmOptions& opts = {});

struct AdmmReport
{
    CVector theta;                        // best unit-modulus iterate by sum of ratios
    double objective = 0.0;               // sum of ratios at theta
    std::vector<double> objective_trace;  // after each beta update
    std::vector<double> consensus_trace;  // ||theta - q|| per inner iteration
    int outer_iterations = 0;
    int inner_iterations = 0;
    double final_consensus = 0.0;
    bool converged = false;
    bool consensus_reached = false;
};

// Alternates beta updates with ADMM inner loops (theta-step, q-step, r <- r + theta - q); q, r and rho restart
// at every beta update. The objective is rescaled internally so that its value at theta0 equals N; rho and the
// q-step tolerance act on that scale.
// An inner loop ends when both the primal residual and rho times the q change fall below tol_consensus.
AdmmReport run_admm(const BeamformingProblem& prob, const CVector& theta0, const AdmmOptions& opts = {});

} // namespace irsopt

#endif
