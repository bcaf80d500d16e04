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

#ifndef IRSOPT_POWER_DETECT_HPP
#define IRSOPT_POWER_DETECT_HPP

#include <cstddef>

#include "irsopt/types.hpp"

namespace irsopt {

// Latency constraints written as (I - Q) p >= tau.
//   Q[i][j] = Ttilde_i |f_i^H h_j|^2 / |f_i^H h_i|^2 (zero diagonal)
//   tau[i]  = sigma^2 Ttilde_i ||f_i||^2 / |f_i^H h_i|^2
struct InterferenceMatrix
{
    RMatrix Q;
    RVector tau;
};

InterferenceMatrix build_interference(const CVectorList& h_eff, const CVectorList& F, const RVector& min_ratio,
                                      double noise_w);

// Perron root of a nonnegative square matrix. Iterates on c I + Q with c the largest row sum (primitive
// whenever Q is irreducible) and stops when the Collatz-Wielandt bounds are within tol of each other.
struct SpectralRadiusOptions
{
    int max_iter = 50;
    double tol = 1e-8;
};

double spectral_radius(const RMatrix& Q, const SpectralRadiusOptions& opts = {});

struct PowerSolveOptions
{
    // Relative residual ||p - (Qp + tau)||_inf / ||p||_inf.
    double tol = 1e-13;
    int max_iter = 10000;
    SpectralRadiusOptions radius;
};

struct PowerSolveReport
{
    RVector p;
    int iterations = 0;
    double spectral_radius_estimate = 0.0;
    double residual = 0.0;
    bool converged = false;
};

// Iterates p <- Q p + tau from p0 (the Neumann-series form of (I - Q)^{-1} tau).
// Throws InfeasibleError when the spectral radius of Q is not below one.
PowerSolveReport solve_power_fixed_point(const InterferenceMatrix& system, const RVector& p0,
                                         const PowerSolveOptions& opts = {});

// f_k = R_k^{-1} h_k / (h_k^H R_k^{-1} h_k), R_k = sum_{j != k} p_j h_j h_j^H + sigma^2 I.
// Satisfies f_k^H h_k = 1.
CVector mvdr_detector(const RVector& p, const CVectorList& h_eff, double noise_w, std::size_t k);
CVectorList mvdr_bank(const RVector& p, const CVectorList& h_eff, double noise_w);

// h / ||h||^2.
CVector matched_filter(const CVector& h);
CVectorList matched_filters(const CVectorList& h_eff);

// Interference-plus-noise over desired power for detector f (the quantity MVDR minimizes).
double detector_quotient(const CVector& f, const RVector& p, const CVectorList& h_eff, double noise_w,
                         std::size_t k);

} // namespace irsopt

#endif
