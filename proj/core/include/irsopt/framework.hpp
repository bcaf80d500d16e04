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

#ifndef IRSOPT_FRAMEWORK_HPP
#define IRSOPT_FRAMEWORK_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irsopt/beamform_admm.hpp"
#include "irsopt/beamform_ccmo.hpp"
#include "irsopt/channel.hpp"
#include "irsopt/power_detect.hpp"
#include "irsopt/system.hpp"

namespace irsopt {

// none: the IRS is absent (direct links only). fixed_random: IRS present with i.i.d. uniform phases.
enum class Beamformer
{
    ccmo,
    admm,
    none,
    fixed_random
};

std::string_view to_string(Beamformer b);
Beamformer parse_beamformer(std::string_view name);

struct FrameworkConfig
{
    Beamformer beamformer = Beamformer::ccmo;
    double outer_tol = 1e-6;   // relative change of sum(p)
    double inner_tol = 1e-5;
    int max_outer = 100;
    int max_inner = 50;
    std::optional<double> power_cap_w;
    int max_cap_rounds = 20;
    std::uint64_t seed = 1;    // fixed-random phases and CCMO restarts
    CcmoOptions ccmo;
    AdmmOptions admm;
    PowerSolveOptions power;
};

struct TraceRecord
{
    int outer = 0;
    double sum_power_w = 0.0;
    RVector p;
    RVector sinr;
    double beamformer_objective = 0.0; // weighted sum of ratios A_k / B_k at the recorded state
    int inner_iterations = 0;
    double wall_ms = 0.0;
};

struct ConvergenceTrace
{
    std::vector<TraceRecord> records;

    // sum(p) nonincreasing up to a relative slack.
    bool monotone(double relative_slack = 1e-9) const;
};

struct SolveResult
{
    SolverState state;
    ConvergenceTrace trace;
    bool converged = false;
    int outer_iterations = 0;
    int inner_iterations = 0;
    int rejected_theta_updates = 0;

    double sum_power() const { return state.p.sum(); }
};

// Alternating optimization over (p, F, theta): power refresh, then an inner block-coordinate loop of MVDR,
// passive beamforming and power refresh. A beamformer update that would raise sum(p) is rejected.
// Throws InfeasibleError when no feasible start is found.
SolveResult solve(const FrameworkConfig& cfg, const ChannelSet& channels, const LatencyProfile& latency,
                  double noise_w, const std::optional<CVector>& theta_init = std::nullopt,
                  const RVector& weights = {});

struct MultiAntennaResult
{
    CVectorList q_bar;   // unit-norm transmit beamformers
    SolveResult solve;   // (p, F, theta) on the reduced channels
    int rounds = 0;
};

// Alternates the SIMO machinery on the effective channels (H_d + G Theta H_r) q_bar with an MVDR-form update
// of q_bar over w_kj = (H_d[j] + G Theta H_r[j])^H f_k.
MultiAntennaResult solve_multi_antenna(const FrameworkConfig& cfg, const MultiAntennaChannelSet& channels,
                                       const LatencyProfile& latency, double noise_w, int max_rounds = 10);

enum class CapVerdict
{
    feasible,
    infeasible_round_cap,
    infeasible_stalled
};

std::string_view to_string(CapVerdict v);

struct CappedResult
{
    SolveResult result;
    CapVerdict verdict = CapVerdict::infeasible_round_cap;
    int rounds = 0;
    RVector weights;
};

// Penalization loop: w_k <- w_k max{p_k, P_max} / P_max until every p_k <= P_max, the powers stop moving,
// or max_cap_rounds is reached.
CappedResult solve_with_power_caps(const FrameworkConfig& cfg, const ChannelSet& channels,
                                   const LatencyProfile& latency, double noise_w);

} // namespace irsopt

#endif
