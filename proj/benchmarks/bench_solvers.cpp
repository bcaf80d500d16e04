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

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "irsopt/beamform_admm.hpp"
#include "irsopt/beamform_ccmo.hpp"
#include "irsopt/channel.hpp"
#include "irsopt/framework.hpp"
#include "irsopt/power_detect.hpp"
#include "irsopt/system.hpp"

using namespace irsopt;

namespace {

SystemConfig olos_config(std::size_t users, std::size_t elements)
{
    SystemConfig cfg;
    cfg.users = users;
    cfg.blockage_prob = 1.0;
    cfg.irs_az = elements / 4;
    cfg.irs_el = 4;
    return cfg;
}

LatencyProfile profile(std::size_t users)
{
    std::vector<double> data(users, 6500.0);
    return LatencyProfile::make(data, 500e6, 0.05);
}

BeamformingProblem problem(std::size_t users, std::size_t elements)
{
    const SystemConfig cfg = olos_config(users, elements);
    Rng rng(7);
    const ChannelSet ch = sample_channels(cfg, rng);
    const CVectorList F = matched_filters(effective_channels(ch, CVector::Ones(cfg.irs_elements())));
    const LatencyProfile lat = profile(users);
    return BeamformingProblem(EffectiveCoeffs(ch, F), RVector::Constant(users, 1e-6), lat.min_ratio,
                              cfg.noise_power_w);
}

} // namespace

static void BM_PowerFixedPoint(benchmark::State& st)
{
    const auto k = static_cast<Eigen::Index>(st.range(0));
    InterferenceMatrix sys{RMatrix::Constant(k, k, 0.8 / static_cast<double>(k)), RVector::Ones(k)};
    sys.Q.diagonal().setZero();
    for (auto _ : st)
        benchmark::DoNotOptimize(solve_power_fixed_point(sys, RVector::Zero(k)));
}
BENCHMARK(BM_PowerFixedPoint)->Arg(2)->Arg(8)->Arg(32);

static void BM_MvdrBank(benchmark::State& st)
{
    const auto users = static_cast<std::size_t>(st.range(0));
    const SystemConfig cfg = olos_config(users, 16);
    Rng rng(3);
    const ChannelSet ch = sample_channels(cfg, rng);
    const CVectorList h = effective_channels(ch, CVector::Ones(16));
    const RVector p = RVector::Constant(static_cast<Eigen::Index>(users), 1e-6);
    for (auto _ : st)
        benchmark::DoNotOptimize(mvdr_bank(p, h, cfg.noise_power_w));
}
BENCHMARK(BM_MvdrBank)->Arg(1)->Arg(2)->Arg(4);

static void BM_Ccmo(benchmark::State& st)
{
    const auto n = static_cast<std::size_t>(st.range(0));
    const BeamformingProblem prob = problem(2, n);
    const QuadraticForm form = assemble_quadratic(prob);
    for (auto _ : st)
        benchmark::DoNotOptimize(run_ccmo(form, CVector::Ones(static_cast<Eigen::Index>(n))));
}
BENCHMARK(BM_Ccmo)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Admm(benchmark::State& st)
{
    const auto n = static_cast<std::size_t>(st.range(0));
    const BeamformingProblem prob = problem(2, n);
    for (auto _ : st)
        benchmark::DoNotOptimize(run_admm(prob, CVector::Ones(static_cast<Eigen::Index>(n))));
}
BENCHMARK(BM_Admm)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Framework(benchmark::State& st)
{
    const auto n = static_cast<std::size_t>(st.range(0));
    const SystemConfig cfg = olos_config(1, n);
    Rng rng(5);
    const ChannelSet ch = sample_channels(cfg, rng);
    FrameworkConfig fw;
    fw.beamformer = st.range(1) == 0 ? Beamformer::ccmo : Beamformer::admm;
    for (auto _ : st)
        benchmark::DoNotOptimize(solve(fw, ch, profile(1), cfg.noise_power_w));
    st.SetLabel(std::string(to_string(fw.beamformer)));
}
BENCHMARK(BM_Framework)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
