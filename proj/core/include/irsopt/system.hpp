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

#ifndef IRSOPT_SYSTEM_HPP
#define IRSOPT_SYSTEM_HPP

#include <cstddef>
#include <span>

#include "irsopt/channel.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

// Scalar description of one IRS-assisted uplink instance. Powers are kept in watts.
struct SystemConfig
{
    std::size_t ap_antennas = 32;     // M
    std::size_t irs_az = 5;           // N_az
    std::size_t irs_el = 4;           // N_el
    std::size_t users = 1;            // K
    std::size_t user_antennas = 1;    // N_u
    std::size_t nlos_paths = 3;       // L
    double bandwidth_hz = 500e6;      // W
    double noise_power_w = dbm_to_watts(-85.0);
    double latency_s = 0.05;          // T
    double carrier_hz = 28e9;
    double blockage_prob = 0.0;       // rho_b
    GainParams gain;
    PathLossParams los = los_path_loss_28ghz();
    PathLossParams nlos = nlos_path_loss_28ghz();
    Geometry geometry;

    std::size_t irs_elements() const { return irs_az * irs_el; }
    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }

    void validate() const;
    bool operator==(const SystemConfig&) const = default;
};

// Ttilde_k = exp(D_k / (W T)) - 1. D is in nats, hence the natural logarithm everywhere below.
RVector protection_ratios(std::span<const double> data_nats, double bandwidth_hz, double latency_s);

struct LatencyProfile
{
    RVector data_nats;
    double bandwidth_hz = 0.0;
    double latency_s = 0.0;
    RVector min_ratio; // Ttilde

    static LatencyProfile make(std::span<const double> data_nats, double bandwidth_hz, double latency_s);
    std::size_t users() const { return static_cast<std::size_t>(data_nats.size()); }
};

// h_eff[k] = h_d[k] + G diag(h_r[k]) theta.
CVectorList effective_channels(const ChannelSet& ch, const CVector& theta);
CVector effective_channel(const ChannelSet& ch, const CVector& theta, std::size_t k);

// Current (p, F, theta) with the effective channels cached for theta.
struct SolverState
{
    RVector p;
    CVectorList F;
    CVector theta;
    CVectorList h_eff;

    void refresh(const ChannelSet& ch) { h_eff = effective_channels(ch, theta); }
};

// Gamma_k = p_k |f_k^H h_k|^2 / (sum_{j != k} p_j |f_k^H h_j|^2 + sigma^2 ||f_k||^2).
double sinr(const CVectorList& h_eff, const CVectorList& F, const RVector& p, double noise_w, std::size_t k);
double sinr(const SolverState& state, double noise_w, std::size_t k);
RVector sinr_all(const SolverState& state, double noise_w);

// D_k / (W ln(1 + Gamma_k)); +infinity when Gamma_k = 0.
double latency_s(double sinr_value, double data_nats, double bandwidth_hz);
double latency_s(const SolverState& state, double noise_w, const LatencyProfile& profile, std::size_t k);

// b[k][j] = f_k^H h_d[j] and g[k][j] = G_{h,j}^H f_k with G_{h,j} = G diag(h_r[j]).
class EffectiveCoeffs
{
public:
    EffectiveCoeffs() = default;
    EffectiveCoeffs(const ChannelSet& ch, const CVectorList& F);

    std::size_t users() const { return users_; }
    Eigen::Index elements() const { return elements_; }

    const cplx& b(std::size_t k, std::size_t j) const { return b_[k * users_ + j]; }
    const CVector& g(std::size_t k, std::size_t j) const { return g_[k * users_ + j]; }
    double f_norm2(std::size_t k) const { return f_norm2_(static_cast<Eigen::Index>(k)); }

    // b + g^H theta = f_k^H h_eff[j].
    cplx projection(std::size_t k, std::size_t j, const CVector& theta) const;

    cplx& b(std::size_t k, std::size_t j) { return b_[k * users_ + j]; }
    CVector& g(std::size_t k, std::size_t j) { return g_[k * users_ + j]; }

    // Raw construction for synthetic problem instances.
    static EffectiveCoeffs from_raw(std::size_t users, Eigen::Index elements, std::vector<cplx> b,
                                    CVectorList g, RVector f_norm2);

private:
    std::size_t users_ = 0;
    Eigen::Index elements_ = 0;
    std::vector<cplx> b_;
    CVectorList g_;
    RVector f_norm2_;
};

} // namespace irsopt

#endif
