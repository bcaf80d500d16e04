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

#include "irsopt/system.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "irsopt/error.hpp"

namespace irsopt {

void SystemConfig::validate() const
{
    if (ap_antennas == 0 || irs_az == 0 || irs_el == 0 || users == 0 || user_antennas == 0)
        throw DimensionError("antenna, element and user counts must be at least one");
    if (!(bandwidth_hz > 0.0) || !(latency_s > 0.0) || !(noise_power_w > 0.0))
        throw DomainError("bandwidth, latency and noise power must be positive");
    if (!(carrier_hz > 0.0))
        throw DomainError("carrier frequency must be positive");
    if (!(blockage_prob >= 0.0 && blockage_prob <= 1.0))
        throw DomainError("blockage probability must lie in [0, 1]");
    if (geometry.users.size() < users)
        throw DimensionError("geometry lists " + std::to_string(geometry.users.size()) + " user positions for " +
                             std::to_string(users) + " users");
    gain.validate();
    los.validate();
    nlos.validate();
}

RVector protection_ratios(std::span<const double> data_nats, double bandwidth_hz, double latency_s)
{
    if (!(bandwidth_hz > 0.0) || !(latency_s > 0.0))
        throw DomainError("bandwidth and latency must be positive");
    RVector out(static_cast<Eigen::Index>(data_nats.size()));
    for (std::size_t k = 0; k < data_nats.size(); ++k)
    {
        if (!(data_nats[k] >= 0.0))
            throw DomainError("data sizes must be nonnegative");
        out(static_cast<Eigen::Index>(k)) = std::expm1(data_nats[k] / (bandwidth_hz * latency_s));
    }
    return out;
}

LatencyProfile LatencyProfile::make(std::span<const double> data_nats, double bandwidth_hz, double latency_s)
{
    LatencyProfile lp;
    lp.min_ratio = protection_ratios(data_nats, bandwidth_hz, latency_s);
    lp.data_nats = Eigen::Map<const RVector>(data_nats.data(), static_cast<Eigen::Index>(data_nats.size()));
    lp.bandwidth_hz = bandwidth_hz;
    lp.latency_s = latency_s;
    return lp;
}

CVector effective_channel(const ChannelSet& ch, const CVector& theta, std::size_t k)
{
    if (k >= ch.users())
        throw DimensionError("user index out of range");
    if (!ch.has_irs())
        return ch.h_direct[k];
    if (theta.size() != ch.irs_elements() || ch.h_irs[k].size() != theta.size())
        throw DimensionError("phase vector length differs from the IRS element count");
    return ch.h_direct[k] + ch.G * ch.h_irs[k].cwiseProduct(theta);
}

CVectorList effective_channels(const ChannelSet& ch, const CVector& theta)
{
    CVectorList out;
    out.reserve(ch.users());
    for (std::size_t k = 0; k < ch.users(); ++k)
        out.push_back(effective_channel(ch, theta, k));
    return out;
}

double sinr(const CVectorList& h_eff, const CVectorList& F, const RVector& p, double noise_w, std::size_t k)
{
    const std::size_t users = h_eff.size();
    if (F.size() != users || static_cast<std::size_t>(p.size()) != users || k >= users)
        throw DimensionError("sinr: inconsistent user counts");
    const CVector& f = F[k];
    const double f2 = f.squaredNorm();
    if (f2 == 0.0)
        throw SingularError("sinr: detector of user " + std::to_string(k) + " is zero");
    double interference = noise_w * f2;
    for (std::size_t j = 0; j < users; ++j)
        if (j != k)
            interference += p(static_cast<Eigen::Index>(j)) * std::norm(f.dot(h_eff[j]));
    return p(static_cast<Eigen::Index>(k)) * std::norm(f.dot(h_eff[k])) / interference;
}

double sinr(const SolverState& state, double noise_w, std::size_t k)
{
    return sinr(state.h_eff, state.F, state.p, noise_w, k);
}

RVector sinr_all(const SolverState& state, double noise_w)
{
    RVector out(static_cast<Eigen::Index>(state.h_eff.size()));
    for (std::size_t k = 0; k < state.h_eff.size(); ++k)
        out(static_cast<Eigen::Index>(k)) = sinr(state, noise_w, k);
    return out;
}

double latency_s(double sinr_value, double data_nats, double bandwidth_hz)
{
    if (!(sinr_value > 0.0))
        return std::numeric_limits<double>::infinity();
    return data_nats / (bandwidth_hz * std::log1p(sinr_value));
}

double latency_s(const SolverState& state, double noise_w, const LatencyProfile& profile, std::size_t k)
{
    return latency_s(sinr(state, noise_w, k), profile.data_nats(static_cast<Eigen::Index>(k)), profile.bandwidth_hz);
}

EffectiveCoeffs::EffectiveCoeffs(const ChannelSet& ch, const CVectorList& F)
    : users_(ch.users()), elements_(ch.irs_elements())
{
    if (F.size() != users_)
        throw DimensionError("one detector per user is required");
    b_.resize(users_ * users_);
    g_.resize(users_ * users_);
    f_norm2_.resize(static_cast<Eigen::Index>(users_));
    for (std::size_t k = 0; k < users_; ++k)
    {
        const CVector& f = F[k];
        if (f.size() != ch.ap_antennas())
            throw DimensionError("detector length differs from the AP antenna count");
        f_norm2_(static_cast<Eigen::Index>(k)) = f.squaredNorm();
        // G^H f_k is shared by every j: g_kj = conj(h_r[j]) .* (G^H f_k).
        const CVector gf = ch.has_irs() ? CVector(ch.G.adjoint() * f) : CVector(0);
        for (std::size_t j = 0; j < users_; ++j)
        {
            b(k, j) = f.dot(ch.h_direct[j]);
            g(k, j) = ch.has_irs() ? CVector(ch.h_irs[j].conjugate().cwiseProduct(gf)) : CVector(0);
        }
    }
}

cplx EffectiveCoeffs::projection(std::size_t k, std::size_t j, const CVector& theta) const
{
    const CVector& gk = g(k, j);
    if (gk.size() == 0)
        return b(k, j);
    return b(k, j) + gk.dot(theta);
}

EffectiveCoeffs EffectiveCoeffs::from_raw(std::size_t users, Eigen::Index elements, std::vector<cplx> b, CVectorList g,
                                          RVector f_norm2)
{
    if (b.size() != users * users || g.size() != users * users || static_cast<std::size_t>(f_norm2.size()) != users)
        throw DimensionError("raw coefficient sizes do not match the user count");
    for (const auto& v : g)
        if (v.size() != elements)
            throw DimensionError("raw g vectors must have the element count as length");
    EffectiveCoeffs c;
    c.users_ = users;
    c.elements_ = elements;
    c.b_ = std::move(b);
    c.g_ = std::move(g);
    c.f_norm2_ = std::move(f_norm2);
    return c;
}

} // namespace irsopt
