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

#include "irsopt/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irsopt/error.hpp"
#include "irsopt/system.hpp"

namespace irsopt {

void PathLossParams::validate() const
{
    if (!(chi_b > 0.0))
        throw DomainError("path loss exponent chi_b must be positive");
    if (!(sigma_kappa_db >= 0.0))
        throw DomainError("shadowing standard deviation must be nonnegative");
}

double GainParams::irs_gain_dbi() const
{
    if (rho_i_dbi)
        return *rho_i_dbi;
    return nu_db + 0.5 * (rho_b_dbi + rho_u_dbi);
}

void GainParams::validate() const
{
    if (!std::isfinite(rho_u_dbi) || !std::isfinite(rho_b_dbi) || !std::isfinite(nu_db))
        throw DomainError("antenna gains must be finite");
    if (rho_i_dbi && !std::isfinite(*rho_i_dbi))
        throw DomainError("IRS element gain must be finite");
}

double distance(const Point& a, const Point& b)
{
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

double direction_sine(const Point& from, const Point& to, double broadside_rad)
{
    return std::sin(std::atan2(to.y - from.y, to.x - from.x) - broadside_rad);
}

ArrayDirection array_direction(const Point& from, const Point& to, double broadside_rad)
{
    const double r = distance(from, to);
    if (r <= 0.0)
        throw DomainError("array direction undefined for coincident points");
    const double el_sin = (to.z - from.z) / r;
    const double el_cos = std::sqrt(std::max(0.0, 1.0 - el_sin * el_sin));
    return {direction_sine(from, to, broadside_rad) * el_cos, el_sin};
}

CVector ula_steering(std::size_t m, double direction)
{
    if (m == 0)
        throw DimensionError("steering vector length must be positive");
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    const double center = (static_cast<double>(m) - 1.0) / 2.0;
    CVector a(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
    {
        const double phase = -kPi * direction * (static_cast<double>(i) - center);
        a(static_cast<Eigen::Index>(i)) = std::polar(scale, phase);
    }
    return a;
}

CVector ura_steering(std::size_t n_az, std::size_t n_el, double az, double el)
{
    if (n_az == 0 || n_el == 0)
        throw DimensionError("URA dimensions must be positive");
    const CVector a_az = ula_steering(n_az, az);
    const CVector a_el = ula_steering(n_el, el);
    CVector a(static_cast<Eigen::Index>(n_az * n_el));
    for (Eigen::Index i = 0; i < a_az.size(); ++i)
        a.segment(i * a_el.size(), a_el.size()) = a_az(i) * a_el;
    return a;
}

double path_loss_db(const PathLossParams& params, double distance_m, double kappa_db)
{
    if (!(distance_m > 0.0))
        throw DomainError("path loss distance must be positive, got " + std::to_string(distance_m));
    return params.chi_a_db + 10.0 * params.chi_b * std::log10(distance_m) + kappa_db;
}

double path_loss_db(const PathLossParams& params, double distance_m, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double kappa = params.sigma_kappa_db * normal(rng);
    return path_loss_db(params, distance_m, kappa);
}

cplx sample_path_gain(const PathLossParams& params, double distance_m, Rng& rng)
{
    const double pl = path_loss_db(params, distance_m, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = normal(rng);
    const double im = normal(rng);
    const double amp = std::sqrt(0.5 * std::pow(10.0, -pl / 10.0));
    return {amp * re, amp * im};
}

CVector assemble_direct_channel(std::size_t m, std::span<const PathComponent> paths, bool blocked,
                                double ap_amplitude, double user_amplitude)
{
    if (m == 0)
        throw DimensionError("AP antenna count must be positive");
    if (paths.empty())
        throw DimensionError("direct channel needs at least the LoS path entry");
    const double n_paths = static_cast<double>(paths.size());
    CVector h = CVector::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t l = blocked ? 1 : 0; l < paths.size(); ++l)
        h += paths[l].gain * ula_steering(m, paths[l].direction);
    return std::sqrt(static_cast<double>(m) / n_paths) * ap_amplitude * user_amplitude * h;
}

CVector assemble_irs_user_link(std::size_t n_az, std::size_t n_el, cplx gain, ArrayDirection dir,
                               double irs_amplitude, double user_amplitude)
{
    const double n = static_cast<double>(n_az * n_el);
    return std::sqrt(n) * gain * irs_amplitude * user_amplitude * ura_steering(n_az, n_el, dir.az, dir.el);
}

CMatrix assemble_ap_irs_link(std::size_t m, std::size_t n_az, std::size_t n_el, cplx gain, double ap_direction,
                             ArrayDirection irs_dir, double ap_amplitude, double irs_amplitude)
{
    const double mn = static_cast<double>(m * n_az * n_el);
    const CVector a_m = ula_steering(m, ap_direction);
    const CVector a_n = ura_steering(n_az, n_el, irs_dir.az, irs_dir.el);
    return (std::sqrt(mn) * gain * ap_amplitude * irs_amplitude) * (a_m * a_n.adjoint());
}

ChannelSet ChannelSet::without_irs() const
{
    ChannelSet out;
    out.h_direct = h_direct;
    out.blockage = blockage;
    out.G = CMatrix(ap_antennas(), 0);
    return out;
}

void ChannelSet::validate() const
{
    const std::size_t k = users();
    if (k == 0)
        throw DimensionError("channel set has no users");
    const Eigen::Index m = ap_antennas();
    for (const auto& h : h_direct)
        if (h.size() != m)
            throw DimensionError("direct channels disagree on the AP antenna count");
    if (blockage.size() != k)
        throw DimensionError("blockage flags do not match the user count");
    if (!has_irs())
    {
        if (!h_irs.empty())
            throw DimensionError("IRS channels given without an AP-IRS matrix");
        return;
    }
    if (G.rows() != m)
        throw DimensionError("AP-IRS matrix row count differs from the AP antenna count");
    if (h_irs.size() != k)
        throw DimensionError("IRS channels do not match the user count");
    for (const auto& h : h_irs)
        if (h.size() != G.cols())
            throw DimensionError("IRS channel length differs from the IRS element count");
}

namespace {

double uniform_sine(Rng& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return u(rng);
}

} // namespace

ChannelDraw draw_channel(const SystemConfig& cfg, Rng& rng)
{
    cfg.validate();
    const auto& geo = cfg.geometry;
    ChannelDraw draw;
    draw.users.resize(cfg.users);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::size_t k = 0; k < cfg.users; ++k)
    {
        UserDraw& u = draw.users[k];
        const Point& pos = geo.users[k];
        const double r_ap = distance(geo.ap, pos);
        u.blocked = unit(rng) < cfg.blockage_prob;
        u.direct.resize(cfg.nlos_paths + 1);
        u.direct[0].gain = sample_path_gain(cfg.los, r_ap, rng);
        u.direct[0].direction = direction_sine(geo.ap, pos, geo.ap_broadside_rad);
        for (std::size_t l = 1; l <= cfg.nlos_paths; ++l)
        {
            u.direct[l].gain = sample_path_gain(cfg.nlos, r_ap, rng);
            u.direct[l].direction = uniform_sine(rng);
        }
    }

    draw.ap_irs_gain = sample_path_gain(cfg.los, distance(geo.ap, geo.irs), rng);
    draw.ap_direction_to_irs = direction_sine(geo.ap, geo.irs, geo.ap_broadside_rad);
    draw.irs_direction_to_ap = array_direction(geo.irs, geo.ap, geo.irs_broadside_rad);
    for (std::size_t k = 0; k < cfg.users; ++k)
    {
        const Point& pos = geo.users[k];
        draw.users[k].irs_gain = sample_path_gain(cfg.los, distance(geo.irs, pos), rng);
        draw.users[k].irs_direction = array_direction(geo.irs, pos, geo.irs_broadside_rad);
    }
    return draw;
}

ChannelSet assemble_channels(const SystemConfig& cfg, const ChannelDraw& draw)
{
    const double amp_u = cfg.gain.user_amplitude();
    const double amp_b = cfg.gain.ap_amplitude();
    const double amp_i = cfg.gain.irs_amplitude();
    ChannelSet ch;
    for (const auto& u : draw.users)
    {
        ch.h_direct.push_back(assemble_direct_channel(cfg.ap_antennas, u.direct, u.blocked, amp_b, amp_u));
        ch.h_irs.push_back(assemble_irs_user_link(cfg.irs_az, cfg.irs_el, u.irs_gain, u.irs_direction, amp_i, amp_u));
        ch.blockage.push_back(u.blocked);
    }
    ch.G = assemble_ap_irs_link(cfg.ap_antennas, cfg.irs_az, cfg.irs_el, draw.ap_irs_gain, draw.ap_direction_to_irs,
                                draw.irs_direction_to_ap, amp_b, amp_i);
    return ch;
}

ChannelSet sample_channels(const SystemConfig& cfg, Rng& rng)
{
    return assemble_channels(cfg, draw_channel(cfg, rng));
}

CVector sample_direct_channel(const SystemConfig& cfg, std::size_t user, bool blocked, Rng& rng)
{
    cfg.validate();
    if (user >= cfg.geometry.users.size())
        throw DimensionError("user index out of range");
    const auto& geo = cfg.geometry;
    const Point& pos = geo.users[user];
    const double r_ap = distance(geo.ap, pos);
    std::vector<PathComponent> paths(cfg.nlos_paths + 1);
    paths[0].gain = sample_path_gain(cfg.los, r_ap, rng);
    paths[0].direction = direction_sine(geo.ap, pos, geo.ap_broadside_rad);
    for (std::size_t l = 1; l <= cfg.nlos_paths; ++l)
    {
        paths[l].gain = sample_path_gain(cfg.nlos, r_ap, rng);
        paths[l].direction = uniform_sine(rng);
    }
    return assemble_direct_channel(cfg.ap_antennas, paths, blocked, cfg.gain.ap_amplitude(), cfg.gain.user_amplitude());
}

IrsLinks sample_irs_links(const SystemConfig& cfg, Rng& rng)
{
    cfg.validate();
    const auto& geo = cfg.geometry;
    const double amp_u = cfg.gain.user_amplitude();
    const double amp_b = cfg.gain.ap_amplitude();
    const double amp_i = cfg.gain.irs_amplitude();
    IrsLinks links;
    const cplx g_gain = sample_path_gain(cfg.los, distance(geo.ap, geo.irs), rng);
    links.G = assemble_ap_irs_link(cfg.ap_antennas, cfg.irs_az, cfg.irs_el, g_gain,
                                   direction_sine(geo.ap, geo.irs, geo.ap_broadside_rad),
                                   array_direction(geo.irs, geo.ap, geo.irs_broadside_rad), amp_b, amp_i);
    for (std::size_t k = 0; k < cfg.users; ++k)
    {
        const Point& pos = geo.users[k];
        const cplx xi = sample_path_gain(cfg.los, distance(geo.irs, pos), rng);
        links.h_irs.push_back(assemble_irs_user_link(cfg.irs_az, cfg.irs_el, xi,
                                                     array_direction(geo.irs, pos, geo.irs_broadside_rad), amp_i, amp_u));
    }
    return links;
}

CVector perturb_csi(const CVector& h, double mu, Rng& rng)
{
    if (!(mu >= 0.0))
        throw DomainError("CSI uncertainty level must be nonnegative");
    if (mu == 0.0 || h.size() == 0)
        return h;
    std::normal_distribution<double> normal(0.0, 1.0);
    CVector dir(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i)
        dir(i) = cplx(normal(rng), normal(rng));
    const double n = dir.norm();
    if (n == 0.0)
        return h;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = unit(rng) * mu * h.norm();
    return h + (radius / n) * dir;
}

ChannelSet MultiAntennaChannelSet::reduce(const CVectorList& q_bar) const
{
    if (q_bar.size() != users())
        throw DimensionError("one transmit beamformer per user is required");
    ChannelSet ch;
    ch.G = G;
    ch.blockage = blockage;
    for (std::size_t k = 0; k < users(); ++k)
    {
        if (q_bar[k].size() != H_direct[k].cols())
            throw DimensionError("transmit beamformer length differs from the user antenna count");
        ch.h_direct.push_back(H_direct[k] * q_bar[k]);
        if (G.cols() > 0)
            ch.h_irs.push_back(H_irs[k] * q_bar[k]);
    }
    return ch;
}

MultiAntennaChannelSet MultiAntennaChannelSet::without_irs() const
{
    MultiAntennaChannelSet out;
    out.H_direct = H_direct;
    out.blockage = blockage;
    out.G = CMatrix(G.rows(), 0);
    return out;
}

MultiAntennaChannelSet assemble_multi_antenna_channels(const SystemConfig& cfg, const ChannelDraw& draw, Rng& aod_rng)
{
    const std::size_t nu = cfg.user_antennas;
    if (nu == 0)
        throw DimensionError("user antenna count must be positive");
    const double amp_u = cfg.gain.user_amplitude();
    const double amp_b = cfg.gain.ap_amplitude();
    const double amp_i = cfg.gain.irs_amplitude();
    const double root_nu = std::sqrt(static_cast<double>(nu));

    MultiAntennaChannelSet out;
    out.G = assemble_ap_irs_link(cfg.ap_antennas, cfg.irs_az, cfg.irs_el, draw.ap_irs_gain, draw.ap_direction_to_irs,
                                 draw.irs_direction_to_ap, amp_b, amp_i);
    for (const auto& u : draw.users)
    {
        CMatrix Hd = CMatrix::Zero(static_cast<Eigen::Index>(cfg.ap_antennas), static_cast<Eigen::Index>(nu));
        for (std::size_t l = 0; l < u.direct.size(); ++l)
        {
            const CVector a_user = ula_steering(nu, nu == 1 ? 0.0 : uniform_sine(aod_rng));
            if (l == 0 && u.blocked)
                continue;
            Hd += (u.direct[l].gain * ula_steering(cfg.ap_antennas, u.direct[l].direction)) * a_user.adjoint();
        }
        Hd *= std::sqrt(static_cast<double>(cfg.ap_antennas) / static_cast<double>(u.direct.size())) * amp_b * amp_u *
              root_nu;
        out.H_direct.push_back(std::move(Hd));

        const CVector a_user = ula_steering(nu, nu == 1 ? 0.0 : uniform_sine(aod_rng));
        const CVector hr = assemble_irs_user_link(cfg.irs_az, cfg.irs_el, u.irs_gain, u.irs_direction, amp_i, amp_u);
        out.H_irs.push_back(root_nu * hr * a_user.adjoint());
        out.blockage.push_back(u.blocked);
    }
    return out;
}

} // namespace irsopt
