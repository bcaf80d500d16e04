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

#ifndef IRSOPT_CHANNEL_HPP
#define IRSOPT_CHANNEL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "irsopt/types.hpp"

namespace irsopt {

struct SystemConfig;

// Log-distance path loss PL(R) = chi_a + 10 chi_b log10(R) + kappa, kappa ~ N(0, sigma_kappa^2), all in dB.
struct PathLossParams
{
    double chi_a_db = 61.4;
    double chi_b = 2.0;
    double sigma_kappa_db = 5.8;

    void validate() const;
    bool operator==(const PathLossParams&) const = default;
};

// 28 GHz measurement fits for the LoS and NLoS cases.
inline PathLossParams los_path_loss_28ghz() { return {61.4, 2.0, 5.8}; }
inline PathLossParams nlos_path_loss_28ghz() { return {72.0, 2.92, 8.7}; }

// Element gains in dBi. The IRS element gain is either given directly or derived from the relative
// reflection gain nu = rho_I / sqrt(rho_B rho_U), evaluated in the dB domain.
struct GainParams
{
    double rho_u_dbi = 0.0;
    double rho_b_dbi = 9.82;
    double nu_db = 15.0;
    std::optional<double> rho_i_dbi;

    double irs_gain_dbi() const;

    // Linear amplitude factors 10^(dBi/20) as they enter the channel expressions.
    double user_amplitude() const { return db_to_amplitude(rho_u_dbi); }
    double ap_amplitude() const { return db_to_amplitude(rho_b_dbi); }
    double irs_amplitude() const { return db_to_amplitude(irs_gain_dbi()); }

    void validate() const;
    bool operator==(const GainParams&) const = default;
};

struct Point
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);

// Positions in meters. The AP ULA broadside points along +y, the IRS faces -x toward the AP.
struct Geometry
{
    Point ap{0.0, 0.0, 0.0};
    Point irs{80.0, 0.0, 0.0};
    std::vector<Point> users{{40.0, 40.0, 0.0}, {50.0, -20.0, 0.0}};
    double ap_broadside_rad = kPi / 2.0;
    double irs_broadside_rad = kPi;

    bool operator==(const Geometry&) const = default;
};

// Directional sines seen by a planar array: azimuth within the array plane, elevation out of it.
struct ArrayDirection
{
    double az = 0.0;
    double el = 0.0;
};

// Directional sine sin(atan2(dy, dx) - broadside) from `from` toward `to`, horizontal plane only.
double direction_sine(const Point& from, const Point& to, double broadside_rad);

// Azimuth/elevation directional sines of `to` as seen from an array at `from`.
ArrayDirection array_direction(const Point& from, const Point& to, double broadside_rad);

// Normalized ULA response with half-wavelength spacing and centered element indices:
// entry i = exp(-j pi direction (i - (m-1)/2)) / sqrt(m).
CVector ula_steering(std::size_t m, double direction);

// URA response a_{n_az}(az) (x) a_{n_el}(el).
CVector ura_steering(std::size_t n_az, std::size_t n_el, double az, double el);

// Deterministic part plus an explicit shadowing term kappa_db.
double path_loss_db(const PathLossParams& params, double distance_m, double kappa_db);

// Draws kappa ~ N(0, sigma_kappa^2).
double path_loss_db(const PathLossParams& params, double distance_m, Rng& rng);

// xi ~ CN(0, 10^(-PL/10)).
cplx sample_path_gain(const PathLossParams& params, double distance_m, Rng& rng);

// One propagation path: complex gain and arrival direction (directional sine).
struct PathComponent
{
    cplx gain{0.0, 0.0};
    double direction = 0.0;
};

// sqrt(M/(L+1)) rho_B rho_U sum_l xi_l a_M(phi_l); paths[0] is the LoS path and is dropped when blocked.
// A blocked user with no NLoS paths gets the zero vector.
CVector assemble_direct_channel(std::size_t m, std::span<const PathComponent> paths, bool blocked,
                                double ap_amplitude, double user_amplitude);

// sqrt(N) xi rho_I rho_U a_N(az, el).
CVector assemble_irs_user_link(std::size_t n_az, std::size_t n_el, cplx gain, ArrayDirection dir,
                               double irs_amplitude, double user_amplitude);

// sqrt(MN) xi rho_B rho_I a_M(phi) a_N^H(az, el); rank one by construction.
CMatrix assemble_ap_irs_link(std::size_t m, std::size_t n_az, std::size_t n_el, cplx gain, double ap_direction,
                             ArrayDirection irs_dir, double ap_amplitude, double irs_amplitude);

// One realization of all links.
struct ChannelSet
{
    CVectorList h_direct; // M per user
    CVectorList h_irs;    // N per user, empty when no IRS is deployed
    CMatrix G;            // M x N
    std::vector<bool> blockage;

    std::size_t users() const { return h_direct.size(); }
    Eigen::Index ap_antennas() const { return h_direct.empty() ? 0 : h_direct.front().size(); }
    Eigen::Index irs_elements() const { return G.cols(); }
    bool has_irs() const { return G.cols() > 0; }

    // Copy with the IRS removed (no-IRS baseline).
    ChannelSet without_irs() const;

    void validate() const;
};

// Random quantities behind one realization; assembling is deterministic given a draw.
struct UserDraw
{
    bool blocked = false;
    std::vector<PathComponent> direct; // [0] = LoS, then NLoS paths
    cplx irs_gain{0.0, 0.0};
    ArrayDirection irs_direction;      // user as seen from the IRS
};

struct ChannelDraw
{
    std::vector<UserDraw> users;
    cplx ap_irs_gain{0.0, 0.0};
    double ap_direction_to_irs = 0.0;
    ArrayDirection irs_direction_to_ap;
};

// Draw order per user: blockage uniform, LoS gain, then (gain, AoA) for each NLoS path; afterwards the
// AP-IRS gain and the user-IRS gains. Gains are standard normals scaled by the path loss so realizations
// stay coupled when geometry or the blockage probability change under a fixed seed.
ChannelDraw draw_channel(const SystemConfig& cfg, Rng& rng);

ChannelSet assemble_channels(const SystemConfig& cfg, const ChannelDraw& draw);

ChannelSet sample_channels(const SystemConfig& cfg, Rng& rng);

CVector sample_direct_channel(const SystemConfig& cfg, std::size_t user, bool blocked, Rng& rng);

struct IrsLinks
{
    CVectorList h_irs;
    CMatrix G;
};

IrsLinks sample_irs_links(const SystemConfig& cfg, Rng& rng);

// h + dh with ||dh|| = u mu ||h||, u ~ U(0,1), direction uniform on the complex sphere.
CVector perturb_csi(const CVector& h, double mu, Rng& rng);

// Multi-antenna users: H_d[k] is M x N_u, H_r[k] is N x N_u.
struct MultiAntennaChannelSet
{
    std::vector<CMatrix> H_direct;
    std::vector<CMatrix> H_irs;
    CMatrix G;
    std::vector<bool> blockage;

    std::size_t users() const { return H_direct.size(); }
    Eigen::Index user_antennas() const { return H_direct.empty() ? 0 : H_direct.front().cols(); }

    // Effective SIMO channels for fixed normalized transmit beamformers.
    ChannelSet reduce(const CVectorList& q_bar) const;
    MultiAntennaChannelSet without_irs() const;
};

// Each path gets the user-side factor sqrt(N_u) a_{N_u}(psi)^H; user departure sines come from
// `aod_rng` so the SIMO part of the draw is shared with sample_channels.
MultiAntennaChannelSet assemble_multi_antenna_channels(const SystemConfig& cfg, const ChannelDraw& draw, Rng& aod_rng);

} // namespace irsopt

#endif
