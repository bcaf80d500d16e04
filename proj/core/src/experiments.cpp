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

#include "irsopt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "irsopt/error.hpp"

namespace irsopt {

using nlohmann::json;

std::string_view to_string(SweepVariable v)
{
    switch (v)
    {
    case SweepVariable::irs_elements: return "N";
    case SweepVariable::user1_x: return "d_x1";
    case SweepVariable::data_size: return "D";
    case SweepVariable::reflection_gain: return "nu";
    case SweepVariable::blockage_prob: return "rho_b";
    case SweepVariable::user_antennas: return "N_u";
    case SweepVariable::latency: return "T";
    }
    return "unknown";
}

SweepVariable parse_sweep_variable(std::string_view name)
{
    for (auto v : {SweepVariable::irs_elements, SweepVariable::user1_x, SweepVariable::data_size,
                   SweepVariable::reflection_gain, SweepVariable::blockage_prob, SweepVariable::user_antennas,
                   SweepVariable::latency})
        if (to_string(v) == name)
            return v;
    throw SpecError("unknown sweep variable '" + std::string(name) + "'");
}

namespace {

bool is_positive_integer(double v) { return v >= 1.0 && std::floor(v) == v && v < 1e6; }

} // namespace

void ExperimentSpec::validate() const
{
    if (name.empty())
        throw SpecError("spec name is empty");
    if (grid.empty())
        throw SpecError("sweep grid is empty");
    if (trials < 1)
        throw SpecError("trials must be at least 1");
    if (solvers.empty())
        throw SpecError("solver list is empty");
    if (std::set<Beamformer>(solvers.begin(), solvers.end()).size() != solvers.size())
        throw SpecError("solver list has duplicates");
    if (!(data_min_nats > 0.0) || !(data_max_nats >= data_min_nats) || !std::isfinite(data_max_nats))
        throw SpecError("data range must satisfy 0 < min <= max");
    if (output.empty())
        throw SpecError("output path is empty");
    try
    {
        system.validate();
        for (double v : grid)
        {
            if (!std::isfinite(v))
                throw SpecError("grid values must be finite");
            switch (variable)
            {
            case SweepVariable::irs_elements:
            case SweepVariable::user_antennas:
                if (!is_positive_integer(v))
                    throw SpecError("grid values for " + std::string(to_string(variable)) +
                                    " must be positive integers");
                break;
            case SweepVariable::data_size:
            case SweepVariable::latency:
                if (!(v > 0.0))
                    throw SpecError("grid values for " + std::string(to_string(variable)) + " must be positive");
                break;
            case SweepVariable::blockage_prob:
                if (v < 0.0 || v > 1.0)
                    throw SpecError("blockage probabilities must lie in [0, 1]");
                break;
            default:
                break;
            }
            apply_sweep(system, variable, v).validate();
        }
    }
    catch (const SpecError&)
    {
        throw;
    }
    catch (const Error& e)
    {
        throw SpecError(std::string("invalid system configuration: ") + e.what());
    }
    if (framework.max_outer < 1 || framework.max_inner < 1)
        throw SpecError("framework iteration limits must be positive");
    if (!(framework.outer_tol > 0.0) || !(framework.inner_tol > 0.0))
        throw SpecError("framework tolerances must be positive");
}

// ---- JSON mapping --------------------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where)
{
    if (!obj.is_object())
        throw SpecError(std::string(where) + " must be an object");
    for (const auto& item : obj.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw SpecError("unknown key '" + item.key() + "' in " + std::string(where));
}

template <typename T>
void read(const json& obj, const char* key, T& out)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        return;
    try
    {
        out = it->template get<T>();
    }
    catch (const json::exception&)
    {
        throw SpecError(std::string("key '") + key + "' has the wrong type");
    }
}

json point_to_json(const Point& p) { return json::array({p.x, p.y, p.z}); }

Point point_from_json(const json& j)
{
    if (!j.is_array() || j.size() < 2 || j.size() > 3)
        throw SpecError("points are arrays [x, y] or [x, y, z]");
    try
    {
        return Point{j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
    }
    catch (const json::exception&)
    {
        throw SpecError("point coordinates must be numbers");
    }
}

json path_loss_to_json(const PathLossParams& p)
{
    return {{"chi_a_db", p.chi_a_db}, {"chi_b", p.chi_b}, {"sigma_kappa_db", p.sigma_kappa_db}};
}

void path_loss_from_json(const json& j, PathLossParams& p)
{
    check_keys(j, {"chi_a_db", "chi_b", "sigma_kappa_db"}, "path loss");
    read(j, "chi_a_db", p.chi_a_db);
    read(j, "chi_b", p.chi_b);
    read(j, "sigma_kappa_db", p.sigma_kappa_db);
}

json system_to_json(const SystemConfig& s)
{
    json gain{{"rho_u_dbi", s.gain.rho_u_dbi}, {"rho_b_dbi", s.gain.rho_b_dbi}, {"nu_db", s.gain.nu_db}};
    if (s.gain.rho_i_dbi)
        gain["rho_i_dbi"] = *s.gain.rho_i_dbi;
    json users = json::array();
    for (const auto& u : s.geometry.users)
        users.push_back(point_to_json(u));
    return {{"ap_antennas", s.ap_antennas},
            {"irs_az", s.irs_az},
            {"irs_el", s.irs_el},
            {"users", s.users},
            {"user_antennas", s.user_antennas},
            {"nlos_paths", s.nlos_paths},
            {"bandwidth_hz", s.bandwidth_hz},
            {"noise_power_w", s.noise_power_w},
            {"latency_s", s.latency_s},
            {"carrier_hz", s.carrier_hz},
            {"blockage_prob", s.blockage_prob},
            {"gain", gain},
            {"path_loss", {{"los", path_loss_to_json(s.los)}, {"nlos", path_loss_to_json(s.nlos)}}},
            {"geometry",
             {{"ap", point_to_json(s.geometry.ap)},
              {"irs", point_to_json(s.geometry.irs)},
              {"users", users},
              {"ap_broadside_rad", s.geometry.ap_broadside_rad},
              {"irs_broadside_rad", s.geometry.irs_broadside_rad}}}};
}

void system_from_json(const json& j, SystemConfig& s)
{
    check_keys(j,
               {"ap_antennas", "irs_az", "irs_el", "users", "user_antennas", "nlos_paths", "bandwidth_hz",
                "noise_power_w", "noise_power_dbm", "latency_s", "carrier_hz", "blockage_prob", "gain", "path_loss",
                "geometry"},
               "system");
    if (j.contains("noise_power_w") && j.contains("noise_power_dbm"))
        throw SpecError("give the noise power either in watts or in dBm, not both");
    read(j, "ap_antennas", s.ap_antennas);
    read(j, "irs_az", s.irs_az);
    read(j, "irs_el", s.irs_el);
    read(j, "users", s.users);
    read(j, "user_antennas", s.user_antennas);
    read(j, "nlos_paths", s.nlos_paths);
    read(j, "bandwidth_hz", s.bandwidth_hz);
    read(j, "noise_power_w", s.noise_power_w);
    if (j.contains("noise_power_dbm"))
    {
        double dbm = 0.0;
        read(j, "noise_power_dbm", dbm);
        s.noise_power_w = dbm_to_watts(dbm);
    }
    read(j, "latency_s", s.latency_s);
    read(j, "carrier_hz", s.carrier_hz);
    read(j, "blockage_prob", s.blockage_prob);
    if (const auto it = j.find("gain"); it != j.end())
    {
        check_keys(*it, {"rho_u_dbi", "rho_b_dbi", "nu_db", "rho_i_dbi"}, "gain");
        read(*it, "rho_u_dbi", s.gain.rho_u_dbi);
        read(*it, "rho_b_dbi", s.gain.rho_b_dbi);
        read(*it, "nu_db", s.gain.nu_db);
        if (it->contains("rho_i_dbi"))
        {
            double v = 0.0;
            read(*it, "rho_i_dbi", v);
            s.gain.rho_i_dbi = v;
        }
    }
    if (const auto it = j.find("path_loss"); it != j.end())
    {
        check_keys(*it, {"los", "nlos"}, "path_loss");
        if (it->contains("los"))
            path_loss_from_json((*it)["los"], s.los);
        if (it->contains("nlos"))
            path_loss_from_json((*it)["nlos"], s.nlos);
    }
    if (const auto it = j.find("geometry"); it != j.end())
    {
        check_keys(*it, {"ap", "irs", "users", "ap_broadside_rad", "irs_broadside_rad"}, "geometry");
        if (it->contains("ap"))
            s.geometry.ap = point_from_json((*it)["ap"]);
        if (it->contains("irs"))
            s.geometry.irs = point_from_json((*it)["irs"]);
        if (it->contains("users"))
        {
            const json& u = (*it)["users"];
            if (!u.is_array())
                throw SpecError("geometry.users must be an array of points");
            s.geometry.users.clear();
            for (const auto& p : u)
                s.geometry.users.push_back(point_from_json(p));
        }
        read(*it, "ap_broadside_rad", s.geometry.ap_broadside_rad);
        read(*it, "irs_broadside_rad", s.geometry.irs_broadside_rad);
    }
}

json framework_to_json(const FrameworkConfig& f)
{
    json ccmo{{"max_iter", f.ccmo.max_iter},
              {"tol", f.ccmo.tol},
              {"backtracking", f.ccmo.backtracking},
              {"restarts", f.ccmo.restarts}};
    if (f.ccmo.step)
        ccmo["step"] = *f.ccmo.step;
    json admm{{"rho", f.admm.rho},
              {"max_outer", f.admm.max_outer},
              {"max_inner", f.admm.max_inner},
              {"tol", f.admm.tol},
              {"tol_consensus", f.admm.tol_consensus},
              {"stall_window", f.admm.stall_window},
              {"theta_max_iter", f.admm.theta_max_iter},
              {"theta_tol", f.admm.theta_tol},
              {"q_max_iter", f.admm.q_max_iter},
              {"q_grad_tol", f.admm.q_grad_tol}};
    json out{{"outer_tol", f.outer_tol},
             {"inner_tol", f.inner_tol},
             {"max_outer", f.max_outer},
             {"max_inner", f.max_inner},
             {"max_cap_rounds", f.max_cap_rounds},
             {"ccmo", ccmo},
             {"admm", admm},
             {"power", {{"tol", f.power.tol}, {"max_iter", f.power.max_iter}}}};
    if (f.power_cap_w)
        out["power_cap_w"] = *f.power_cap_w;
    return out;
}

void framework_from_json(const json& j, FrameworkConfig& f)
{
    check_keys(j,
               {"outer_tol", "inner_tol", "max_outer", "max_inner", "power_cap_w", "max_cap_rounds", "ccmo", "admm",
                "power"},
               "framework");
    read(j, "outer_tol", f.outer_tol);
    read(j, "inner_tol", f.inner_tol);
    read(j, "max_outer", f.max_outer);
    read(j, "max_inner", f.max_inner);
    read(j, "max_cap_rounds", f.max_cap_rounds);
    if (j.contains("power_cap_w"))
    {
        double cap = 0.0;
        read(j, "power_cap_w", cap);
        f.power_cap_w = cap;
    }
    if (const auto it = j.find("ccmo"); it != j.end())
    {
        check_keys(*it, {"max_iter", "tol", "step", "backtracking", "restarts"}, "framework.ccmo");
        read(*it, "max_iter", f.ccmo.max_iter);
        read(*it, "tol", f.ccmo.tol);
        read(*it, "backtracking", f.ccmo.backtracking);
        read(*it, "restarts", f.ccmo.restarts);
        if (it->contains("step"))
        {
            double s = 0.0;
            read(*it, "step", s);
            f.ccmo.step = s;
        }
    }
    if (const auto it = j.find("admm"); it != j.end())
    {
        check_keys(*it,
                   {"rho", "max_outer", "max_inner", "tol", "tol_consensus", "stall_window", "theta_max_iter",
                    "theta_tol", "q_max_iter", "q_grad_tol"},
                   "framework.admm");
        read(*it, "rho", f.admm.rho);
        read(*it, "max_outer", f.admm.max_outer);
        read(*it, "max_inner", f.admm.max_inner);
        read(*it, "tol", f.admm.tol);
        read(*it, "tol_consensus", f.admm.tol_consensus);
        read(*it, "stall_window", f.admm.stall_window);
        read(*it, "theta_max_iter", f.admm.theta_max_iter);
        read(*it, "theta_tol", f.admm.theta_tol);
        read(*it, "q_max_iter", f.admm.q_max_iter);
        read(*it, "q_grad_tol", f.admm.q_grad_tol);
    }
    if (const auto it = j.find("power"); it != j.end())
    {
        check_keys(*it, {"tol", "max_iter"}, "framework.power");
        read(*it, "tol", f.power.tol);
        read(*it, "max_iter", f.power.max_iter);
    }
}

json spec_to_json(const ExperimentSpec& spec)
{
    json solvers = json::array();
    for (auto s : spec.solvers)
        solvers.push_back(std::string(to_string(s)));
    return {{"name", spec.name},
            {"description", spec.description},
            {"sweep", {{"variable", std::string(to_string(spec.variable))}, {"grid", spec.grid}}},
            {"trials", spec.trials},
            {"seed", spec.seed},
            {"solvers", solvers},
            {"output", spec.output},
            {"data_nats", {{"min", spec.data_min_nats}, {"max", spec.data_max_nats}}},
            {"system", system_to_json(spec.system)},
            {"framework", framework_to_json(spec.framework)}};
}

} // namespace

ExperimentSpec parse_spec(std::string_view text)
{
    json j;
    try
    {
        j = json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error& e)
    {
        throw SpecError(std::string("spec is not valid JSON: ") + e.what());
    }
    check_keys(j, {"name", "description", "sweep", "trials", "seed", "solvers", "output", "data_nats", "system",
                   "framework"},
               "spec");
    ExperimentSpec spec;
    read(j, "name", spec.name);
    read(j, "description", spec.description);
    if (!j.contains("sweep"))
        throw SpecError("spec needs a sweep section");
    const json& sweep = j["sweep"];
    check_keys(sweep, {"variable", "grid"}, "sweep");
    std::string variable;
    read(sweep, "variable", variable);
    spec.variable = parse_sweep_variable(variable);
    spec.grid.clear();
    read(sweep, "grid", spec.grid);
    read(j, "trials", spec.trials);
    read(j, "seed", spec.seed);
    if (j.contains("solvers"))
    {
        std::vector<std::string> names;
        read(j, "solvers", names);
        spec.solvers.clear();
        for (const auto& n : names)
            spec.solvers.push_back(parse_beamformer(n));
    }
    read(j, "output", spec.output);
    if (const auto it = j.find("data_nats"); it != j.end())
    {
        check_keys(*it, {"min", "max"}, "data_nats");
        read(*it, "min", spec.data_min_nats);
        read(*it, "max", spec.data_max_nats);
    }
    if (const auto it = j.find("system"); it != j.end())
        system_from_json(*it, spec.system);
    if (const auto it = j.find("framework"); it != j.end())
        framework_from_json(*it, spec.framework);
    spec.validate();
    return spec;
}

std::string serialize_spec(const ExperimentSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

ExperimentSpec load_spec(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open spec file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read spec file '" + path.string() + "'");
    return parse_spec(buf.str());
}

// ---- presets -------------------------------------------------------------------------------------------

namespace {

ExperimentSpec make_preset(std::string name, std::string description, SweepVariable variable,
                           std::vector<double> grid, double blockage, std::size_t users = 1)
{
    ExperimentSpec s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.variable = variable;
    s.grid = std::move(grid);
    s.system.blockage_prob = blockage;
    s.system.users = users;
    s.output = s.name + ".csv";
    return s;
}

} // namespace

std::vector<ExperimentSpec> scenario_defaults()
{
    const std::vector<double> n_grid{8, 16, 32, 64};
    const std::vector<double> x_grid{10, 20, 30, 40, 50, 60, 70};
    const std::vector<double> d_grid{2000, 4000, 6000, 8000, 10000};
    std::vector<ExperimentSpec> out;
    out.push_back(make_preset("fig4", "single user, LoS: power versus IRS elements", SweepVariable::irs_elements,
                              n_grid, 0.0));
    out.push_back(make_preset("fig4-olos", "single user, LoS blocked: power versus IRS elements",
                              SweepVariable::irs_elements, n_grid, 1.0));
    out.push_back(make_preset("fig5", "single user, LoS: power versus horizontal user position",
                              SweepVariable::user1_x, x_grid, 0.0));
    out.push_back(make_preset("fig5-olos", "single user, LoS blocked: power versus horizontal user position",
                              SweepVariable::user1_x, x_grid, 1.0));
    out.push_back(make_preset("fig6", "single user, LoS: power versus data size", SweepVariable::data_size, d_grid,
                              0.0));
    out.push_back(make_preset("fig6-olos", "single user, LoS blocked: power versus data size",
                              SweepVariable::data_size, d_grid, 1.0));
    out.push_back(make_preset("fig7", "single user, LoS blocked: power versus relative reflection gain",
                              SweepVariable::reflection_gain, {10, 12.5, 15, 17.5, 20}, 1.0));
    out.push_back(make_preset("fig8", "single user: power versus LoS blockage probability",
                              SweepVariable::blockage_prob, {0, 0.25, 0.5, 0.75, 1}, 0.0));
    out.push_back(make_preset("two-user", "two users: power versus LoS blockage probability",
                              SweepVariable::blockage_prob, {0, 0.5, 1}, 0.0, 2));
    out.push_back(make_preset("multi-antenna", "two users, LoS blocked: power versus user antennas",
                              SweepVariable::user_antennas, {1, 2, 4}, 1.0, 2));
    out.push_back(make_preset("latency", "two users: power versus latency requirement", SweepVariable::latency,
                              {0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1}, 0.0, 2));
    return out;
}

ExperimentSpec preset(std::string_view name)
{
    for (auto& s : scenario_defaults())
        if (s.name == name)
            return s;
    throw SpecError("unknown preset '" + std::string(name) + "'");
}

SystemConfig apply_sweep(const SystemConfig& base, SweepVariable variable, double value)
{
    SystemConfig cfg = base;
    switch (variable)
    {
    case SweepVariable::irs_elements:
    {
        if (!is_positive_integer(value))
            throw SpecError("IRS element count must be a positive integer");
        const auto n = static_cast<std::size_t>(value);
        std::size_t az = std::max<std::size_t>(1, std::min(base.irs_az, n));
        while (n % az != 0)
            --az;
        cfg.irs_az = az;
        cfg.irs_el = n / az;
        break;
    }
    case SweepVariable::user1_x:
        if (cfg.geometry.users.empty())
            throw SpecError("geometry has no user positions");
        cfg.geometry.users[0].x = value;
        break;
    case SweepVariable::data_size:
        break;
    case SweepVariable::reflection_gain:
        cfg.gain.nu_db = value;
        cfg.gain.rho_i_dbi.reset();
        break;
    case SweepVariable::blockage_prob:
        cfg.blockage_prob = value;
        break;
    case SweepVariable::user_antennas:
        if (!is_positive_integer(value))
            throw SpecError("user antenna count must be a positive integer");
        cfg.user_antennas = static_cast<std::size_t>(value);
        break;
    case SweepVariable::latency:
        cfg.latency_s = value;
        break;
    }
    return cfg;
}

// ---- execution -----------------------------------------------------------------------------------------

namespace {

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i)
    {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

template <typename Derived>
void fnv_matrix(std::uint64_t& h, const Eigen::MatrixBase<Derived>& m)
{
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
        {
            const double parts[2] = {m(r, c).real(), m(r, c).imag()};
            fnv_bytes(h, parts, sizeof(parts));
        }
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t multi_antenna_hash(const MultiAntennaChannelSet& ch)
{
    std::uint64_t h = kFnvOffset;
    for (const auto& m : ch.H_direct)
        fnv_matrix(h, m);
    for (const auto& m : ch.H_irs)
        fnv_matrix(h, m);
    fnv_matrix(h, ch.G);
    return h;
}

void fill_outcome(TrialResult& r, const SolveResult& res, const LatencyProfile& latency, double noise_w)
{
    r.feasible = true;
    r.converged = res.converged;
    r.outer_iterations = res.outer_iterations;
    r.sum_power_w = res.sum_power();
    for (Eigen::Index k = 0; k < res.state.p.size(); ++k)
    {
        const auto uk = static_cast<std::size_t>(k);
        r.power_dbm.push_back(watts_to_dbm(res.state.p(k)));
        r.sinr.push_back(sinr(res.state, noise_w, uk));
        r.latency_s.push_back(latency_s(res.state, noise_w, latency, uk));
    }
}

std::vector<TrialResult> run_task(const ExperimentSpec& spec, double value, std::size_t trial)
{
    const SystemConfig cfg = apply_sweep(spec.system, spec.variable, value);

    Rng channel_rng = trial_rng(spec.seed, trial, 0);
    const ChannelDraw draw = draw_channel(cfg, channel_rng);

    std::vector<double> data;
    if (spec.variable == SweepVariable::data_size)
        data.assign(cfg.users, value);
    else
    {
        Rng data_rng = trial_rng(spec.seed, trial, 1);
        data = draw_data_sizes(cfg.users, spec.data_min_nats, spec.data_max_nats, data_rng);
    }
    const LatencyProfile latency = LatencyProfile::make(data, cfg.bandwidth_hz, cfg.latency_s);

    const bool multi = cfg.user_antennas > 1;
    ChannelSet simo;
    MultiAntennaChannelSet mimo;
    std::uint64_t hash = 0;
    if (multi)
    {
        Rng aod_rng = trial_rng(spec.seed, trial, 2);
        mimo = assemble_multi_antenna_channels(cfg, draw, aod_rng);
        hash = multi_antenna_hash(mimo);
    }
    else
    {
        simo = assemble_channels(cfg, draw);
        hash = channel_hash(simo);
    }
    const std::uint64_t solver_seed = trial_rng(spec.seed, trial, 3)();

    std::vector<TrialResult> out;
    for (Beamformer solver : spec.solvers)
    {
        TrialResult r;
        r.sweep_value = value;
        r.solver = solver;
        r.trial = trial;
        r.channel_hash = hash;
        FrameworkConfig fc = spec.framework;
        fc.beamformer = solver;
        fc.seed = solver_seed;
        const auto start = std::chrono::steady_clock::now();
        try
        {
            if (multi)
                fill_outcome(r, solve_multi_antenna(fc, mimo, latency, cfg.noise_power_w).solve, latency,
                             cfg.noise_power_w);
            else
                fill_outcome(r, solve(fc, simo, latency, cfg.noise_power_w), latency, cfg.noise_power_w);
        }
        catch (const InfeasibleError&)
        {
            r.feasible = false;
        }
        catch (const SingularError&)
        {
            r.feasible = false;
        }
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(r));
    }
    return out;
}

MetricStats stats_of(const std::vector<double>& xs)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (xs.empty())
        return {nan, nan, nan, nan};
    MetricStats s;
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs)
        ss += (x - s.mean) * (x - s.mean);
    s.std = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

} // namespace

std::uint64_t channel_hash(const ChannelSet& ch)
{
    std::uint64_t h = kFnvOffset;
    for (const auto& v : ch.h_direct)
        fnv_matrix(h, v);
    for (const auto& v : ch.h_irs)
        fnv_matrix(h, v);
    fnv_matrix(h, ch.G);
    return h;
}

Rng trial_rng(std::uint64_t seed, std::size_t trial, std::uint64_t stream)
{
    const auto t = static_cast<std::uint64_t>(trial);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

std::vector<double> draw_data_sizes(std::size_t users, double min_nats, double max_nats, Rng& rng)
{
    if (!(min_nats > 0.0) || !(max_nats >= min_nats))
        throw DomainError("data range must satisfy 0 < min <= max");
    std::uniform_real_distribution<double> dist(min_nats, max_nats);
    std::vector<double> d(users);
    for (auto& x : d)
        x = min_nats == max_nats ? min_nats : dist(rng);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

ResultTable run_experiment(const ExperimentSpec& spec, unsigned threads)
{
    spec.validate();
    std::vector<double> grid = spec.grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const std::size_t tasks = grid.size() * spec.trials;
    std::vector<std::vector<TrialResult>> slots(tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1))
            slots[i] = run_task(spec, grid[i / spec.trials], i % spec.trials);
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks, 1)));
    if (threads <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    ResultTable table;
    for (auto& slot : slots)
        for (auto& r : slot)
            table.trials.push_back(std::move(r));
    std::stable_sort(table.trials.begin(), table.trials.end(), [](const TrialResult& a, const TrialResult& b) {
        if (a.sweep_value != b.sweep_value)
            return a.sweep_value < b.sweep_value;
        if (a.solver != b.solver)
            return to_string(a.solver) < to_string(b.solver);
        return a.trial < b.trial;
    });
    table.rows = aggregate(table.trials);
    return table;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials)
{
    std::vector<std::pair<double, std::string>> keys;
    for (const auto& t : trials)
        keys.emplace_back(t.sweep_value, std::string(to_string(t.solver)));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<AggregateRow> rows;
    for (const auto& [value, solver] : keys)
    {
        std::array<std::vector<double>, kMetricNames.size()> samples;
        for (const auto& t : trials)
        {
            if (t.sweep_value != value || to_string(t.solver) != solver)
                continue;
            if (t.feasible)
            {
                samples[0].push_back(watts_to_dbm(t.sum_power_w));
                samples[1].push_back(t.power_dbm.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                         : *std::max_element(t.power_dbm.begin(), t.power_dbm.end()));
                samples[2].push_back(t.latency_s.empty()
                                         ? std::numeric_limits<double>::quiet_NaN()
                                         : 1e3 * *std::max_element(t.latency_s.begin(), t.latency_s.end()));
                samples[3].push_back(static_cast<double>(t.outer_iterations));
            }
            samples[4].push_back(t.converged ? 1.0 : 0.0);
            samples[5].push_back(t.feasible ? 1.0 : 0.0);
        }
        AggregateRow row;
        row.sweep_value = value;
        row.solver = solver;
        for (std::size_t m = 0; m < kMetricNames.size(); ++m)
            row.metrics[m] = stats_of(samples[m]);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- CSV -----------------------------------------------------------------------------------------------

namespace {

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view s)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DomainError("CSV field '" + std::string(s) + "' is not a number");
    return v;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::string csv_header()
{
    std::string h = "sweep_value,solver";
    for (auto name : kMetricNames)
        for (const char* suffix : {"_mean", "_std", "_min", "_max"})
            h += "," + std::string(name) + suffix;
    return h;
}

} // namespace

std::string format_csv(const std::vector<AggregateRow>& rows)
{
    std::string out = csv_header() + "\n";
    for (const auto& row : rows)
    {
        out += format_number(row.sweep_value) + "," + row.solver;
        for (const auto& m : row.metrics)
            out += "," + format_number(m.mean) + "," + format_number(m.std) + "," + format_number(m.min) + "," +
                   format_number(m.max);
        out += "\n";
    }
    return out;
}

std::vector<AggregateRow> parse_csv(std::string_view text)
{
    std::vector<AggregateRow> rows;
    std::size_t pos = 0;
    bool header = true;
    const std::size_t columns = 2 + 4 * kMetricNames.size();
    while (pos < text.size())
    {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (header)
        {
            if (line != csv_header())
                throw DomainError("CSV header does not match the result schema");
            header = false;
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != columns)
            throw DomainError("CSV row has " + std::to_string(fields.size()) + " columns, expected " +
                              std::to_string(columns));
        AggregateRow row;
        row.sweep_value = parse_number(fields[0]);
        row.solver = std::string(fields[1]);
        for (std::size_t m = 0; m < kMetricNames.size(); ++m)
            row.metrics[m] = MetricStats{parse_number(fields[2 + 4 * m]), parse_number(fields[3 + 4 * m]),
                                         parse_number(fields[4 + 4 * m]), parse_number(fields[5 + 4 * m])};
        rows.push_back(std::move(row));
    }
    if (header)
        throw DomainError("CSV text has no header");
    return rows;
}

void emit_csv(const ResultTable& table, const std::filesystem::path& path)
{
    if (table.rows.empty())
        throw DomainError("refusing to write an empty result table");
    const std::string text = format_csv(table.rows);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

std::string plot_script(const ExperimentSpec& spec, const std::filesystem::path& csv_path)
{
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "# Plots " << spec.name << " results: mean sum power per solver with one-sigma bars.\n"
      << "import csv\n"
      << "import sys\n"
      << "from collections import defaultdict\n\n"
      << "import matplotlib\n"
      << "matplotlib.use(\"Agg\")\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "path = sys.argv[1] if len(sys.argv) > 1 else " << json(csv_path.string()).dump() << "\n"
      << "series = defaultdict(list)\n"
      << "with open(path, newline=\"\") as f:\n"
      << "    for row in csv.DictReader(f):\n"
      << "        series[row[\"solver\"]].append((float(row[\"sweep_value\"]), float(row[\"sum_power_dbm_mean\"]),\n"
      << "                                       float(row[\"sum_power_dbm_std\"])))\n\n"
      << "fig, ax = plt.subplots()\n"
      << "for solver, pts in sorted(series.items()):\n"
      << "    pts.sort()\n"
      << "    ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[p[2] for p in pts], marker=\"o\",\n"
      << "                capsize=3, label=solver)\n"
      << "ax.set_xlabel(" << json(std::string(to_string(spec.variable))).dump() << ")\n"
      << "ax.set_ylabel(\"sum transmit power (dBm)\")\n"
      << "ax.set_title(" << json(spec.name).dump() << ")\n"
      << "ax.grid(True, alpha=0.3)\n"
      << "ax.legend()\n"
      << "out = path.rsplit(\".\", 1)[0] + \".png\"\n"
      << "fig.savefig(out, dpi=150, bbox_inches=\"tight\")\n"
      << "print(out)\n";
    return s.str();
}

std::string run_metadata(const ExperimentSpec& spec)
{
    json columns = json::array({"sweep_value", "solver"});
    for (auto name : kMetricNames)
        for (const char* suffix : {"_mean", "_std", "_min", "_max"})
            columns.push_back(std::string(name) + suffix);
    json meta{{"tool", "irsopt"},
              {"version", "0.1.0"},
              {"trials_per_point", spec.trials},
              {"grid_points", spec.grid.size()},
              {"seed", spec.seed},
              {"pairing", "channel draws depend only on (seed, trial); every solver and grid point of a trial "
                          "shares them"},
              {"baselines",
               {{"none", "IRS absent, direct links only"},
                {"fixed_random", "IRS present with i.i.d. uniform phases, not optimized"}}},
              {"aggregation", "power and latency statistics over feasible trials; converged and feasible are "
                              "fractions over all trials; std is the sample standard deviation"},
              {"columns", columns},
              {"spec", spec_to_json(spec)}};
    return meta.dump(2) + "\n";
}

} // namespace irsopt
