// SPDX-License-Identifier: Apache-2.0
//
// fdisac — joint beamforming and power optimization for full-duplex ISAC
// Copyright (C) 2026 fdisac contributors
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

#include "fdisac/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fdisac {

using json = nlohmann::ordered_json;

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }
double linear_to_db(double x_linear) { return 10.0 * std::log10(x_linear); }
double dbm_to_watts(double x_dbm) { return std::pow(10.0, (x_dbm - 30.0) / 10.0); }
double watts_to_dbm(double x_watts) { return 10.0 * std::log10(x_watts) + 30.0; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

CVec steering(int n, double spacing, double angle_deg)
{
    const double psi = kTwoPi * spacing * std::sin(deg_to_rad(angle_deg));
    CVec a(n);
    for (int i = 0; i < n; ++i)
        a(i) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), psi * i);
    return a;
}

} // namespace

void ArrayGeometry::validate() const
{
    if (n_tx < 1 || n_rx < 1)
        throw std::invalid_argument("ArrayGeometry: element counts must be >= 1");
    if (!(spacing_over_wavelength > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacing must be positive");
}

PointScatterer PointScatterer::from_power(double angle_deg, double power_gain, double phase_rad)
{
    PointScatterer s;
    s.angle_deg = angle_deg;
    s.power_gain = power_gain;
    s.amplitude = std::polar(std::sqrt(power_gain), phase_rad);
    return s;
}

void PointScatterer::validate() const
{
    if (angle_deg < -90.0 || angle_deg > 90.0)
        throw std::invalid_argument("PointScatterer: angle outside [-90, 90] deg");
    if (!(power_gain >= 0.0) || !std::isfinite(power_gain))
        throw std::invalid_argument("PointScatterer: power gain must be finite and nonnegative");
    const double amp2 = std::norm(amplitude);
    const double scale = std::max(power_gain, 1e-300);
    if (std::abs(amp2 - power_gain) > 1e-12 * scale)
        throw std::invalid_argument("PointScatterer: |amplitude|^2 inconsistent with power gain");
}

void Scenario::validate() const
{
    geometry.validate();
    target.validate();
    for (const auto& it : interferers) {
        it.validate();
        if (it.angle_deg == target.angle_deg)
            throw std::invalid_argument("Scenario: interferer angle equals target angle");
    }
    if (si_channel.rows() != geometry.n_rx || si_channel.cols() != geometry.n_tx)
        throw std::invalid_argument("Scenario: SI channel has wrong dimensions");
    if (!(si_power >= 0.0) || !std::isfinite(si_power))
        throw std::invalid_argument("Scenario: SI power must be finite and nonnegative");
    for (const auto& h : uplink_channels)
        if (h.size() != geometry.n_rx)
            throw std::invalid_argument("Scenario: uplink channel has wrong length");
    for (const auto& g : downlink_channels)
        if (g.size() != geometry.n_tx)
            throw std::invalid_argument("Scenario: downlink channel has wrong length");
    if (!(noise_rx > 0.0))
        throw std::invalid_argument("Scenario: receive noise power must be positive");
    if (static_cast<int>(noise_dl.size()) != n_dl())
        throw std::invalid_argument("Scenario: per-user downlink noise list has wrong length");
    for (double s2 : noise_dl)
        if (!(s2 > 0.0))
            throw std::invalid_argument("Scenario: downlink noise power must be positive");
    if (!(p_max_bs > 0.0))
        throw std::invalid_argument("Scenario: BS power budget must be positive");
    if (static_cast<int>(p_max_ul.size()) != n_ul())
        throw std::invalid_argument("Scenario: uplink budget list has wrong length");
    for (double p : p_max_ul)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("Scenario: uplink power budget must be positive");
}

Scenario Scenario::without_uplink() const
{
    Scenario s = *this;
    s.uplink_channels.clear();
    s.p_max_ul.clear();
    return s;
}

Scenario Scenario::without_downlink() const
{
    Scenario s = *this;
    s.downlink_channels.clear();
    s.noise_dl.clear();
    return s;
}

CVec steering_tx(const ArrayGeometry& geometry, double angle_deg)
{
    geometry.validate();
    return steering(geometry.n_tx, geometry.spacing_over_wavelength, angle_deg);
}

CVec steering_rx(const ArrayGeometry& geometry, double angle_deg)
{
    geometry.validate();
    return steering(geometry.n_rx, geometry.spacing_over_wavelength, angle_deg);
}

CMat effective_matrix(const PointScatterer& scatterer, const ArrayGeometry& geometry)
{
    const CVec ar = steering_rx(geometry, scatterer.angle_deg);
    const CVec at = steering_tx(geometry, scatterer.angle_deg);
    return ar * at.adjoint();
}

InterferenceChannels interference_channels(const Scenario& scenario)
{
    InterferenceChannels ch;
    ch.b = CMat::Zero(scenario.geometry.n_rx, scenario.geometry.n_tx);
    for (const auto& it : scenario.interferers)
        ch.b += it.amplitude * effective_matrix(it, scenario.geometry);
    ch.b += scenario.si_channel;
    ch.c = ch.b + scenario.target.amplitude * effective_matrix(scenario.target, scenario.geometry);
    return ch;
}

double Rng::uniform()
{
    // 53-bit mantissa from the top bits of one engine draw.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::phase() { return kTwoPi * uniform(); }

double Rng::gaussian()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

Complex Rng::complex_gaussian(double variance)
{
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
}

void ScenarioConfig::validate() const
{
    if (n_tx < 1 || n_rx < 1)
        throw std::invalid_argument("config: geometry element counts must be >= 1");
    if (!(spacing > 0.0))
        throw std::invalid_argument("config: geometry.spacing must be positive");
    if (interferer_angles_deg.size() != interferer_powers_dbm.size())
        throw std::invalid_argument("config: interferer angle/power lists differ in length");
    if (n_ul_users < 0 || n_dl_users < 0)
        throw std::invalid_argument("config: user counts must be nonnegative");
    if (!(user_distance_m > 0.0))
        throw std::invalid_argument("config: users.distance_m must be positive");
    if (!(pathloss_d0_m > 0.0))
        throw std::invalid_argument("config: pathloss.d0_m must be positive");
    if (fading != "rayleigh")
        throw std::invalid_argument("config: unsupported fading model '" + fading + "'");
    if (si_model == SiModel::geometric && !(si_separation_wavelengths > 0.0))
        throw std::invalid_argument("config: si.separation_wavelengths must be positive");
}

double ScenarioConfig::pathloss_gain() const
{
    return db_to_linear(pathloss_xi0_db) *
           std::pow(user_distance_m / pathloss_d0_m, -pathloss_kappa);
}

Scenario generate_scenario(const ScenarioConfig& config)
{
    config.validate();

    Scenario sc;
    sc.geometry = {config.n_tx, config.n_rx, config.spacing};

    Rng rng(config.seed);

    sc.target = PointScatterer::from_power(config.target_angle_deg,
                                           dbm_to_watts(config.target_power_dbm), rng.phase());
    for (std::size_t i = 0; i < config.interferer_angles_deg.size(); ++i)
        sc.interferers.push_back(PointScatterer::from_power(
            config.interferer_angles_deg[i], dbm_to_watts(config.interferer_powers_dbm[i]),
            rng.phase()));

    // Residual SI channel: every entry has modulus sqrt(alpha_SI). The phase
    // is either uniformly random or set by the transmit/receive element
    // distance d_{p,q} for collinear arrays separated along the array axis.
    const double si_amp = std::sqrt(db_to_linear(config.si_alpha_db));
    sc.si_power = db_to_linear(config.si_alpha_db);
    sc.si_channel = CMat(config.n_rx, config.n_tx);
    for (int p = 0; p < config.n_rx; ++p) {
        for (int q = 0; q < config.n_tx; ++q) {
            double phase;
            if (config.si_model == SiModel::random_phase) {
                phase = rng.phase();
            } else {
                const double d_pq = std::abs(config.si_separation_wavelengths +
                                             (p - q) * config.spacing);
                phase = -kTwoPi * d_pq;
            }
            sc.si_channel(p, q) = std::polar(si_amp, phase);
        }
    }

    const double xi = config.pathloss_gain();
    for (int k = 0; k < config.n_ul_users; ++k) {
        CVec h(config.n_rx);
        for (int i = 0; i < config.n_rx; ++i)
            h(i) = rng.complex_gaussian(xi);
        sc.uplink_channels.push_back(std::move(h));
    }
    for (int l = 0; l < config.n_dl_users; ++l) {
        CVec g(config.n_tx);
        for (int i = 0; i < config.n_tx; ++i)
            g(i) = rng.complex_gaussian(xi);
        sc.downlink_channels.push_back(std::move(g));
    }

    sc.noise_rx = dbm_to_watts(config.noise_rx_dbm);
    sc.noise_dl.assign(config.n_dl_users, dbm_to_watts(config.noise_dl_dbm));
    sc.p_max_bs = dbm_to_watts(config.power_bs_dbm);
    sc.p_max_ul.assign(config.n_ul_users, dbm_to_watts(config.power_ul_dbm));

    sc.validate();
    return sc;
}

namespace {

void require_keys(const json& j, const char* where, std::initializer_list<const char*> allowed)
{
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known)
            throw std::invalid_argument(std::string("config: unknown key '") + item.key() +
                                        "' in " + where);
    }
}

} // namespace

std::string ScenarioConfig::to_json() const
{
    json j;
    j["geometry"] = {{"n_tx", n_tx}, {"n_rx", n_rx}, {"spacing", spacing}};
    j["target"] = {{"angle_deg", target_angle_deg}, {"power_dbm", target_power_dbm}};
    j["interferers"] = json::array();
    for (std::size_t i = 0; i < interferer_angles_deg.size(); ++i)
        j["interferers"].push_back(
            {{"angle_deg", interferer_angles_deg[i]}, {"power_dbm", interferer_powers_dbm[i]}});
    j["si"] = {{"alpha_db", si_alpha_db},
               {"model", si_model == SiModel::random_phase ? "random_phase" : "geometric"},
               {"separation_wavelengths", si_separation_wavelengths}};
    j["users"] = {{"k", n_ul_users}, {"l", n_dl_users}, {"distance_m", user_distance_m}};
    j["pathloss"] = {{"xi0_db", pathloss_xi0_db}, {"d0_m", pathloss_d0_m}, {"kappa", pathloss_kappa}};
    j["noise"] = {{"rx_dbm", noise_rx_dbm}, {"dl_dbm", noise_dl_dbm}};
    j["power"] = {{"bs_dbm", power_bs_dbm}, {"ul_dbm", power_ul_dbm}};
    j["fading"] = fading;
    j["seed"] = seed;
    return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text)
{
    const json j = json::parse(text);
    ScenarioConfig c;

    require_keys(j, "root",
                 {"geometry", "target", "interferers", "si", "users", "pathloss", "noise",
                  "power", "fading", "seed"});

    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        require_keys(g, "geometry", {"n_tx", "n_rx", "spacing"});
        c.n_tx = g.value("n_tx", c.n_tx);
        c.n_rx = g.value("n_rx", c.n_rx);
        c.spacing = g.value("spacing", c.spacing);
    }
    if (j.contains("target")) {
        const auto& t = j.at("target");
        require_keys(t, "target", {"angle_deg", "power_dbm"});
        c.target_angle_deg = t.value("angle_deg", c.target_angle_deg);
        c.target_power_dbm = t.value("power_dbm", c.target_power_dbm);
    }
    if (j.contains("interferers")) {
        c.interferer_angles_deg.clear();
        c.interferer_powers_dbm.clear();
        for (const auto& it : j.at("interferers")) {
            require_keys(it, "interferers[*]", {"angle_deg", "power_dbm"});
            c.interferer_angles_deg.push_back(it.at("angle_deg").get<double>());
            c.interferer_powers_dbm.push_back(it.at("power_dbm").get<double>());
        }
    }
    if (j.contains("si")) {
        const auto& s = j.at("si");
        require_keys(s, "si", {"alpha_db", "model", "separation_wavelengths"});
        c.si_alpha_db = s.value("alpha_db", c.si_alpha_db);
        const std::string model = s.value("model", std::string("random_phase"));
        if (model == "random_phase")
            c.si_model = SiModel::random_phase;
        else if (model == "geometric")
            c.si_model = SiModel::geometric;
        else
            throw std::invalid_argument("config: unknown si.model '" + model + "'");
        c.si_separation_wavelengths = s.value("separation_wavelengths", c.si_separation_wavelengths);
    }
    if (j.contains("users")) {
        const auto& u = j.at("users");
        require_keys(u, "users", {"k", "l", "distance_m"});
        c.n_ul_users = u.value("k", c.n_ul_users);
        c.n_dl_users = u.value("l", c.n_dl_users);
        c.user_distance_m = u.value("distance_m", c.user_distance_m);
    }
    if (j.contains("pathloss")) {
        const auto& p = j.at("pathloss");
        require_keys(p, "pathloss", {"xi0_db", "d0_m", "kappa"});
        c.pathloss_xi0_db = p.value("xi0_db", c.pathloss_xi0_db);
        c.pathloss_d0_m = p.value("d0_m", c.pathloss_d0_m);
        c.pathloss_kappa = p.value("kappa", c.pathloss_kappa);
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        require_keys(n, "noise", {"rx_dbm", "dl_dbm"});
        c.noise_rx_dbm = n.value("rx_dbm", c.noise_rx_dbm);
        c.noise_dl_dbm = n.value("dl_dbm", c.noise_dl_dbm);
    }
    if (j.contains("power")) {
        const auto& p = j.at("power");
        require_keys(p, "power", {"bs_dbm", "ul_dbm"});
        c.power_bs_dbm = p.value("bs_dbm", c.power_bs_dbm);
        c.power_ul_dbm = p.value("ul_dbm", c.power_ul_dbm);
    }
    c.fading = j.value("fading", c.fading);
    c.seed = j.value("seed", c.seed);

    c.validate();
    return c;
}

} // namespace fdisac
