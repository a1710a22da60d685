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

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fdisac/linalg.hpp"

namespace fdisac {

double db_to_linear(double x_db);
double linear_to_db(double x_linear);
double dbm_to_watts(double x_dbm);
double watts_to_dbm(double x_watts);

/// Transmit/receive ULA pair colocated at the base station.
struct ArrayGeometry {
    int n_tx = 1;
    int n_rx = 1;
    double spacing_over_wavelength = 0.5;

    void validate() const;
};

/// Point reflector at a known angle with known power gain.
struct PointScatterer {
    double angle_deg = 0.0;
    double power_gain = 0.0; // |beta|^2, linear
    Complex amplitude{0.0, 0.0};

    static PointScatterer from_power(double angle_deg, double power_gain, double phase_rad);
    void validate() const;
};

/// One fully realized problem instance: geometry, radar scene, channels,
/// noise and power budgets. All values linear scale, powers in watts.
struct Scenario {
    ArrayGeometry geometry;
    PointScatterer target;
    std::vector<PointScatterer> interferers;
    CMat si_channel;        // H_SI, n_rx x n_tx
    double si_power = 0.0;  // alpha_SI, linear
    std::vector<CVec> uplink_channels;   // h_k, length n_rx
    std::vector<CVec> downlink_channels; // g_l, length n_tx
    double noise_rx = 1.0;            // sigma_r^2 [W]
    std::vector<double> noise_dl;     // sigma_l^2 [W]
    double p_max_bs = 1.0;            // P_max [W]
    std::vector<double> p_max_ul;     // P_k [W]

    int n_ul() const { return static_cast<int>(uplink_channels.size()); }
    int n_dl() const { return static_cast<int>(downlink_channels.size()); }

    void validate() const;

    /// Copy with all uplink users removed (HD downlink slot view).
    Scenario without_uplink() const;
    /// Copy with all downlink users removed (uplink-only special case view).
    Scenario without_downlink() const;
};

enum class SiModel { random_phase, geometric };

/// Declarative description of a scenario in engineering units plus an RNG
/// seed; generate_scenario() realizes channels deterministically from it.
struct ScenarioConfig {
    int n_tx = 8;
    int n_rx = 8;
    double spacing = 0.5;

    double target_angle_deg = 0.0;
    double target_power_dbm = -100.0;
    std::vector<double> interferer_angles_deg{-60.0, 45.0};
    std::vector<double> interferer_powers_dbm{-90.0, -90.0};

    double si_alpha_db = -110.0;
    SiModel si_model = SiModel::random_phase;
    double si_separation_wavelengths = 2.0; // geometric model only

    int n_ul_users = 3;
    int n_dl_users = 3;
    double user_distance_m = 200.0;

    double pathloss_xi0_db = -30.0;
    double pathloss_d0_m = 1.0;
    double pathloss_kappa = 3.0;

    double noise_rx_dbm = -100.0;
    double noise_dl_dbm = -100.0;

    double power_bs_dbm = 15.0;
    double power_ul_dbm = 5.0;

    std::string fading = "rayleigh";
    std::uint64_t seed = 1;

    void validate() const;

    /// Average per-entry channel power xi = xi0 (d/d0)^(-kappa), linear.
    double pathloss_gain() const;

    std::string to_json() const;                       // canonical text form
    static ScenarioConfig from_json(const std::string& text); // unknown keys are errors
};

CVec steering_tx(const ArrayGeometry& geometry, double angle_deg);
CVec steering_rx(const ArrayGeometry& geometry, double angle_deg);

/// A(theta) = a_r(theta) a_t(theta)^H for the scatterer's angle.
CMat effective_matrix(const PointScatterer& scatterer, const ArrayGeometry& geometry);

/// B: clutter + SI channel (target excluded). C: same plus the target path,
/// so C - B = beta_0 A(theta_0).
struct InterferenceChannels {
    CMat b;
    CMat c;
};
InterferenceChannels interference_channels(const Scenario& scenario);

Scenario generate_scenario(const ScenarioConfig& config);

/// Deterministic RNG used for channel realizations. Uniform and Gaussian
/// transforms are implemented here (not via std distributions) so that a
/// seed pins the realized scenario bit-exactly across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform();      // [0, 1)
    double phase();        // [0, 2*pi)
    double gaussian();     // N(0, 1), Box-Muller
    Complex complex_gaussian(double variance); // CN(0, variance)

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fdisac
