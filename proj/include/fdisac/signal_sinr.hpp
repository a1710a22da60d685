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

#include <stdexcept>
#include <vector>

#include "fdisac/scenario.hpp"

namespace fdisac {

/// Downlink beamformers, dedicated radar covariance, and uplink powers —
/// the full transmit-side decision variable.
struct TxDesign {
    std::vector<CVec> dl_beams;  // v_l, length n_tx each
    CMat radar_cov;              // V_0, n_tx x n_tx Hermitian PSD
    std::vector<double> ul_powers; // p_k [W]

    void validate(const Scenario& scenario) const;
};

/// Radar combiner and per-uplink-user combiners at the BS receive array.
struct RxDesign {
    CVec radar_rx;            // u
    std::vector<CVec> ul_rx;  // w_k
};

/// Achieved SINRs, linear scale.
struct SinrReport {
    double radar = 0.0;
    std::vector<double> uplink;
    std::vector<double> downlink;
};

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Q = sum_l v_l v_l^H + V_0.
CMat tx_covariance(const TxDesign& tx);

/// Interference-plus-noise covariance seen by the radar combiner,
/// sum_k p_k h_k h_k^H + B Q B^H + sigma_r^2 I.
CMat radar_inm(const TxDesign& tx, const Scenario& scenario);
/// Same for uplink user k (interference channel C, user k's own dyad excluded).
CMat uplink_inm(int k, const TxDesign& tx, const Scenario& scenario);

double radar_sinr(const TxDesign& tx, const RxDesign& rx, const Scenario& scenario);
double uplink_sinr(int k, const TxDesign& tx, const RxDesign& rx, const Scenario& scenario);
double downlink_sinr(int l, const TxDesign& tx, const Scenario& scenario);

/// Closed-form SINR-optimal receivers (whitened matched filters).
CVec optimal_radar_rx(const TxDesign& tx, const Scenario& scenario);
CVec optimal_uplink_rx(int k, const TxDesign& tx, const Scenario& scenario);
RxDesign optimal_receivers(const TxDesign& tx, const Scenario& scenario);

/// SINRs with the closed-form receivers substituted in.
double reduced_radar_sinr(const TxDesign& tx, const Scenario& scenario);
double reduced_uplink_sinr(int k, const TxDesign& tx, const Scenario& scenario);

/// Full report at explicit receivers (radar/uplink) and the given beams.
SinrReport sinr_report(const TxDesign& tx, const RxDesign& rx, const Scenario& scenario);

/// u^H A(theta) Q A(theta)^H u / (sigma_r^2 u^H u) per grid angle.
std::vector<double> beampattern_gain(const TxDesign& tx, const RxDesign& rx,
                                     const Scenario& scenario,
                                     const std::vector<double>& angle_grid_deg);

/// 721 points over [-90, 90] degrees (0.25 degree step).
std::vector<double> default_angle_grid();

/// Sum of log2(1 + SINR) over all uplink and downlink users.
double sum_rate(const SinrReport& report);

} // namespace fdisac
