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

#include <optional>
#include <string>

#include "fdisac/conic/program.hpp"
#include "fdisac/conic/solver.hpp"
#include "fdisac/signal_sinr.hpp"

namespace fdisac {

/// Power-minimization problem data: scenario plus the three SINR threshold
/// families, all linear scale.
struct PowerMinSpec {
    Scenario scenario;
    double tau_rad = 1.0;
    std::vector<double> tau_ul;
    std::vector<double> tau_dl;

    void validate() const;
};

/// Iterate of the rank-relaxed SCA: V_blocks[0] is the dedicated radar
/// covariance, V_blocks[1..L] the relaxed per-user matrices.
struct ScaState {
    std::vector<CMat> V_blocks;
    std::vector<double> ul_powers;
    int iteration = 0;
    std::vector<double> objective_trace; // watts, one entry per accepted solve

    CMat q_bar() const; // sum of all blocks
    double objective() const;
};

/// constant + p_coeff . p + sum_l Tr(V_coeff[l] V_l), all terms real.
struct AffineForm {
    double constant = 0.0;
    RVec p_coeff;
    std::vector<CMat> V_coeff;

    double evaluate(const std::vector<CMat>& v_blocks, const std::vector<double>& p) const;
};

/// Psi = sum_k p_k h_k h_k^H + B Qbar B^H + sigma_r^2 I at the given iterate.
CMat psi_matrix(const ScaState& state, const Scenario& scenario);
/// Phi_k: same with user k's dyad removed and interference channel C.
CMat phi_matrix(int k, const ScaState& state, const Scenario& scenario);

/// Affine lower bound of a_r^H Psi^{-1} a_r around the anchor (tight there).
AffineForm radar_taylor_bound(const CMat& psi_anchor, const Scenario& scenario);
/// Affine lower bound of h_k^H Phi_k^{-1} h_k around the anchor.
AffineForm uplink_taylor_bound(int k, const CMat& phi_anchor, const Scenario& scenario);

/// Constraint-family switches used by the comm-only benchmark and by
/// infeasibility attribution probes.
struct SurrogateFamilies {
    bool radar = true;
    std::vector<bool> uplink;   // empty = all on
    std::vector<bool> downlink; // empty = all on

    static SurrogateFamilies all() { return {}; }
    bool ul_on(int k) const { return uplink.empty() || uplink[k]; }
    bool dl_on(int l) const { return downlink.empty() || downlink[l]; }
};

conic::ConicProgram build_power_surrogate(const PowerMinSpec& spec, const ScaState& anchor,
                                          const SurrogateFamilies& families =
                                              SurrogateFamilies::all());

/// Reads V blocks and powers back out of a surrogate solution.
ScaState decode_sca_state(const conic::ConicProgram& program, const RVec& primal, int n_ul,
                          int n_dl);

/// Relaxed-iterate SINRs (covariance split Qbar = sum V_l, optimal receivers).
double relaxed_radar_sinr(const ScaState& state, const Scenario& scenario);
double relaxed_uplink_sinr(int k, const ScaState& state, const Scenario& scenario);
double relaxed_downlink_sinr(int l, const ScaState& state, const Scenario& scenario);

enum class OptStatus { ok, infeasible, iteration_limit };
const char* to_string(OptStatus status);

struct ScaOptions {
    double epsilon = 1e-4;
    int max_iters = 100;
    conic::SolverSettings solver;
};

struct TraceRow {
    int iter = 0;
    double objective = 0.0; // watts (power runs) or bits/s/Hz (rate runs)
    double radar_slack = 0.0;
    double min_ul_slack = 0.0;
    double min_dl_slack = 0.0;
    double solve_ms = 0.0;
};

struct PowerMinResult {
    OptStatus status = OptStatus::infeasible;
    ScaState state;
    TxDesign tx;
    RxDesign rx;
    SinrReport sinr;
    double objective_w = 0.0;
    std::vector<TraceRow> trace;
    std::string infeasible_family; // set when status == infeasible
};

/// Algorithm: SCA over the rank-relaxed conic surrogate, then lossless
/// rank-one reconstruction and closed-form receivers.
PowerMinResult sca_power_min(const PowerMinSpec& spec, const ScaOptions& options = {});

/// Same run with the sensing constraint family removed everywhere.
PowerMinResult comm_only_power_min(const PowerMinSpec& spec, const ScaOptions& options = {});

struct RankOneExtraction {
    std::vector<CVec> dl_beams;
    CMat radar_cov;
    std::vector<double> ul_powers;
};

/// Lossless rank-one reconstruction: preserves Qbar, every constraint value,
/// and the total power of the relaxed solution.
RankOneExtraction rank_one_extract(const std::vector<CMat>& v_hat,
                                   const std::vector<double>& p_hat,
                                   const Scenario& scenario);

/// Internal nondimensionalization: channels are scaled so the receive noise
/// becomes 1 and powers are expressed in units of p_ref. All SINRs are
/// invariant under this map; optimizers use it to keep conic data near unity.
struct NormalizedScenario {
    Scenario scenario;
    double p_ref = 1.0;
};
NormalizedScenario normalize_scenario(const Scenario& scenario);

} // namespace fdisac
