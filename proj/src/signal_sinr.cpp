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

#include "fdisac/signal_sinr.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fdisac {

void TxDesign::validate(const Scenario& scenario) const
{
    const int nt = scenario.geometry.n_tx;
    if (static_cast<int>(dl_beams.size()) != scenario.n_dl())
        throw std::invalid_argument("TxDesign: beam count mismatch");
    for (const auto& v : dl_beams)
        if (v.size() != nt)
            throw std::invalid_argument("TxDesign: beam length mismatch");
    if (radar_cov.rows() != nt || radar_cov.cols() != nt)
        throw std::invalid_argument("TxDesign: radar covariance dimension mismatch");
    const double scale = std::max(1e-300, radar_cov.cwiseAbs().maxCoeff());
    if (hermitian_defect(radar_cov) > 1e-10 * std::max(1.0, scale))
        throw std::invalid_argument("TxDesign: radar covariance is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(radar_cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw std::invalid_argument("TxDesign: radar covariance is not PSD");
    if (static_cast<int>(ul_powers.size()) != scenario.n_ul())
        throw std::invalid_argument("TxDesign: uplink power count mismatch");
    for (double p : ul_powers)
        if (!(p >= 0.0))
            throw std::invalid_argument("TxDesign: uplink powers must be nonnegative");
}

CMat tx_covariance(const TxDesign& tx)
{
    const int nt = static_cast<int>(tx.radar_cov.rows());
    CMat q = tx.radar_cov;
    for (const auto& v : tx.dl_beams)
        q += v * v.adjoint();
    (void)nt;
    return hermitize(q);
}

namespace {

CMat inm_common(const CMat& channel, const CMat& q, const Scenario& sc,
                const std::vector<double>& powers, int skip_k)
{
    CMat m = sc.noise_rx * CMat::Identity(sc.geometry.n_rx, sc.geometry.n_rx);
    for (int k = 0; k < sc.n_ul(); ++k) {
        if (k == skip_k)
            continue;
        m += powers[k] * sc.uplink_channels[k] * sc.uplink_channels[k].adjoint();
    }
    m += channel * q * channel.adjoint();
    return hermitize(m);
}

CVec solve_hpd(const CMat& m, const CVec& rhs)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw IllConditionedError("interference-plus-noise matrix is ill-conditioned");
    return Eigen::LDLT<CMat>(m).solve(rhs);
}

} // namespace

CMat radar_inm(const TxDesign& tx, const Scenario& scenario)
{
    return inm_common(interference_channels(scenario).b, tx_covariance(tx), scenario,
                      tx.ul_powers, -1);
}

CMat uplink_inm(int k, const TxDesign& tx, const Scenario& scenario)
{
    return inm_common(interference_channels(scenario).c, tx_covariance(tx), scenario,
                      tx.ul_powers, k);
}

double radar_sinr(const TxDesign& tx, const RxDesign& rx, const Scenario& scenario)
{
    const CVec& u = rx.radar_rx;
    if (u.size() == 0 || u.norm() == 0.0)
        throw std::invalid_argument("radar_sinr: receiver must be nonzero");
    const CMat a0 = effective_matrix(scenario.target, scenario.geometry);
    const CMat q = tx_covariance(tx);
    const CVec au = a0.adjoint() * u; // A^H u
    const double num =
        scenario.target.power_gain * std::real(Complex(au.adjoint() * q * au));
    const double den = quad_form(radar_inm(tx, scenario), u);
    if (!(den > 0.0))
        throw std::invalid_argument("radar_sinr: degenerate denominator");
    return num / den;
}

double uplink_sinr(int k, const TxDesign& tx, const RxDesign& rx, const Scenario& scenario)
{
    const CVec& w = rx.ul_rx.at(k);
    if (w.norm() == 0.0)
        throw std::invalid_argument("uplink_sinr: receiver must be nonzero");
    const double num =
        tx.ul_powers.at(k) * std::norm(Complex(w.adjoint() * scenario.uplink_channels.at(k)));
    const double den = quad_form(uplink_inm(k, tx, scenario), w);
    if (!(den > 0.0))
        throw std::invalid_argument("uplink_sinr: degenerate denominator");
    return num / den;
}

double downlink_sinr(int l, const TxDesign& tx, const Scenario& scenario)
{
    const CVec& g = scenario.downlink_channels.at(l);
    const double sig = std::norm(Complex(g.adjoint() * tx.dl_beams.at(l)));
    double interf = scenario.noise_dl.at(l) + quad_form(tx.radar_cov, g);
    for (int j = 0; j < scenario.n_dl(); ++j) {
        if (j == l)
            continue;
        interf += std::norm(Complex(g.adjoint() * tx.dl_beams[j]));
    }
    return sig / interf;
}

CVec optimal_radar_rx(const TxDesign& tx, const Scenario& scenario)
{
    const CVec ar = steering_rx(scenario.geometry, scenario.target.angle_deg);
    return solve_hpd(radar_inm(tx, scenario), ar);
}

CVec optimal_uplink_rx(int k, const TxDesign& tx, const Scenario& scenario)
{
    return solve_hpd(uplink_inm(k, tx, scenario), scenario.uplink_channels.at(k));
}

RxDesign optimal_receivers(const TxDesign& tx, const Scenario& scenario)
{
    RxDesign rx;
    rx.radar_rx = optimal_radar_rx(tx, scenario);
    for (int k = 0; k < scenario.n_ul(); ++k)
        rx.ul_rx.push_back(optimal_uplink_rx(k, tx, scenario));
    return rx;
}

double reduced_radar_sinr(const TxDesign& tx, const Scenario& scenario)
{
    const CVec at = steering_tx(scenario.geometry, scenario.target.angle_deg);
    const CVec ar = steering_rx(scenario.geometry, scenario.target.angle_deg);
    const CMat q = tx_covariance(tx);
    const double gain = quad_form(q, at);
    const CVec sol = solve_hpd(radar_inm(tx, scenario), ar);
    return scenario.target.power_gain * gain * std::real(ar.dot(sol));
}

double reduced_uplink_sinr(int k, const TxDesign& tx, const Scenario& scenario)
{
    const CVec& h = scenario.uplink_channels.at(k);
    const CVec sol = solve_hpd(uplink_inm(k, tx, scenario), h);
    return tx.ul_powers.at(k) * std::real(h.dot(sol));
}

SinrReport sinr_report(const TxDesign& tx, const RxDesign& rx, const Scenario& scenario)
{
    SinrReport rep;
    rep.radar = radar_sinr(tx, rx, scenario);
    for (int k = 0; k < scenario.n_ul(); ++k)
        rep.uplink.push_back(uplink_sinr(k, tx, rx, scenario));
    for (int l = 0; l < scenario.n_dl(); ++l)
        rep.downlink.push_back(downlink_sinr(l, tx, scenario));
    return rep;
}

std::vector<double> beampattern_gain(const TxDesign& tx, const RxDesign& rx,
                                     const Scenario& scenario,
                                     const std::vector<double>& angle_grid_deg)
{
    const CVec& u = rx.radar_rx;
    if (u.norm() == 0.0)
        throw std::invalid_argument("beampattern_gain: receiver must be nonzero");
    const CMat q = tx_covariance(tx);
    const double den = scenario.noise_rx * u.squaredNorm();
    std::vector<double> gains;
    gains.reserve(angle_grid_deg.size());
    for (double th : angle_grid_deg) {
        const CVec at = steering_tx(scenario.geometry, th);
        const CVec ar = steering_rx(scenario.geometry, th);
        // u^H A Q A^H u with A = ar at^H factors through the scalar ar^H u
        const double num = std::norm(ar.dot(u)) * quad_form(q, at);
        gains.push_back(num / den);
    }
    return gains;
}

std::vector<double> default_angle_grid()
{
    std::vector<double> grid;
    grid.reserve(721);
    for (int i = 0; i <= 720; ++i)
        grid.push_back(-90.0 + 0.25 * i);
    return grid;
}

double sum_rate(const SinrReport& report)
{
    double r = 0.0;
    for (double g : report.uplink)
        r += std::log2(1.0 + g);
    for (double g : report.downlink)
        r += std::log2(1.0 + g);
    return r;
}

} // namespace fdisac
