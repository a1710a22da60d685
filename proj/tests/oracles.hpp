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

// Test-only oracles, independent of the implementation paths they check:
// symbol-level Monte Carlo SINR estimation, brute-force grid minimization for
// the tiny uplink-only instance, and quadrature for the Marcum Q function.

#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Eigenvalues>

#include "fdisac/signal_sinr.hpp"

namespace fdisac::oracles {

inline Complex sample_cn(std::mt19937_64& rng, double variance)
{
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    return {gauss(rng), gauss(rng)};
}

inline CVec sample_cn_vector(std::mt19937_64& rng, const CMat& cov)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(cov);
    CVec xi(cov.rows());
    for (int i = 0; i < xi.size(); ++i)
        xi(i) = sample_cn(rng, 1.0);
    RVec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal().toDenseMatrix().cast<Complex>() * xi;
}

/// Draws the ISAC symbol x = sum_l v_l s_l + s_0.
inline CVec sample_isac_symbol(std::mt19937_64& rng, const TxDesign& tx)
{
    CVec x = sample_cn_vector(rng, tx.radar_cov);
    for (const auto& v : tx.dl_beams)
        x += v * sample_cn(rng, 1.0);
    return x;
}

struct McSinrs {
    double radar;
    std::vector<double> uplink;
    std::vector<double> downlink;
};

/// Symbol-level estimator of the three SINR families: every expectation in
/// their definitions is replaced by a sample mean over `draws` realizations
/// of Gaussian symbols and noise.
inline McSinrs mc_sinr(const TxDesign& tx, const RxDesign& rx, const Scenario& sc, int draws,
                       std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const auto ch = interference_channels(sc);
    const CMat a0 = effective_matrix(sc.target, sc.geometry);
    const int K = sc.n_ul();
    const int L = sc.n_dl();

    double num_rad = 0.0, den_clutter = 0.0, den_noise = 0.0;
    std::vector<double> den_ul_dyads(K, 0.0);
    std::vector<double> ul_num(K, 0.0), ul_cq(K, 0.0), ul_noise(K, 0.0);
    std::vector<std::vector<double>> ul_cross(K, std::vector<double>(K, 0.0));
    std::vector<double> dl_sig(L, 0.0), dl_int(L, 0.0), dl_v0(L, 0.0);

    for (int t = 0; t < draws; ++t) {
        const CVec x = sample_isac_symbol(rng, tx);
        CVec n(sc.geometry.n_rx);
        for (int i = 0; i < n.size(); ++i)
            n(i) = sample_cn(rng, sc.noise_rx);
        std::vector<Complex> d(K);
        for (int k = 0; k < K; ++k)
            d[k] = sample_cn(rng, tx.ul_powers[k]);

        const CVec bx = ch.b * x;
        const CVec cx = ch.c * x;
        const CVec a0x = a0 * x;

        num_rad += sc.target.power_gain * std::norm(rx.radar_rx.dot(a0x));
        den_clutter += std::norm(rx.radar_rx.dot(bx));
        den_noise += std::norm(rx.radar_rx.dot(n));
        for (int k = 0; k < K; ++k)
            den_ul_dyads[k] += std::norm(rx.radar_rx.dot(sc.uplink_channels[k] * d[k]));

        for (int k = 0; k < K; ++k) {
            const CVec& w = rx.ul_rx[k];
            ul_num[k] += std::norm(w.dot(sc.uplink_channels[k] * d[k]));
            ul_cq[k] += std::norm(w.dot(cx));
            ul_noise[k] += std::norm(w.dot(n));
            for (int j = 0; j < K; ++j)
                if (j != k)
                    ul_cross[k][j] += std::norm(w.dot(sc.uplink_channels[j] * d[j]));
        }

        // Downlink users see the per-stream symbols directly.
        std::vector<Complex> s(L);
        for (int l = 0; l < L; ++l)
            s[l] = sample_cn(rng, 1.0);
        const CVec s0 = sample_cn_vector(rng, tx.radar_cov);
        for (int l = 0; l < L; ++l) {
            const CVec& g = sc.downlink_channels[l];
            dl_sig[l] += std::norm(Complex(g.adjoint() * tx.dl_beams[l]) * s[l]);
            Complex mui(0.0, 0.0);
            for (int j = 0; j < L; ++j)
                if (j != l)
                    mui += Complex(g.adjoint() * tx.dl_beams[j]) * s[j];
            dl_int[l] += std::norm(mui);
            dl_v0[l] += std::norm(Complex(g.adjoint() * s0));
        }
    }

    McSinrs out;
    double den = den_clutter + den_noise;
    for (int k = 0; k < K; ++k)
        den += den_ul_dyads[k];
    out.radar = num_rad / den;
    for (int k = 0; k < K; ++k) {
        double dk = ul_cq[k] + ul_noise[k];
        for (int j = 0; j < K; ++j)
            if (j != k)
                dk += ul_cross[k][j];
        out.uplink.push_back(ul_num[k] / dk);
    }
    for (int l = 0; l < L; ++l) {
        const double noise = sc.noise_dl[l] * draws; // noise expectation kept exact
        out.downlink.push_back(dl_sig[l] / (dl_int[l] + dl_v0[l] + noise));
    }
    return out;
}

/// Brute-force grid oracle for the tiny uplink-only instance
/// (N_t=N_r=2, K=1, I=0, alpha_SI=0). With B = 0 every feasible design is
/// dominated by V_0 = P0 a_t a_t^H, so the problem reduces to two scalars:
///   radar:  |b0|^2 P0 a_r^H (p1 h h^H + s2 I)^{-1} a_r >= tau_rad
///   uplink: p1 h^H (|b0|^2 P0 a_r a_r^H + s2 I)^{-1} h >= tau_ul
/// Minimizes P0 + p1 over a refined log grid.
inline double tiny_grid_oracle(const Scenario& sc, double tau_rad, double tau_ul)
{
    const CVec ar = steering_rx(sc.geometry, sc.target.angle_deg);
    const CVec& h = sc.uplink_channels.at(0);
    const double b0 = sc.target.power_gain;
    const double s2 = sc.noise_rx;
    const double h2 = h.squaredNorm();
    const double hr = std::norm(h.dot(ar)); // |h^H a_r|^2

    // Sherman-Morrison closed forms for the two quadratic forms.
    const auto gamma_rad = [&](double p0, double p1) {
        const double quad = 1.0 / s2 * (1.0 - p1 * hr / (s2 + p1 * h2));
        return b0 * p0 * quad;
    };
    const auto gamma_ul = [&](double p0, double p1) {
        const double quad = 1.0 / s2 * (h2 - b0 * p0 * hr / (s2 + b0 * p0));
        return p1 * quad;
    };

    // Lower bounds from each constraint alone; cross interference raises the
    // optimum by at most the asymptotic coupling factor h2/(h2 - hr).
    const double p0_lo = tau_rad * s2 / b0;
    const double p1_lo = tau_ul * s2 / h2;
    const double couple = h2 / std::max(h2 - hr, 1e-9 * h2);

    const int npts = 240;
    double lo0 = p0_lo * 0.99, hi0 = p0_lo * couple * 8.0;
    double lo1 = p1_lo * 0.99, hi1 = p1_lo * couple * 8.0;
    double best = std::numeric_limits<double>::infinity();
    double best0 = hi0, best1 = hi1;
    for (int level = 0; level < 4; ++level) {
        for (int i = 0; i <= npts; ++i) {
            const double p0 = lo0 * std::pow(hi0 / lo0, double(i) / npts);
            for (int j = 0; j <= npts; ++j) {
                const double p1 = lo1 * std::pow(hi1 / lo1, double(j) / npts);
                if (gamma_rad(p0, p1) >= tau_rad && gamma_ul(p0, p1) >= tau_ul &&
                    p0 + p1 < best) {
                    best = p0 + p1;
                    best0 = p0;
                    best1 = p1;
                }
            }
        }
        // refine a few cells around the incumbent
        const double w0 = std::pow(hi0 / lo0, 3.0 / npts);
        const double w1 = std::pow(hi1 / lo1, 3.0 / npts);
        lo0 = best0 / w0;
        hi0 = best0 * w0;
        lo1 = best1 / w1;
        hi1 = best1 * w1;
    }
    return best;
}

/// Adaptive Simpson quadrature of the defining Marcum Q_1 integral
/// int_b^inf x exp(-(x^2+a^2)/2) I_0(a x) dx.
inline double marcum_q1_quadrature(double a, double b)
{
    const auto f = [a](double x) {
        return x * std::exp(-(x * x + a * a) / 2.0) * std::cyl_bessel_i(0.0, a * x);
    };
    const double hi = std::max(b, a) + 14.0;
    if (b >= hi)
        return 0.0;
    const std::function<double(double, double, double, double, double, double)> simpson =
        [&](double lo, double hi2, double flo, double fmid, double fhi, double eps) -> double {
        const double mid = 0.5 * (lo + hi2);
        const double lmid = 0.5 * (lo + mid);
        const double rmid = 0.5 * (mid + hi2);
        const double fl = f(lmid);
        const double fr = f(rmid);
        const double whole = (hi2 - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
        const double right = (hi2 - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
        if (std::abs(left + right - whole) < 15.0 * eps || hi2 - lo < 1e-10)
            return left + right + (left + right - whole) / 15.0;
        return simpson(lo, mid, flo, fl, fmid, eps / 2.0) +
               simpson(mid, hi2, fmid, fr, fhi, eps / 2.0);
    };
    const double mid = 0.5 * (b + hi);
    return simpson(b, hi, f(b), f(mid), f(hi), 1e-12);
}

} // namespace fdisac::oracles
