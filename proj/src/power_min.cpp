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

#include "fdisac/power_min.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fdisac {

namespace {

// Floor for the affine a_t^H Qbar a_t row that makes the division step of
// the DC rewrite well defined, in watts.
constexpr double kGainFloorWatts = 1e-12;

std::string format_family(const char* base, int index)
{
    return std::string(base) + "-" + std::to_string(index);
}

} // namespace

void PowerMinSpec::validate() const
{
    scenario.validate();
    if (!(tau_rad > 0.0))
        throw std::invalid_argument("PowerMinSpec: tau_rad must be positive");
    if (static_cast<int>(tau_ul.size()) != scenario.n_ul() ||
        static_cast<int>(tau_dl.size()) != scenario.n_dl())
        throw std::invalid_argument("PowerMinSpec: threshold list lengths mismatch");
    for (double t : tau_ul)
        if (!(t > 0.0))
            throw std::invalid_argument("PowerMinSpec: tau_ul must be positive");
    for (double t : tau_dl)
        if (!(t > 0.0))
            throw std::invalid_argument("PowerMinSpec: tau_dl must be positive");
}

CMat ScaState::q_bar() const
{
    CMat q = V_blocks.at(0);
    for (std::size_t l = 1; l < V_blocks.size(); ++l)
        q += V_blocks[l];
    return q;
}

double ScaState::objective() const
{
    double obj = 0.0;
    for (const auto& v : V_blocks)
        obj += v.real().trace();
    for (double p : ul_powers)
        obj += p;
    return obj;
}

double AffineForm::evaluate(const std::vector<CMat>& v_blocks,
                            const std::vector<double>& p) const
{
    double val = constant;
    for (int k = 0; k < p_coeff.size(); ++k)
        val += p_coeff(k) * p[k];
    for (std::size_t l = 0; l < V_coeff.size(); ++l)
        val += std::real((V_coeff[l] * v_blocks[l]).trace());
    return val;
}

CMat psi_matrix(const ScaState& state, const Scenario& scenario)
{
    const auto ch = interference_channels(scenario);
    CMat psi = scenario.noise_rx *
               CMat::Identity(scenario.geometry.n_rx, scenario.geometry.n_rx);
    for (int k = 0; k < scenario.n_ul(); ++k)
        psi += state.ul_powers[k] * scenario.uplink_channels[k] *
               scenario.uplink_channels[k].adjoint();
    psi += ch.b * state.q_bar() * ch.b.adjoint();
    return hermitize(psi);
}

CMat phi_matrix(int k, const ScaState& state, const Scenario& scenario)
{
    const auto ch = interference_channels(scenario);
    CMat phi = scenario.noise_rx *
               CMat::Identity(scenario.geometry.n_rx, scenario.geometry.n_rx);
    for (int j = 0; j < scenario.n_ul(); ++j) {
        if (j == k)
            continue;
        phi += state.ul_powers[j] * scenario.uplink_channels[j] *
               scenario.uplink_channels[j].adjoint();
    }
    phi += ch.c * state.q_bar() * ch.c.adjoint();
    return hermitize(phi);
}

namespace {

// Shared algebra of the two Taylor bounds: for f(Y) = v^H Y^{-1} v linearized
// at Y0, with Y affine in (V, p) through `channel` and the uplink dyads,
//   f(Y, Y0) = 2 v^H m - m^H Y m,   m = Y0^{-1} v.
AffineForm taylor_bound_common(const CMat& anchor, const CVec& v, const CMat& channel,
                               const Scenario& sc, int skip_k)
{
    const CVec m = Eigen::LDLT<CMat>(anchor).solve(v);
    AffineForm f;
    f.constant = 2.0 * std::real(v.dot(m)) - sc.noise_rx * m.squaredNorm();
    f.p_coeff = RVec::Zero(sc.n_ul());
    for (int k = 0; k < sc.n_ul(); ++k) {
        if (k == skip_k)
            continue;
        f.p_coeff(k) = -std::norm(m.dot(sc.uplink_channels[k]));
    }
    const CVec bm = channel.adjoint() * m;
    const CMat coeff = -(bm * bm.adjoint());
    f.V_coeff.assign(sc.n_dl() + 1, coeff);
    return f;
}

} // namespace

AffineForm radar_taylor_bound(const CMat& psi_anchor, const Scenario& scenario)
{
    const CVec ar = steering_rx(scenario.geometry, scenario.target.angle_deg);
    return taylor_bound_common(psi_anchor, ar, interference_channels(scenario).b, scenario,
                               -1);
}

AffineForm uplink_taylor_bound(int k, const CMat& phi_anchor, const Scenario& scenario)
{
    return taylor_bound_common(phi_anchor, scenario.uplink_channels.at(k),
                               interference_channels(scenario).c, scenario, k);
}

namespace {

// Adds the affine-form terms of `f` to a row (constants are the caller's
// business via the rhs).
void add_form_terms(conic::ProgramBuilder::Row& row, const AffineForm& f,
                    const std::vector<int>& v_offsets, int p_offset, int n_ul)
{
    for (std::size_t l = 0; l < f.V_coeff.size(); ++l)
        row.hermitian(v_offsets[l], f.V_coeff[l]);
    for (int k = 0; k < n_ul; ++k)
        row.coeff(p_offset + k, f.p_coeff(k));
}

} // namespace

conic::ConicProgram build_power_surrogate(const PowerMinSpec& spec, const ScaState& anchor,
                                          const SurrogateFamilies& families)
{
    spec.validate();
    const Scenario& sc = spec.scenario;
    if (families.radar && !(sc.target.power_gain > 0.0))
        throw std::invalid_argument(
            "build_power_surrogate: radar constraint needs a positive target gain");
    const int nt = sc.geometry.n_tx;
    const int K = sc.n_ul();
    const int L = sc.n_dl();

    conic::ProgramBuilder pb;
    std::vector<int> v_off;
    for (int l = 0; l <= L; ++l)
        v_off.push_back(pb.add_hermitian_psd("V_" + std::to_string(l), nt));
    const int p_off = K > 0 ? pb.add_nonneg("p", K) : -1;
    int s_rad = -1, t_ul = -1;
    if (families.radar)
        s_rad = pb.add_nonneg("s_rad", 1);
    if (K > 0)
        t_ul = pb.add_nonneg("t_ul", K);

    // objective: sum of traces plus uplink powers
    for (int l = 0; l <= L; ++l)
        pb.add_hermitian_objective(v_off[l], CMat::Identity(nt, nt));
    for (int k = 0; k < K; ++k)
        pb.set_objective(p_off + k, 1.0);

    const CVec at = steering_tx(sc.geometry, sc.target.angle_deg);
    const CMat at_dyad = at * at.adjoint();

    if (families.radar) {
        const AffineForm f_rad = radar_taylor_bound(psi_matrix(anchor, sc), sc);

        // f(Psi, anchor) >= s
        const int slack = pb.add_nonneg("rad_f_slack", 1);
        {
            auto r = pb.row();
            add_form_terms(r, f_rad, v_off, p_off, K);
            r.coeff(s_rad, -1.0).coeff(slack, -1.0).rhs(-f_rad.constant);
            pb.finish_row(r);
        }
        // s * (a_t^H Qbar a_t) >= tau/|beta0|^2 as the 3-dim cone
        // [s + q, s - q, sqrt(2 tau / |beta0|^2)]
        const int u = pb.add_soc("rad_soc", 3);
        {
            auto r = pb.row();
            r.coeff(u, 1.0).coeff(s_rad, -1.0);
            for (int l = 0; l <= L; ++l)
                r.hermitian(v_off[l], CMat(-at_dyad));
            r.rhs(0.0);
            pb.finish_row(r);
        }
        {
            auto r = pb.row();
            r.coeff(u + 1, 1.0).coeff(s_rad, -1.0);
            for (int l = 0; l <= L; ++l)
                r.hermitian(v_off[l], at_dyad);
            r.rhs(0.0);
            pb.finish_row(r);
        }
        {
            auto r = pb.row();
            r.coeff(u + 2, 1.0).rhs(std::sqrt(2.0 * spec.tau_rad / sc.target.power_gain));
            pb.finish_row(r);
        }
        // a_t^H Qbar a_t >= delta keeps the division step well posed
        const int gain_slack = pb.add_nonneg("rad_gain_slack", 1);
        {
            auto r = pb.row();
            for (int l = 0; l <= L; ++l)
                r.hermitian(v_off[l], at_dyad);
            r.coeff(gain_slack, -1.0).rhs(kGainFloorWatts / sc.p_max_bs);
            pb.finish_row(r);
        }
    }

    for (int k = 0; k < K; ++k) {
        if (!families.ul_on(k))
            continue;
        const AffineForm f_ul = uplink_taylor_bound(k, phi_matrix(k, anchor, sc), sc);
        const int slack = pb.add_nonneg("ul_f_slack_" + std::to_string(k), 1);
        {
            auto r = pb.row();
            add_form_terms(r, f_ul, v_off, p_off, K);
            r.coeff(t_ul + k, -1.0).coeff(slack, -1.0).rhs(-f_ul.constant);
            pb.finish_row(r);
        }
        // t_k * p_k >= tau_k via [t + p, t - p, sqrt(2 tau_k)]
        const int u = pb.add_soc("ul_soc_" + std::to_string(k), 3);
        {
            auto r = pb.row();
            r.coeff(u, 1.0).coeff(t_ul + k, -1.0).coeff(p_off + k, -1.0).rhs(0.0);
            pb.finish_row(r);
        }
        {
            auto r = pb.row();
            r.coeff(u + 1, 1.0).coeff(t_ul + k, -1.0).coeff(p_off + k, 1.0).rhs(0.0);
            pb.finish_row(r);
        }
        {
            auto r = pb.row();
            r.coeff(u + 2, 1.0).rhs(std::sqrt(2.0 * spec.tau_ul[k]));
            pb.finish_row(r);
        }
    }

    for (int l = 0; l < L; ++l) {
        if (!families.dl_on(l))
            continue;
        const CVec& g = sc.downlink_channels[l];
        const CMat g_dyad = g * g.adjoint();
        const int slack = pb.add_nonneg("dl_slack_" + std::to_string(l), 1);
        auto r = pb.row();
        for (int j = 0; j <= L; ++j) {
            // own beam keeps 1/tau of its dyad after moving Qbar across
            const CMat coeff = (j == l + 1) ? CMat((1.0 / spec.tau_dl[l]) * g_dyad)
                                            : CMat(-g_dyad);
            r.hermitian(v_off[j], coeff);
        }
        r.coeff(slack, -1.0).rhs(sc.noise_dl[l]);
        pb.finish_row(r);
    }

    return pb.build();
}

ScaState decode_sca_state(const conic::ConicProgram& program, const RVec& primal, int n_ul,
                          int n_dl)
{
    ScaState st;
    for (int l = 0; l <= n_dl; ++l) {
        const auto slice = program.groups.at("V_" + std::to_string(l));
        st.V_blocks.push_back(
            conic::extract_hermitian(conic::smat(primal.segment(slice.first, slice.second))));
    }
    if (n_ul > 0) {
        const auto p_slice = program.groups.at("p");
        for (int k = 0; k < n_ul; ++k)
            st.ul_powers.push_back(std::max(0.0, primal(p_slice.first + k)));
    }
    return st;
}

namespace {

// SINRs of the relaxed iterate, evaluated per the reduced expressions with
// Qbar = sum V_l. Scale-invariant, so callers may pass normalized states.
double relaxed_radar_sinr_impl(const ScaState& st, const Scenario& sc)
{
    const CVec at = steering_tx(sc.geometry, sc.target.angle_deg);
    const CVec ar = steering_rx(sc.geometry, sc.target.angle_deg);
    const CMat psi = psi_matrix(st, sc);
    const double gain = quad_form(st.q_bar(), at);
    const CVec sol = Eigen::LDLT<CMat>(psi).solve(ar);
    return sc.target.power_gain * gain * std::real(ar.dot(sol));
}

} // namespace

double relaxed_radar_sinr(const ScaState& state, const Scenario& scenario)
{
    return relaxed_radar_sinr_impl(state, scenario);
}

double relaxed_uplink_sinr(int k, const ScaState& state, const Scenario& scenario)
{
    const CVec& h = scenario.uplink_channels.at(k);
    const CVec sol = Eigen::LDLT<CMat>(phi_matrix(k, state, scenario)).solve(h);
    return state.ul_powers.at(k) * std::real(h.dot(sol));
}

double relaxed_downlink_sinr(int l, const ScaState& state, const Scenario& scenario)
{
    const CVec& g = scenario.downlink_channels.at(l);
    const double own = quad_form(state.V_blocks.at(l + 1), g);
    const double total = quad_form(state.q_bar(), g);
    return own / (total - own + scenario.noise_dl.at(l));
}

const char* to_string(OptStatus status)
{
    switch (status) {
    case OptStatus::ok: return "ok";
    case OptStatus::infeasible: return "infeasible";
    case OptStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

NormalizedScenario normalize_scenario(const Scenario& scenario)
{
    NormalizedScenario out;
    out.p_ref = scenario.p_max_bs;
    Scenario& s = out.scenario;
    s = scenario;
    const double kr = std::sqrt(out.p_ref / scenario.noise_rx);
    const double kr2 = kr * kr;
    s.target.amplitude *= kr;
    s.target.power_gain *= kr2;
    for (auto& it : s.interferers) {
        it.amplitude *= kr;
        it.power_gain *= kr2;
    }
    s.si_channel *= kr;
    s.si_power *= kr2;
    for (auto& h : s.uplink_channels)
        h *= kr;
    for (int l = 0; l < scenario.n_dl(); ++l) {
        s.downlink_channels[l] *= std::sqrt(out.p_ref / scenario.noise_dl[l]);
        s.noise_dl[l] = 1.0;
    }
    s.noise_rx = 1.0;
    s.p_max_bs = 1.0;
    for (auto& p : s.p_max_ul)
        p /= out.p_ref;
    return out;
}

RankOneExtraction rank_one_extract(const std::vector<CMat>& v_hat,
                                   const std::vector<double>& p_hat,
                                   const Scenario& scenario)
{
    const int L = scenario.n_dl();
    if (static_cast<int>(v_hat.size()) != L + 1)
        throw std::invalid_argument("rank_one_extract: expected L+1 blocks");
    RankOneExtraction out;
    out.ul_powers = p_hat;
    CMat v0 = v_hat[0];
    for (int l = 1; l <= L; ++l) {
        const CVec& g = scenario.downlink_channels[l - 1];
        const double quad = quad_form(v_hat[l], g);
        const double scale = std::max(1e-300, v_hat[l].cwiseAbs().maxCoeff() * g.squaredNorm());
        if (quad <= 1e-12 * scale)
            throw std::invalid_argument("rank_one_extract: degenerate g^H V g for user " +
                                        std::to_string(l - 1));
        const CVec v = v_hat[l] * g / std::sqrt(quad);
        out.dl_beams.push_back(v);
        v0 += v_hat[l] - v * v.adjoint();
    }
    out.radar_cov = hermitize(v0);
    return out;
}

namespace {

ScaState initial_state(const PowerMinSpec& spec)
{
    const Scenario& sc = spec.scenario;
    const int nt = sc.geometry.n_tx;
    ScaState st;
    const double p_init = sc.p_max_bs / 2.0;
    st.V_blocks.push_back(p_init / nt * CMat::Identity(nt, nt));
    for (int l = 0; l < sc.n_dl(); ++l) {
        const CVec& g = sc.downlink_channels[l];
        const CVec v = std::sqrt(spec.tau_dl[l] * sc.noise_dl[l]) / g.squaredNorm() * g;
        st.V_blocks.push_back(v * v.adjoint());
    }
    for (int k = 0; k < sc.n_ul(); ++k)
        st.ul_powers.push_back(sc.p_max_ul[k] / 2.0);
    return st;
}

void inflate(ScaState& st)
{
    for (auto& v : st.V_blocks)
        v *= 2.0;
    for (auto& p : st.ul_powers)
        p *= 2.0;
}

// Attributes an infeasible surrogate to a constraint family by dropping one
// family at a time.
std::string probe_infeasible_family(const PowerMinSpec& spec, const ScaState& anchor,
                                    const SurrogateFamilies& base,
                                    const conic::SolverSettings& settings)
{
    const auto feasible_without = [&](SurrogateFamilies fam) {
        const auto sol = conic::solve(build_power_surrogate(spec, anchor, fam), settings);
        return sol.status == conic::SolveStatus::optimal ||
               sol.status == conic::SolveStatus::unbounded;
    };
    if (base.radar) {
        SurrogateFamilies fam = base;
        fam.radar = false;
        if (feasible_without(fam))
            return "radar";
    }
    for (int k = 0; k < spec.scenario.n_ul(); ++k) {
        SurrogateFamilies fam = base;
        fam.uplink.assign(spec.scenario.n_ul(), true);
        fam.uplink[k] = false;
        if (feasible_without(fam))
            return format_family("uplink", k);
    }
    for (int l = 0; l < spec.scenario.n_dl(); ++l) {
        SurrogateFamilies fam = base;
        fam.downlink.assign(spec.scenario.n_dl(), true);
        fam.downlink[l] = false;
        if (feasible_without(fam))
            return format_family("downlink", l);
    }
    return "multiple";
}

PowerMinResult run_power_min(const PowerMinSpec& spec, const ScaOptions& options,
                             const SurrogateFamilies& families)
{
    spec.validate();
    const NormalizedScenario norm = normalize_scenario(spec.scenario);
    PowerMinSpec nspec = spec;
    nspec.scenario = norm.scenario;

    PowerMinResult res;
    ScaState state = initial_state(nspec);
    bool have_accepted = false;
    int restarts = 0;
    double prev_obj = 0.0;
    bool converged = false;

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        const auto program = build_power_surrogate(nspec, state, families);
        const auto sol = conic::solve(program, options.solver);

        if (sol.status == conic::SolveStatus::infeasible) {
            if (!have_accepted && restarts < 5) {
                ++restarts;
                inflate(state);
                continue;
            }
            if (!have_accepted) {
                res.status = OptStatus::infeasible;
                res.infeasible_family =
                    probe_infeasible_family(nspec, state, families, options.solver);
                return res;
            }
            break; // keep the best accepted iterate
        }
        if (sol.status != conic::SolveStatus::optimal)
            break;

        ScaState cand = decode_sca_state(program, sol.primal, nspec.scenario.n_ul(),
                                         nspec.scenario.n_dl());
        const double obj = cand.objective();
        if (have_accepted && obj > prev_obj) {
            converged = true; // numerical floor: reject the non-improving step
            break;
        }
        cand.iteration = iter;
        cand.objective_trace = state.objective_trace;
        cand.objective_trace.push_back(obj * norm.p_ref);
        state = std::move(cand);

        TraceRow row;
        row.iter = iter;
        row.objective = obj * norm.p_ref;
        row.radar_slack =
            families.radar ? relaxed_radar_sinr(state, nspec.scenario) / spec.tau_rad - 1.0
                           : 0.0;
        double min_ul = std::numeric_limits<double>::infinity();
        for (int k = 0; k < nspec.scenario.n_ul(); ++k)
            min_ul = std::min(min_ul, relaxed_uplink_sinr(k, state, nspec.scenario) /
                                          spec.tau_ul[k] -
                                      1.0);
        double min_dl = std::numeric_limits<double>::infinity();
        for (int l = 0; l < nspec.scenario.n_dl(); ++l)
            min_dl = std::min(min_dl, relaxed_downlink_sinr(l, state, nspec.scenario) /
                                          spec.tau_dl[l] -
                                      1.0);
        row.min_ul_slack = std::isfinite(min_ul) ? min_ul : 0.0;
        row.min_dl_slack = std::isfinite(min_dl) ? min_dl : 0.0;
        row.solve_ms = sol.solve_stats.solve_ms;
        res.trace.push_back(row);

        if (have_accepted &&
            std::abs(obj - prev_obj) < options.epsilon * std::max(prev_obj, 1e-12)) {
            converged = true;
            break;
        }
        prev_obj = obj;
        have_accepted = true;
    }

    if (!have_accepted) {
        res.status = OptStatus::iteration_limit;
        return res;
    }

    // Denormalize and reconstruct the rank-one design.
    res.state = state;
    for (auto& v : res.state.V_blocks)
        v *= norm.p_ref;
    for (auto& p : res.state.ul_powers)
        p *= norm.p_ref;

    const auto extraction =
        rank_one_extract(res.state.V_blocks, res.state.ul_powers, spec.scenario);
    res.tx.dl_beams = extraction.dl_beams;
    res.tx.radar_cov = extraction.radar_cov;
    res.tx.ul_powers = extraction.ul_powers;
    res.rx = optimal_receivers(res.tx, spec.scenario);
    res.sinr = sinr_report(res.tx, res.rx, spec.scenario);
    res.objective_w = res.state.objective();
    res.status = converged ? OptStatus::ok : OptStatus::iteration_limit;
    return res;
}

} // namespace

PowerMinResult sca_power_min(const PowerMinSpec& spec, const ScaOptions& options)
{
    return run_power_min(spec, options, SurrogateFamilies::all());
}

PowerMinResult comm_only_power_min(const PowerMinSpec& spec, const ScaOptions& options)
{
    SurrogateFamilies fam;
    fam.radar = false;
    return run_power_min(spec, options, fam);
}

} // namespace fdisac
