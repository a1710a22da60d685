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

#include "fdisac/conic/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace fdisac::conic {

const char* to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_limit: return "numerical_limit";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Cone toolkit. All vectors below live on the cone part of the variable
// vector; block offsets are relative to its start. The Nesterov-Todd scaling
// point W satisfies lambda = W s = W^{-T} x for the current interior pair.
// ---------------------------------------------------------------------------

struct BlockRef {
    ConeKind kind;
    int off;
    int len;
    int m; // matrix order for psd blocks
};

struct Scaling {
    // nonneg: w; soc: beta, wbar; psd: R, Rinv, RRt and eigenvalue diag.
    std::vector<RVec> nn_w;
    std::vector<double> soc_beta;
    std::vector<RVec> soc_wbar;
    std::vector<RMat> psd_R, psd_Rinv, psd_RRt;
    std::vector<RVec> psd_sigma;
    RVec lambda;
};

RVec soc_jmul(const RVec& v)
{
    RVec r = -v;
    r(0) = v(0);
    return r;
}

class ConeKit {
public:
    explicit ConeKit(const ConicProgram& p)
    {
        const int nf = p.free_count();
        nc_ = 0;
        for (const auto& b : p.cone_blocks) {
            blocks_.push_back({b.kind, b.offset - nf, b.length, b.dim});
            nc_ += b.length;
            switch (b.kind) {
            case ConeKind::nonneg: degree_ += b.dim; n_nn_++; break;
            case ConeKind::second_order: degree_ += 1; n_soc_++; break;
            case ConeKind::psd_real: degree_ += b.dim; n_psd_++; break;
            }
        }
    }

    int size() const { return nc_; }
    int degree() const { return degree_; }

    RVec identity() const
    {
        RVec e = RVec::Zero(nc_);
        for (const auto& b : blocks_) {
            switch (b.kind) {
            case ConeKind::nonneg:
                e.segment(b.off, b.len).setOnes();
                break;
            case ConeKind::second_order:
                e(b.off) = 1.0;
                break;
            case ConeKind::psd_real:
                e.segment(b.off, b.len) = svec(RMat::Identity(b.m, b.m));
                break;
            }
        }
        return e;
    }

    // Factor M = L L^T robustly; falls back to an eigenvalue square root
    // when the Cholesky runs out of positive pivots near the boundary.
    static RMat robust_factor(const RMat& m)
    {
        Eigen::LLT<RMat> llt(m);
        if (llt.info() == Eigen::Success)
            return RMat(llt.matrixL());
        Eigen::SelfAdjointEigenSolver<RMat> es(m);
        RVec d = es.eigenvalues();
        const double floor = std::max(d.cwiseAbs().maxCoeff(), 1e-300) * 1e-14;
        for (int i = 0; i < d.size(); ++i)
            d(i) = std::sqrt(std::max(d(i), floor));
        return es.eigenvectors() * d.asDiagonal();
    }

    Scaling compute_scaling(const RVec& x, const RVec& s) const
    {
        Scaling sc;
        sc.lambda = RVec::Zero(nc_);
        for (const auto& b : blocks_) {
            const auto xb = x.segment(b.off, b.len);
            const auto sb = s.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg: {
                RVec w = (xb.array() / sb.array()).sqrt().matrix();
                sc.lambda.segment(b.off, b.len) = (xb.array() * sb.array()).sqrt().matrix();
                sc.nn_w.push_back(std::move(w));
                break;
            }
            case ConeKind::second_order: {
                const double xr = std::sqrt(std::max(
                    (xb(0) - xb.tail(b.len - 1).norm()) * (xb(0) + xb.tail(b.len - 1).norm()),
                    1e-300));
                const double sr = std::sqrt(std::max(
                    (sb(0) - sb.tail(b.len - 1).norm()) * (sb(0) + sb.tail(b.len - 1).norm()),
                    1e-300));
                const RVec xbar = xb / xr;
                const RVec sbar = sb / sr;
                const double gamma = std::sqrt((1.0 + xbar.dot(sbar)) / 2.0);
                const RVec wbar = (xbar + soc_jmul(sbar)) / (2.0 * gamma);
                // W = beta * P(v) with v the Jordan square root of the unit
                // hyperbolic NT point wbar.
                const double head = std::sqrt((wbar(0) + 1.0) / 2.0);
                RVec v(b.len);
                v(0) = head;
                v.tail(b.len - 1) = wbar.tail(b.len - 1) / (2.0 * head);
                const double beta = std::sqrt(xr / sr);
                sc.soc_beta.push_back(beta);
                sc.soc_wbar.push_back(std::move(v));
                // lambda = W s for this block
                const RVec& wb = sc.soc_wbar.back();
                sc.lambda.segment(b.off, b.len) =
                    beta * (2.0 * wb * wb.dot(sb) - soc_jmul(sb));
                break;
            }
            case ConeKind::psd_real: {
                const RMat X = smat(xb);
                const RMat S = smat(sb);
                const RMat Lx = robust_factor(X);
                const RMat Ls = robust_factor(S);
                Eigen::JacobiSVD<RMat> svd(Ls.transpose() * Lx,
                                           Eigen::ComputeFullU | Eigen::ComputeFullV);
                RVec sig = svd.singularValues();
                const double floor = std::max(sig.maxCoeff(), 1e-300) * 1e-15;
                sig = sig.cwiseMax(floor);
                const RVec isqrt = sig.cwiseSqrt().cwiseInverse();
                RMat R = Lx * svd.matrixV() * isqrt.asDiagonal();
                RMat Rinv = isqrt.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
                sc.psd_RRt.push_back(R * R.transpose());
                sc.psd_R.push_back(std::move(R));
                sc.psd_Rinv.push_back(std::move(Rinv));
                sc.lambda.segment(b.off, b.len) = svec(RMat(sig.asDiagonal()));
                sc.psd_sigma.push_back(std::move(sig));
                break;
            }
            }
        }
        return sc;
    }

    // W v (maps dual-side vectors into lambda space).
    RVec apply_W(const Scaling& sc, const RVec& v) const
    {
        RVec r(nc_);
        int inn = 0, isoc = 0, ipsd = 0;
        for (const auto& b : blocks_) {
            const auto vb = v.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                r.segment(b.off, b.len) = sc.nn_w[inn].cwiseProduct(vb);
                ++inn;
                break;
            case ConeKind::second_order: {
                const RVec& wb = sc.soc_wbar[isoc];
                r.segment(b.off, b.len) =
                    sc.soc_beta[isoc] * (2.0 * wb * wb.dot(vb) - soc_jmul(vb));
                ++isoc;
                break;
            }
            case ConeKind::psd_real: {
                const RMat V = smat(vb);
                r.segment(b.off, b.len) =
                    svec(RMat(sc.psd_R[ipsd].transpose() * V * sc.psd_R[ipsd]));
                ++ipsd;
                break;
            }
            }
        }
        return r;
    }

    // W^{-T} v (maps primal-side vectors into lambda space).
    RVec apply_WinvT(const Scaling& sc, const RVec& v) const
    {
        RVec r(nc_);
        int inn = 0, isoc = 0, ipsd = 0;
        for (const auto& b : blocks_) {
            const auto vb = v.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                r.segment(b.off, b.len) = vb.cwiseQuotient(sc.nn_w[inn]);
                ++inn;
                break;
            case ConeKind::second_order: {
                const RVec jw = soc_jmul(sc.soc_wbar[isoc]);
                r.segment(b.off, b.len) =
                    (2.0 * jw * jw.dot(vb) - soc_jmul(vb)) / sc.soc_beta[isoc];
                ++isoc;
                break;
            }
            case ConeKind::psd_real: {
                const RMat V = smat(vb);
                r.segment(b.off, b.len) =
                    svec(RMat(sc.psd_Rinv[ipsd] * V * sc.psd_Rinv[ipsd].transpose()));
                ++ipsd;
                break;
            }
            }
        }
        return r;
    }

    // W^{-1} v (lambda space back to the dual side).
    RVec apply_Winv(const Scaling& sc, const RVec& v) const
    {
        RVec r(nc_);
        int inn = 0, isoc = 0, ipsd = 0;
        for (const auto& b : blocks_) {
            const auto vb = v.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                r.segment(b.off, b.len) = vb.cwiseQuotient(sc.nn_w[inn]);
                ++inn;
                break;
            case ConeKind::second_order: {
                const RVec jw = soc_jmul(sc.soc_wbar[isoc]);
                r.segment(b.off, b.len) =
                    (2.0 * jw * jw.dot(vb) - soc_jmul(vb)) / sc.soc_beta[isoc];
                ++isoc;
                break;
            }
            case ConeKind::psd_real: {
                const RMat V = smat(vb);
                r.segment(b.off, b.len) =
                    svec(RMat(sc.psd_Rinv[ipsd].transpose() * V * sc.psd_Rinv[ipsd]));
                ++ipsd;
                break;
            }
            }
        }
        return r;
    }

    // H^{-1} v with H = W^{-1} W^{-T}.
    RVec apply_Hinv(const Scaling& sc, const RVec& v) const
    {
        RVec r(nc_);
        int inn = 0, isoc = 0, ipsd = 0;
        for (const auto& b : blocks_) {
            const auto vb = v.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                r.segment(b.off, b.len) = sc.nn_w[inn].array().square().matrix().cwiseProduct(vb);
                ++inn;
                break;
            case ConeKind::second_order: {
                const RVec& wb = sc.soc_wbar[isoc];
                const double beta = sc.soc_beta[isoc];
                const RVec t = beta * (2.0 * wb * wb.dot(vb) - soc_jmul(vb));
                r.segment(b.off, b.len) = beta * (2.0 * wb * wb.dot(t) - soc_jmul(t));
                ++isoc;
                break;
            }
            case ConeKind::psd_real: {
                const RMat V = smat(vb);
                const RMat& G = sc.psd_RRt[ipsd];
                r.segment(b.off, b.len) = svec(RMat(G * V * G));
                ++ipsd;
                break;
            }
            }
        }
        return r;
    }

    // Jordan product u o v blockwise.
    RVec jordan_prod(const RVec& u, const RVec& v) const
    {
        RVec r(nc_);
        for (const auto& b : blocks_) {
            const auto ub = u.segment(b.off, b.len);
            const auto vb = v.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                r.segment(b.off, b.len) = ub.cwiseProduct(vb);
                break;
            case ConeKind::second_order: {
                r(b.off) = ub.dot(vb);
                r.segment(b.off + 1, b.len - 1) =
                    ub(0) * vb.tail(b.len - 1) + vb(0) * ub.tail(b.len - 1);
                break;
            }
            case ConeKind::psd_real: {
                const RMat U = smat(ub);
                const RMat V = smat(vb);
                r.segment(b.off, b.len) = svec(RMat(0.5 * (U * V + V * U)));
                break;
            }
            }
        }
        return r;
    }

    // Solves lambda o z = d where lambda is the current scaled point.
    RVec jordan_solve_lambda(const Scaling& sc, const RVec& d) const
    {
        RVec z(nc_);
        int ipsd = 0;
        for (const auto& b : blocks_) {
            const auto lb = sc.lambda.segment(b.off, b.len);
            const auto db = d.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                z.segment(b.off, b.len) = db.cwiseQuotient(lb);
                break;
            case ConeKind::second_order: {
                // Arrow-matrix inverse in closed form.
                const int q = b.len;
                const double l0 = lb(0);
                const auto l1 = lb.tail(q - 1);
                const double det = l0 * l0 - l1.squaredNorm();
                const double z0 = (l0 * db(0) - l1.dot(db.tail(q - 1))) / det;
                z(b.off) = z0;
                z.segment(b.off + 1, q - 1) = (db.tail(q - 1) - z0 * l1) / l0;
                break;
            }
            case ConeKind::psd_real: {
                const RVec& sig = sc.psd_sigma[ipsd];
                const RMat D = smat(db);
                RMat Z(b.m, b.m);
                for (int i = 0; i < b.m; ++i)
                    for (int j = 0; j < b.m; ++j)
                        Z(i, j) = 2.0 * D(i, j) / (sig(i) + sig(j));
                z.segment(b.off, b.len) = svec(Z);
                ++ipsd;
                break;
            }
            }
        }
        return z;
    }

    // Largest alpha with lambda + alpha d in the cone (inf when unbounded).
    double max_step(const Scaling& sc, const RVec& d) const
    {
        double alpha = kInf;
        int ipsd = 0;
        for (const auto& b : blocks_) {
            const auto lb = sc.lambda.segment(b.off, b.len);
            const auto db = d.segment(b.off, b.len);
            switch (b.kind) {
            case ConeKind::nonneg:
                for (int i = 0; i < b.len; ++i)
                    if (db(i) < 0.0)
                        alpha = std::min(alpha, -lb(i) / db(i));
                break;
            case ConeKind::second_order: {
                const int q = b.len;
                const double c2 = db(0) * db(0) - db.tail(q - 1).squaredNorm();
                const double c1 = 2.0 * (lb(0) * db(0) - lb.tail(q - 1).dot(db.tail(q - 1)));
                const double c0 = lb(0) * lb(0) - lb.tail(q - 1).squaredNorm();
                // smallest positive root of c2 a^2 + c1 a + c0 = 0 (c0 > 0)
                double root = kInf;
                if (std::abs(c2) < 1e-300) {
                    if (c1 < 0.0)
                        root = -c0 / c1;
                } else {
                    const double disc = c1 * c1 - 4.0 * c2 * c0;
                    if (disc >= 0.0) {
                        const double sq = std::sqrt(disc);
                        const double qq = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
                        const double r1 = qq / c2;
                        const double r2 = std::abs(qq) > 0.0 ? c0 / qq : kInf;
                        if (r1 > 0.0) root = std::min(root, r1);
                        if (r2 > 0.0) root = std::min(root, r2);
                    }
                }
                // the head must also stay nonnegative
                if (db(0) < 0.0)
                    root = std::min(root, -lb(0) / db(0));
                alpha = std::min(alpha, root);
                break;
            }
            case ConeKind::psd_real: {
                const RVec& sig = sc.psd_sigma[ipsd];
                const RMat D = smat(db);
                RMat M(b.m, b.m);
                for (int i = 0; i < b.m; ++i)
                    for (int j = 0; j < b.m; ++j)
                        M(i, j) = D(i, j) / std::sqrt(sig(i) * sig(j));
                Eigen::SelfAdjointEigenSolver<RMat> es(M, Eigen::EigenvaluesOnly);
                const double emin = es.eigenvalues().minCoeff();
                if (emin < 0.0)
                    alpha = std::min(alpha, -1.0 / emin);
                ++ipsd;
                break;
            }
            }
        }
        return alpha;
    }

private:
    std::vector<BlockRef> blocks_;
    int nc_ = 0;
    int degree_ = 0;
    int n_nn_ = 0, n_soc_ = 0, n_psd_ = 0;
};

// ---------------------------------------------------------------------------
// Block-aware Ruiz equilibration. Column scales are uniform within each SOC
// and PSD block so cone membership is preserved.
// ---------------------------------------------------------------------------

struct Equilibration {
    RVec row_scale;   // D_r
    RVec col_scale;   // D_c
    double b_scale = 1.0;
    double c_scale = 1.0;
};

Equilibration equilibrate(RMat& a, RVec& b, RVec& c, const ConicProgram& p)
{
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    Equilibration eq;
    eq.row_scale = RVec::Ones(m);
    eq.col_scale = RVec::Ones(n);

    const int nf = p.free_count();
    for (int pass = 0; pass < 3 && m > 0; ++pass) {
        RVec r(m), s(n);
        for (int i = 0; i < m; ++i) {
            const double v = a.row(i).cwiseAbs().maxCoeff();
            r(i) = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
        }
        a = r.asDiagonal() * a;
        eq.row_scale = eq.row_scale.cwiseProduct(r);

        // per-column norms, then collapse to one scale per SOC/PSD block
        for (int j = 0; j < n; ++j) {
            const double v = a.col(j).cwiseAbs().maxCoeff();
            s(j) = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
        }
        for (const auto& blk : p.cone_blocks) {
            if (blk.kind == ConeKind::nonneg)
                continue;
            const double v = a.middleCols(blk.offset, blk.length).cwiseAbs().maxCoeff();
            const double u = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
            s.segment(blk.offset, blk.length).setConstant(u);
        }
        (void)nf;
        a = a * s.asDiagonal();
        eq.col_scale = eq.col_scale.cwiseProduct(s);
    }
    b = eq.row_scale.cwiseProduct(b);
    c = eq.col_scale.cwiseProduct(c);

    eq.b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    eq.c_scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    b /= eq.b_scale;
    c /= eq.c_scale;
    return eq;
}

} // namespace

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings)
{
    const auto t0 = std::chrono::steady_clock::now();
    program.validate();

    RMat A = RMat(program.eq_matrix);
    RVec b = program.eq_rhs;
    RVec c = program.objective;
    const Equilibration eq = equilibrate(A, b, c, program);

    const int n = program.n_vars;
    const int m = program.n_rows();
    const int nf = program.free_count();
    const int nc = n - nf;

    const ConeKit kit(program);
    const RVec e = kit.identity();
    const double nu = kit.degree() + 1.0;

    const RMat AF = A.leftCols(nf);
    const RMat AC = A.rightCols(nc);
    const RVec cF = c.head(nf);
    const RVec cC = c.tail(nc);

    // Homogeneous embedding state.
    RVec x = RVec::Zero(n);
    x.tail(nc) = e;
    RVec y = RVec::Zero(m);
    RVec s = e;
    double tau = 1.0, kappa = 1.0;

    ConicSolution out;
    out.primal = RVec::Zero(n);

    const auto finish = [&](SolveStatus st, const RVec& xv, int iters, double pres,
                            double dres, double relgap) {
        out.status = st;
        out.solve_stats.iterations = iters;
        out.solve_stats.primal_res = pres;
        out.solve_stats.dual_res = dres;
        out.solve_stats.rel_gap = relgap;
        // undo equilibration
        RVec xo = xv;
        for (int j = 0; j < n; ++j)
            xo(j) *= eq.col_scale(j) * eq.b_scale;
        out.primal = xo;
        out.objective_value = program.objective.dot(xo);
        out.solve_stats.solve_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return out;
    };

    double best_metric = kInf;
    RVec best_x = x / tau;
    double best_pres = kInf, best_dres = kInf, best_gap = kInf;
    int small_steps = 0;

    for (int iter = 0; iter < settings.max_iters; ++iter) {
        // Residuals of the embedded optimality system.
        const RVec Ax = A * x;
        const RVec ATy = A.transpose() * y;
        RVec stilde = RVec::Zero(n);
        stilde.tail(nc) = s;

        const RVec Rp = Ax - tau * b;
        const RVec Rd = tau * c - ATy - stilde;
        const double Rg = kappa + c.dot(x) - b.dot(y);
        const double mu = (x.tail(nc).dot(s) + tau * kappa) / nu;

        // De-homogenized convergence metrics.
        const RVec xh = x / tau;
        const double pres = (A * xh - b).norm() / (1.0 + b.norm());
        RVec dres_vec = A.transpose() * (y / tau) - c;
        dres_vec.tail(nc) += s / tau;
        const double dres = dres_vec.norm() / (1.0 + c.norm());
        const double pcost = c.dot(xh);
        const double dcost = b.dot(y) / tau;
        const double gap = x.tail(nc).dot(s) / (tau * tau);
        const double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});

        if (settings.verbose)
            std::printf("it %3d  pres %9.2e dres %9.2e relgap %9.2e tau %8.2e kappa %8.2e\n",
                        iter, pres, dres, relgap, tau, kappa);
#ifdef FDISAC_SOLVER_DEBUG
        {
            const Scaling scd = kit.compute_scaling(x.tail(nc), s);
            const RVec l1 = kit.apply_W(scd, s);
            const RVec l2 = kit.apply_WinvT(scd, RVec(x.tail(nc)));
            std::printf("      scaling consistency |Ws - WinvT x| = %.3e  lambda0=%.3e\n",
                        (l1 - l2).norm(), scd.lambda(0));
        }
#endif

        const double metric = std::max({pres, dres, relgap});
        if (metric < best_metric) {
            best_metric = metric;
            best_x = xh;
            best_pres = pres;
            best_dres = dres;
            best_gap = relgap;
        }

        if (pres <= settings.tol_feas && dres <= settings.tol_feas && relgap <= settings.tol_gap)
            return finish(SolveStatus::optimal, xh, iter, pres, dres, relgap);

        // Numerical breakdown past the best point reached: settle for the
        // best iterate and classify it against the tolerances.
        if (metric > 1e3 * best_metric && iter > 3) {
            const bool ok = best_pres <= settings.tol_feas && best_dres <= settings.tol_feas &&
                            best_gap <= settings.tol_gap;
            return finish(ok ? SolveStatus::optimal : SolveStatus::numerical_limit, best_x, iter,
                          best_pres, best_dres, best_gap);
        }

        // Infeasibility certificates, gated on a collapsing tau.
        if (kappa > 1e3 * tau) {
            const double by = b.dot(y);
            if (by > 0.0) {
                RVec cert = A.transpose() * (y / by);
                cert.tail(nc) += s / by;
                if (cert.norm() <= settings.tol_infeas * (1.0 + y.norm() / by) * 10.0)
                    return finish(SolveStatus::infeasible, best_x, iter, pres, dres, relgap);
            }
            const double cx = -c.dot(x);
            if (cx > 0.0) {
                const RVec ray = x / cx;
                if ((A * ray).norm() <= settings.tol_infeas * (1.0 + ray.norm()) * 10.0)
                    return finish(SolveStatus::unbounded, best_x, iter, pres, dres, relgap);
            }
        }

        // NT scaling and the reduced Schur system
        //   [ AC H^{-1} AC^T   AF ] [dy ]   [.]
        //   [ AF^T              0 ] [dxF] = [.]
        const Scaling sc = kit.compute_scaling(x.tail(nc), s);

        RMat HinvAT(m, nc);
        for (int i = 0; i < m; ++i)
            HinvAT.row(i) = kit.apply_Hinv(sc, AC.row(i).transpose()).transpose();
        RMat M(m + nf, m + nf);
        M.setZero();
        M.topLeftCorner(m, m) = AC * HinvAT.transpose();
        M.topLeftCorner(m, m) = 0.5 * (M.topLeftCorner(m, m) + M.topLeftCorner(m, m).transpose());
        M.topRightCorner(m, nf) = AF;
        M.bottomLeftCorner(nf, m) = AF.transpose();
        const double reg = 1e-12 * (1.0 + M.topLeftCorner(m, m).trace() / std::max(1, m));
        M.topLeftCorner(m, m).diagonal().array() += reg;
        M.bottomRightCorner(nf, nf).diagonal().array() -= reg;
        const Eigen::PartialPivLU<RMat> lu(M);

        const RVec Hinv_cC = kit.apply_Hinv(sc, cC);
        RVec rhs2(m + nf);
        rhs2.head(m) = b + AC * Hinv_cC;
        rhs2.tail(nf) = cF;
        const RVec u2 = lu.solve(rhs2);
        const RVec u2y = u2.head(m);
        const RVec u2f = u2.tail(nf);
        const RVec v2 = kit.apply_Hinv(sc, RVec(AC.transpose() * u2y - cC));

        // One direction solve for a given right-hand side family.
        const auto direction_once = [&](const RVec& dp, const RVec& dd, double dg, const RVec& ds,
                                        double dkappa, RVec& dx, RVec& dy, RVec& dsd, double& dtau,
                                        double& dkap) {
            const RVec zs = kit.jordan_solve_lambda(sc, ds);
            const RVec wtil = kit.apply_Winv(sc, zs) - dd.tail(nc);
            RVec rhs1(m + nf);
            rhs1.head(m) = dp - AC * kit.apply_Hinv(sc, wtil);
            rhs1.tail(nf) = dd.head(nf);
            RVec u1 = lu.solve(rhs1);
            u1 += lu.solve(RVec(rhs1 - M * u1));
            const RVec u1y = u1.head(m);
            const RVec u1f = u1.tail(nf);
            const RVec v1 = kit.apply_Hinv(sc, RVec(AC.transpose() * u1y + wtil));

            const double T1 = cF.dot(u1f) + cC.dot(v1) - b.dot(u1y) + dkappa / tau;
            const double T2 = cF.dot(u2f) + cC.dot(v2) - b.dot(u2y) - kappa / tau;
            dtau = (dg - T1) / T2;

            dy = u1y + dtau * u2y;
            dx.resize(n);
            dx.head(nf) = u1f + dtau * u2f;
            dx.tail(nc) = v1 + dtau * v2;
            dsd = dd.tail(nc) - AC.transpose() * dy + cC * dtau;
            dkap = (dkappa - kappa * dtau) / tau;
        };

        // Direction with one pass of full-system iterative refinement; the
        // elimination through H loses digits once the iterate nears the
        // boundary, and the refinement recovers them.
        const auto direction = [&](const RVec& dp, const RVec& dd, double dg, const RVec& ds,
                                   double dkappa, RVec& dx, RVec& dy, RVec& dsd, double& dtau,
                                   double& dkap) {
            direction_once(dp, dd, dg, ds, dkappa, dx, dy, dsd, dtau, dkap);
            RVec sd_full = RVec::Zero(n);
            sd_full.tail(nc) = dsd;
            const RVec r1 = dp - (A * dx - b * dtau);
            const RVec r2 = dd - (A.transpose() * dy + sd_full - c * dtau);
            const double r3 = dg - (c.dot(dx) - b.dot(dy) + dkap);
            const RVec r4 = ds - kit.jordan_prod(sc.lambda,
                                                 RVec(kit.apply_WinvT(sc, RVec(dx.tail(nc))) +
                                                      kit.apply_W(sc, dsd)));
            const double r5 = dkappa - (tau * dkap + kappa * dtau);
            RVec ex, ey, es;
            double etau, ekap;
            direction_once(r1, r2, r3, r4, r5, ex, ey, es, etau, ekap);
            dx += ex;
            dy += ey;
            dsd += es;
            dtau += etau;
            dkap += ekap;
        };

        // Affine (predictor) direction.
        RVec dxa, dya, dsa;
        double dtaua, dkapa;
        direction(-Rp, Rd, -Rg, RVec(-kit.jordan_prod(sc.lambda, sc.lambda)), -tau * kappa,
                  dxa, dya, dsa, dtaua, dkapa);

        const RVec dlx_a = kit.apply_WinvT(sc, RVec(dxa.tail(nc)));
        const RVec dls_a = kit.apply_W(sc, dsa);
        double alpha_aff = std::min(kit.max_step(sc, dlx_a), kit.max_step(sc, dls_a));
        if (dtaua < 0.0) alpha_aff = std::min(alpha_aff, -tau / dtaua);
        if (dkapa < 0.0) alpha_aff = std::min(alpha_aff, -kappa / dkapa);
        alpha_aff = std::min(alpha_aff, 1.0);

        const double sigma = std::pow(1.0 - alpha_aff, 3);

        // Combined (corrector) direction.
        RVec ds_comb = -kit.jordan_prod(sc.lambda, sc.lambda) + sigma * mu * e -
                       kit.jordan_prod(dlx_a, dls_a);
        const double dk_comb = -tau * kappa + sigma * mu - dtaua * dkapa;
        RVec dx, dy, dsn;
        double dtau, dkap;
        const double damp = 1.0 - sigma;
        direction(RVec(-damp * Rp), RVec(damp * Rd), -damp * Rg, ds_comb, dk_comb,
                  dx, dy, dsn, dtau, dkap);

        const RVec dlx = kit.apply_WinvT(sc, RVec(dx.tail(nc)));
        const RVec dls = kit.apply_W(sc, dsn);
        double alpha = std::min(kit.max_step(sc, dlx), kit.max_step(sc, dls));
        if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
        if (dkap < 0.0) alpha = std::min(alpha, -kappa / dkap);
        alpha = std::min(0.99 * alpha, 1.0);

        if (!std::isfinite(alpha) || alpha <= 1e-11)
            ++small_steps;
        else
            small_steps = 0;
        if (small_steps >= 3 || !dx.allFinite() || !std::isfinite(dtau)) {
            const bool ok = best_pres <= settings.tol_feas && best_dres <= settings.tol_feas &&
                            best_gap <= settings.tol_gap;
            return finish(ok ? SolveStatus::optimal : SolveStatus::numerical_limit, best_x, iter,
                          best_pres, best_dres, best_gap);
        }

        x += alpha * dx;
        y += alpha * dy;
        s += alpha * dsn;
        tau += alpha * dtau;
        kappa += alpha * dkap;
    }

    const bool ok = best_pres <= settings.tol_feas && best_dres <= settings.tol_feas &&
                    best_gap <= settings.tol_gap;
    return finish(ok ? SolveStatus::optimal : SolveStatus::numerical_limit, best_x,
                  settings.max_iters, best_pres, best_dres, best_gap);
}

} // namespace fdisac::conic
