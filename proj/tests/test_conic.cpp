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

#include <doctest.h>

#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fdisac/conic/program.hpp"
#include "fdisac/conic/solver.hpp"

using namespace fdisac;
using namespace fdisac::conic;

namespace {

CMat random_hermitian(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> gauss;
    CMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = Complex(gauss(rng), gauss(rng));
    return hermitize(m);
}

CMat random_hermitian_psd(std::mt19937_64& rng, int n)
{
    const CMat m = random_hermitian(rng, n);
    return CMat(m * m.adjoint());
}

} // namespace

TEST_SUITE_BEGIN("conic");

TEST_CASE("svec/smat round trip preserves inner products")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        RMat a(n, n), b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                a(i, j) = gauss(rng);
                b(i, j) = gauss(rng);
            }
        a = RMat(0.5 * (a + a.transpose()));
        b = RMat(0.5 * (b + b.transpose()));
        CHECK((smat(svec(a)) - a).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(svec(a).dot(svec(b)) ==
              doctest::Approx((a.transpose() * b).trace()).epsilon(1e-12));
    }
}

TEST_CASE("hermitian embedding")
{
    std::mt19937_64 rng(11);

    SUBCASE("scalar and identity cases")
    {
        CMat h1(1, 1);
        h1(0, 0) = 2.5;
        const RMat e1 = embed_hermitian(h1);
        CHECK(e1.rows() == 2);
        CHECK(e1(0, 0) == doctest::Approx(2.5));
        CHECK(e1(1, 1) == doctest::Approx(2.5));
        CHECK(e1(0, 1) == doctest::Approx(0.0));

        const RMat e2 = embed_hermitian(CMat(CMat::Identity(3, 3)));
        CHECK((e2 - RMat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("eigenvalues double in multiplicity")
    {
        const CMat h = random_hermitian(rng, 4);
        const RMat x = embed_hermitian(h);
        Eigen::SelfAdjointEigenSolver<CMat> eh(h);
        Eigen::SelfAdjointEigenSolver<RMat> ex(x);
        RVec expect(8);
        for (int i = 0; i < 4; ++i) {
            expect(2 * i) = eh.eigenvalues()(i);
            expect(2 * i + 1) = eh.eigenvalues()(i);
        }
        std::sort(expect.data(), expect.data() + 8);
        CHECK((ex.eigenvalues() - expect).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(x.trace() == doctest::Approx(2.0 * h.real().trace()).epsilon(1e-12));
    }

    SUBCASE("round trip and perturbation robustness")
    {
        for (int t = 0; t < 10; ++t) {
            const CMat h = random_hermitian(rng, 5);
            CHECK((extract_hermitian(embed_hermitian(h)) - h).cwiseAbs().maxCoeff() < 1e-12);
        }
        const CMat h = random_hermitian(rng, 4);
        RMat x = embed_hermitian(h);
        std::normal_distribution<double> gauss;
        RMat noise(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                noise(i, j) = gauss(rng);
        noise = RMat(0.5e-9 * (noise + noise.transpose()));
        const CMat back = extract_hermitian(RMat(x + noise));
        CHECK(hermitian_defect(back) == 0.0);
        CHECK((back - h).cwiseAbs().maxCoeff() <= 2e-9);
    }

    SUBCASE("identity 4x4 extracts to identity 2x2")
    {
        const CMat h = extract_hermitian(RMat(RMat::Identity(4, 4)));
        CHECK((h - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("rejects non-hermitian input")
    {
        CMat bad(2, 2);
        bad << Complex(1, 0), Complex(2, 1), Complex(2, 2), Complex(3, 0);
        CHECK_THROWS_AS((void)embed_hermitian(bad), std::invalid_argument);
    }

    SUBCASE("PSD order is preserved both ways")
    {
        for (int t = 0; t < 10; ++t) {
            const CMat h1 = random_hermitian(rng, 4);
            const CMat h2 = random_hermitian(rng, 4);
            Eigen::SelfAdjointEigenSolver<CMat> ec(CMat(h1 - h2), Eigen::EigenvaluesOnly);
            Eigen::SelfAdjointEigenSolver<RMat> er(
                RMat(embed_hermitian(h1) - embed_hermitian(h2)), Eigen::EigenvaluesOnly);
            const bool complex_geq = ec.eigenvalues().minCoeff() >= -1e-12;
            const bool real_geq = er.eigenvalues().minCoeff() >= -1e-12;
            CHECK(complex_geq == real_geq);
        }
    }

    SUBCASE("objective consistency through the embedding")
    {
        const CMat m = random_hermitian(rng, 4);
        const CMat v = random_hermitian_psd(rng, 4);
        const double direct = std::real((m * v).trace());
        const double through = hermitian_form_coeff(m).dot(svec(embed_hermitian(v)));
        CHECK(through == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("solver: tiny LP with free variable")
{
    // minimize x s.t. x >= 1, x >= 2
    ProgramBuilder pb;
    const int x = pb.add_free("x", 1);
    const int s = pb.add_nonneg("s", 2);
    pb.set_objective(x, 1.0);
    {
        auto r = pb.row();
        r.coeff(x, 1.0).coeff(s, -1.0).rhs(1.0);
        pb.finish_row(r);
    }
    {
        auto r = pb.row();
        r.coeff(x, 1.0).coeff(s + 1, -1.0).rhs(2.0);
        pb.finish_row(r);
    }
    const ConicSolution sol = solve(pb.build());
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(sol.primal(x) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("solver: SOC norm epigraph")
{
    // minimize t s.t. ||(3,4)|| <= t
    ProgramBuilder pb;
    const int u = pb.add_soc("u", 3);
    pb.set_objective(u, 1.0);
    {
        auto r = pb.row();
        r.coeff(u + 1, 1.0).rhs(3.0);
        pb.finish_row(r);
    }
    {
        auto r = pb.row();
        r.coeff(u + 2, 1.0).rhs(4.0);
        pb.finish_row(r);
    }
    const ConicSolution sol = solve(pb.build());
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("solver: SDP shifted identity")
{
    // minimize Tr(X) s.t. X - I >= 0 (3x3): X free in svec coords, psd slack
    // S tied by X - S = I. Optimum X = I with objective 3.
    ConicProgram p;
    const int t3 = svec_len(3);
    p.n_vars = 2 * t3;
    p.objective = RVec::Zero(p.n_vars);
    p.objective.head(t3) = svec(RMat::Identity(3, 3)); // Tr(X)
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < t3; ++i) {
        trips.emplace_back(i, i, 1.0);
        trips.emplace_back(i, t3 + i, -1.0);
    }
    p.eq_matrix.resize(t3, p.n_vars);
    p.eq_matrix.setFromTriplets(trips.begin(), trips.end());
    p.eq_rhs = svec(RMat::Identity(3, 3));
    p.cone_blocks.push_back({ConeKind::psd_real, 3, t3, t3});

    const ConicSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-7));
    const RMat x = smat(RVec(sol.primal.head(t3)));
    CHECK((x - RMat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("solver: complex hermitian PSD block with trace objective")
{
    // minimize Tr(V) s.t. Tr(M V) >= 1, V hermitian psd. For M psd the
    // optimum is 1/lambda_max(M) with V aligned to the top eigenvector.
    std::mt19937_64 rng(23);
    const int n = 3;
    const CMat m = random_hermitian_psd(rng, n);
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    const double lmax = es.eigenvalues().maxCoeff();

    ProgramBuilder pb;
    const int v = pb.add_hermitian_psd("V", n);
    const int slack = pb.add_nonneg("slack", 1);
    pb.add_hermitian_objective(v, CMat::Identity(n, n));
    {
        auto r = pb.row();
        r.hermitian(v, m).coeff(slack, -1.0).rhs(1.0);
        pb.finish_row(r);
    }
    const ConicSolution sol = solve(pb.build());
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(1.0 / lmax).epsilon(1e-6));

    const auto slice = pb.group("V");
    const CMat vopt = extract_hermitian(smat(sol.primal.segment(slice.first, slice.second)));
    Eigen::SelfAdjointEigenSolver<CMat> ev(vopt, Eigen::EigenvaluesOnly);
    CHECK(ev.eigenvalues().minCoeff() > -1e-9);
    CHECK(std::real((m * vopt).trace()) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solver: mixed cones with rotated-SOC product constraint")
{
    // minimize a + b s.t. a*b >= 4, a,b >= 0 encoded as SOC
    // [a+b, a-b, 4] with (a+b)^2 - (a-b)^2 = 4ab >= 16. Optimum a=b=2.
    ProgramBuilder pb;
    const int ab = pb.add_nonneg("ab", 2);
    const int u = pb.add_soc("u", 3);
    pb.set_objective(ab, 1.0);
    pb.set_objective(ab + 1, 1.0);
    {
        auto r = pb.row();
        r.coeff(u, 1.0).coeff(ab, -1.0).coeff(ab + 1, -1.0).rhs(0.0);
        pb.finish_row(r);
    }
    {
        auto r = pb.row();
        r.coeff(u + 1, 1.0).coeff(ab, -1.0).coeff(ab + 1, 1.0).rhs(0.0);
        pb.finish_row(r);
    }
    {
        auto r = pb.row();
        r.coeff(u + 2, 1.0).rhs(4.0);
        pb.finish_row(r);
    }
    const ConicSolution sol = solve(pb.build());
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(sol.primal(ab) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("solver: infeasible and unbounded detection")
{
    SUBCASE("infeasible")
    {
        // x >= 2 and x <= 1
        ProgramBuilder pb;
        const int x = pb.add_free("x", 1);
        const int s = pb.add_nonneg("s", 2);
        pb.set_objective(x, 1.0);
        {
            auto r = pb.row();
            r.coeff(x, 1.0).coeff(s, -1.0).rhs(2.0);
            pb.finish_row(r);
        }
        {
            auto r = pb.row();
            r.coeff(x, 1.0).coeff(s + 1, 1.0).rhs(1.0);
            pb.finish_row(r);
        }
        const ConicSolution sol = solve(pb.build());
        CHECK(sol.status == SolveStatus::infeasible);
    }

    SUBCASE("unbounded")
    {
        // minimize x - y with x, y >= 0 and x - y free to fall: only the row
        // x + s = 1 pins x, y grows without bound.
        ProgramBuilder pb;
        const int xy = pb.add_nonneg("xy", 2);
        pb.set_objective(xy, 1.0);
        pb.set_objective(xy + 1, -1.0);
        {
            auto r = pb.row();
            r.coeff(xy, 1.0).rhs(1.0);
            pb.finish_row(r);
        }
        const ConicSolution sol = solve(pb.build());
        CHECK(sol.status == SolveStatus::unbounded);
    }
}

TEST_CASE("solver: optimal solutions satisfy the stated contracts")
{
    // random feasible LPs: minimize c'x, Ax = b, x >= 0 with known feasible x0
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        const int nv = 8, mr = 4;
        RMat a(mr, nv);
        for (int i = 0; i < mr; ++i)
            for (int j = 0; j < nv; ++j)
                a(i, j) = gauss(rng);
        RVec x0(nv);
        for (int j = 0; j < nv; ++j)
            x0(j) = 0.5 + std::abs(gauss(rng));
        const RVec b = a * x0;
        RVec c(nv);
        for (int j = 0; j < nv; ++j)
            c(j) = 0.1 + std::abs(gauss(rng)); // bounded below on the nonneg cone? not
        // necessarily, but with random equality rows the LP is almost surely bounded;
        // the status check below tolerates unbounded outcomes.

        ConicProgram p;
        p.n_vars = nv;
        p.objective = c;
        std::vector<Eigen::Triplet<double>> trips;
        for (int i = 0; i < mr; ++i)
            for (int j = 0; j < nv; ++j)
                trips.emplace_back(i, j, a(i, j));
        p.eq_matrix.resize(mr, nv);
        p.eq_matrix.setFromTriplets(trips.begin(), trips.end());
        p.eq_rhs = b;
        p.cone_blocks.push_back({ConeKind::nonneg, nv, 0, nv});

        const ConicSolution sol = solve(p);
        if (sol.status != SolveStatus::optimal)
            continue;
        CHECK((a * sol.primal - b).norm() / (1.0 + b.norm()) < 1e-7);
        CHECK(sol.primal.minCoeff() > -1e-7);
        CHECK(sol.objective_value <= c.dot(x0) + 1e-6);
    }
}

TEST_CASE("program validation and dump")
{
    ProgramBuilder pb;
    pb.add_free("x", 1);
    const int u = pb.add_soc("u", 3);
    pb.set_objective(u, 1.0);
    {
        auto r = pb.row();
        r.coeff(u + 1, 1.0).rhs(3.0);
        pb.finish_row(r);
    }
    ConicProgram p = pb.build();
    std::ostringstream os;
    p.dump(os);
    CHECK(os.str().find("soc(3)") != std::string::npos);
    CHECK(os.str().find("= 3") != std::string::npos);

    p.cone_blocks[0].offset = 0; // overlaps the free prefix now
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_SUITE_END();
