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

#include "fdisac/conic/program.hpp"

namespace fdisac::conic {

struct SolverSettings {
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    double tol_infeas = 1e-9;
    int max_iters = 200;
    bool verbose = false;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_limit };

const char* to_string(SolveStatus status);

struct SolveStats {
    int iterations = 0;
    double solve_ms = 0.0;
    double primal_res = 0.0;
    double dual_res = 0.0;
    double rel_gap = 0.0;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::numerical_limit;
    RVec primal;
    double objective_value = 0.0;
    SolveStats solve_stats;
};

/// Dense primal-dual path-following interior-point method over the
/// homogeneous self-dual embedding, with Nesterov-Todd scaling for the
/// nonnegative, second-order, and PSD cones and Mehrotra correction.
/// Sized for the small per-iteration surrogates this project produces.
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings = {});

} // namespace fdisac::conic
