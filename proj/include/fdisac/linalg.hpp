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

#include <Eigen/Dense>
#include <complex>

namespace fdisac {

using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// (M + M^H)/2, forcing an exactly Hermitian matrix.
inline CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

/// max |M_ij| deviation from Hermitian symmetry.
inline double hermitian_defect(const CMat& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Real quadratic form x^H M x for Hermitian M (imaginary part discarded).
inline double quad_form(const CMat& m, const CVec& x)
{
    return std::real(Complex(x.adjoint() * m * x));
}

} // namespace fdisac
