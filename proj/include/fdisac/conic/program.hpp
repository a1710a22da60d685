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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "fdisac/linalg.hpp"

namespace fdisac::conic {

enum class ConeKind { nonneg, second_order, psd_real };

/// One cone block over the variable slice [offset, offset + length).
/// For psd_real, dim is the matrix order m and length = m(m+1)/2 entries in
/// scaled-triangular (svec) layout; otherwise length == dim.
struct ConeBlock {
    ConeKind kind;
    int dim;
    int offset;
    int length;
};

/// Standard-form conic program: minimize c^T x subject to A x = b with a
/// free variable prefix followed by cone blocks partitioning the suffix.
struct ConicProgram {
    int n_vars = 0;
    RVec objective;
    Eigen::SparseMatrix<double> eq_matrix; // rows x n_vars
    RVec eq_rhs;
    std::vector<ConeBlock> cone_blocks;

    /// Named variable slices kept for structured decode and diagnostics.
    std::map<std::string, std::pair<int, int>> groups; // name -> (offset, length)

    int n_rows() const { return static_cast<int>(eq_rhs.size()); }
    int free_count() const;
    void validate() const;
    void dump(std::ostream& os) const; // plain-text form for cross-checking
};

/// svec length for an m x m symmetric matrix.
inline int svec_len(int m) { return m * (m + 1) / 2; }

/// Scaled upper-triangular vectorization: off-diagonal entries carry sqrt(2)
/// so that svec(M) . svec(N) equals the Frobenius inner product <M, N>.
RVec svec(const RMat& m);
RMat smat(const RVec& v);

/// [[Re H, -Im H], [Im H, Re H]] for Hermitian H; rejects non-Hermitian input.
RMat embed_hermitian(const CMat& h, double tol = 1e-10);

/// Inverse map (X11 + X22)/2 + j (X21 - X12)/2, Hermitian by construction.
CMat extract_hermitian(const RMat& x);

/// Coefficient vector a over a psd_real block of order 2n such that
/// a . x_block = Tr(M V) where V is the Hermitian matrix the block encodes.
RVec hermitian_form_coeff(const CMat& m);

/// Incremental builder. Variables are appended left to right; all free
/// variables must be added before the first cone block.
class ProgramBuilder {
public:
    int add_free(const std::string& name, int count);
    int add_nonneg(const std::string& name, int count);
    int add_soc(const std::string& name, int dim);
    /// Hermitian n x n PSD variable stored as an embedded real block of order 2n.
    int add_hermitian_psd(const std::string& name, int n);

    void set_objective(int var, double coeff);
    /// Adds Tr(M V) with Hermitian M to the objective for block `var_offset`.
    void add_hermitian_objective(int block_offset, const CMat& m);

    class Row {
    public:
        Row& coeff(int var, double c);
        Row& hermitian(int block_offset, const CMat& m); // adds Tr(M V)
        Row& rhs(double b);

    private:
        friend class ProgramBuilder;
        explicit Row(ProgramBuilder& b) : builder_(b) {}
        ProgramBuilder& builder_;
        std::vector<Eigen::Triplet<double>> entries_;
        double rhs_ = 0.0;
    };

    Row row() { return Row(*this); }
    void finish_row(Row& r);

    std::pair<int, int> group(const std::string& name) const;
    int hermitian_order(int block_offset) const; // n for a block made by add_hermitian_psd

    ConicProgram build();

private:
    int add_block(const std::string& name, ConeKind kind, int dim, int length);
    int n_vars_ = 0;
    bool cones_started_ = false;
    std::vector<ConeBlock> blocks_;
    std::map<std::string, std::pair<int, int>> groups_;
    std::map<int, int> hermitian_orders_;
    std::vector<Eigen::Triplet<double>> a_entries_;
    std::vector<double> rhs_;
    std::vector<std::pair<int, double>> obj_entries_;
};

} // namespace fdisac::conic
