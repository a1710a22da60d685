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

#include "fdisac/conic/program.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fdisac::conic {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

int ConicProgram::free_count() const
{
    int cone_total = 0;
    for (const auto& b : cone_blocks)
        cone_total += b.length;
    return n_vars - cone_total;
}

void ConicProgram::validate() const
{
    if (objective.size() != n_vars)
        throw std::invalid_argument("ConicProgram: objective length mismatch");
    if (eq_matrix.rows() != eq_rhs.size() || eq_matrix.cols() != n_vars)
        throw std::invalid_argument("ConicProgram: equality system dimension mismatch");
    int expect = free_count();
    if (expect < 0)
        throw std::invalid_argument("ConicProgram: cone blocks exceed variable count");
    for (const auto& b : cone_blocks) {
        if (b.offset != expect)
            throw std::invalid_argument("ConicProgram: cone blocks must tile a suffix");
        const int len = b.kind == ConeKind::psd_real ? svec_len(b.dim) : b.dim;
        if (b.length != len || b.dim < 1)
            throw std::invalid_argument("ConicProgram: bad cone block dimension");
        expect += b.length;
    }
    if (expect != n_vars)
        throw std::invalid_argument("ConicProgram: cone blocks do not reach the end");
}

void ConicProgram::dump(std::ostream& os) const
{
    os << "conic program: " << n_vars << " vars, " << n_rows() << " rows\n";
    os << "objective:";
    for (int i = 0; i < objective.size(); ++i)
        if (objective(i) != 0.0)
            os << ' ' << i << ':' << objective(i);
    os << "\ncones:";
    for (const auto& b : cone_blocks) {
        const char* k = b.kind == ConeKind::nonneg ? "nonneg"
                        : b.kind == ConeKind::second_order ? "soc" : "psd";
        os << ' ' << k << '(' << b.dim << ")@" << b.offset;
    }
    os << "\nrows:\n";
    const RMat a = RMat(eq_matrix);
    for (int r = 0; r < a.rows(); ++r) {
        os << "  [" << r << "]";
        for (int j = 0; j < a.cols(); ++j)
            if (a(r, j) != 0.0)
                os << ' ' << j << ':' << a(r, j);
        os << " = " << eq_rhs(r) << '\n';
    }
    os << "groups:";
    for (const auto& [name, slice] : groups)
        os << ' ' << name << "@[" << slice.first << ',' << slice.first + slice.second << ')';
    os << '\n';
}

RVec svec(const RMat& m)
{
    const int n = static_cast<int>(m.rows());
    RVec v(svec_len(n));
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i)
            v(idx++) = i == j ? m(i, j) : kSqrt2 * 0.5 * (m(i, j) + m(j, i));
    return v;
}

RMat smat(const RVec& v)
{
    const int n = static_cast<int>((std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0 + 0.5);
    if (svec_len(n) != v.size())
        throw std::invalid_argument("smat: length is not triangular");
    RMat m(n, n);
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
            const double x = v(idx++);
            if (i == j) {
                m(i, j) = x;
            } else {
                m(i, j) = x / kSqrt2;
                m(j, i) = m(i, j);
            }
        }
    return m;
}

RMat embed_hermitian(const CMat& h, double tol)
{
    if (h.rows() != h.cols())
        throw std::invalid_argument("embed_hermitian: matrix must be square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (hermitian_defect(h) > tol * scale)
        throw std::invalid_argument("embed_hermitian: input is not Hermitian");
    const int n = static_cast<int>(h.rows());
    RMat x(2 * n, 2 * n);
    x.topLeftCorner(n, n) = h.real();
    x.bottomRightCorner(n, n) = h.real();
    x.topRightCorner(n, n) = -h.imag();
    x.bottomLeftCorner(n, n) = h.imag();
    return 0.5 * (x + x.transpose());
}

CMat extract_hermitian(const RMat& x)
{
    if (x.rows() != x.cols() || x.rows() % 2 != 0)
        throw std::invalid_argument("extract_hermitian: matrix must be square of even order");
    const int n = static_cast<int>(x.rows()) / 2;
    CMat h(n, n);
    h.real() = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    h.imag() = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    return hermitize(h);
}

RVec hermitian_form_coeff(const CMat& m)
{
    // <embed(M), X> = 2 Tr(M extract(X)) for any symmetric X, hence the 1/2.
    return 0.5 * svec(embed_hermitian(m));
}

int ProgramBuilder::add_free(const std::string& name, int count)
{
    if (cones_started_)
        throw std::logic_error("ProgramBuilder: free variables must precede cone blocks");
    const int offset = n_vars_;
    n_vars_ += count;
    groups_[name] = {offset, count};
    return offset;
}

int ProgramBuilder::add_block(const std::string& name, ConeKind kind, int dim, int length)
{
    cones_started_ = true;
    const int offset = n_vars_;
    blocks_.push_back({kind, dim, offset, length});
    n_vars_ += length;
    groups_[name] = {offset, length};
    return offset;
}

int ProgramBuilder::add_nonneg(const std::string& name, int count)
{
    return add_block(name, ConeKind::nonneg, count, count);
}

int ProgramBuilder::add_soc(const std::string& name, int dim)
{
    if (dim < 1)
        throw std::invalid_argument("ProgramBuilder: SOC dimension must be >= 1");
    return add_block(name, ConeKind::second_order, dim, dim);
}

int ProgramBuilder::add_hermitian_psd(const std::string& name, int n)
{
    const int offset = add_block(name, ConeKind::psd_real, 2 * n, svec_len(2 * n));
    hermitian_orders_[offset] = n;
    return offset;
}

void ProgramBuilder::set_objective(int var, double coeff)
{
    obj_entries_.emplace_back(var, coeff);
}

void ProgramBuilder::add_hermitian_objective(int block_offset, const CMat& m)
{
    const RVec coeff = hermitian_form_coeff(m);
    for (int i = 0; i < coeff.size(); ++i)
        if (coeff(i) != 0.0)
            obj_entries_.emplace_back(block_offset + i, coeff(i));
}

ProgramBuilder::Row& ProgramBuilder::Row::coeff(int var, double c)
{
    if (c != 0.0)
        entries_.emplace_back(0, var, c);
    return *this;
}

ProgramBuilder::Row& ProgramBuilder::Row::hermitian(int block_offset, const CMat& m)
{
    const RVec c = hermitian_form_coeff(m);
    for (int i = 0; i < c.size(); ++i)
        if (c(i) != 0.0)
            entries_.emplace_back(0, block_offset + i, c(i));
    return *this;
}

ProgramBuilder::Row& ProgramBuilder::Row::rhs(double b)
{
    rhs_ = b;
    return *this;
}

void ProgramBuilder::finish_row(Row& r)
{
    const int row_index = static_cast<int>(rhs_.size());
    for (auto& t : r.entries_)
        a_entries_.emplace_back(row_index, t.col(), t.value());
    rhs_.push_back(r.rhs_);
}

std::pair<int, int> ProgramBuilder::group(const std::string& name) const
{
    auto it = groups_.find(name);
    if (it == groups_.end())
        throw std::out_of_range("ProgramBuilder: unknown group '" + name + "'");
    return it->second;
}

int ProgramBuilder::hermitian_order(int block_offset) const
{
    auto it = hermitian_orders_.find(block_offset);
    if (it == hermitian_orders_.end())
        throw std::out_of_range("ProgramBuilder: offset is not a Hermitian block");
    return it->second;
}

ConicProgram ProgramBuilder::build()
{
    ConicProgram p;
    p.n_vars = n_vars_;
    p.objective = RVec::Zero(n_vars_);
    for (const auto& [var, coeff] : obj_entries_)
        p.objective(var) += coeff;
    p.eq_matrix.resize(static_cast<int>(rhs_.size()), n_vars_);
    p.eq_matrix.setFromTriplets(a_entries_.begin(), a_entries_.end());
    p.eq_rhs = Eigen::Map<const RVec>(rhs_.data(), static_cast<int>(rhs_.size()));
    p.cone_blocks = blocks_;
    p.groups = groups_;
    p.validate();
    return p;
}

} // namespace fdisac::conic
