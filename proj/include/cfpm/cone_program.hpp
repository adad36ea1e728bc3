// SPDX-License-Identifier: Apache-2.0
//
// cfpm: joint AP on/off selection and downlink precoding for cell-free
// massive MIMO under per-user SINR constraints.
// Copyright (C) 2026 The cfpm authors
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
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Sparse>
#include <ostream>
#include <string>
#include <vector>

#include "cfpm/common.hpp"

namespace cfpm {

// ---------------------------------------------------------------------------
// Standard-form conic program container:
//
//     minimize    c' x
//     subject to  A_b x + q_b  in  K_b        for every block b
//
// with cones
//     ZERO    : v = 0                       (equalities)
//     NONNEG  : v >= 0 elementwise
//     SOC(d)  : v_0 >= || v_1.. ||_2,           d >= 2
//     RSOC(d) : v_0 v_1 >= || v_2.. ||_2^2 and v_0, v_1 >= 0,   d >= 3
//
// Rows of all blocks are stored in one sparse matrix; each block records its
// row range. Variable bounds are expressed as NONNEG rows.
// ---------------------------------------------------------------------------

enum class ConeTag
{
    Zero,
    NonNeg,
    Soc,
    Rsoc,
};

inline const char *cone_tag_name(ConeTag tag)
{
    switch (tag)
    {
    case ConeTag::Zero:
        return "ZERO";
    case ConeTag::NonNeg:
        return "NONNEG";
    case ConeTag::Soc:
        return "SOC";
    case ConeTag::Rsoc:
        return "RSOC";
    }
    return "?";
}

struct ConeBlock
{
    ConeTag tag;
    int row_start;
    int dim;
    std::string label;
};

class ConeProgram
{
  public:
    explicit ConeProgram(int num_vars) : num_vars_(num_vars), objective_(Eigen::VectorXd::Zero(num_vars)) {}

    int add_variables(int count)
    {
        const int first = num_vars_;
        num_vars_ += count;
        objective_.conservativeResize(num_vars_);
        objective_.tail(count).setZero();
        return first;
    }

    void add_objective_term(int var, double coeff) { objective_(var) += coeff; }

    void begin_block(ConeTag tag, std::string label = {})
    {
        require(!in_block_, "cone program: begin_block while a block is open");
        in_block_ = true;
        blocks_.push_back({tag, num_rows_, 0, std::move(label)});
    }

    /// Appends a row with the given constant offset; coefficients follow via coeff().
    void new_row(double offset = 0.0)
    {
        require(in_block_, "cone program: new_row outside a block");
        offsets_.push_back(offset);
        ++num_rows_;
        ++blocks_.back().dim;
    }

    void coeff(int var, double value)
    {
        require(in_block_ && num_rows_ > 0, "cone program: coeff outside a row");
        entries_.emplace_back(num_rows_ - 1, var, value);
    }

    void end_block()
    {
        require(in_block_, "cone program: end_block without begin_block");
        in_block_ = false;
        const ConeBlock &b = blocks_.back();
        switch (b.tag)
        {
        case ConeTag::Soc:
            require(b.dim >= 2, "cone program: SOC block needs dim >= 2");
            break;
        case ConeTag::Rsoc:
            require(b.dim >= 3, "cone program: RSOC block needs dim >= 3");
            break;
        default:
            require(b.dim >= 1, "cone program: empty block");
        }
        matrix_valid_ = false;
    }

    int num_vars() const { return num_vars_; }
    int num_rows() const { return num_rows_; }
    const std::vector<ConeBlock> &blocks() const { return blocks_; }
    const Eigen::VectorXd &objective() const { return objective_; }

    Eigen::VectorXd offsets() const
    {
        return Eigen::Map<const Eigen::VectorXd>(offsets_.data(), offsets_.size());
    }

    /// Row-major constraint matrix (built lazily, cached).
    const Eigen::SparseMatrix<double, Eigen::RowMajor> &matrix() const
    {
        if (!matrix_valid_)
        {
            matrix_.resize(num_rows_, num_vars_);
            matrix_.setFromTriplets(entries_.begin(), entries_.end());
            matrix_valid_ = true;
        }
        return matrix_;
    }

    /// v = A x + q over all rows.
    Eigen::VectorXd evaluate(const Eigen::VectorXd &x) const
    {
        require(x.size() == num_vars_, "cone program: evaluate with wrong x dimension");
        return matrix() * x + offsets();
    }

    /// Plain-text standard-form dump for cross-checking against external
    /// solvers. Field order: dimensions, objective, then per block its tag,
    /// dimension and rows as `offset  n_entries  (var value)...`.
    void write_standard_form(std::ostream &os) const
    {
        const auto &m = matrix();
        os << "cfpm cone program v1\n";
        os << "vars " << num_vars_ << " rows " << num_rows_ << " blocks " << blocks_.size() << "\n";
        os << "objective";
        for (int i = 0; i < num_vars_; ++i)
            os << ' ' << objective_(i);
        os << "\n";
        for (const ConeBlock &b : blocks_)
        {
            os << "block " << cone_tag_name(b.tag) << ' ' << b.dim;
            if (!b.label.empty())
                os << ' ' << b.label;
            os << "\n";
            for (int r = b.row_start; r < b.row_start + b.dim; ++r)
            {
                os << "  " << offsets_[r];
                int nnz = 0;
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it)
                    ++nnz;
                os << ' ' << nnz;
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it)
                    os << "  " << it.col() << ' ' << it.value();
                os << "\n";
            }
        }
    }

  private:
    int num_vars_ = 0;
    int num_rows_ = 0;
    bool in_block_ = false;
    Eigen::VectorXd objective_;
    std::vector<double> offsets_;
    std::vector<Eigen::Triplet<double>> entries_;
    std::vector<ConeBlock> blocks_;

    mutable Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
    mutable bool matrix_valid_ = false;
};

} // namespace cfpm
