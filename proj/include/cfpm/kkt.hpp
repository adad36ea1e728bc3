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

#include <limits>
#include <vector>

#include "cfpm/cone_program.hpp"

namespace cfpm {

// ---------------------------------------------------------------------------
// Independent KKT residual recomputation. Everything here works directly on
// the ConeProgram data and a candidate (x, y); it shares no state with the
// interior-point solve path.
//
// Dual convention: Lagrangian  L = c'x - sum_b y_b' (A_b x + q_b)  with
// y_b in the dual cone K_b*. Stationarity reads  c = sum_b A_b' y_b, the dual
// objective is  -sum_b y_b' q_b,  and complementarity is  sum_b y_b' v_b = 0.
// The dual of RSOC(d) is { (a, b, t) : 4 a b >= ||t||^2, a, b >= 0 }.
// ---------------------------------------------------------------------------

namespace detail {

inline double soc_violation(const Eigen::VectorXd &v)
{
    return std::max(0.0, v.tail(v.size() - 1).norm() - v(0));
}

inline double primal_cone_distance(ConeTag tag, const Eigen::VectorXd &v)
{
    switch (tag)
    {
    case ConeTag::Zero:
        return v.lpNorm<Eigen::Infinity>();
    case ConeTag::NonNeg:
        return std::max(0.0, -v.minCoeff());
    case ConeTag::Soc:
        return soc_violation(v);
    case ConeTag::Rsoc:
    {
        // Distance measured through the SOC image [v0+v1; v0-v1; 2 v_tail].
        Eigen::VectorXd t(v.size());
        t(0) = v(0) + v(1);
        t(1) = v(0) - v(1);
        t.tail(v.size() - 2) = 2.0 * v.tail(v.size() - 2);
        return soc_violation(t);
    }
    }
    return 0.0;
}

inline double dual_cone_violation(ConeTag tag, const Eigen::VectorXd &y)
{
    switch (tag)
    {
    case ConeTag::Zero:
        return 0.0; // free
    case ConeTag::NonNeg:
        return std::max(0.0, -y.minCoeff());
    case ConeTag::Soc:
        return soc_violation(y);
    case ConeTag::Rsoc:
    {
        const double a = y(0);
        const double b = y(1);
        if (a < 0.0 || b < 0.0)
            return std::max(-a, -b);
        return std::max(0.0, y.tail(y.size() - 2).norm() - 2.0 * std::sqrt(a * b));
    }
    }
    return 0.0;
}

} // namespace detail

struct KktResiduals
{
    double primal_residual = 0.0; // max block cone distance / (1 + ||q||_inf)
    double dual_residual = 0.0;   // max(stationarity, dual cone violation)
    double duality_gap = 0.0;     // |sum_b y_b' v_b| / (1 + |p_obj| + |d_obj|)

    double stationarity = 0.0;        // ||c - A'y||_inf / (1 + ||c||_inf)
    double max_primal_distance = 0.0; // unnormalized
    double max_dual_violation = 0.0;  // unnormalized
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    std::vector<double> block_primal_distance;

    double max_residual() const
    {
        return std::max({primal_residual, dual_residual, duality_gap});
    }
};

/// Recomputes primal feasibility distance to each cone, dual feasibility and
/// the complementarity gap for a candidate primal/dual pair.
inline KktResiduals kkt_residuals(const ConeProgram &program, const Eigen::VectorXd &x,
                                  const Eigen::VectorXd &y)
{
    require(x.size() == program.num_vars(), "kkt_residuals: x dimension mismatch");
    require(y.size() == program.num_rows(), "kkt_residuals: y dimension mismatch");

    const Eigen::VectorXd v = program.evaluate(x);
    const Eigen::VectorXd q = program.offsets();
    const Eigen::VectorXd &c = program.objective();

    KktResiduals r;
    double gap = 0.0;
    for (const ConeBlock &b : program.blocks())
    {
        const Eigen::VectorXd vb = v.segment(b.row_start, b.dim);
        const Eigen::VectorXd yb = y.segment(b.row_start, b.dim);
        const double pd = detail::primal_cone_distance(b.tag, vb);
        r.block_primal_distance.push_back(pd);
        r.max_primal_distance = std::max(r.max_primal_distance, pd);
        r.max_dual_violation = std::max(r.max_dual_violation, detail::dual_cone_violation(b.tag, yb));
        gap += yb.dot(vb);
    }

    const Eigen::VectorXd aty = program.matrix().transpose() * y;
    r.stationarity = (c - aty).lpNorm<Eigen::Infinity>() / (1.0 + c.lpNorm<Eigen::Infinity>());
    r.primal_objective = c.dot(x);
    r.dual_objective = -y.dot(q);

    const double qn = 1.0 + q.lpNorm<Eigen::Infinity>();
    r.primal_residual = r.max_primal_distance / qn;
    r.dual_residual = std::max(r.stationarity, r.max_dual_violation);
    r.duality_gap = std::abs(gap) /
                    (1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective));
    return r;
}

/// Residual of a primal-infeasibility certificate y:
///   sum_b A_b' y_b = 0,  y_b in K_b*,  sum_b y_b' q_b = -1 (after scaling).
/// Returns +inf when y does not even point the right way (sum y'q >= 0).
inline double certificate_residual(const ConeProgram &program, const Eigen::VectorXd &y)
{
    require(y.size() == program.num_rows(), "certificate_residual: y dimension mismatch");
    const double denom = -y.dot(program.offsets());
    if (!(denom > 0.0))
        return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd yhat = y / denom;

    double cone_viol = 0.0;
    for (const ConeBlock &b : program.blocks())
        cone_viol = std::max(cone_viol,
                             detail::dual_cone_violation(b.tag, yhat.segment(b.row_start, b.dim)));
    const double stat = (program.matrix().transpose() * yhat).lpNorm<Eigen::Infinity>();
    return std::max(stat, cone_viol);
}

/// Residual of an unboundedness certificate x (a recession direction):
///   c' x = -1 (after scaling),  A_zero x = 0,  A_b x in K_b for cone blocks.
inline double unbounded_certificate_residual(const ConeProgram &program, const Eigen::VectorXd &x)
{
    require(x.size() == program.num_vars(), "unbounded_certificate_residual: x dimension mismatch");
    const double denom = -program.objective().dot(x);
    if (!(denom > 0.0))
        return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd xhat = x / denom;

    const Eigen::VectorXd v = program.matrix() * xhat; // recession: no offsets
    double dist = 0.0;
    for (const ConeBlock &b : program.blocks())
        dist = std::max(dist, detail::primal_cone_distance(b.tag, v.segment(b.row_start, b.dim)));
    return dist;
}

} // namespace cfpm
