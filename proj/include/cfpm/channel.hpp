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

#include <Eigen/Eigenvalues>
#include <optional>
#include <sstream>
#include <vector>

#include "cfpm/common.hpp"
#include "cfpm/rng.hpp"

namespace cfpm {

// ---------------------------------------------------------------------------
// Large-scale fading and correlated Rayleigh channel generation.
//
// Channel gains follow beta = zeta * chi, with zeta the distance-dependent
// path loss (zeta_dB = zeta0 + 10*alpha*log10(d), a loss applied as
// 10^(-zeta_dB/10)) and chi log-normal shadowing. Shadowing spatial
// correlation uses the two-component model
//     chi_dB[n][k] = sigma_chi * (sqrt(1/2) a_n + sqrt(1/2) b_k)
// with AP factors a and UE factors b each correlated across positions as
// 2^(-d/d_decorr).
// ---------------------------------------------------------------------------

struct Geometry
{
    std::vector<Eigen::Vector2d> ap_positions; // meters
    std::vector<Eigen::Vector2d> ue_positions; // meters
    double area_side = 0.0;                    // meters

    int n_aps() const { return static_cast<int>(ap_positions.size()); }
    int n_ues() const { return static_cast<int>(ue_positions.size()); }

    void validate() const
    {
        require(n_aps() >= 1 && n_ues() >= 1, "geometry: need at least one AP and one UE");
        auto inside = [&](const Eigen::Vector2d &p) {
            return p.allFinite() && p.x() >= 0.0 && p.y() >= 0.0 &&
                   p.x() <= area_side && p.y() <= area_side;
        };
        for (const auto &p : ap_positions)
            require(inside(p), "geometry: AP position outside [0, area_side]^2 or not finite");
        for (const auto &p : ue_positions)
            require(inside(p), "geometry: UE position outside [0, area_side]^2 or not finite");
    }
};

enum class TraceConvention
{
    AsPaper,      // Tr(R) = beta / N_AP (literal reading)
    Conventional, // Tr(R) = N_AP * beta (default)
};

struct LargeScaleParams
{
    double zeta0_db = 30.5;    // path loss at the 1 m reference distance
    double alpha = 3.67;       // path-loss exponent
    double sigma_chi_db = 4.0; // shadowing standard deviation
    double d_decorr = 100.0;   // shadowing decorrelation distance (m)
    TraceConvention trace_convention = TraceConvention::Conventional;

    void validate() const
    {
        require(alpha > 0.0, "large-scale params: alpha must be > 0");
        require(sigma_chi_db >= 0.0, "large-scale params: sigma_chi_db must be >= 0");
        require(d_decorr > 0.0, "large-scale params: d_decorr must be > 0");
    }
};

/// Fraction of shadowing variance carried by the AP-side factor a_n.
inline constexpr double shadowing_ap_share = 0.5;

/// Minimum link distance; distances below the 1 m reference are clamped.
inline constexpr double min_link_distance_m = 1.0;

struct AntennaCorrelation
{
    enum class Kind
    {
        Uncorrelated,
        Exponential,
    };
    Kind kind = Kind::Uncorrelated;
    double r = 0.0; // exponential coefficient, |r| < 1

    static AntennaCorrelation uncorrelated() { return {Kind::Uncorrelated, 0.0}; }
    static AntennaCorrelation exponential(double r) { return {Kind::Exponential, r}; }
};

struct CovarianceSet
{
    int n_ant = 0;
    // R[n][k]: N_AP x N_AP Hermitian PSD spatial covariance of link (n, k)
    std::vector<std::vector<Eigen::MatrixXcd>> R;
    Eigen::MatrixXd beta; // N x K linear large-scale gains

    int n_aps() const { return static_cast<int>(R.size()); }
    int n_ues() const { return R.empty() ? 0 : static_cast<int>(R.front().size()); }
};

struct ChannelRealization
{
    enum class Source
    {
        Geometric,
        Iid,
    };

    int n_aps = 0;
    int n_ant = 0;
    std::vector<Eigen::VectorXcd> h; // K stacked vectors of length N*N_AP
    Source source = Source::Iid;

    int n_ues() const { return static_cast<int>(h.size()); }
    int dim() const { return n_aps * n_ant; }

    /// Block of h_k corresponding to AP n.
    Eigen::VectorXcd block(int k, int n) const { return h[k].segment(n * n_ant, n_ant); }
};

struct PilotConfig
{
    int tau_p = 1;        // pilot length in samples
    double p_pilot = 0.1; // pilot power P_p^AP (watts)
    double sigma_u = 1.0; // noise standard deviation at the APs
    std::vector<int> assignments; // pilot index per UE, each in [0, tau_p)

    /// Orthogonal assignment when tau_p >= K, round-robin reuse otherwise.
    static PilotConfig make_default(int n_ues, int tau_p, double p_pilot, double sigma_u)
    {
        PilotConfig cfg{tau_p, p_pilot, sigma_u, {}};
        cfg.assignments.resize(n_ues);
        for (int k = 0; k < n_ues; ++k)
            cfg.assignments[k] = k % tau_p;
        return cfg;
    }

    void validate(int n_ues) const
    {
        require(tau_p >= 1, "pilot config: tau_p must be >= 1");
        require(p_pilot > 0.0, "pilot config: pilot power must be > 0");
        require(sigma_u >= 0.0, "pilot config: sigma_u must be >= 0");
        require(static_cast<int>(assignments.size()) == n_ues,
                "pilot config: assignment list must have one entry per UE");
        for (int a : assignments)
            require(a >= 0 && a < tau_p, "pilot config: assignment index out of range");
    }
};

struct EstimateSet
{
    ChannelRealization h_hat;
    // N x K matrices, each N_AP x N_AP
    std::vector<std::vector<Eigen::MatrixXcd>> Gamma; // estimate covariance
    std::vector<std::vector<Eigen::MatrixXcd>> A;     // error covariance, A = R - Gamma
    std::vector<std::vector<Eigen::MatrixXcd>> Psi;
};

namespace detail {

/// Hermitian PSD square root with negative eigenvalues clipped at zero.
inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd &m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    require(es.info() == Eigen::Success, "psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::MatrixXd psd_sqrt_real(const Eigen::MatrixXd &m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    require(es.info() == Eigen::Success, "psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::MatrixXd position_correlation(const std::vector<Eigen::Vector2d> &pos,
                                            double d_decorr)
{
    const int n = static_cast<int>(pos.size());
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
        {
            const double d = (pos[i] - pos[j]).norm();
            c(i, j) = c(j, i) = std::pow(2.0, -d / d_decorr);
        }
    return c;
}

/// DFT pilot book row: phi_m[t] = exp(-2*pi*i*m*t/tau_p)/sqrt(tau_p).
inline Eigen::VectorXcd pilot_sequence(int index, int tau_p)
{
    Eigen::VectorXcd phi(tau_p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(tau_p));
    for (int t = 0; t < tau_p; ++t)
    {
        const double ang = -2.0 * M_PI * static_cast<double>(index) * t / tau_p;
        phi(t) = scale * cxd(std::cos(ang), std::sin(ang));
    }
    return phi;
}

} // namespace detail

/// Distance-dependent channel gains. shadow_db is the N x K shadowing matrix
/// in dB (zero for no shadowing). Distances are clamped below at 1 m.
inline Eigen::MatrixXd compute_path_gain(const Geometry &geometry,
                                         const LargeScaleParams &params,
                                         const Eigen::MatrixXd &shadow_db)
{
    geometry.validate();
    params.validate();
    const int n = geometry.n_aps();
    const int k = geometry.n_ues();
    require(shadow_db.rows() == n && shadow_db.cols() == k,
            "compute_path_gain: shadow matrix must be N x K");
    require(shadow_db.allFinite(), "compute_path_gain: shadow matrix must be finite");

    Eigen::MatrixXd beta(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
        {
            const double d = std::max(
                (geometry.ap_positions[i] - geometry.ue_positions[j]).norm(),
                min_link_distance_m);
            const double zeta_db = params.zeta0_db + 10.0 * params.alpha * std::log10(d);
            beta(i, j) = std::pow(10.0, -(zeta_db - shadow_db(i, j)) / 10.0);
        }
    return beta;
}

/// Spatially correlated log-normal shadowing, returned in dB. Zero mean,
/// variance sigma_chi_db^2, link correlation
///   Cov = sigma^2 * (0.5 * 2^(-d_AP/d_decorr) + 0.5 * 2^(-d_UE/d_decorr)).
inline Eigen::MatrixXd gen_shadowing(const Geometry &geometry,
                                     const LargeScaleParams &params,
                                     std::uint64_t rng_seed)
{
    geometry.validate();
    params.validate();
    const int n = geometry.n_aps();
    const int k = geometry.n_ues();
    if (params.sigma_chi_db == 0.0)
        return Eigen::MatrixXd::Zero(n, k);

    const Eigen::MatrixXd s_ap =
        detail::psd_sqrt_real(detail::position_correlation(geometry.ap_positions, params.d_decorr));
    const Eigen::MatrixXd s_ue =
        detail::psd_sqrt_real(detail::position_correlation(geometry.ue_positions, params.d_decorr));

    Rng rng(rng_seed);
    Eigen::VectorXd ga(n), gb(k);
    for (int i = 0; i < n; ++i)
        ga(i) = rng.gauss();
    for (int j = 0; j < k; ++j)
        gb(j) = rng.gauss();

    const Eigen::VectorXd a = s_ap * ga;
    const Eigen::VectorXd b = s_ue * gb;
    const double wa = std::sqrt(shadowing_ap_share);
    const double wb = std::sqrt(1.0 - shadowing_ap_share);

    Eigen::MatrixXd chi(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            chi(i, j) = params.sigma_chi_db * (wa * a(i) + wb * b(j));
    return chi;
}

/// Model covariance of the vectorized shadowing matrix (column-major NK order),
/// for validating gen_shadowing against its specification.
inline Eigen::MatrixXd shadowing_model_covariance(const Geometry &geometry,
                                                  const LargeScaleParams &params)
{
    const int n = geometry.n_aps();
    const int k = geometry.n_ues();
    const Eigen::MatrixXd c_ap = detail::position_correlation(geometry.ap_positions, params.d_decorr);
    const Eigen::MatrixXd c_ue = detail::position_correlation(geometry.ue_positions, params.d_decorr);
    const double var = params.sigma_chi_db * params.sigma_chi_db;

    Eigen::MatrixXd cov(n * k, n * k);
    for (int j1 = 0; j1 < k; ++j1)
        for (int i1 = 0; i1 < n; ++i1)
            for (int j2 = 0; j2 < k; ++j2)
                for (int i2 = 0; i2 < n; ++i2)
                    cov(j1 * n + i1, j2 * n + i2) =
                        var * (shadowing_ap_share * c_ap(i1, i2) +
                               (1.0 - shadowing_ap_share) * c_ue(j1, j2));
    return cov;
}

/// Per-link spatial covariance matrices with the chosen antenna correlation
/// model and trace convention.
inline CovarianceSet build_covariances(const Eigen::MatrixXd &beta, int n_ant,
                                       const LargeScaleParams &params,
                                       const AntennaCorrelation &corr = AntennaCorrelation::uncorrelated())
{
    require(n_ant >= 1, "build_covariances: need n_ant >= 1");
    require((beta.array() > 0.0).all(), "build_covariances: beta must be positive");
    if (corr.kind == AntennaCorrelation::Kind::Exponential)
        require(std::abs(corr.r) < 1.0, "build_covariances: exponential coefficient must satisfy |r| < 1");

    Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(n_ant, n_ant);
    if (corr.kind == AntennaCorrelation::Kind::Exponential)
        for (int i = 0; i < n_ant; ++i)
            for (int j = 0; j < n_ant; ++j)
                c(i, j) = std::pow(corr.r, std::abs(i - j));

    CovarianceSet cov;
    cov.n_ant = n_ant;
    cov.beta = beta;
    cov.R.resize(beta.rows());
    for (int n = 0; n < beta.rows(); ++n)
    {
        cov.R[n].reserve(beta.cols());
        for (int k = 0; k < beta.cols(); ++k)
        {
            // trace(c) == n_ant, so scale sets the convention exactly.
            const double scale = params.trace_convention == TraceConvention::Conventional
                                     ? beta(n, k)
                                     : beta(n, k) / (static_cast<double>(n_ant) * n_ant);
            cov.R[n].push_back(scale * c);
        }
    }
    return cov;
}

/// Correlated Rayleigh realization: block (n,k) of h_k is R[n][k]^(1/2) g with
/// g standard circularly-symmetric complex Gaussian.
inline ChannelRealization sample_channels(const CovarianceSet &cov, std::uint64_t rng_seed)
{
    const int n = cov.n_aps();
    const int k = cov.n_ues();
    require(n >= 1 && k >= 1, "sample_channels: empty covariance set");

    std::vector<std::vector<Eigen::MatrixXcd>> sqrts(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            sqrts[i].push_back(detail::psd_sqrt(cov.R[i][j]));

    ChannelRealization out;
    out.n_aps = n;
    out.n_ant = cov.n_ant;
    out.source = ChannelRealization::Source::Geometric;
    out.h.assign(k, Eigen::VectorXcd(n * cov.n_ant));

    Rng rng(rng_seed);
    Eigen::VectorXcd g(cov.n_ant);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i)
        {
            for (int a = 0; a < cov.n_ant; ++a)
                g(a) = rng.cgauss();
            out.h[j].segment(i * cov.n_ant, cov.n_ant) = sqrts[i][j] * g;
        }
    return out;
}

/// IID mode: every entry CN(0, 1).
inline ChannelRealization sample_channels_iid(int n_aps, int n_ant, int n_ues,
                                              std::uint64_t rng_seed)
{
    require(n_aps >= 1 && n_ant >= 1 && n_ues >= 1, "sample_channels_iid: invalid dimensions");
    ChannelRealization out;
    out.n_aps = n_aps;
    out.n_ant = n_ant;
    out.source = ChannelRealization::Source::Iid;
    out.h.assign(n_ues, Eigen::VectorXcd(n_aps * n_ant));

    Rng rng(rng_seed);
    for (int k = 0; k < n_ues; ++k)
        for (int i = 0; i < n_aps * n_ant; ++i)
            out.h[k](i) = rng.cgauss();
    return out;
}

/// Projected uplink pilot observations y[n][k] (each an N_AP complex vector).
inline std::vector<std::vector<Eigen::VectorXcd>>
project_pilots(const ChannelRealization &channels, const PilotConfig &pilots,
               std::uint64_t rng_seed)
{
    const int n = channels.n_aps;
    const int k = channels.n_ues();
    pilots.validate(k);

    std::vector<Eigen::VectorXcd> book(pilots.tau_p);
    for (int m = 0; m < pilots.tau_p; ++m)
        book[m] = detail::pilot_sequence(m, pilots.tau_p);

    const double amp = std::sqrt(pilots.tau_p * pilots.p_pilot);
    Rng rng(rng_seed);

    std::vector<std::vector<Eigen::VectorXcd>> y(n);
    for (int i = 0; i < n; ++i)
    {
        Eigen::MatrixXcd noise(channels.n_ant, pilots.tau_p);
        for (int t = 0; t < pilots.tau_p; ++t)
            for (int a = 0; a < channels.n_ant; ++a)
                noise(a, t) = rng.cgauss(pilots.sigma_u * pilots.sigma_u);

        y[i].resize(k);
        for (int j = 0; j < k; ++j)
        {
            const Eigen::VectorXcd &phi_k = book[pilots.assignments[j]];
            Eigen::VectorXcd acc = noise * phi_k.conjugate();
            for (int j2 = 0; j2 < k; ++j2)
            {
                const Eigen::VectorXcd &phi_j2 = book[pilots.assignments[j2]];
                const cxd xcorr = phi_j2.transpose() * phi_k.conjugate();
                acc += amp * xcorr * channels.block(j2, i);
            }
            y[i][j] = acc;
        }
    }
    return y;
}

/// MMSE channel estimates with their covariances:
///   Psi   = tau_p (P_p / sigma_u^2) sum_{k'} R[n][k'] |phi_{k'}^H phi_k|^2 + I
///   h_hat = (sqrt(tau_p P_p) / sigma_u^2) R Psi^{-1} y
///   Gamma = tau_p (P_p / sigma_u^2) R Psi^{-1} R^H,   A = R - Gamma
inline EstimateSet mmse_estimate(const std::vector<std::vector<Eigen::VectorXcd>> &projections,
                                 const CovarianceSet &cov, const PilotConfig &pilots)
{
    const int n = cov.n_aps();
    const int k = cov.n_ues();
    pilots.validate(k);
    require(static_cast<int>(projections.size()) == n &&
                (n == 0 || static_cast<int>(projections.front().size()) == k),
            "mmse_estimate: projection shape mismatch");
    require(pilots.sigma_u > 0.0, "mmse_estimate: sigma_u must be > 0");

    std::vector<Eigen::VectorXcd> book(pilots.tau_p);
    for (int m = 0; m < pilots.tau_p; ++m)
        book[m] = detail::pilot_sequence(m, pilots.tau_p);

    const double snr = pilots.tau_p * pilots.p_pilot / (pilots.sigma_u * pilots.sigma_u);
    const double amp = std::sqrt(pilots.tau_p * pilots.p_pilot) / (pilots.sigma_u * pilots.sigma_u);

    EstimateSet est;
    est.h_hat.n_aps = n;
    est.h_hat.n_ant = cov.n_ant;
    est.h_hat.source = ChannelRealization::Source::Geometric;
    est.h_hat.h.assign(k, Eigen::VectorXcd(n * cov.n_ant));
    est.Gamma.assign(n, std::vector<Eigen::MatrixXcd>(k));
    est.A.assign(n, std::vector<Eigen::MatrixXcd>(k));
    est.Psi.assign(n, std::vector<Eigen::MatrixXcd>(k));

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
        {
            Eigen::MatrixXcd psi = Eigen::MatrixXcd::Identity(cov.n_ant, cov.n_ant);
            const Eigen::VectorXcd &phi_k = book[pilots.assignments[j]];
            for (int j2 = 0; j2 < k; ++j2)
            {
                const Eigen::VectorXcd &phi_j2 = book[pilots.assignments[j2]];
                const double xc = std::norm(cxd(phi_j2.adjoint() * phi_k));
                if (xc > 0.0)
                    psi += snr * xc * cov.R[i][j2];
            }

            Eigen::LLT<Eigen::MatrixXcd> llt(psi);
            if (llt.info() != Eigen::Success)
            {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(psi);
                std::ostringstream msg;
                msg << "mmse_estimate: Psi numerically singular, condition number ~ "
                    << es.eigenvalues().maxCoeff() / std::max(es.eigenvalues().minCoeff(), 1e-300);
                throw std::runtime_error(msg.str());
            }

            const Eigen::MatrixXcd psi_inv_r = llt.solve(cov.R[i][j].adjoint());
            est.Gamma[i][j] = snr * cov.R[i][j] * psi_inv_r;
            est.A[i][j] = cov.R[i][j] - est.Gamma[i][j];
            est.Psi[i][j] = psi;
            est.h_hat.h[j].segment(i * cov.n_ant, cov.n_ant) =
                amp * cov.R[i][j] * llt.solve(projections[i][j]);
        }
    return est;
}

} // namespace cfpm
