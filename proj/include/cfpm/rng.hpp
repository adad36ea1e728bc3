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

#include <cstdint>
#include <cstring>
#include <random>

#include "cfpm/common.hpp"

namespace cfpm {

/// splitmix64 mixing step. Used to derive independent per-run seeds from a
/// base seed so that adding sweep values or runs never perturbs existing ones.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b)
{
    return splitmix64(a ^ splitmix64(b));
}

inline std::uint64_t double_bits(double v)
{
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    return u;
}

/// Seeded random stream with explicitly specified sampling algorithms.
/// std::normal_distribution is implementation-defined, so Gaussians are drawn
/// by Box-Muller to keep realizations bit-identical for a given seed.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on (0, 1), never exactly 0 or 1.
    double uniform()
    {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal.
    double gauss()
    {
        if (have_spare_)
        {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    /// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    cxd cgauss(double variance = 1.0)
    {
        const double s = std::sqrt(0.5 * variance);
        const double re = s * gauss();
        const double im = s * gauss();
        return {re, im};
    }

    std::uint64_t next_u64() { return eng_(); }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace cfpm
