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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cfpm {

using cxd = std::complex<double>;

inline constexpr const char *version = "0.1.0";

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// 10*log10(x), with x in watts relative to 1 W.
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Throws std::invalid_argument when a user-facing precondition fails.
inline void require(bool condition, const std::string &what)
{
    if (!condition)
        throw std::invalid_argument(what);
}

} // namespace cfpm
