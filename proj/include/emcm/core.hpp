// SPDX-License-Identifier: Apache-2.0
//
// emcm - electromagnetically consistent communication models
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
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace emcm {

inline constexpr const char* kVersion = "1.0.0";

using cplx = std::complex<double>;
using ComplexMat = Eigen::MatrixXcd;
using ComplexVec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx j{0.0, 1.0};

// Free-space wave impedance mu0 * c (ohm), CODATA 2018.
inline constexpr double kFreeSpaceImpedance = 376.730313668;

// Condition number at which a linear solve is reported as degenerate.
inline constexpr double kSingularCondition = 1e12;

inline double wavenumber(double wavelength) { return 2.0 * pi / wavelength; }

/// A caller violated a documented precondition (bad geometry, out-of-range
/// argument, unsupported configuration).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A linear subsystem was singular or too badly conditioned to trust.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string subsystem, double condition)
        : std::runtime_error("singular subsystem '" + subsystem + "' (condition number ~ " +
                             std::to_string(condition) + ")"),
          subsystem_(std::move(subsystem)),
          condition_(condition) {}

    const std::string& subsystem() const noexcept { return subsystem_; }
    double condition() const noexcept { return condition_; }

private:
    std::string subsystem_;
    double condition_;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

inline bool all_finite(const ComplexMat& m) { return m.allFinite(); }

/// Solves A X = B by LU with partial pivoting. Throws NumericalError naming
/// `subsystem` when the reciprocal condition estimate falls below 1e-12.
inline ComplexMat solve_checked(const ComplexMat& a, const ComplexMat& b, const std::string& subsystem) {
    require(a.rows() == a.cols(), subsystem + ": matrix must be square");
    require(a.rows() == b.rows(), subsystem + ": right-hand side has wrong row count");
    if (a.rows() == 0) return ComplexMat::Zero(0, b.cols());
    if (!a.allFinite()) throw NumericalError(subsystem, std::numeric_limits<double>::infinity());
    Eigen::PartialPivLU<ComplexMat> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / kSingularCondition)) {
        throw NumericalError(subsystem, rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    ComplexMat x = lu.solve(b);
    if (!x.allFinite()) throw NumericalError(subsystem, 1.0 / rcond);
    return x;
}

inline ComplexMat inverse_checked(const ComplexMat& a, const std::string& subsystem) {
    return solve_checked(a, ComplexMat::Identity(a.rows(), a.cols()), subsystem);
}

/// Largest entrywise |a - b| divided by max(max|b|, floor).
inline double max_relative_difference(const ComplexMat& a, const ComplexMat& b, double floor = 1e-300) {
    if (a.size() == 0) return 0.0;
    const double scale = std::max(b.cwiseAbs().maxCoeff(), floor);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace emcm
