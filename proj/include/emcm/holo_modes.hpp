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

// Line-of-sight communication modes between two planar apertures.
//
// The scalar radiation operator E(r_rx) = int G0(|r_rx - r_tx|) J(r_tx) dr_tx
// is discretized by midpoint (Nystrom) quadrature. Its weight-symmetrized
// matrix W_rx^{1/2} G W_tx^{1/2} has singular values sigma_m; mu_m = sigma_m^2
// solves both the transmit (G^H G) and receive (G G^H) eigenproblems at once.

#pragma once

#include "emcm/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

namespace emcm::holo {

/// Rectangular aperture sampled at cell midpoints. Columns of `orientation`
/// are the local x axis (side Lx), local y axis (side Ly) and the normal.
struct PlanarSurface {
    Vec3 center = Vec3::Zero();
    Mat3 orientation = Mat3::Identity();
    double Lx = 0.0;
    double Ly = 0.0;
    int nx = 0;
    int ny = 0;

    double area() const { return Lx * Ly; }
    double cell_area() const { return (Lx / nx) * (Ly / ny); }
    Vec3 normal() const { return orientation.col(2); }
    int size() const { return nx * ny; }

    double local_x(int i) const { return -0.5 * Lx + (i + 0.5) * Lx / nx; }
    double local_y(int l) const { return -0.5 * Ly + (l + 0.5) * Ly / ny; }

    /// Sample point of cell (i along x, l along y); flat index l * nx + i.
    Vec3 point(int i, int l) const {
        return center + local_x(i) * orientation.col(0) + local_y(l) * orientation.col(1);
    }

    /// Square-ish surface with cells no larger than wavelength / per_lambda.
    static PlanarSurface with_resolution(const Vec3& center, const Mat3& orientation, double lx, double ly,
                                         double wavelength, double per_lambda) {
        PlanarSurface s;
        s.center = center;
        s.orientation = orientation;
        s.Lx = lx;
        s.Ly = ly;
        s.nx = std::max(4, static_cast<int>(std::ceil(lx * per_lambda / wavelength - 1e-9)));
        s.ny = std::max(4, static_cast<int>(std::ceil(ly * per_lambda / wavelength - 1e-9)));
        return s;
    }
};

inline void validate(const PlanarSurface& s) {
    require(s.Lx > 0.0 && s.Ly > 0.0, "PlanarSurface: side lengths must be positive");
    require(s.nx >= 1 && s.ny >= 1, "PlanarSurface: need at least one sample per side");
    require((s.orientation.transpose() * s.orientation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-12,
            "PlanarSurface: orientation must be orthonormal");
}

/// Rotation whose third column is `normal` and first column is the
/// projection of `x_hint` onto the plane.
inline Mat3 frame_from(const Vec3& normal, const Vec3& x_hint) {
    const Vec3 n = normal.normalized();
    Vec3 u = x_hint - x_hint.dot(n) * n;
    require(u.norm() > 1e-12, "frame_from: x hint parallel to the normal");
    u.normalize();
    Mat3 r;
    r.col(0) = u;
    r.col(1) = n.cross(u);
    r.col(2) = n;
    return r;
}

/// Free-space scalar Green function g0 exp(-j k |r|) / (2 lambda |r|).
inline cplx green(const Vec3& r_rx, const Vec3& r_tx, double wavelength, double g0 = 1.0) {
    require(wavelength > 0.0, "green: wavelength must be positive");
    const double r = (r_rx - r_tx).norm();
    require(r > 0.0, "green: coincident source and observation points");
    return g0 * std::exp(-j * (wavenumber(wavelength) * r)) / (2.0 * wavelength * r);
}

/// Discretized radiation operator with its quadrature weights.
struct CouplingOperator {
    ComplexMat G;  // rows: rx samples, cols: tx samples
    RealVec w_tx;
    RealVec w_rx;
    double wavelength = 0.0;

    /// W_rx^{1/2} G W_tx^{1/2}.
    ComplexMat symmetrized() const {
        return w_rx.cwiseSqrt().asDiagonal() * G * w_tx.cwiseSqrt().asDiagonal();
    }

    /// Field on the receive samples radiated by transmit current samples.
    ComplexVec radiate(const ComplexVec& current) const { return G * w_tx.cwiseProduct(current).cast<cplx>(); }
};

/// Largest sample spacing allowed for the Nystrom discretization.
inline constexpr double kResolutionFloor = 0.25;  // wavelengths

inline CouplingOperator coupling_operator(const PlanarSurface& tx, const PlanarSurface& rx, double wavelength,
                                          bool enforce_resolution = true) {
    validate(tx);
    validate(rx);
    require(wavelength > 0.0, "coupling_operator: wavelength must be positive");
    if (enforce_resolution) {
        const double floor = kResolutionFloor * wavelength * (1.0 + 1e-9);
        for (const PlanarSurface* s : {&tx, &rx}) {
            require(s->Lx / s->nx <= floor && s->Ly / s->ny <= floor,
                    "coupling_operator: sample spacing exceeds wavelength/4");
        }
    }
    std::vector<Vec3> pt, pr;
    for (int l = 0; l < tx.ny; ++l)
        for (int i = 0; i < tx.nx; ++i) pt.push_back(tx.point(i, l));
    for (int l = 0; l < rx.ny; ++l)
        for (int i = 0; i < rx.nx; ++i) pr.push_back(rx.point(i, l));

    const double min_sep = 1e-6 * wavelength;
    CouplingOperator op;
    op.wavelength = wavelength;
    op.G.resize(pr.size(), pt.size());
    const double k = wavenumber(wavelength);
    for (std::size_t c = 0; c < pt.size(); ++c) {
        for (std::size_t r = 0; r < pr.size(); ++r) {
            const double d = (pr[r] - pt[c]).norm();
            if (d < min_sep) throw PreconditionError("coupling_operator: transmit and receive surfaces overlap");
            op.G(r, c) = std::exp(-j * (k * d)) / (2.0 * wavelength * d);
        }
    }
    op.w_tx = RealVec::Constant(pt.size(), tx.cell_area());
    op.w_rx = RealVec::Constant(pr.size(), rx.cell_area());
    return op;
}

/// Nystrom matrix of the transmit-side kernel G_Tx, symmetrized by the
/// transmit weights: W_tx^{1/2} G^H W_rx G W_tx^{1/2}.
inline ComplexMat tx_kernel_matrix(const CouplingOperator& op) {
    const ComplexMat m = op.symmetrized();
    return m.adjoint() * m;
}

inline ComplexMat rx_kernel_matrix(const CouplingOperator& op) {
    const ComplexMat m = op.symmetrized();
    return m * m.adjoint();
}

/// Eigenvalues (non-increasing) with weighted-orthonormal eigenfunction samples.
struct ModeSet {
    RealVec mu;
    ComplexMat phi;  // transmit eigenfunctions, one column per mode
    ComplexMat psi;  // receive eigenfunctions
    RealVec w_tx;
    RealVec w_rx;
    double g0 = 1.0;

    Eigen::Index count() const { return mu.size(); }
};

inline ModeSet eigenmodes(const CouplingOperator& op) {
    require(op.G.rows() > 0 && op.G.cols() > 0, "eigenmodes: empty operator");
    Eigen::BDCSVD<ComplexMat> svd(op.symmetrized(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    ModeSet m;
    m.mu = svd.singularValues().array().square();
    m.phi = op.w_tx.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixV();
    m.psi = op.w_rx.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixU();
    m.w_tx = op.w_tx;
    m.w_rx = op.w_rx;
    return m;
}

inline constexpr double kDefaultEpsilon = 0.5;

/// Number of eigenvalues with mu_m / mu_1 >= epsilon.
inline int nedof_count(const RealVec& mu, double epsilon = kDefaultEpsilon) {
    require(mu.size() > 0, "nedof_count: empty spectrum");
    require(epsilon > 0.0 && epsilon <= 1.0, "nedof_count: epsilon must lie in (0, 1]");
    const double top = mu.maxCoeff();
    if (!(top > 0.0)) return 0;
    int n = 0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (mu(i) / top >= epsilon * (1.0 - 1e-15)) ++n;
    }
    return n;
}

inline int nedof_count(const ModeSet& modes, double epsilon = kDefaultEpsilon) {
    return nedof_count(modes.mu, epsilon);
}

/// Fractional 1-based index where the sorted normalized spectrum falls to
/// `level`, linearly interpolated between neighbouring indices.
inline double crossing_index(const RealVec& mu, double level) {
    require(mu.size() > 0 && mu(0) > 0.0, "crossing_index: spectrum must start positive");
    const double top = mu(0);
    for (Eigen::Index i = 1; i < mu.size(); ++i) {
        const double a = mu(i - 1) / top, b = mu(i) / top;
        if (a >= level && b < level) return static_cast<double>(i) + (a - level) / (a - b);
    }
    return static_cast<double>(mu.size());
}

/// Width of the transition band between mu/mu_1 = 0.9 and 0.1.
inline double transition_width(const RealVec& mu) { return crossing_index(mu, 0.1) - crossing_index(mu, 0.9); }

struct TimeWindow {
    double bandwidth = 0.0;  // Omega (rad/s)
    double duration = 0.0;   // T (s)
};

struct LinePair {
    double L_tx = 0.0;
    double L_rx = 0.0;
    double wavelength = 0.0;
    double d0 = 0.0;
    double upsilon = 1.0;  // orientation factor; 1 for parallel broadside lines
};

inline double nedof_estimate_1d(const std::variant<TimeWindow, LinePair>& kind) {
    if (const auto* t = std::get_if<TimeWindow>(&kind)) {
        require(t->bandwidth > 0.0 && t->duration > 0.0, "nedof_estimate_1d: positive Omega and T required");
        return t->bandwidth * t->duration / pi;
    }
    const auto& l = std::get<LinePair>(kind);
    require(l.L_tx > 0.0 && l.L_rx > 0.0 && l.wavelength > 0.0 && l.d0 > 0.0 && l.upsilon > 0.0,
            "nedof_estimate_1d: positive line parameters required");
    return l.L_tx * l.L_rx / (l.wavelength * l.d0) * l.upsilon;
}

/// N1 + log((1 - eps) / eps) log(pi N1 / 2) / pi^2, natural logarithms,
/// without the o(log N1) remainder.
inline double nedof_transition_1d(double n1, double epsilon) {
    require(n1 > 2.0 / pi, "nedof_transition_1d: N1 must exceed 2/pi");
    require(epsilon > 0.0 && epsilon < 1.0, "nedof_transition_1d: epsilon must lie in (0, 1)");
    return n1 + std::log((1.0 - epsilon) / epsilon) * std::log(pi * n1 / 2.0) / (pi * pi);
}

struct Estimate2D {
    double n2 = 0.0;
    double spatial_bandwidth = 0.0;  // W_G (rad^2 / m^2)
    bool landau_regime = true;       // false when an aperture is large compared with d0
};

inline Estimate2D nedof_estimate_2d(double area_tx, double area_rx, double wavelength, double d0, double psi = 1.0) {
    require(area_tx > 0.0 && area_rx > 0.0 && wavelength > 0.0 && d0 > 0.0 && psi > 0.0,
            "nedof_estimate_2d: positive arguments required");
    Estimate2D e;
    e.spatial_bandwidth = 4.0 * pi * pi * area_rx / (wavelength * wavelength * d0 * d0) * psi;
    e.n2 = area_tx * e.spatial_bandwidth / (4.0 * pi * pi);
    e.landau_regime = std::sqrt(std::max(area_tx, area_rx)) <= d0;
    return e;
}

struct NeDoFReport {
    int count = 0;
    double epsilon = kDefaultEpsilon;
    double estimate = 0.0;           // N1 or N2
    double spatial_bandwidth = 0.0;  // W_G, 2-D only
    double crossing_09 = 0.0;
    double crossing_01 = 0.0;
    bool landau_regime = true;
};

inline NeDoFReport report(const ModeSet& modes, const PlanarSurface& tx, const PlanarSurface& rx, double wavelength,
                          double epsilon = kDefaultEpsilon, double psi = 1.0) {
    NeDoFReport r;
    r.epsilon = epsilon;
    r.count = nedof_count(modes, epsilon);
    const Estimate2D e = nedof_estimate_2d(tx.area(), rx.area(), wavelength, (rx.center - tx.center).norm(), psi);
    r.estimate = e.n2;
    r.spatial_bandwidth = e.spatial_bandwidth;
    r.landau_regime = e.landau_regime;
    r.crossing_09 = crossing_index(modes.mu, 0.9);
    r.crossing_01 = crossing_index(modes.mu, 0.1);
    return r;
}

struct SlepianSpectrum {
    RealVec mu;  // non-increasing
    double n1 = 0.0;
    int count = 0;  // mu_m / mu_1 >= 0.5
};

/// Eigenvalues of the time-frequency concentration kernel
/// sin(Omega (t - t')) / (pi (t - t')) on [-T/2, T/2], midpoint Nystrom with n nodes.
inline SlepianSpectrum slepian_validation(double omega, double duration, int n) {
    require(omega > 0.0 && duration > 0.0, "slepian_validation: positive Omega and T required");
    const double n1 = omega * duration / pi;
    require(n >= 8.0 * n1, "slepian_validation: need at least 8 * Omega T / pi nodes");
    const double h = duration / n;
    Eigen::MatrixXd k(n, n);
    for (int a = 0; a < n; ++a) {
        const double ta = -0.5 * duration + (a + 0.5) * h;
        for (int b = 0; b < n; ++b) {
            const double tb = -0.5 * duration + (b + 0.5) * h;
            const double d = ta - tb;
            k(a, b) = h * (a == b ? omega / pi : std::sin(omega * d) / (pi * d));
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    SlepianSpectrum s;
    s.mu = es.eigenvalues().reverse();
    s.n1 = n1;
    s.count = nedof_count(s.mu, 0.5);
    return s;
}

struct ModeSeparability {
    int mode = 0;          // 0-based mode index
    int cluster_size = 1;  // modes tested jointly as a subspace
    double residual = 0.0;
};

/// Rank-one test of the paraxial modes. Each transmit eigenfunction is
/// reshaped to its (ny x nx) grid; residual = 1 - sigma_1^2 / ||.||_F^2.
/// Modes whose eigenvalues agree within 1e-6 mu_1 are tested as a subspace:
/// a cluster of k modes passes when its stacked column and row spaces are k-dimensional.
inline std::vector<ModeSeparability> paraxial_factorization_check(const ModeSet& modes, const PlanarSurface& tx,
                                                                  const PlanarSurface& rx, int max_modes = 10) {
    validate(tx);
    validate(rx);
    const double tol = 1e-9;
    const Vec3 axis = rx.center - tx.center;
    const double dist = axis.norm();
    require(dist > 0.0, "paraxial_factorization_check: coincident centres");
    const bool parallel = std::abs(std::abs(tx.normal().dot(rx.normal())) - 1.0) <= tol;
    const bool coaxial = (axis - axis.dot(tx.normal()) * tx.normal()).norm() <= tol * dist;
    const bool aligned = std::abs(std::abs(tx.orientation.col(0).dot(rx.orientation.col(0))) - 1.0) <= tol;
    if (!(parallel && coaxial && aligned)) {
        throw PreconditionError("paraxial_factorization_check: surfaces are not parallel, coaxial and axis-aligned");
    }
    require(modes.phi.rows() == tx.size(), "paraxial_factorization_check: modes do not match the transmit grid");

    const int limit = static_cast<int>(std::min<Eigen::Index>(max_modes, modes.count()));
    const double top = modes.mu(0);
    auto grid = [&](int m) {
        ComplexMat g(tx.ny, tx.nx);
        for (int l = 0; l < tx.ny; ++l)
            for (int i = 0; i < tx.nx; ++i) g(l, i) = modes.phi(l * tx.nx + i, m);
        return g;
    };
    auto captured = [](const ComplexMat& stacked, int k) {
        const RealVec s = Eigen::BDCSVD<ComplexMat>(stacked).singularValues();
        return 1.0 - s.head(std::min<Eigen::Index>(k, s.size())).squaredNorm() / s.squaredNorm();
    };

    std::vector<ModeSeparability> out;
    int m = 0;
    while (m < limit) {
        int end = m + 1;
        while (end < modes.count() && std::abs(modes.mu(end - 1) - modes.mu(end)) < 1e-6 * top) ++end;
        const int k = end - m;
        ComplexMat wide(tx.ny, tx.nx * k), tall(tx.ny * k, tx.nx);
        for (int c = 0; c < k; ++c) {
            const ComplexMat g = grid(m + c);
            wide.middleCols(c * tx.nx, tx.nx) = g;
            tall.middleRows(c * tx.ny, tx.ny) = g;
        }
        const double residual = std::max(captured(wide, k), captured(tall, k));
        for (int c = m; c < end && c < limit; ++c) out.push_back({c, k, residual});
        m = end;
    }
    return out;
}

/// Element spacing that makes two broadside N-element arrays at distance D orthogonal.
inline double rayleigh_spacing(double wavelength, double distance, int n) {
    require(wavelength > 0.0 && distance > 0.0 && n > 0, "rayleigh_spacing: positive arguments required");
    return std::sqrt(wavelength * distance / n);
}

/// Green-function channel between two parallel linear arrays facing each
/// other at distance D, elements spaced `spacing` along x and centred on the axis.
inline ComplexMat linear_array_channel(double wavelength, double distance, int n, double spacing) {
    ComplexMat h(n, n);
    for (int r = 0; r < n; ++r) {
        for (int t = 0; t < n; ++t) {
            const Vec3 pr((r - 0.5 * (n - 1)) * spacing, 0.0, distance);
            const Vec3 pt((t - 0.5 * (n - 1)) * spacing, 0.0, 0.0);
            h(r, t) = green(pr, pt, wavelength);
        }
    }
    return h;
}

inline double condition_number(const ComplexMat& h) {
    const RealVec s = Eigen::BDCSVD<ComplexMat>(h).singularValues();
    return s(0) / s(s.size() - 1);
}

inline double fraunhofer_distance(double size, double wavelength) {
    require(size > 0.0 && wavelength > 0.0, "fraunhofer_distance: positive arguments required");
    return 2.0 * size * size / wavelength;
}

enum class Side { transmit, receive };

struct Projection {
    ComplexVec coefficients;  // a_m (transmit) or b_m (receive) for every mode
    double residual = 0.0;    // relative weighted L2 error of the `terms`-mode truncation
    int terms = 0;
};

/// Weighted inner-product expansion of samples on one surface and the
/// relative residual of keeping the first `terms` modes.
inline Projection project(const ModeSet& modes, const ComplexVec& samples, Side side, int terms) {
    const ComplexMat& basis = side == Side::transmit ? modes.phi : modes.psi;
    const RealVec& w = side == Side::transmit ? modes.w_tx : modes.w_rx;
    require(samples.size() == basis.rows(), "project: samples do not match the surface grid");
    require(terms >= 0 && terms <= basis.cols(), "project: term count out of range");
    Projection p;
    p.terms = terms;
    const ComplexVec weighted = w.cast<cplx>().cwiseProduct(samples);
    p.coefficients = basis.adjoint() * weighted;
    const ComplexVec approx = basis.leftCols(terms) * p.coefficients.head(terms);
    const ComplexVec err = samples - approx;
    const double norm = std::sqrt(w.dot(samples.cwiseAbs2()));
    p.residual = norm > 0.0 ? std::sqrt(w.dot(err.cwiseAbs2())) / norm : 0.0;
    return p;
}

}  // namespace emcm::holo
