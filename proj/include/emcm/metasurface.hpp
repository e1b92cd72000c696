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

// Loaded thin-wire dipole arrays and their impedance matrices.
//
// Every wire carries the sinusoidal current I(s) = sin(k (L/2 - |s|)) and
// impedances are referred to the terminal current I(0) = sin(k L / 2).
// Mutual impedances follow the induced-EMF method using the closed-form near
// field of a sinusoidal filament, integrated along the receiving wire.

#pragma once

#include "emcm/core.hpp"
#include "emcm/quadrature.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace emcm::metasurface {

struct DipoleElement {
    Vec3 center = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    double length = 0.0;
    double wire_radius = 0.0;
    std::optional<cplx> load;  // lumped port load; environment dipoles take theirs from material
};

inline void validate(const DipoleElement& e) {
    require(e.center.allFinite(), "DipoleElement: non-finite center");
    require(e.length > 0.0, "DipoleElement: length must be positive");
    require(e.wire_radius > 0.0, "DipoleElement: wire radius must be positive");
    require(e.wire_radius <= e.length / 50.0, "DipoleElement: wire radius exceeds length/50 (thin-wire limit)");
    require(std::abs(e.axis.norm() - 1.0) <= 1e-12, "DipoleElement: axis must be a unit vector");
}

/// Shortest distance between the axis segments of two dipoles.
inline double segment_distance(const DipoleElement& a, const DipoleElement& b) {
    const Vec3 p1 = a.center - 0.5 * a.length * a.axis;
    const Vec3 d1 = a.length * a.axis;
    const Vec3 p2 = b.center - 0.5 * b.length * b.axis;
    const Vec3 d2 = b.length * b.axis;
    const Vec3 r = p1 - p2;
    const double aa = d1.squaredNorm(), ee = d2.squaredNorm(), f = d2.dot(r);
    const double c = d1.dot(r), bb = d1.dot(d2);
    const double denom = aa * ee - bb * bb;
    double s = denom > 1e-14 * aa * ee ? std::clamp((bb * f - c * ee) / denom, 0.0, 1.0) : 0.0;
    double t = (bb * s + f) / ee;
    if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / aa, 0.0, 1.0);
    } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((bb - c) / aa, 0.0, 1.0);
    }
    return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

inline bool same_wire(const DipoleElement& a, const DipoleElement& b) {
    return a.center == b.center && a.axis == b.axis && a.length == b.length && a.wire_radius == b.wire_radius;
}

namespace detail {

// Field (V/m per unit current amplitude) of the filament with half-length h
// along unit axis t, at offset d from its centre. Lengths in wavelengths, k = 2 pi.
inline Eigen::Vector3cd filament_field(const Vec3& t, double h, const Vec3& d) {
    constexpr double k = 2.0 * pi;
    const double zeta = d.dot(t);
    const Vec3 rho_vec = d - zeta * t;
    const double rho = rho_vec.norm();
    const double r1 = std::sqrt(rho * rho + (zeta - h) * (zeta - h));
    const double r2 = std::sqrt(rho * rho + (zeta + h) * (zeta + h));
    const double r0 = std::sqrt(rho * rho + zeta * zeta);
    const cplx g1 = std::exp(-j * (k * r1)) / r1;
    const cplx g2 = std::exp(-j * (k * r2)) / r2;
    const cplx g0 = std::exp(-j * (k * r0)) / r0;
    const double c = std::cos(k * h);
    constexpr double scale = kFreeSpaceImpedance / (4.0 * pi);

    const cplx e_axial = -j * scale * (g1 + g2 - 2.0 * c * g0);
    Eigen::Vector3cd e = e_axial * t.cast<cplx>();
    if (rho > 1e-12) {
        const cplx e_radial = j * scale / rho * ((zeta - h) * g1 + (zeta + h) * g2 - 2.0 * zeta * c * g0);
        e += e_radial * (rho_vec / rho).cast<cplx>();
    }
    return e;
}

// Open-circuit voltage induced at b's port by a's sinusoidal current, divided
// by both terminal currents. Geometry in wavelengths.
inline cplx induced(const Vec3& offset_ba, const Vec3& ta, double ha, const Vec3& tb, double hb,
                    double observation_shift, const Vec3& shift_dir) {
    constexpr double k = 2.0 * pi;
    auto integrand = [&](double s) -> cplx {
        const Vec3 d = offset_ba + s * tb + observation_shift * shift_dir;
        const cplx e_t = tb.cast<cplx>().dot(filament_field(ta, ha, d));  // Eigen conjugates the left operand
        return e_t * std::sin(k * (hb - std::abs(s)));
    };
    std::vector<double> cuts{0.0};
    for (double end : {-ha, 0.0, ha}) {
        const Vec3 p = end * ta - offset_ba;  // a's feature point relative to b's centre
        cuts.push_back(std::clamp(p.dot(tb), -hb, hb));
    }
    const cplx v = quad::integrate<cplx>(integrand, -hb, hb, cuts, {1e-10, 1e-15, 40});
    return -v / (std::sin(k * ha) * std::sin(k * hb));
}

inline Vec3 any_normal(const Vec3& t) {
    const Vec3 trial = std::abs(t.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return (trial - trial.dot(t) * t).normalized();
}

}  // namespace detail

/// Induced-EMF impedance between two thin-wire dipoles (self impedance when
/// a and b are the same wire). Symmetric in its arguments by construction.
inline cplx mutual_impedance(const DipoleElement& a, const DipoleElement& b, double wavelength) {
    validate(a);
    validate(b);
    require(wavelength > 0.0, "mutual_impedance: wavelength must be positive");
    constexpr double k = 2.0 * pi;
    const double ha = 0.5 * a.length / wavelength;
    const double hb = 0.5 * b.length / wavelength;
    require(std::abs(std::sin(k * ha)) > 1e-6 && std::abs(std::sin(k * hb)) > 1e-6,
            "mutual_impedance: terminal current vanishes (length is a multiple of the wavelength)");

    if (same_wire(a, b)) {
        // Field of the axial filament sampled on the wire surface.
        return detail::induced(Vec3::Zero(), a.axis, ha, a.axis, ha, a.wire_radius / wavelength,
                               detail::any_normal(a.axis));
    }
    const double gap = segment_distance(a, b);
    if (gap < a.wire_radius + b.wire_radius) {
        throw PreconditionError("mutual_impedance: wire volumes overlap (axis distance " + std::to_string(gap) +
                                " m)");
    }
    const Vec3 offset = (b.center - a.center) / wavelength;
    const cplx ab = detail::induced(offset, a.axis, ha, b.axis, hb, 0.0, Vec3::Zero());
    const cplx ba = detail::induced(Vec3(-offset), b.axis, hb, a.axis, ha, 0.0, Vec3::Zero());
    return 0.5 * (ab + ba);
}

/// Planar grid of identical dipoles. Local frame: columns of `orientation`
/// are (column direction, row direction, surface normal); the template axis
/// is expressed in that frame.
struct MetasurfaceSpec {
    int rows = 0;
    int cols = 0;
    double spacing = 0.0;
    std::optional<double> row_spacing;  // defaults to `spacing`
    DipoleElement element;
    Vec3 center = Vec3::Zero();
    Mat3 orientation = Mat3::Identity();
    std::vector<cplx> loads;  // optional per-element loads (row-major)

    int count() const { return rows * cols; }
};

/// Element list in row-major order.
inline std::vector<DipoleElement> elements(const MetasurfaceSpec& spec) {
    if (spec.count() == 0) return {};
    require(spec.rows > 0 && spec.cols > 0, "MetasurfaceSpec: rows and cols must be positive");
    require(spec.spacing > 0.0, "MetasurfaceSpec: spacing must be positive");
    require((spec.orientation.transpose() * spec.orientation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-12,
            "MetasurfaceSpec: orientation must be orthonormal");
    const double row_step = spec.row_spacing.value_or(spec.spacing);
    require(row_step > 0.0, "MetasurfaceSpec: row spacing must be positive");
    require(std::min(spec.spacing, spec.rows > 1 ? row_step : spec.spacing) >= 2.0 * spec.element.wire_radius,
            "MetasurfaceSpec: element spacing below wire diameter");

    const Vec3 u = spec.orientation.col(0);
    const Vec3 v = spec.orientation.col(1);
    const Vec3 axis = (spec.orientation * spec.element.axis).normalized();
    std::vector<DipoleElement> out;
    out.reserve(spec.count());
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            DipoleElement e = spec.element;
            e.axis = axis;
            e.center = spec.center + (c - 0.5 * (spec.cols - 1)) * spec.spacing * u +
                       (r - 0.5 * (spec.rows - 1)) * row_step * v;
            const std::size_t n = static_cast<std::size_t>(r) * spec.cols + c;
            if (n < spec.loads.size()) e.load = spec.loads[n];
            out.push_back(e);
        }
    }
    return out;
}

struct NetworkScenario {
    std::vector<DipoleElement> tx;
    std::vector<DipoleElement> rx;
    MetasurfaceSpec ris;
    std::vector<DipoleElement> environment;  // loads required
    double wavelength = 0.0;
    double z0 = 50.0;
    bool direct_link_blocked = false;  // Z_RT forced to zero
};

/// Impedance blocks over the port groups T (transmit), S (RIS), R (receive)
/// and O (environment objects). Z_XY maps currents at Y to voltages at X.
struct ImpedanceBlocks {
    ComplexMat Z_TT, Z_RT, Z_RR;
    ComplexMat Z_ST, Z_RS, Z_SS;  // Z_SS is also called Z_emc
    ComplexMat Z_OT, Z_OS, Z_OR, Z_OO;
    ComplexVec env_loads;

    Eigen::Index n_tx() const { return Z_RT.cols(); }
    Eigen::Index n_rx() const { return Z_RT.rows(); }
    Eigen::Index n_ris() const { return Z_SS.rows(); }
    Eigen::Index n_env() const { return Z_OO.rows(); }
    bool has_environment() const { return n_env() > 0; }

    const ComplexMat& Z_emc() const { return Z_SS; }

    /// Blocks for an RIS-only link; T/R self blocks and environment left empty.
    static ImpedanceBlocks from_link(ComplexMat z_rt, ComplexMat z_rs, ComplexMat z_st, ComplexMat z_ss) {
        ImpedanceBlocks b;
        b.Z_RT = std::move(z_rt);
        b.Z_RS = std::move(z_rs);
        b.Z_ST = std::move(z_st);
        b.Z_SS = std::move(z_ss);
        b.Z_TT = ComplexMat::Zero(b.Z_RT.cols(), b.Z_RT.cols());
        b.Z_RR = ComplexMat::Zero(b.Z_RT.rows(), b.Z_RT.rows());
        b.Z_OT = ComplexMat::Zero(0, b.Z_RT.cols());
        b.Z_OS = ComplexMat::Zero(0, b.Z_SS.cols());
        b.Z_OR = ComplexMat::Zero(0, b.Z_RT.rows());
        b.Z_OO = ComplexMat::Zero(0, 0);
        b.env_loads = ComplexVec::Zero(0);
        return b;
    }

    /// Full symmetric impedance matrix with ports ordered [T, S, R, O].
    ComplexMat full_matrix() const {
        const Eigen::Index t = n_tx(), s = n_ris(), r = n_rx(), o = n_env();
        ComplexMat z(t + s + r + o, t + s + r + o);
        z.block(0, 0, t, t) = Z_TT;
        z.block(t, 0, s, t) = Z_ST;
        z.block(0, t, t, s) = Z_ST.transpose();
        z.block(t, t, s, s) = Z_SS;
        z.block(t + s, 0, r, t) = Z_RT;
        z.block(0, t + s, t, r) = Z_RT.transpose();
        z.block(t + s, t, r, s) = Z_RS;
        z.block(t, t + s, s, r) = Z_RS.transpose();
        z.block(t + s, t + s, r, r) = Z_RR;
        z.block(t + s + r, 0, o, t) = Z_OT;
        z.block(0, t + s + r, t, o) = Z_OT.transpose();
        z.block(t + s + r, t, o, s) = Z_OS;
        z.block(t, t + s + r, s, o) = Z_OS.transpose();
        z.block(t + s + r, t + s, o, r) = Z_OR;
        z.block(t + s, t + s + r, r, o) = Z_OR.transpose();
        z.block(t + s + r, t + s + r, o, o) = Z_OO;
        return z;
    }
};

inline void validate(const NetworkScenario& sc) {
    require(sc.wavelength > 0.0, "NetworkScenario: wavelength must be positive");
    require(sc.z0 > 0.0 && std::isfinite(sc.z0), "NetworkScenario: Z0 must be real and positive");
    for (const auto& e : sc.environment) {
        require(e.load.has_value(), "NetworkScenario: environment dipole without a material load");
    }
}

/// Computes every impedance block of the scenario. Each unordered element
/// pair is evaluated once, so the assembled matrix is exactly symmetric.
inline ImpedanceBlocks build_blocks(const NetworkScenario& sc) {
    validate(sc);
    const std::vector<DipoleElement> ris = elements(sc.ris);
    struct Tagged {
        const DipoleElement* e;
        std::string name;
    };
    std::vector<Tagged> all;
    auto add = [&](const std::vector<DipoleElement>& group, const char* tag) {
        for (std::size_t i = 0; i < group.size(); ++i) all.push_back({&group[i], std::string(tag) + "[" + std::to_string(i) + "]"});
    };
    add(sc.tx, "tx");
    add(ris, "ris");
    add(sc.rx, "rx");
    add(sc.environment, "environment");

    const Eigen::Index n = static_cast<Eigen::Index>(all.size());
    ComplexMat z(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = p; q < n; ++q) {
            if (p != q && same_wire(*all[p].e, *all[q].e)) {
                throw PreconditionError("build_blocks: " + all[p].name + " and " + all[q].name + " coincide");
            }
            try {
                z(p, q) = z(q, p) = mutual_impedance(*all[p].e, *all[q].e, sc.wavelength);
            } catch (const PreconditionError& err) {
                throw PreconditionError("build_blocks: " + all[p].name + " / " + all[q].name + ": " + err.what());
            }
        }
    }

    const Eigen::Index t = sc.tx.size(), s = ris.size(), r = sc.rx.size(), o = sc.environment.size();
    ImpedanceBlocks b;
    b.Z_TT = z.block(0, 0, t, t);
    b.Z_ST = z.block(t, 0, s, t);
    b.Z_SS = z.block(t, t, s, s);
    b.Z_RT = sc.direct_link_blocked ? ComplexMat::Zero(r, t) : ComplexMat(z.block(t + s, 0, r, t));
    b.Z_RS = z.block(t + s, t, r, s);
    b.Z_RR = z.block(t + s, t + s, r, r);
    b.Z_OT = z.block(t + s + r, 0, o, t);
    b.Z_OS = z.block(t + s + r, t, o, s);
    b.Z_OR = z.block(t + s + r, t + s, o, r);
    b.Z_OO = z.block(t + s + r, t + s + r, o, o);
    b.env_loads.resize(o);
    for (Eigen::Index i = 0; i < o; ++i) b.env_loads(i) = *sc.environment[i].load;
    return b;
}

/// Reflection coefficients of the port loads, (Z_S + Z0 I)^{-1} (Z_S - Z0 I).
inline ComplexMat gamma_from_loads(const ComplexMat& z_s, double z0) {
    require(z0 > 0.0, "gamma_from_loads: Z0 must be positive");
    const ComplexMat id = ComplexMat::Identity(z_s.rows(), z_s.cols());
    return solve_checked(z_s + z0 * id, z_s - z0 * id, "resonance-degenerate load (Z_S + Z0 I)");
}

/// Port loads reproducing a given reflection matrix (inverse of gamma_from_loads).
inline ComplexMat loads_from_gamma(const ComplexMat& gamma, double z0) {
    const ComplexMat id = ComplexMat::Identity(gamma.rows(), gamma.cols());
    return z0 * solve_checked(id - gamma, id + gamma, "open-circuit reflection (I - Gamma_S)");
}

inline ComplexMat diagonal_loads(const std::vector<cplx>& z) {
    ComplexMat m = ComplexMat::Zero(z.size(), z.size());
    for (std::size_t i = 0; i < z.size(); ++i) m(i, i) = z[i];
    return m;
}

/// Lumped load making a short dipole reproduce the Clausius-Mossotti
/// polarizability of a cube of material with side equal to the dipole length.
/// The load cancels the dipole's own self reactance and adds h_eff^2 / (j w alpha);
/// radiation damping stays with the dipole, so lossless media give purely
/// reactive loads. Approximation valid for length <= wavelength / 10.
inline cplx material_load(cplx relative_permittivity, const DipoleElement& element, double wavelength) {
    validate(element);
    require(relative_permittivity.imag() <= 0.0, "material_load: active material (Im(eps_r) > 0) rejected");
    require(element.length <= wavelength / 10.0 + 1e-15, "material_load: dipole longer than wavelength/10");
    const double k = wavenumber(wavelength);
    cplx cm = (relative_permittivity - 1.0) / (relative_permittivity + 2.0);
    if (std::abs(cm) < 1e-12) cm = std::abs(cm) > 0.0 ? cm / std::abs(cm) * 1e-12 : cplx(1e-12, 0.0);
    const double volume = element.length * element.length * element.length;
    const double h_eff = 2.0 / k * std::tan(k * element.length / 4.0);
    // w * alpha = (k / eta) * 3 * V * cm
    const cplx omega_alpha = k / kFreeSpaceImpedance * 3.0 * volume * cm;
    const cplx self = mutual_impedance(element, element, wavelength);
    return h_eff * h_eff / (j * omega_alpha) - j * self.imag();
}

}  // namespace emcm::metasurface
