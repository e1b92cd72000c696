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

// Plane-wave spectrum of monochromatic fields on planes z = const.
//
// Conventions (time dependence e^{jwt} suppressed):
//   analysis   E^(kx, ky) = int int E(x', y') e^{+j kx x'} e^{+j ky y'} dx' dy'
//   synthesis  E(x, y, z) = int int E^(kx, ky) e^{-j kx x} e^{-j ky y} e^{-j kz z} dkx dky / (2 pi)^2
// with kz = sqrt(k^2 - kx^2 - ky^2) inside the visible range and
// kz = -j sqrt(kx^2 + ky^2 - k^2) outside it, so evanescent waves decay for z > 0.
//
// Both integrals are realized on the sample grid by unscaled DFTs; the pair
// is an exact inverse of itself up to rounding.

#pragma once

#include "emcm/core.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace emcm::wavefield {

/// Tangential field samples on the regular grid x_i = x0 + i*dx, y_l = y0 + l*dy
/// of the plane z = plane_z. Matrices are indexed (row = l along y, col = i along x).
struct FieldGrid {
    double plane_z = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    int nx = 0;
    int ny = 0;
    ComplexMat ex;
    ComplexMat ey;
    double wavelength = 0.0;

    double x(int i) const { return x0 + i * dx; }
    double y(int l) const { return y0 + l * dy; }
    double kappa() const { return wavenumber(wavelength); }

    /// Grid of nx*ny zero samples centred on the origin (sample nx/2 sits at x = 0).
    static FieldGrid centered(int nx, int ny, double dx, double dy, double wavelength, double plane_z = 0.0) {
        FieldGrid g;
        g.nx = nx;
        g.ny = ny;
        g.dx = dx;
        g.dy = dy;
        g.x0 = -(nx / 2) * dx;
        g.y0 = -(ny / 2) * dy;
        g.wavelength = wavelength;
        g.plane_z = plane_z;
        g.ex = ComplexMat::Zero(ny, nx);
        g.ey = ComplexMat::Zero(ny, nx);
        return g;
    }
};

inline void validate(const FieldGrid& g) {
    require(g.dx > 0.0 && g.dy > 0.0, "FieldGrid: spacing must be positive");
    require(g.nx >= 2 && g.ny >= 2, "FieldGrid: need at least 2 samples per axis");
    require(g.wavelength > 0.0, "FieldGrid: wavelength must be positive");
    require(g.ex.rows() == g.ny && g.ex.cols() == g.nx, "FieldGrid: ex has wrong shape");
    require(g.ey.rows() == g.ny && g.ey.cols() == g.nx, "FieldGrid: ey has wrong shape");
    require(g.ex.allFinite() && g.ey.allFinite(), "FieldGrid: non-finite field sample");
    require(std::isfinite(g.x0) && std::isfinite(g.y0) && std::isfinite(g.plane_z), "FieldGrid: non-finite origin");
}

/// Wavenumber samples are stored in ascending order: index q maps to
/// p = q - n/2, k = p * 2 pi / (n d).
struct SpectrumGrid {
    RealVec kx;
    RealVec ky;
    ComplexMat e_hat_x;
    ComplexMat e_hat_y;
    ComplexMat e_hat_z;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> flagged;  // |kz| ~ 0, e_hat_z forced to 0
    double kappa = 0.0;

    // Geometry of the generating grid, needed to synthesize fields again.
    double plane_z = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double wavelength = 0.0;

    int nx() const { return static_cast<int>(kx.size()); }
    int ny() const { return static_cast<int>(ky.size()); }
    double dkx() const { return 2.0 * pi / (nx() * dx); }
    double dky() const { return 2.0 * pi / (ny() * dy); }
};

/// Longitudinal wavenumber; real >= 0 in the visible range, negative imaginary outside.
inline cplx kz(double kx, double ky, double kappa) {
    const double t = kx * kx + ky * ky;
    const double k2 = kappa * kappa;
    if (t <= k2) return {std::sqrt(k2 - t), 0.0};
    return {0.0, -std::sqrt(t - k2)};
}

namespace detail {

inline constexpr double kFlagTolerance = 1e-9;  // relative to kappa

// Index of ascending wavenumber sample q inside an FFT-ordered array of length n.
inline int fft_index(int q, int n) {
    const int p = q - n / 2;
    return p >= 0 ? p : p + n;
}

inline RealVec axis(int n, double d) {
    RealVec k(n);
    for (int q = 0; q < n; ++q) k(q) = (q - n / 2) * 2.0 * pi / (n * d);
    return k;
}

// Unscaled 2-D DFT with kernel e^{sign * j 2 pi (p i / nx + q l / ny)} applied
// in place to an (ny x nx) array.
inline void dft2(ComplexMat& a, bool positive_exponent) {
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> in, out;
    auto run = [&](std::vector<cplx>& src, std::vector<cplx>& dst) {
        if (positive_exponent)
            fft.inv(dst, src);
        else
            fft.fwd(dst, src);
    };
    in.resize(a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) in[c] = a(r, c);
        run(in, out);
        for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = out[c];
    }
    in.resize(a.rows());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        for (Eigen::Index r = 0; r < a.rows(); ++r) in[r] = a(r, c);
        run(in, out);
        for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = out[r];
    }
}

inline ComplexMat analyze(const FieldGrid& g, const ComplexMat& samples, const RealVec& kx, const RealVec& ky) {
    ComplexMat work = samples;
    dft2(work, true);
    ComplexMat out(g.ny, g.nx);
    for (int ql = 0; ql < g.ny; ++ql) {
        for (int qi = 0; qi < g.nx; ++qi) {
            const cplx shift = std::exp(j * (kx(qi) * g.x0 + ky(ql) * g.y0));
            out(ql, qi) = g.dx * g.dy * shift * work(fft_index(ql, g.ny), fft_index(qi, g.nx));
        }
    }
    return out;
}

inline ComplexMat synthesize(const SpectrumGrid& s, const ComplexMat& spectral, double dz) {
    const int nx = s.nx();
    const int ny = s.ny();
    ComplexMat work(ny, nx);
    for (int ql = 0; ql < ny; ++ql) {
        for (int qi = 0; qi < nx; ++qi) {
            const cplx k_z = kz(s.kx(qi), s.ky(ql), s.kappa);
            const cplx phase = std::exp(-j * (s.kx(qi) * s.x0 + s.ky(ql) * s.y0)) * std::exp(-j * k_z * dz);
            work(fft_index(ql, ny), fft_index(qi, nx)) = spectral(ql, qi) * phase;
        }
    }
    dft2(work, false);
    work /= static_cast<double>(nx) * ny * s.dx * s.dy;
    return work;
}

}  // namespace detail

/// Plane-wave spectrum of the tangential field, with E^z completed from the
/// divergence condition kx E^x + ky E^y + kz E^z = 0.
inline SpectrumGrid spectrum_of(const FieldGrid& field) {
    validate(field);
    SpectrumGrid s;
    s.kappa = field.kappa();
    s.kx = detail::axis(field.nx, field.dx);
    s.ky = detail::axis(field.ny, field.dy);
    s.plane_z = field.plane_z;
    s.x0 = field.x0;
    s.y0 = field.y0;
    s.dx = field.dx;
    s.dy = field.dy;
    s.wavelength = field.wavelength;
    s.e_hat_x = detail::analyze(field, field.ex, s.kx, s.ky);
    s.e_hat_y = detail::analyze(field, field.ey, s.kx, s.ky);
    s.e_hat_z = ComplexMat::Zero(field.ny, field.nx);
    s.flagged.setConstant(field.ny, field.nx, false);
    for (int ql = 0; ql < field.ny; ++ql) {
        for (int qi = 0; qi < field.nx; ++qi) {
            const cplx k_z = kz(s.kx(qi), s.ky(ql), s.kappa);
            if (std::abs(k_z) <= detail::kFlagTolerance * s.kappa) {
                s.flagged(ql, qi) = true;
                continue;
            }
            s.e_hat_z(ql, qi) = -(s.kx(qi) * s.e_hat_x(ql, qi) + s.ky(ql) * s.e_hat_y(ql, qi)) / k_z;
        }
    }
    return s;
}

/// Tangential field on the plane plane_z + dz.
inline FieldGrid propagate(const SpectrumGrid& spectrum, double dz) {
    require(dz >= 0.0 && std::isfinite(dz), "propagate: dz must be finite and >= 0");
    FieldGrid g;
    g.plane_z = spectrum.plane_z + dz;
    g.x0 = spectrum.x0;
    g.y0 = spectrum.y0;
    g.dx = spectrum.dx;
    g.dy = spectrum.dy;
    g.nx = spectrum.nx();
    g.ny = spectrum.ny();
    g.wavelength = spectrum.wavelength;
    g.ex = detail::synthesize(spectrum, spectrum.e_hat_x, dz);
    g.ey = detail::synthesize(spectrum, spectrum.e_hat_y, dz);
    return g;
}

struct SpectralPower {
    double propagating = 0.0;
    double evanescent = 0.0;
    double total() const { return propagating + evanescent; }
};

/// Parseval split of the tangential spectral energy,
/// sum |E^|^2 dkx dky / (2 pi)^2, over the visible and invisible index sets.
inline SpectralPower spectral_power(const SpectrumGrid& s) {
    SpectralPower p;
    const double measure = s.dkx() * s.dky() / (4.0 * pi * pi);
    for (int ql = 0; ql < s.ny(); ++ql) {
        for (int qi = 0; qi < s.nx(); ++qi) {
            const double e = (std::norm(s.e_hat_x(ql, qi)) + std::norm(s.e_hat_y(ql, qi))) * measure;
            if (s.kx(qi) * s.kx(qi) + s.ky(ql) * s.ky(ql) <= s.kappa * s.kappa)
                p.propagating += e;
            else
                p.evanescent += e;
        }
    }
    return p;
}

/// Default amplitude below which an evanescent wave is treated as negligible.
inline constexpr double kDefaultEta = 1e-3;

struct SamplingSpacing {
    double dx = 0.0;
    double dy = 0.0;
    double kappa_max = 0.0;  // largest non-negligible transverse wavenumber
};

/// Grid spacing that resolves every plane wave still above amplitude eta at
/// height z_obs: an evanescent wave is dropped once e^{-|kz| z_obs} < eta.
/// Tends to lambda/2 as z_obs grows.
inline SamplingSpacing sampling_spacing(double z_obs, double eta, double kappa) {
    require(kappa > 0.0, "sampling_spacing: kappa must be positive");
    require(z_obs > 0.0, "sampling_spacing: z_obs must be > 0 (the spacing collapses to zero on the source plane)");
    require(eta > 0.0 && eta < 1.0, "sampling_spacing: eta must lie in (0, 1)");
    const double decay = std::log(1.0 / eta) / z_obs;
    SamplingSpacing s;
    s.kappa_max = std::sqrt(kappa * kappa + decay * decay);
    s.dx = s.dy = pi / s.kappa_max;
    return s;
}

enum class Component { x, y };

namespace detail {

// Band-limited interpolation weights of one axis at fractional index u.
inline RealVec sinc_weights(double u, int n) {
    RealVec w = RealVec::Zero(n);
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-12) {
        w(static_cast<int>(nearest)) = 1.0;
        return w;
    }
    const double s = std::sin(pi * u);
    for (int i = 0; i < n; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        w(i) = sign * s / (pi * (u - i));
    }
    return w;
}

}  // namespace detail

struct QueryPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Fraction of the grid extent excluded from reconstruction on each side.
inline constexpr double kGuardBand = 0.1;

/// Separable sinc-series reconstruction at arbitrary interior points.
/// Queries outside the footprint shrunk by kGuardBand on each side are rejected.
inline std::vector<cplx> reconstruct(const FieldGrid& field, const std::vector<QueryPoint>& points,
                                     Component component = Component::x) {
    validate(field);
    const double wx = (field.nx - 1) * field.dx;
    const double wy = (field.ny - 1) * field.dy;
    const double xlo = field.x0 + kGuardBand * wx, xhi = field.x0 + (1.0 - kGuardBand) * wx;
    const double ylo = field.y0 + kGuardBand * wy, yhi = field.y0 + (1.0 - kGuardBand) * wy;
    const ComplexMat& samples = component == Component::x ? field.ex : field.ey;

    std::vector<cplx> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.x >= xlo && p.x <= xhi && p.y >= ylo && p.y <= yhi)) {
            throw PreconditionError("reconstruct: query (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                    ") outside the guard-banded footprint");
        }
        const RealVec wxv = detail::sinc_weights((p.x - field.x0) / field.dx, field.nx);
        const RealVec wyv = detail::sinc_weights((p.y - field.y0) / field.dy, field.ny);
        const ComplexVec along_x = samples * wxv.cast<cplx>();
        out.push_back(wyv.cast<cplx>().dot(along_x));
    }
    return out;
}

/// Supercell of an anomalous reflector steering theta_i to theta_r.
struct PeriodicDesign {
    double theta_i = 0.0;
    double theta_r = 0.0;  // achievable angle (equals the request when exact)
    double theta_r_requested = 0.0;
    double period = 0.0;   // D = N_p * delta
    double element_spacing = 0.0;
    int cells_per_period = 0;
    bool exact = false;    // requested D was an integer multiple of delta
};

inline PeriodicDesign periodic_design(double theta_i, double theta_r, double delta, double wavelength) {
    require(delta > 0.0, "periodic_design: element spacing must be positive");
    require(wavelength > 0.0, "periodic_design: wavelength must be positive");
    const double diff = std::sin(theta_r) - std::sin(theta_i);
    if (std::abs(diff) < 1e-15) throw PreconditionError("periodic_design: specular reflection, no supercell needed");

    PeriodicDesign d;
    d.theta_i = theta_i;
    d.theta_r_requested = theta_r;
    d.element_spacing = delta;
    const double period = wavelength / std::abs(diff);
    const double ratio = period / delta;
    const double nearest = std::round(ratio);
    if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
        d.cells_per_period = static_cast<int>(nearest);
        d.period = d.cells_per_period * delta;
        d.theta_r = theta_r;
        d.exact = true;
        return d;
    }
    // Nearest integer period whose steering angle is still real.
    const double sign = diff > 0 ? 1.0 : -1.0;
    auto angle_for = [&](int np) -> std::optional<double> {
        if (np < 1) return std::nullopt;
        const double s = std::sin(theta_i) + sign * wavelength / (np * delta);
        if (std::abs(s) > 1.0) return std::nullopt;
        return std::asin(s);
    };
    int np = std::max(1, static_cast<int>(nearest));
    std::optional<double> angle = angle_for(np);
    while (!angle && np < 1000000) angle = angle_for(++np);
    if (!angle) throw PreconditionError("periodic_design: no achievable steering angle");
    d.cells_per_period = np;
    d.period = np * delta;
    d.theta_r = *angle;
    d.exact = false;
    return d;
}

/// Steering angles reachable with integer supercells of n_min..n_max elements.
inline std::vector<PeriodicDesign> achievable_designs(double theta_i, double delta, double wavelength, int n_min,
                                                      int n_max, bool positive_side = true) {
    require(delta > 0.0 && wavelength > 0.0, "achievable_designs: lengths must be positive");
    std::vector<PeriodicDesign> out;
    const double sign = positive_side ? 1.0 : -1.0;
    for (int np = std::max(1, n_min); np <= n_max; ++np) {
        const double s = std::sin(theta_i) + sign * wavelength / (np * delta);
        if (std::abs(s) > 1.0) continue;
        PeriodicDesign d;
        d.theta_i = theta_i;
        d.theta_r = d.theta_r_requested = std::asin(s);
        d.element_spacing = delta;
        d.cells_per_period = np;
        d.period = np * delta;
        d.exact = true;
        out.push_back(d);
    }
    return out;
}

}  // namespace emcm::wavefield
