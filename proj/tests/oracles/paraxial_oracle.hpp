// Paraxial (Fresnel) reference spectrum for parallel coaxial rectangles.
// The quadratic-phase kernel separates per axis, so the 2-D singular values
// are products of two 1-D spectra computed on independent grids.

#pragma once

#include "emcm/core.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <vector>

namespace oracle {

/// Singular values of h * exp(-j k (x - x')^2 / (2 d)) on [-L/2, L/2]^2, n midpoints.
inline Eigen::VectorXd fresnel_line_spectrum(double length, double wavelength, double distance, int n) {
    const double k = 2.0 * emcm::pi / wavelength;
    const double h = length / n;
    emcm::ComplexMat a(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const double dx = (p - q) * h;
            a(p, q) = h * std::exp(emcm::cplx(0.0, -k * dx * dx / (2.0 * distance)));
        }
    return Eigen::BDCSVD<emcm::ComplexMat>(a).singularValues();
}

/// Normalized squared singular values of the separable 2-D kernel, non-increasing.
inline std::vector<double> fresnel_square_spectrum(double side, double wavelength, double distance, int n) {
    const Eigen::VectorXd s = fresnel_line_spectrum(side, wavelength, distance, n);
    std::vector<double> mu;
    for (Eigen::Index a = 0; a < s.size(); ++a)
        for (Eigen::Index b = 0; b < s.size(); ++b) mu.push_back(std::pow(s(a) * s(b), 2));
    std::sort(mu.begin(), mu.end(), std::greater<>());
    const double top = mu.front();
    for (double& m : mu) m /= top;
    return mu;
}

}  // namespace oracle
