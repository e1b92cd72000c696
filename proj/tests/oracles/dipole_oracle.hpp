// Induced-EMF mutual impedance from the mixed-potential double integral
//
//   Z_ab = (j k eta / 4 pi) int int [ (ta.tb) Ia Ib - Ia' Ib' / k^2 ] e^{-jkR}/R ds ds' / (Ia(0) Ib(0))
//
// with sinusoidal currents, evaluated by nested Boost Gauss-Kronrod quadrature.
// Self terms use the reduced kernel R = sqrt((s - s')^2 + a^2).
// Independent of the library's closed-form filament field.

#pragma once

#include "emcm/core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <vector>

namespace oracle {

struct Wire {
    emcm::Vec3 center;
    emcm::Vec3 axis;
    double length;
    double radius;
};

inline emcm::cplx dipole_impedance(const Wire& a, const Wire& b, double wavelength, bool self) {
    using boost::math::quadrature::gauss_kronrod;
    const double k = emcm::wavenumber(wavelength);
    const double ha = 0.5 * a.length, hb = 0.5 * b.length;
    const double tt = a.axis.dot(b.axis);
    auto current = [k](double s, double h) { return std::sin(k * (h - std::abs(s))); };
    auto slope = [k](double s, double h) {
        const double sg = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
        return -k * std::cos(k * (h - std::abs(s))) * sg;
    };
    auto kernel = [&](double s, double sp, bool imag_part) {
        double r;
        if (self) {
            r = std::sqrt((s - sp) * (s - sp) + a.radius * a.radius);
        } else {
            r = ((b.center + sp * b.axis) - (a.center + s * a.axis)).norm();
        }
        const double w = tt * current(s, ha) * current(sp, hb) - slope(s, ha) * slope(sp, hb) / (k * k);
        // j e^{-jkR}/R = (sin kR + j cos kR)/R
        return w * (imag_part ? std::cos(k * r) : std::sin(k * r)) / r;
    };
    auto double_integral = [&](bool imag_part) {
        auto outer = [&](double s) {
            std::vector<double> cuts{-hb, 0.0, hb};
            if (self && s > -hb && s < hb) cuts.push_back(s);
            if (!self) {
                const double proj = (a.center + s * a.axis - b.center).dot(b.axis);
                if (proj > -hb && proj < hb) cuts.push_back(proj);
            }
            std::sort(cuts.begin(), cuts.end());
            double sum = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] - cuts[i] <= 0.0) continue;
                sum += gauss_kronrod<double, 31>::integrate([&](double sp) { return kernel(s, sp, imag_part); },
                                                            cuts[i], cuts[i + 1], 15, 1e-12);
            }
            return sum;
        };
        return gauss_kronrod<double, 31>::integrate(outer, -ha, 0.0, 12, 1e-8) +
               gauss_kronrod<double, 31>::integrate(outer, 0.0, ha, 12, 1e-8);
    };
    const double scale = k * emcm::kFreeSpaceImpedance / (4.0 * emcm::pi) / (current(0.0, ha) * current(0.0, hb));
    return scale * emcm::cplx(double_integral(false), double_integral(true));
}

}  // namespace oracle
