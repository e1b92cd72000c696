// Straight-line reference evaluations of the multiport relations.
// Inverses are formed explicitly with full-pivot LU, never with the
// library's solve path.

#pragma once

#include "emcm/core.hpp"
#include "emcm/metasurface.hpp"

#include <random>

namespace oracle {

using emcm::ComplexMat;
using emcm::cplx;

inline ComplexMat inv(const ComplexMat& a) { return a.fullPivLu().inverse(); }

struct SBlocks {
    ComplexMat S_RT, S_RS, S_ST, S_SS;
};

/// The four impedance-to-scattering relations, entry by entry.
inline SBlocks z_to_s(const emcm::metasurface::ImpedanceBlocks& b, double z0) {
    const auto s = b.Z_SS.rows();
    const ComplexMat id = ComplexMat::Identity(s, s);
    const ComplexMat p = inv(b.Z_SS + z0 * id);
    SBlocks o;
    o.S_SS = p * (b.Z_SS - z0 * id);
    o.S_ST = p * b.Z_ST;
    o.S_RS = (b.Z_RS / (2.0 * z0)) * (id - o.S_SS);
    o.S_RT = b.Z_RT / (2.0 * z0) - (b.Z_RS / (2.0 * z0)) * p * b.Z_ST;
    return o;
}

/// Complex-symmetric impedance matrix with positive definite real part.
inline ComplexMat random_passive(Eigen::Index n, std::mt19937_64& rng, double scale = 50.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd a(n, n), x(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            a(r, c) = g(rng);
            x(r, c) = g(rng);
        }
    const Eigen::MatrixXd re = a * a.transpose() / static_cast<double>(n) + 0.2 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd im = 0.5 * (x + x.transpose());
    return scale * (re.cast<cplx>() + emcm::j * im.cast<cplx>());
}

/// Blocks cut from one random passive full matrix ordered [T, S, R, O].
inline emcm::metasurface::ImpedanceBlocks random_blocks(Eigen::Index t, Eigen::Index s, Eigen::Index r,
                                                        Eigen::Index o, std::mt19937_64& rng) {
    const ComplexMat z = random_passive(t + s + r + o, rng);
    emcm::metasurface::ImpedanceBlocks b;
    b.Z_TT = z.block(0, 0, t, t);
    b.Z_ST = z.block(t, 0, s, t);
    b.Z_SS = z.block(t, t, s, s);
    b.Z_RT = z.block(t + s, 0, r, t);
    b.Z_RS = z.block(t + s, t, r, s);
    b.Z_RR = z.block(t + s, t + s, r, r);
    b.Z_OT = z.block(t + s + r, 0, o, t);
    b.Z_OS = z.block(t + s + r, t, o, s);
    b.Z_OR = z.block(t + s + r, t + s, o, r);
    b.Z_OO = z.block(t + s + r, t + s + r, o, o);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    b.env_loads.resize(o);
    for (Eigen::Index i = 0; i < o; ++i) b.env_loads(i) = cplx(std::abs(u(rng)) * 0.1, u(rng));
    return b;
}

/// Loaded full system [T, S, R, O] inverted in one piece; the (T u R) block of
/// the inverse is inverted back to the effective two-group impedance matrix,
/// whose (R, T) block over 2 Z0 is the channel.
inline ComplexMat brute_force_channel(const emcm::metasurface::ImpedanceBlocks& b, const ComplexMat& z_s, double z0) {
    const Eigen::Index t = b.n_tx(), s = b.n_ris(), r = b.n_rx(), o = b.n_env();
    ComplexMat z = b.full_matrix();
    z.block(t, t, s, s) += z_s;
    for (Eigen::Index i = 0; i < o; ++i) z(t + s + r + i, t + s + r + i) += b.env_loads(i);
    const ComplexMat y = inv(z);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < t; ++i) keep.push_back(i);
    for (Eigen::Index i = 0; i < r; ++i) keep.push_back(t + s + i);
    ComplexMat y_tr(keep.size(), keep.size());
    for (std::size_t p = 0; p < keep.size(); ++p)
        for (std::size_t q = 0; q < keep.size(); ++q) y_tr(p, q) = y(keep[p], keep[q]);
    const ComplexMat z_eff = inv(y_tr);
    return z_eff.block(t, 0, r, t) / (2.0 * z0);
}

}  // namespace oracle
