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

// End-to-end RIS channels from multiport network blocks.
//
//   impedance form   H_Z  = (Z_RT - Z_RS (Z_SS + Z_S)^{-1} Z_ST) / (2 Z0)
//   scattering form  H_S  = S_RT + S_RS (I - Gamma_S S_SS)^{-1} Gamma_S S_ST
//   comm. theory     H_CT = H_RT + H_RS Gamma_H H_ST
//
// Transmit and receive ports are match terminated. The impedance form keeps
// the unilateral simplification: no back-action of S or R onto T.

#pragma once

#include "emcm/core.hpp"
#include "emcm/metasurface.hpp"

#include <string>

namespace emcm::multiport {

using metasurface::ImpedanceBlocks;

enum class Formulation { impedance, scattering, comm_theory };

inline const char* to_string(Formulation f) {
    switch (f) {
        case Formulation::impedance: return "impedance";
        case Formulation::scattering: return "scattering";
        case Formulation::comm_theory: return "comm-theory";
    }
    return "unknown";
}

struct ChannelModel {
    ComplexMat H;  // Rx ports x Tx ports, dimensionless voltage ratio
    Formulation formulation = Formulation::impedance;
    std::string provenance;
};

struct ScatteringBlocks {
    ComplexMat S_RT, S_RS, S_ST, S_SS;  // S_SS is also called S_emc
    const ComplexMat& S_emc() const { return S_SS; }
};

namespace detail {

inline void check_link_shapes(const ImpedanceBlocks& b) {
    const auto t = b.Z_RT.cols(), r = b.Z_RT.rows(), s = b.Z_SS.rows();
    require(b.Z_SS.cols() == s, "impedance blocks: Z_SS must be square");
    require(b.Z_RS.rows() == r && b.Z_RS.cols() == s, "impedance blocks: Z_RS has wrong shape");
    require(b.Z_ST.rows() == s && b.Z_ST.cols() == t, "impedance blocks: Z_ST has wrong shape");
}

}  // namespace detail

inline ChannelModel channel_impedance(const ImpedanceBlocks& b, const ComplexMat& z_s, double z0) {
    detail::check_link_shapes(b);
    require(z0 > 0.0, "channel_impedance: Z0 must be positive");
    require(z_s.rows() == b.n_ris() && z_s.cols() == b.n_ris(), "channel_impedance: Z_S has wrong shape");
    ChannelModel m;
    m.formulation = Formulation::impedance;
    m.provenance = "H_Z from Z_RT, Z_RS, Z_ST, Z_SS and tunable loads Z_S";
    m.H = b.Z_RT / (2.0 * z0);
    if (b.n_ris() > 0) {
        m.H -= b.Z_RS * solve_checked(b.Z_SS + z_s, b.Z_ST, "Z_emc + Z_S") / (2.0 * z0);
    }
    return m;
}

/// Impedance-to-scattering conversion of the link blocks.
inline ScatteringBlocks z_to_s(const ImpedanceBlocks& b, double z0) {
    detail::check_link_shapes(b);
    require(z0 > 0.0, "z_to_s: Z0 must be positive");
    const auto s = b.n_ris();
    const ComplexMat id = ComplexMat::Identity(s, s);
    const ComplexMat plus = b.Z_SS + z0 * id;
    const ComplexMat minus = b.Z_SS - z0 * id;

    ScatteringBlocks out;
    out.S_SS = solve_checked(plus, minus, "Z_SS + Z0 I");
    out.S_ST = solve_checked(plus, b.Z_ST, "Z_SS + Z0 I");
    const ComplexMat half_rs = b.Z_RS / (2.0 * z0);
    out.S_RS = half_rs * (id - out.S_SS);
    out.S_RT = b.Z_RT / (2.0 * z0) - half_rs * out.S_ST;

    // I - (Z + Z0)^{-1} (Z - Z0) = 2 Z0 (Z + Z0)^{-1}, so S_RS = Z_RS (Z_SS + Z0 I)^{-1}.
    if (s > 0 && b.Z_RS.size() > 0) {
        const ComplexMat simplified = solve_checked(plus.transpose(), b.Z_RS.transpose(), "Z_SS + Z0 I").transpose();
        if (max_relative_difference(out.S_RS, simplified, 1e-300) > 1e-6) {
            throw NumericalError("S_RS identity check (Z_SS + Z0 I)", 1.0 / 1e-6);
        }
    }
    return out;
}

inline ChannelModel channel_scattering(const ScatteringBlocks& s, const ComplexMat& gamma_s) {
    const auto n = s.S_SS.rows();
    require(gamma_s.rows() == n && gamma_s.cols() == n, "channel_scattering: Gamma_S has wrong shape");
    ChannelModel m;
    m.formulation = Formulation::scattering;
    m.provenance = "H_S from S_RT, S_RS, S_ST, S_emc and reflection coefficients Gamma_S";
    m.H = s.S_RT;
    if (n > 0) {
        const ComplexMat id = ComplexMat::Identity(n, n);
        m.H += s.S_RS * solve_checked(id - gamma_s * s.S_SS, gamma_s * s.S_ST, "I - Gamma_S S_emc (coupling resonance)");
    }
    return m;
}

/// Coupling-free cascade channel. `source` records which blocks were used as H.
inline ChannelModel channel_ct(const ComplexMat& h_rt, const ComplexMat& h_rs, const ComplexMat& h_st,
                               const ComplexMat& gamma_h, const std::string& source = "user-supplied H blocks") {
    require(h_rs.rows() == h_rt.rows() && h_st.cols() == h_rt.cols(), "channel_ct: H blocks do not conform");
    require(gamma_h.rows() == h_rs.cols() && gamma_h.cols() == h_st.rows(), "channel_ct: Gamma_H does not conform");
    ChannelModel m;
    m.formulation = Formulation::comm_theory;
    m.provenance = "H_CT with " + source;
    m.H = h_rt + h_rs * gamma_h * h_st;
    return m;
}

/// H_CT fed with the scenario's own scattering blocks as its H blocks.
inline ChannelModel channel_ct(const ScatteringBlocks& s, const ComplexMat& gamma_h) {
    return channel_ct(s.S_RT, s.S_RS, s.S_ST, gamma_h, "H_RT = S_RT, H_RS = S_RS, H_ST = S_ST");
}

/// Re-radiation of the RIS with all ports matched (Gamma_S = 0).
inline ComplexMat structural_scattering(const ImpedanceBlocks& b, double z0) {
    detail::check_link_shapes(b);
    require(z0 > 0.0, "structural_scattering: Z0 must be positive");
    const auto s = b.n_ris();
    if (s == 0) return ComplexMat::Zero(b.n_rx(), b.n_tx());
    const ComplexMat plus = b.Z_SS + z0 * ComplexMat::Identity(s, s);
    return -b.Z_RS * solve_checked(plus, b.Z_ST, "Z_SS + Z0 I") / (2.0 * z0);
}

/// Link blocks after eliminating the loaded environment ports O.
struct EnvironmentReduction {
    ImpedanceBlocks effective;  // Z_RT, Z_RS, Z_ST corrected; Z_SS untouched
    ComplexMat Z_SOS;           // correction added to Z_SS
};

inline EnvironmentReduction reduce_environment(const ImpedanceBlocks& b) {
    detail::check_link_shapes(b);
    EnvironmentReduction out;
    out.effective = ImpedanceBlocks::from_link(b.Z_RT, b.Z_RS, b.Z_ST, b.Z_SS);
    out.effective.Z_TT = b.Z_TT;
    out.effective.Z_RR = b.Z_RR;
    out.Z_SOS = ComplexMat::Zero(b.n_ris(), b.n_ris());
    if (!b.has_environment()) return out;
    require(b.env_loads.size() == b.n_env(), "reduce_environment: one load per environment port required");

    ComplexMat loaded = b.Z_OO;
    loaded.diagonal() += b.env_loads;
    const Eigen::Index o = b.n_env();
    // Solve once for all right-hand sides [Z_OT Z_OS Z_OR].
    ComplexMat rhs(o, b.n_tx() + b.n_ris() + b.n_rx());
    rhs << b.Z_OT, b.Z_OS, b.Z_OR;
    const ComplexMat x = solve_checked(loaded, rhs, "environment subsystem Z_OO + Z_O");
    const ComplexMat x_t = x.leftCols(b.n_tx());
    const ComplexMat x_s = x.middleCols(b.n_tx(), b.n_ris());
    const ComplexMat x_r = x.rightCols(b.n_rx());

    out.effective.Z_RT = b.Z_RT - b.Z_OR.transpose() * x_t;
    out.effective.Z_RS = b.Z_RS - b.Z_OR.transpose() * x_s;
    out.effective.Z_ST = b.Z_ST - b.Z_OS.transpose() * x_t;
    out.Z_SOS = -b.Z_OS.transpose() * x_s;
    out.effective.Z_TT = b.Z_TT - b.Z_OT.transpose() * x_t;
    out.effective.Z_RR = b.Z_RR - b.Z_OR.transpose() * x_r;
    return out;
}

struct EnvironmentChannel {
    ChannelModel channel;
    ComplexMat Z_SOS;
};

/// H_Z with environment scatterers folded in by Schur complement:
/// (Z_SS + Z_S)^{-1} becomes (Z_SS + Z_S + Z_SOS)^{-1} and the link blocks
/// pick up the object-mediated paths.
inline EnvironmentChannel assemble_with_environment(const ImpedanceBlocks& b, const ComplexMat& z_s, double z0) {
    EnvironmentReduction red = reduce_environment(b);
    ImpedanceBlocks eff = red.effective;
    eff.Z_SS = b.Z_SS + red.Z_SOS;
    EnvironmentChannel out;
    out.channel = channel_impedance(eff, z_s, z0);
    out.channel.provenance = b.has_environment()
                                 ? "H_Z with environment ports eliminated (Z_SS + Z_S + Z_SOS)"
                                 : out.channel.provenance;
    out.Z_SOS = std::move(red.Z_SOS);
    return out;
}

/// Conventional additive multipath: free-space RIS channel plus the object
/// path computed without the RIS.
inline ChannelModel channel_additive(const ImpedanceBlocks& b, const ComplexMat& z_s, double z0) {
    ChannelModel m = channel_impedance(b, z_s, z0);
    if (b.has_environment()) {
        ComplexMat loaded = b.Z_OO;
        loaded.diagonal() += b.env_loads;
        m.H -= b.Z_OR.transpose() * solve_checked(loaded, b.Z_OT, "environment subsystem Z_OO + Z_O") / (2.0 * z0);
    }
    m.provenance = "additive multipath: free-space H_Z plus isolated object path";
    return m;
}

}  // namespace emcm::multiport
